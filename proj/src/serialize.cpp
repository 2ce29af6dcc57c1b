#include "rb1/serialize.hpp"

#include <bit>
#include <charconv>
#include <cctype>
#include <cmath>

namespace rb1 {

namespace {

const ClassInfo& class_info(const TypedModule& tm, TypeId t) {
  return tm.classes[static_cast<std::size_t>(tm.types[t].class_index)];
}

// ---------------------------------------------------------------------------
// Binary

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void encode(const TypedModule& tm, TypeId type, const Slot* s, std::vector<std::uint8_t>& out) {
  const TypeInfo& t = tm.types[type];
  switch (t.kind) {
    case TypeInfo::Kind::Void: return;
    case TypeInfo::Kind::Bool: out.push_back(static_cast<std::uint8_t>(*s != 0)); return;
    case TypeInfo::Kind::Array: {
      std::int64_t n = tm.slot_count(t.elem);
      for (std::int64_t i = 0; i < t.len; ++i) encode(tm, t.elem, s + i * n, out);
      return;
    }
    case TypeInfo::Kind::Class:
      for (const FieldInfo& f : class_info(tm, type).fields) encode(tm, f.type, s + f.slot_offset, out);
      return;
    default: put_le(out, static_cast<std::uint64_t>(*s)); return;
  }
}

class Decoder {
 public:
  Decoder(const Program& p, const std::vector<std::uint8_t>& bytes) : p_(p), tm_(p.module()), in_(bytes) {}

  void decode(TypeId type, Slot* s) {
    const TypeInfo& t = tm_.types[type];
    std::size_t at = pos_;
    switch (t.kind) {
      case TypeInfo::Kind::Void: return;
      case TypeInfo::Kind::Bool: {
        need(1);
        std::uint8_t b = in_[pos_++];
        if (b > 1) throw DecodeError(at, "Bool byte must be 0 or 1, got " + std::to_string(b));
        *s = b;
        return;
      }
      case TypeInfo::Kind::Array: {
        std::int64_t n = tm_.slot_count(t.elem);
        for (std::int64_t i = 0; i < t.len; ++i) decode(t.elem, s + i * n);
        return;
      }
      case TypeInfo::Kind::Class: {
        const ClassInfo& c = class_info(tm_, type);
        for (std::size_t i = 0; i < c.fields.size(); ++i) {
          const FieldInfo& f = c.fields[i];
          std::size_t field_at = pos_;
          decode(f.type, s + f.slot_offset);
          if (i == 0 && c.origin == ClassInfo::Origin::SynthesizedFromAct) {
            auto n = static_cast<Slot>(p_.machine(tm_.act_of_class(tm_.types[type].class_index)).points.size());
            if (s[0] < -1 || s[0] >= n) {
              throw DecodeError(field_at, "resume_idx " + std::to_string(s[0]) + " is not a suspension index of " +
                                              c.name);
            }
          }
        }
        return;
      }
      default: {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        pos_ += 8;
        *s = static_cast<Slot>(v);
        if (t.kind == TypeInfo::Kind::Bounded && (*s < t.min || *s > t.max)) {
          throw DecodeError(at, "value " + std::to_string(*s) + " out of range for " + tm_.type_name(type));
        }
        return;
      }
    }
  }

  void finish() const {
    if (pos_ != in_.size()) {
      throw DecodeError(pos_, std::to_string(in_.size() - pos_) + " trailing byte(s)");
    }
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DecodeError(pos_, "unexpected end of input");
  }

  const Program& p_;
  const TypedModule& tm_;
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Text

void render(const TypedModule& tm, TypeId type, const Slot* s, std::string& out) {
  const TypeInfo& t = tm.types[type];
  switch (t.kind) {
    case TypeInfo::Kind::Void: return;
    case TypeInfo::Kind::Bool: out += *s ? "true" : "false"; return;
    case TypeInfo::Kind::Float: out += format_double(std::bit_cast<double>(*s)); return;
    case TypeInfo::Kind::Array: {
      std::int64_t n = tm.slot_count(t.elem);
      out += '[';
      for (std::int64_t i = 0; i < t.len; ++i) {
        if (i) out += ", ";
        render(tm, t.elem, s + i * n, out);
      }
      out += ']';
      return;
    }
    case TypeInfo::Kind::Class: {
      out += '{';
      bool first = true;
      for (const FieldInfo& f : class_info(tm, type).fields) {
        if (!first) out += ", ";
        first = false;
        out += f.name + ": ";
        render(tm, f.type, s + f.slot_offset, out);
      }
      out += '}';
      return;
    }
    default: out += std::to_string(*s); return;
  }
}

class TextParser {
 public:
  explicit TextParser(std::string_view text) : text_(text) {}

  void parse(const TypedModule& tm, TypeId type, Slot* s) {
    const TypeInfo& t = tm.types[type];
    skip();
    switch (t.kind) {
      case TypeInfo::Kind::Void: return;
      case TypeInfo::Kind::Bool: {
        if (take_word("true")) {
          *s = 1;
        } else if (take_word("false")) {
          *s = 0;
        } else {
          throw error("true or false");
        }
        return;
      }
      case TypeInfo::Kind::Float: {
        std::size_t end = pos_;
        while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
                                      text_[end] == '-' || text_[end] == '+')) {
          ++end;
        }
        double d = 0;
        auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + end, d);
        if (ec != std::errc() || p != text_.data() + end || !std::isfinite(d)) throw error("a float");
        pos_ = end;
        *s = std::bit_cast<Slot>(d);
        return;
      }
      case TypeInfo::Kind::Array: {
        expect('[');
        std::int64_t n = tm.slot_count(t.elem);
        for (std::int64_t i = 0; i < t.len; ++i) {
          if (i) expect(',');
          parse(tm, t.elem, s + i * n);
        }
        expect(']');
        return;
      }
      case TypeInfo::Kind::Class: {
        expect('{');
        bool first = true;
        for (const FieldInfo& f : class_info(tm, type).fields) {
          if (!first) expect(',');
          first = false;
          skip();
          if (!take_word(f.name)) throw error("field '" + f.name + "'");
          expect(':');
          parse(tm, f.type, s + f.slot_offset);
        }
        expect('}');
        return;
      }
      default: {
        std::size_t end = pos_;
        if (end < text_.size() && text_[end] == '-') ++end;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + end, v);
        if (ec != std::errc() || p != text_.data() + end || end == pos_) throw error("an integer");
        pos_ = end;
        *s = v;
        return;
      }
    }
  }

  void finish() {
    skip();
    if (pos_ != text_.size()) throw error("end of input");
  }

  std::size_t pos() const { return pos_; }

  ParseError error(const std::string& expected) const {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    return ParseError({1, static_cast<int>(pos_) + 1}, expected + " at offset " + std::to_string(pos_), found);
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != c) throw error(std::string("'") + c + "'");
    ++pos_;
  }
  bool take_word(std::string_view w) {
    if (text_.substr(pos_, w.size()) != w) return false;
    std::size_t end = pos_ + w.size();
    if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) return false;
    pos_ = end;
    return true;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Tensor

std::size_t tensor_width(const Program& p, TypeId type) {
  const TypedModule& tm = p.module();
  const TypeInfo& t = tm.types[type];
  switch (t.kind) {
    case TypeInfo::Kind::Void: return 0;
    case TypeInfo::Kind::Bounded: return static_cast<std::size_t>(t.max - t.min + 1);
    case TypeInfo::Kind::Array: return static_cast<std::size_t>(t.len) * tensor_width(p, t.elem);
    case TypeInfo::Kind::Class: {
      const ClassInfo& c = class_info(tm, type);
      std::size_t n = 0;
      for (std::size_t i = 0; i < c.fields.size(); ++i) {
        if (i == 0 && c.origin == ClassInfo::Origin::SynthesizedFromAct) {
          n += p.machine(tm.act_of_class(t.class_index)).points.size() + 1;
        } else {
          n += tensor_width(p, c.fields[i].type);
        }
      }
      return n;
    }
    default: return 1;
  }
}

void write_tensor(const Program& p, TypeId type, const Slot* s, std::vector<double>& out) {
  const TypedModule& tm = p.module();
  const TypeInfo& t = tm.types[type];
  switch (t.kind) {
    case TypeInfo::Kind::Void: return;
    case TypeInfo::Kind::Bool: out.push_back(*s ? 1.0 : 0.0); return;
    case TypeInfo::Kind::Int: out.push_back(static_cast<double>(*s)); return;
    case TypeInfo::Kind::Float: out.push_back(std::bit_cast<double>(*s)); return;
    case TypeInfo::Kind::Bounded: {
      std::size_t start = out.size();
      out.resize(start + static_cast<std::size_t>(t.max - t.min + 1), 0.0);
      out[start + static_cast<std::size_t>(*s - t.min)] = 1.0;
      return;
    }
    case TypeInfo::Kind::Array: {
      std::int64_t n = tm.slot_count(t.elem);
      for (std::int64_t i = 0; i < t.len; ++i) write_tensor(p, t.elem, s + i * n, out);
      return;
    }
    case TypeInfo::Kind::Class: {
      const ClassInfo& c = class_info(tm, type);
      for (std::size_t i = 0; i < c.fields.size(); ++i) {
        const FieldInfo& f = c.fields[i];
        if (i == 0 && c.origin == ClassInfo::Origin::SynthesizedFromAct) {
          std::size_t points = p.machine(tm.act_of_class(t.class_index)).points.size();
          std::size_t start = out.size();
          out.resize(start + points + 1, 0.0);
          out[start + (s[0] < 0 ? points : static_cast<std::size_t>(s[0]))] = 1.0;
        } else {
          write_tensor(p, f.type, s + f.slot_offset, out);
        }
      }
      return;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::vector<std::uint8_t> to_binary(const EnvironmentInstance& env) {
  if (env.poisoned()) throw RuntimeError("poisoned", {}, "environment is poisoned by an earlier runtime error");
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(env.machine().frame_bytes));
  encode(env.program().module(), env.type(), env.frame().data(), out);
  return out;
}

EnvironmentInstance from_binary(ProgramPtr program, int act_index, const std::vector<std::uint8_t>& bytes) {
  const TypedModule& tm = program->module();
  TypeId type = tm.classes[static_cast<std::size_t>(tm.acts.at(static_cast<std::size_t>(act_index)).class_index)].type;
  std::size_t want = static_cast<std::size_t>(tm.byte_size(type));
  if (bytes.size() != want) {
    throw DecodeError(std::min(bytes.size(), want),
                      "expected " + std::to_string(want) + " bytes, got " + std::to_string(bytes.size()));
  }
  std::vector<Slot> frame(static_cast<std::size_t>(tm.slot_count(type)));
  Decoder d(*program, bytes);
  d.decode(type, frame.data());
  d.finish();
  return EnvironmentInstance::from_frame(std::move(program), act_index, std::move(frame));
}

EnvironmentInstance from_binary(ProgramPtr program, std::string_view act_name, const std::vector<std::uint8_t>& bytes) {
  int a = program->act(act_name);
  return from_binary(std::move(program), a, bytes);
}

std::string value_to_text(const TypedModule& module, const Value& value) {
  std::string out;
  render(module, value.type, value.slots.data(), out);
  return out;
}

std::string to_text(const EnvironmentInstance& env) {
  std::string out;
  render(env.program().module(), env.type(), env.frame().data(), out);
  return out;
}

EnvironmentInstance from_text(ProgramPtr program, int act_index, std::string_view text) {
  const TypedModule& tm = program->module();
  TypeId type = tm.classes[static_cast<std::size_t>(tm.acts.at(static_cast<std::size_t>(act_index)).class_index)].type;
  std::vector<Slot> frame(static_cast<std::size_t>(tm.slot_count(type)));
  TextParser parser(text);
  parser.parse(tm, type, frame.data());
  parser.finish();
  if (auto why = validate_value(*program, type, frame.data()); !why.empty()) {
    throw ParseError({1, 1}, "a valid state", why);
  }
  return EnvironmentInstance::from_frame(std::move(program), act_index, std::move(frame));
}

EnvironmentInstance from_text(ProgramPtr program, std::string_view act_name, std::string_view text) {
  int a = program->act(act_name);
  return from_text(std::move(program), a, text);
}

std::size_t tensor_size_of_type(const Program& program, TypeId type) { return tensor_width(program, type); }

std::size_t tensor_size(const Program& program, int act_index) {
  const TypedModule& tm = program.module();
  return tensor_width(program,
                      tm.classes[static_cast<std::size_t>(tm.acts.at(static_cast<std::size_t>(act_index)).class_index)].type);
}

std::vector<double> observation_tensor(const EnvironmentInstance& env, int /*observer_id*/) {
  std::vector<double> out;
  out.reserve(tensor_size_of_type(env.program(), env.type()));
  write_tensor(env.program(), env.type(), env.frame().data(), out);
  return out;
}

std::string print_trace(std::string_view act_name, const std::vector<ActionValue>& trace) {
  std::string out = "# act: " + std::string(act_name) + "\n";
  for (const ActionValue& a : trace) out += to_string(a) + "\n";
  return out;
}

namespace {

ActionValue parse_action_line(const Program& program, int act_index, std::string_view line, int line_no) {
  auto fail = [&](const std::string& expected, const std::string& found) {
    return ParseError({line_no, 1}, expected, found);
  };
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  line = trim(line);
  std::size_t open = line.find('(');
  if (open == std::string_view::npos || line.back() != ')') throw fail("name(args)", "'" + std::string(line) + "'");
  ActionValue av;
  av.name = std::string(trim(line.substr(0, open)));
  std::string_view inner = trim(line.substr(open + 1, line.size() - open - 2));
  while (!inner.empty()) {
    std::size_t comma = inner.find(',');
    std::string_view tok = trim(inner.substr(0, comma));
    if (tok == "true" || tok == "false") {
      av.args.emplace_back(tok == "true");
    } else {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size()) {
        throw fail("an argument", "'" + std::string(tok) + "'");
      }
      av.args.emplace_back(v);
    }
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
    if (trim(inner).empty()) throw fail("an argument", "')'");
  }
  const ActInfo& info = program.module().acts.at(static_cast<std::size_t>(act_index));
  int a = info.action_index(av.name);
  if (a < 0) throw fail("an action of '" + program.module().ast.actions[static_cast<std::size_t>(act_index)].name + "'", "'" + av.name + "'");
  const ActionInfo& sig = info.actions[static_cast<std::size_t>(a)];
  if (av.args.size() != sig.param_types.size()) {
    throw fail(std::to_string(sig.param_types.size()) + " argument(s)", std::to_string(av.args.size()));
  }
  const TypedModule& tm = program.module();
  for (std::size_t i = 0; i < av.args.size(); ++i) {
    const TypeInfo& t = tm.types[sig.param_types[i]];
    bool is_bool = std::holds_alternative<bool>(av.args[i]);
    if ((t.kind == TypeInfo::Kind::Bool) != is_bool) {
      throw fail(tm.type_name(sig.param_types[i]) + " for '" + sig.param_names[i] + "'", to_string(av));
    }
    if (!is_bool) {
      std::int64_t v = std::get<std::int64_t>(av.args[i]);
      if (v < t.min || v > t.max) {
        throw fail("a value in " + tm.type_name(sig.param_types[i]) + " for '" + sig.param_names[i] + "'",
                   std::to_string(v));
      }
    }
  }
  return av;
}

}  // namespace

ActionValue parse_action(const Program& program, int act_index, std::string_view text) {
  return parse_action_line(program, act_index, text, 1);
}

std::vector<ActionValue> parse_trace(const Program& program, int act_index, std::string_view text) {
  std::vector<ActionValue> out;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    bool blank = true;
    for (char c : line) blank = blank && std::isspace(static_cast<unsigned char>(c));
    if (blank) continue;
    out.push_back(parse_action_line(program, act_index, line, line_no));
  }
  return out;
}

}  // namespace rb1
