#include "rb1/runtime.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "interpreter.hpp"
#include "rb1/frontend.hpp"

namespace rb1 {

using detail::ArenaScope;
using detail::Interpreter;

std::string to_string(const ActionValue& action) {
  std::string out = action.name + "(";
  for (std::size_t i = 0; i < action.args.size(); ++i) {
    if (i) out += ", ";
    const Scalar& v = action.args[i];
    if (std::holds_alternative<bool>(v)) {
      out += std::get<bool>(v) ? "true" : "false";
    } else if (std::holds_alternative<std::int64_t>(v)) {
      out += std::to_string(std::get<std::int64_t>(v));
    } else {
      out += std::to_string(std::get<double>(v));
    }
  }
  return out + ")";
}

// ---------------------------------------------------------------------------
// ActionTable

ActionTable::ActionTable(const TypedModule& module, const ActInfo& act) {
  for (const ActionInfo& a : act.actions) {
    Entry e;
    e.name = a.name;
    e.base = size_;
    for (TypeId t : a.param_types) {
      const TypeInfo& info = module.types[t];
      Dim d{info.kind == TypeInfo::Kind::Bool, 0, 2};
      if (!d.is_bool) {
        d.min = info.min;
        d.width = info.max - info.min + 1;
      }
      e.dims.push_back(d);
      e.count *= static_cast<std::size_t>(d.width);
    }
    size_ += e.count;
    entries_.push_back(std::move(e));
  }
}

int ActionTable::decode(std::size_t index, std::vector<Slot>& args) const {
  for (std::size_t a = 0; a < entries_.size(); ++a) {
    const Entry& e = entries_[a];
    if (index >= e.base + e.count) continue;
    std::size_t rest = index - e.base;
    args.assign(e.dims.size(), 0);
    for (std::size_t i = e.dims.size(); i-- > 0;) {
      auto w = static_cast<std::size_t>(e.dims[i].width);
      args[i] = e.dims[i].min + static_cast<Slot>(rest % w);
      rest /= w;
    }
    return static_cast<int>(a);
  }
  throw RangeError("action index " + std::to_string(index) + " out of range for table of size " +
                   std::to_string(size_));
}

ActionValue ActionTable::at(std::size_t index) const {
  std::vector<Slot> args;
  int a = decode(index, args);
  const Entry& e = entries_[static_cast<std::size_t>(a)];
  ActionValue v{e.name, {}};
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (e.dims[i].is_bool) {
      v.args.emplace_back(args[i] != 0);
    } else {
      v.args.emplace_back(static_cast<std::int64_t>(args[i]));
    }
  }
  return v;
}

std::int64_t ActionTable::index_of(int action, const std::vector<Slot>& args) const {
  const Entry& e = entries_.at(static_cast<std::size_t>(action));
  if (args.size() != e.dims.size()) return -1;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < args.size(); ++i) {
    Slot off = args[i] - e.dims[i].min;
    if (off < 0 || off >= e.dims[i].width) return -1;
    idx = idx * static_cast<std::size_t>(e.dims[i].width) + static_cast<std::size_t>(off);
  }
  return static_cast<std::int64_t>(e.base + idx);
}

// ---------------------------------------------------------------------------
// Program

namespace {

void build_default(const TypedModule& tm, TypeId id, std::vector<Slot>& out) {
  const TypeInfo& t = tm.types[id];
  switch (t.kind) {
    case TypeInfo::Kind::Void: return;
    case TypeInfo::Kind::Bounded: out.push_back(std::clamp<Slot>(0, t.min, t.max)); return;
    case TypeInfo::Kind::Array:
      for (std::int64_t i = 0; i < t.len; ++i) build_default(tm, t.elem, out);
      return;
    case TypeInfo::Kind::Class: {
      const ClassInfo& c = tm.classes[static_cast<std::size_t>(t.class_index)];
      std::size_t start = out.size();
      for (const FieldInfo& f : c.fields) build_default(tm, f.type, out);
      if (c.origin == ClassInfo::Origin::SynthesizedFromAct) out[start] = -1;
      return;
    }
    default: out.push_back(0); return;
  }
}

}  // namespace

std::shared_ptr<const Program> Program::compile(std::string_view source) {
  std::shared_ptr<Program> p(new Program());
  p->module_ = typecheck(parse_source(source));
  const TypedModule& tm = *p->module_;
  for (std::size_t a = 0; a < tm.acts.size(); ++a) {
    p->machines_.push_back(lower_action(tm, static_cast<int>(a)));
    p->tables_.emplace_back(tm, tm.acts[a]);
  }
  p->defaults_.resize(tm.types.size());
  for (std::size_t t = 0; t < tm.types.size(); ++t) build_default(tm, static_cast<TypeId>(t), p->defaults_[t]);
  return p;
}

std::shared_ptr<const Program> Program::compile_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", {}, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return compile(ss.str());
}

int Program::act(std::string_view name) const {
  int a = module_->find_act(name);
  if (a < 0) throw PathError("no act named '" + std::string(name) + "'");
  return a;
}

int Program::default_act() const {
  if (module_->acts.empty()) throw PathError("module declares no act");
  return 0;
}

std::vector<Diagnostic> Program::warnings() const {
  std::vector<Diagnostic> out;
  for (const auto& m : machines_) out.insert(out.end(), m.warnings.begin(), m.warnings.end());
  return out;
}

// ---------------------------------------------------------------------------
// Values

Value make_int(std::int64_t v) { return {TypeTable::kInt, {v}}; }
Value make_bool(bool v) { return {TypeTable::kBool, {v ? 1 : 0}}; }
Value make_float(double v) { return {TypeTable::kFloat, {detail::from_double(v)}}; }

Scalar to_scalar(const TypedModule& module, const Value& v) {
  if (!module.types.is_scalar(v.type) || v.slots.size() != 1) throw TypeMismatch("value is not a scalar");
  switch (module.types[v.type].kind) {
    case TypeInfo::Kind::Bool: return v.slots[0] != 0;
    case TypeInfo::Kind::Float: return detail::to_double(v.slots[0]);
    default: return static_cast<std::int64_t>(v.slots[0]);
  }
}

std::string validate_value(const Program& program, TypeId type, const Slot* slots) {
  const TypedModule& tm = program.module();
  const TypeInfo& t = tm.types[type];
  switch (t.kind) {
    case TypeInfo::Kind::Bool:
      if (*slots != 0 && *slots != 1) return "Bool value must be 0 or 1, got " + std::to_string(*slots);
      return {};
    case TypeInfo::Kind::Bounded:
      if (*slots < t.min || *slots > t.max) {
        return "value " + std::to_string(*slots) + " out of range for " + tm.type_name(type);
      }
      return {};
    case TypeInfo::Kind::Array: {
      std::int64_t n = tm.slot_count(t.elem);
      for (std::int64_t i = 0; i < t.len; ++i) {
        if (auto r = validate_value(program, t.elem, slots + i * n); !r.empty()) return r;
      }
      return {};
    }
    case TypeInfo::Kind::Class: {
      const ClassInfo& c = tm.classes[static_cast<std::size_t>(t.class_index)];
      if (int act = tm.act_of_class(t.class_index); act >= 0) {
        auto n = static_cast<Slot>(program.machine(act).points.size());
        if (slots[0] < -1 || slots[0] >= n) {
          return "resume_idx " + std::to_string(slots[0]) + " is not a suspension index of " + c.name;
        }
      }
      for (const FieldInfo& f : c.fields) {
        if (auto r = validate_value(program, f.type, slots + f.slot_offset); !r.empty()) return r;
      }
      return {};
    }
    default: return {};
  }
}

// ---------------------------------------------------------------------------
// EnvironmentInstance

namespace {

struct ResolvedPath {
  TypeId type;
  std::int64_t offset;
  int resume_of_act;  // act whose resume_idx the path names, or -1
};

ResolvedPath resolve_path(const TypedModule& tm, TypeId root, std::string_view path) {
  ResolvedPath r{root, 0, -1};
  std::size_t i = 0;
  bool expect_name = true;
  auto fail = [&](const std::string& why) -> PathError {
    return PathError("invalid path '" + std::string(path) + "': " + why);
  };
  if (path.empty()) throw fail("empty path");
  while (i < path.size()) {
    char c = path[i];
    if (c == '[') {
      std::size_t close = path.find(']', i);
      if (close == std::string_view::npos) throw fail("missing ']'");
      std::string_view num = path.substr(i + 1, close - i - 1);
      std::int64_t idx = 0;
      if (num.empty() || std::from_chars(num.data(), num.data() + num.size(), idx).ptr != num.data() + num.size()) {
        throw fail("bad index");
      }
      const TypeInfo& t = tm.types[r.type];
      if (t.kind != TypeInfo::Kind::Array) throw fail("indexing a non-array");
      if (idx < 0 || idx >= t.len) throw fail("index " + std::to_string(idx) + " out of bounds");
      r.offset += idx * tm.slot_count(t.elem);
      r.type = t.elem;
      r.resume_of_act = -1;
      i = close + 1;
      expect_name = false;
      continue;
    }
    if (c == '.') {
      if (expect_name) throw fail("unexpected '.'");
      expect_name = true;
      ++i;
      continue;
    }
    if (!expect_name) throw fail("expected '.' or '['");
    std::size_t end = i;
    while (end < path.size() && path[end] != '.' && path[end] != '[') ++end;
    std::string_view name = path.substr(i, end - i);
    const TypeInfo& t = tm.types[r.type];
    if (t.kind != TypeInfo::Kind::Class) throw fail("'" + std::string(name) + "' applied to a non-class value");
    const ClassInfo& cls = tm.classes[static_cast<std::size_t>(t.class_index)];
    const FieldInfo* f = cls.field(name);
    if (!f) throw fail("no field '" + std::string(name) + "' in " + cls.name);
    r.offset += f->slot_offset;
    r.type = f->type;
    r.resume_of_act = (name == "resume_idx") ? tm.act_of_class(t.class_index) : -1;
    i = end;
    expect_name = false;
  }
  if (expect_name) throw fail("trailing '.'");
  return r;
}

}  // namespace

EnvironmentInstance EnvironmentInstance::instantiate(ProgramPtr program, std::string_view act_name,
                                                     const std::vector<Scalar>& ctor_args) {
  int a = program->act(act_name);
  return instantiate(std::move(program), a, ctor_args);
}

EnvironmentInstance EnvironmentInstance::instantiate(ProgramPtr program, int act_index,
                                                     const std::vector<Scalar>& ctor_args) {
  const TypedModule& tm = program->module();
  const ActDecl& decl = tm.ast.actions.at(static_cast<std::size_t>(act_index));
  EnvironmentInstance env(program, act_index);
  env.frame_ = program->default_value(env.type());
  if (ctor_args.size() != decl.params.size()) {
    throw ArityError("act '" + decl.name + "' expects " + std::to_string(decl.params.size()) + " argument(s), got " +
                     std::to_string(ctor_args.size()));
  }
  for (std::size_t i = 0; i < decl.params.size(); ++i) {
    const Param& p = decl.params[i];
    const TypeInfo& t = tm.types[p.resolved];
    const Scalar& v = ctor_args[i];
    Slot s = 0;
    if (t.kind == TypeInfo::Kind::Bool && std::holds_alternative<bool>(v)) {
      s = std::get<bool>(v) ? 1 : 0;
    } else if (tm.types.is_integral(p.resolved) && std::holds_alternative<std::int64_t>(v)) {
      s = std::get<std::int64_t>(v);
      if (t.kind == TypeInfo::Kind::Bounded && (s < t.min || s > t.max)) {
        throw RangeError("argument '" + p.name + "' out of range for " + tm.type_name(p.resolved));
      }
    } else if (t.kind == TypeInfo::Kind::Float && std::holds_alternative<double>(v)) {
      s = detail::from_double(std::get<double>(v));
    } else {
      throw TypeMismatch("argument '" + p.name + "' of act '" + decl.name + "' must be " + tm.type_name(p.resolved));
    }
    env.frame_[static_cast<std::size_t>(p.offset)] = s;
  }
  Interpreter it(*program);
  it.construct(act_index, env.frame_.data());
  return env;
}

EnvironmentInstance EnvironmentInstance::from_frame(ProgramPtr program, int act_index, std::vector<Slot> frame) {
  EnvironmentInstance env(program, act_index);
  if (static_cast<std::int64_t>(frame.size()) != program->module().slot_count(env.type())) {
    throw RangeError("frame has " + std::to_string(frame.size()) + " slots, expected " +
                     std::to_string(program->module().slot_count(env.type())));
  }
  if (auto r = validate_value(*program, env.type(), frame.data()); !r.empty()) throw RangeError(r);
  env.frame_ = std::move(frame);
  return env;
}

TypeId EnvironmentInstance::type() const {
  const TypedModule& tm = program_->module();
  return tm.classes[static_cast<std::size_t>(tm.acts[static_cast<std::size_t>(act_)].class_index)].type;
}

void EnvironmentInstance::check_usable() const {
  if (poisoned_) throw RuntimeError("poisoned", {}, "environment is poisoned by an earlier runtime error");
}

int EnvironmentInstance::resolve_action(const ActionValue& action, std::vector<Slot>& args, bool& in_range) const {
  return detail::resolve_action(program_->module(), act_, action, args, in_range);
}

bool EnvironmentInstance::guard(int action, const std::vector<Slot>& args) const {
  check_usable();
  try {
    Interpreter it(*program_);
    return it.guard(act_, frame_.data(), action, args.data());
  } catch (const RuntimeError&) {
    poisoned_ = true;
    throw;
  }
}

void EnvironmentInstance::resume(int action, const std::vector<Slot>& args) {
  check_usable();
  bool ok = false;
  try {
    Interpreter it(*program_);
    ok = it.resume(act_, frame_.data(), action, args.data());
  } catch (const RuntimeError&) {
    poisoned_ = true;
    throw;
  }
  if (!ok) {
    const ActInfo& info = program_->module().acts[static_cast<std::size_t>(act_)];
    throw PreconditionViolated(info.actions[static_cast<std::size_t>(action)].name, frame_[0]);
  }
}

bool EnvironmentInstance::can_apply(const ActionValue& action) const {
  check_usable();
  std::vector<Slot> args;
  bool in_range = true;
  int a = resolve_action(action, args, in_range);
  return in_range && guard(a, args);
}

void EnvironmentInstance::apply(const ActionValue& action) {
  check_usable();
  std::vector<Slot> args;
  bool in_range = true;
  int a = resolve_action(action, args, in_range);
  if (!in_range) throw PreconditionViolated(action.name, frame_[0]);
  resume(a, args);
}

bool EnvironmentInstance::can_apply_index(std::size_t index) const {
  check_usable();
  std::vector<Slot> args;
  int a = action_table().decode(index, args);
  return guard(a, args);
}

void EnvironmentInstance::apply_index(std::size_t index) {
  check_usable();
  std::vector<Slot> args;
  int a = action_table().decode(index, args);
  resume(a, args);
}

std::vector<std::size_t> EnvironmentInstance::legal_indices() const {
  check_usable();
  std::vector<std::size_t> out;
  if (is_done()) return out;
  const ActionMachine& m = machine();
  if (frame_[0] >= static_cast<Slot>(m.points.size())) return out;
  int action = m.points[static_cast<std::size_t>(frame_[0])].action;
  const ActionTable& table = action_table();
  std::vector<Slot> args;
  try {
    Interpreter it(*program_);
    for (std::size_t i = table.base(action), end = i + table.count(action); i < end; ++i) {
      table.decode(i, args);
      it.reset_steps();
      if (it.guard(act_, frame_.data(), action, args.data())) out.push_back(i);
    }
  } catch (const RuntimeError&) {
    poisoned_ = true;
    throw;
  }
  return out;
}

std::vector<ActionValue> EnvironmentInstance::legal_actions() const {
  std::vector<ActionValue> out;
  for (std::size_t i : legal_indices()) out.push_back(action_table().at(i));
  return out;
}

Value EnvironmentInstance::value() const { return {type(), frame_}; }

Value EnvironmentInstance::get_field(std::string_view path) const {
  check_usable();
  ResolvedPath r = resolve_path(program_->module(), type(), path);
  auto n = program_->module().slot_count(r.type);
  auto begin = frame_.begin() + r.offset;
  return {r.type, std::vector<Slot>(begin, begin + n)};
}

void EnvironmentInstance::set_field(std::string_view path, const Value& value) {
  check_usable();
  const TypedModule& tm = program_->module();
  ResolvedPath r = resolve_path(tm, type(), path);
  std::vector<Slot> slots = value.slots;
  bool compatible = value.type == r.type ||
                    (tm.types.is_integral(r.type) && (tm.types.is_integral(value.type) || value.type == TypeTable::kBool));
  if (!compatible) {
    throw TypeMismatch("cannot store " + tm.type_name(value.type) + " into '" + std::string(path) + "' of type " +
                       tm.type_name(r.type));
  }
  if (static_cast<std::int64_t>(slots.size()) != tm.slot_count(r.type)) throw TypeMismatch("value has wrong size");
  if (auto why = validate_value(*program_, r.type, slots.data()); !why.empty()) throw RangeError(why);
  if (r.resume_of_act >= 0) {
    auto n = static_cast<Slot>(program_->machine(r.resume_of_act).points.size());
    if (slots[0] < -1 || slots[0] >= n) {
      throw RangeError("resume_idx must be -1 or a suspension index below " + std::to_string(n));
    }
  }
  std::copy(slots.begin(), slots.end(), frame_.begin() + r.offset);
}

Scalar EnvironmentInstance::get_scalar(std::string_view path) const {
  return to_scalar(program_->module(), get_field(path));
}

void EnvironmentInstance::set_scalar(std::string_view path, const Scalar& value) {
  if (std::holds_alternative<bool>(value)) {
    set_field(path, make_bool(std::get<bool>(value)));
  } else if (std::holds_alternative<std::int64_t>(value)) {
    set_field(path, make_int(std::get<std::int64_t>(value)));
  } else {
    set_field(path, make_float(std::get<double>(value)));
  }
}

// ---------------------------------------------------------------------------
// Free functions

Value run_function(const ProgramPtr& program, std::string_view name, const std::vector<Value>& args) {
  const TypedModule& tm = program->module();
  int fn = tm.find_function(name);
  if (fn < 0) throw PathError("no function named '" + std::string(name) + "'");
  const FuncDecl& f = tm.ast.functions[static_cast<std::size_t>(fn)];
  if (args.size() != f.params.size()) {
    throw ArityError("function '" + f.name + "' expects " + std::to_string(f.params.size()) + " argument(s), got " +
                     std::to_string(args.size()));
  }
  std::vector<const Slot*> ptrs;
  for (std::size_t i = 0; i < args.size(); ++i) {
    TypeId want = f.params[i].resolved;
    const Value& v = args[i];
    bool ok = v.type == want ||
              (tm.types.is_integral(want) && (tm.types.is_integral(v.type) || v.type == TypeTable::kBool));
    if (!ok || static_cast<std::int64_t>(v.slots.size()) != tm.slot_count(want)) {
      throw TypeMismatch("argument '" + f.params[i].name + "' of '" + f.name + "' must be " + tm.type_name(want));
    }
    if (auto why = validate_value(*program, want, v.slots.data()); !why.empty()) throw RangeError(why);
    ptrs.push_back(v.slots.data());
  }
  Value out{f.ret_type, std::vector<Slot>(static_cast<std::size_t>(tm.slot_count(f.ret_type)))};
  Interpreter it(*program);
  std::vector<Slot> ret(std::max<std::size_t>(1, out.slots.size()));
  it.call_function(fn, ptrs, ret.data());
  std::copy(ret.begin(), ret.begin() + static_cast<std::ptrdiff_t>(out.slots.size()), out.slots.begin());
  return out;
}

}  // namespace rb1
