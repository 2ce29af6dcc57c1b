#include "rb1/tools.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "rb1/serialize.hpp"

namespace rb1 {

using nlohmann::json;

std::vector<std::uint64_t> trace_seeds(std::uint64_t master, std::int64_t count) {
  SplitMix64 gen(master);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(std::max<std::int64_t>(0, count)));
  for (auto& s : out) s = gen.next();
  return out;
}

int find_score_function(const Program& program, int act_index) {
  const TypedModule& tm = program.module();
  int fn = tm.find_function("score");
  if (fn < 0) return -1;
  const FuncDecl& f = tm.ast.functions[static_cast<std::size_t>(fn)];
  TypeId cls = tm.classes[static_cast<std::size_t>(tm.acts[static_cast<std::size_t>(act_index)].class_index)].type;
  if (f.params.size() != 2 || f.params[0].resolved != cls) return -1;
  if (!tm.types.is_integral(f.params[1].resolved) || f.ret_type != TypeTable::kFloat) return -1;
  return fn;
}

double score(const EnvironmentInstance& env, int player) {
  if (find_score_function(env.program(), env.act_index()) < 0) throw PathError("program has no score function");
  Value v = run_function(env.program_ptr(), "score", {env.value(), make_int(player)});
  return std::get<double>(to_scalar(env.program().module(), v));
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TraceOutcome {
  std::string label;
  std::int64_t steps = 0;
  bool failed = false;
  FuzzFailure failure;
};

class TraceRunner {
 public:
  TraceRunner(const ProgramPtr& program, const FuzzOptions& opt)
      : program_(program), opt_(opt), afg_(build_afg(program->machine(opt.act))) {
    has_score_ = find_score_function(*program, opt.act) >= 0;
  }

  TraceOutcome run(std::int64_t trace_no, std::uint64_t seed) const {
    TraceOutcome out;
    SplitMix64 rng(seed);
    std::vector<ActionValue> actions;
    auto fail = [&](std::string kind, std::string message) {
      out.failed = true;
      out.failure = {trace_no, out.steps, std::move(kind), std::move(message), {}, actions};
    };
    try {
      EnvironmentInstance env = EnvironmentInstance::instantiate(program_, opt_.act);
      const ActionTable& table = env.action_table();
      std::int64_t prev_point = -1;
      while (!env.is_done() && out.steps < opt_.max_steps) {
        std::vector<std::size_t> legal = env.legal_indices();
        if (legal.empty()) {
          out.label = "stuck";
          return out;
        }
        std::size_t idx = legal[rng.below(legal.size())];
        ActionValue av = table.at(idx);
        actions.push_back(av);
        if (!env.can_apply(av) || !env.can_apply_index(idx)) {
          fail("check-apply", "legal action " + to_string(av) + " rejected by can_apply");
          return out;
        }
        std::int64_t point = env.resume_idx();
        if (opt_.check_afg) {
          if (prev_point < 0 ? afg_.entry_nodes.count(static_cast<int>(point)) == 0
                             : afg_.edges.count({static_cast<int>(prev_point), static_cast<int>(point)}) == 0) {
            fail("afg", "transition into point " + std::to_string(point) + " not in the action flow graph");
            return out;
          }
        }
        env.apply(av);
        ++out.steps;
        prev_point = point;
        if (opt_.check_round_trips) {
          if (!(from_binary(program_, opt_.act, to_binary(env)) == env)) {
            fail("binary-round-trip", "binary round trip changed the state");
            return out;
          }
          if (!(from_text(program_, opt_.act, to_text(env)) == env)) {
            fail("text-round-trip", "text round trip changed the state");
            return out;
          }
        }
      }
      if (env.is_done()) {
        if (opt_.check_afg && prev_point >= 0 && afg_.exit_nodes.count(static_cast<int>(prev_point)) == 0) {
          fail("afg", "finished after point " + std::to_string(prev_point) + " which is not an exit node");
          return out;
        }
        out.label = has_score_ ? "done:" + format_double(score(env, 0)) : "done";
      } else {
        out.label = "truncated";
      }
    } catch (const PreconditionViolated& e) {
      fail("precondition", e.what());
    } catch (const RuntimeError& e) {
      fail("runtime", e.kind() + ": " + e.what());
    } catch (const Error& e) {
      fail(e.kind(), e.what());
    }
    return out;
  }

 private:
  ProgramPtr program_;
  FuzzOptions opt_;
  ActionFlowGraph afg_;
  bool has_score_ = false;
};

}  // namespace

FuzzReport fuzz(const ProgramPtr& program, const FuzzOptions& options) {
  FuzzOptions opt = options;
  if (opt.act < 0) opt.act = program->default_act();
  if (opt.traces <= 0 || opt.max_steps <= 0) throw RangeError("traces and max-steps must be positive");
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::uint64_t> seeds = trace_seeds(opt.seed, opt.traces);
  std::vector<TraceOutcome> outcomes(seeds.size());
  TraceRunner runner(program, opt);

  int jobs = std::max(1, opt.jobs);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    constexpr std::size_t kChunk = 256;
    for (;;) {
      std::size_t begin = next.fetch_add(kChunk);
      if (begin >= seeds.size()) return;
      std::size_t end = std::min(seeds.size(), begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) outcomes[i] = runner.run(static_cast<std::int64_t>(i), seeds[i]);
    }
  };
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  FuzzReport report;
  report.seed = opt.seed;
  const std::string act_name = program->machine(opt.act).name;
  for (TraceOutcome& o : outcomes) {
    ++report.traces_run;
    report.steps_total += o.steps;
    report.max_trace_length = std::max(report.max_trace_length, o.steps);
    if (o.failed) {
      ++report.terminal_counts["failed"];
      if (!opt.failure_dir.empty()) {
        std::filesystem::create_directories(opt.failure_dir);
        auto path = std::filesystem::path(opt.failure_dir) /
                    ("failure_" + std::to_string(o.failure.trace) + ".rbtrace");
        std::ofstream(path) << print_trace(act_name, o.failure.actions);
        o.failure.trace_file = path.string();
      }
      report.failures.push_back(std::move(o.failure));
    } else {
      ++report.terminal_counts[o.label];
    }
  }
  report.seconds = seconds_since(t0);
  return report;
}

std::vector<std::vector<std::size_t>> generate_index_traces(const ProgramPtr& program, int act, std::uint64_t seed,
                                                            std::int64_t traces, std::int64_t max_steps) {
  std::vector<std::vector<std::size_t>> out;
  for (std::uint64_t s : trace_seeds(seed, traces)) {
    SplitMix64 rng(s);
    EnvironmentInstance env = EnvironmentInstance::instantiate(program, act);
    std::vector<std::size_t> trace;
    while (!env.is_done() && static_cast<std::int64_t>(trace.size()) < max_steps) {
      auto legal = env.legal_indices();
      if (legal.empty()) break;
      std::size_t idx = legal[rng.below(legal.size())];
      env.apply_index(idx);
      trace.push_back(idx);
    }
    out.push_back(std::move(trace));
  }
  return out;
}

BenchReport bench_traces(const ProgramPtr& program, int act, const std::vector<std::vector<std::size_t>>& traces,
                         bool action_log) {
  BenchReport r;
  r.traces = static_cast<std::int64_t>(traces.size());
  r.action_log_enabled = action_log;
  const ActionTable& table = program->action_table(act);
  r.action_table_size = table.size();
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& trace : traces) {
    EnvironmentInstance env = EnvironmentInstance::instantiate(program, act);
    std::vector<ActionValue> log;
    for (std::size_t idx : trace) {
      env.apply_index(idx);
      if (action_log) log.push_back(table.at(idx));
    }
    r.steps += static_cast<std::int64_t>(trace.size());
    r.log_entries += log.size();
  }
  r.total_seconds = seconds_since(t0);
  r.mean_seconds = r.traces > 0 ? r.total_seconds / static_cast<double>(r.traces) : 0.0;
  return r;
}

BenchReport bench(const ProgramPtr& program, const BenchOptions& options) {
  int act = options.act < 0 ? program->default_act() : options.act;
  if (options.traces <= 0) throw RangeError("traces must be positive");
  auto traces = generate_index_traces(program, act, options.seed, options.traces, options.max_steps);
  return bench_traces(program, act, traces, options.action_log);
}

namespace {

json type_json(const TypedModule& tm, TypeId t) { return tm.type_name(t); }

std::int64_t scalar_bytes(const TypeInfo& ti) { return ti.kind == TypeInfo::Kind::Bool ? 1 : 8; }

// Flattens a type into scalar leaves with their byte offsets.
void leaves(const TypedModule& tm, TypeId t, const std::string& path, std::int64_t offset, json& out) {
  const TypeInfo& ti = tm.types[t];
  switch (ti.kind) {
    case TypeInfo::Kind::Array: {
      std::int64_t step = tm.byte_size(ti.elem);
      for (std::int64_t i = 0; i < ti.len; ++i) {
        leaves(tm, ti.elem, path + "[" + std::to_string(i) + "]", offset + i * step, out);
      }
      return;
    }
    case TypeInfo::Kind::Class: {
      for (const FieldInfo& f : tm.class_of(t).fields) {
        leaves(tm, f.type, path.empty() ? f.name : path + "." + f.name, offset + f.byte_offset, out);
      }
      return;
    }
    default: {
      json leaf = {{"path", path}, {"type", tm.type_name(t)}, {"byte_offset", offset}, {"size", scalar_bytes(ti)}};
      if (ti.kind == TypeInfo::Kind::Bounded) {
        leaf["min"] = ti.min;
        leaf["max"] = ti.max;
      }
      out.push_back(std::move(leaf));
    }
  }
}

json method_json(const TypedModule& tm, const MethodSig& m) {
  json params = json::array();
  for (const auto& [name, type] : m.params) params.push_back({{"name", name}, {"type", type_json(tm, type)}});
  const char* kind = "function";
  switch (m.kind) {
    case MethodSig::Kind::CanPredicate: kind = "can"; break;
    case MethodSig::Kind::ActionApply: kind = "apply"; break;
    case MethodSig::Kind::IsDone: kind = "is_done"; break;
    case MethodSig::Kind::UserFunction: break;
  }
  return {{"name", m.name}, {"params", params}, {"returns", type_json(tm, m.ret)}, {"kind", kind},
          {"mutates_self", m.mutates_self}};
}

json scalar_json(const Scalar& s) {
  return std::visit([](auto v) { return json(v); }, s);
}

}  // namespace

std::string interface_description(const Program& program) {
  const TypedModule& tm = program.module();
  json doc;
  json classes = json::array();
  for (const ClassInfo& c : tm.classes) {
    json fields = json::array();
    for (const FieldInfo& f : c.fields) {
      fields.push_back({{"name", f.name},
                        {"type", type_json(tm, f.type)},
                        {"byte_offset", f.byte_offset},
                        {"size", tm.byte_size(f.type)}});
    }
    json methods = json::array();
    for (const MethodSig& m : c.methods) methods.push_back(method_json(tm, m));
    json leaf_list = json::array();
    leaves(tm, c.type, "", 0, leaf_list);
    classes.push_back({{"name", c.name},
                       {"origin", c.origin == ClassInfo::Origin::Declared ? "declared" : "act"},
                       {"size", c.bytes},
                       {"fields", fields},
                       {"leaves", leaf_list},
                       {"methods", methods}});
  }
  doc["classes"] = classes;

  json acts = json::array();
  for (std::size_t a = 0; a < tm.acts.size(); ++a) {
    const ActInfo& info = tm.acts[a];
    const ActionMachine& m = program.machine(static_cast<int>(a));
    json actions = json::array();
    for (const ActionInfo& ai : info.actions) {
      json params = json::array();
      for (std::size_t i = 0; i < ai.param_names.size(); ++i) {
        params.push_back({{"name", ai.param_names[i]}, {"type", type_json(tm, ai.param_types[i])}});
      }
      actions.push_back({{"name", ai.name}, {"params", params}});
    }
    json points = json::array();
    for (const SuspensionPoint& p : m.points) {
      points.push_back({{"index", p.index}, {"action", p.action_name}, {"reachable", p.reachable}});
    }
    json table = json::array();
    const ActionTable& t = program.action_table(static_cast<int>(a));
    for (std::size_t i = 0; i < t.size(); ++i) {
      ActionValue av = t.at(i);
      json args = json::array();
      for (const Scalar& s : av.args) args.push_back(scalar_json(s));
      table.push_back({{"index", i}, {"name", av.name}, {"args", args}});
    }
    json ctor = json::array();
    for (const auto& [name, type] : info.constructor.params) ctor.push_back({{"name", name}, {"type", type_json(tm, type)}});
    acts.push_back({{"name", m.name},
                    {"class", m.class_name},
                    {"constructor_params", ctor},
                    {"actions", actions},
                    {"suspension_points", points},
                    {"tensor_size", tensor_size(program, static_cast<int>(a))},
                    {"binary_size", m.frame_bytes},
                    {"action_table", table},
                    {"has_score", find_score_function(program, static_cast<int>(a)) >= 0}});
  }
  doc["acts"] = acts;
  doc["encoding"] = {{"byte_order", "little"}, {"bool_bytes", 1}, {"scalar_bytes", 8}};
  return doc.dump(2) + "\n";
}

namespace {

json error_reply(const std::string& kind, const std::string& message) {
  return {{"ok", false}, {"error", {{"kind", kind}, {"message", message}}}};
}

ActionValue action_from_json(const json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    throw TypeMismatch("action must be an object with a string 'name'");
  }
  ActionValue av{j["name"].get<std::string>(), {}};
  if (j.contains("args")) {
    if (!j["args"].is_array()) throw TypeMismatch("action 'args' must be an array");
    for (const json& a : j["args"]) {
      if (a.is_boolean()) {
        av.args.emplace_back(a.get<bool>());
      } else if (a.is_number_integer()) {
        av.args.emplace_back(a.get<std::int64_t>());
      } else {
        throw TypeMismatch("action arguments must be integers or booleans");
      }
    }
  }
  return av;
}

json status(const EnvironmentInstance& env) {
  return {{"ok", true}, {"is_done", env.is_done()}, {"legal_count", env.legal_indices().size()}};
}

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json handle(const ProgramPtr& program, int act, EnvironmentInstance& env, const json& req, bool& quit) {
  if (!req.is_object() || !req.contains("cmd") || !req["cmd"].is_string()) {
    throw ProtocolError("request must be an object with a string 'cmd'");
  }
  const std::string cmd = req["cmd"].get<std::string>();
  if (cmd == "reset") {
    env = EnvironmentInstance::instantiate(program, act);
    return status(env);
  }
  if (cmd == "legal") {
    json actions = json::array(), indices = json::array();
    for (std::size_t i : env.legal_indices()) {
      ActionValue av = env.action_table().at(i);
      json args = json::array();
      for (const Scalar& s : av.args) args.push_back(scalar_json(s));
      actions.push_back({{"name", av.name}, {"args", args}});
      indices.push_back(i);
    }
    return {{"ok", true}, {"actions", actions}, {"indices", indices}};
  }
  if (cmd == "step") {
    if (env.is_done()) throw PreconditionViolated("step", -1);
    if (req.contains("index")) {
      const json& ji = req["index"];
      if (!ji.is_number_integer()) throw ProtocolError("'index' must be an integer");
      auto i = ji.get<std::int64_t>();
      if (i < 0 || static_cast<std::size_t>(i) >= env.action_table().size()) {
        throw ProtocolError("index " + std::to_string(i) + " outside the action table of size " +
                            std::to_string(env.action_table().size()));
      }
      if (!env.can_apply_index(static_cast<std::size_t>(i))) {
        throw PreconditionViolated(env.action_table().at(static_cast<std::size_t>(i)).name, env.resume_idx());
      }
      env.apply_index(static_cast<std::size_t>(i));
    } else if (req.contains("action")) {
      ActionValue av = action_from_json(req["action"]);
      if (!env.can_apply(av)) throw PreconditionViolated(av.name, env.resume_idx());
      env.apply(av);
    } else {
      throw ProtocolError("step needs 'index' or 'action'");
    }
    return status(env);
  }
  if (cmd == "state") {
    return {{"ok", true}, {"state", to_text(env)}, {"resume_idx", env.resume_idx()}};
  }
  if (cmd == "tensor") {
    int observer = 0;
    if (req.contains("observer")) {
      if (!req["observer"].is_number_integer()) throw ProtocolError("'observer' must be an integer");
      observer = req["observer"].get<int>();
    }
    return {{"ok", true}, {"tensor", observation_tensor(env, observer)}};
  }
  if (cmd == "is_done") return {{"ok", true}, {"is_done", env.is_done()}};
  if (cmd == "score") {
    if (find_score_function(*program, act) < 0) throw ProtocolError("program defines no score function");
    if (!req.contains("player") || !req["player"].is_number_integer()) {
      throw ProtocolError("score needs an integer 'player'");
    }
    return {{"ok", true}, {"score", score(env, req["player"].get<int>())}};
  }
  if (cmd == "info") {
    return {{"ok", true},
            {"act", program->machine(act).name},
            {"tensor_size", tensor_size(*program, act)},
            {"action_table_size", program->action_table(act).size()},
            {"has_score", find_score_function(*program, act) >= 0}};
  }
  if (cmd == "quit") {
    quit = true;
    return {{"ok", true}};
  }
  throw ProtocolError("unknown command '" + cmd + "'");
}

}  // namespace

std::string serve_line(const ProgramPtr& program, int act, EnvironmentInstance& env, const std::string& line,
                       bool& quit) {
  json reply;
  try {
    json req = json::parse(line);
    reply = handle(program, act, env, req, quit);
  } catch (const json::exception& e) {
    reply = error_reply("protocol", e.what());
  } catch (const ProtocolError& e) {
    reply = error_reply("protocol", e.what());
  } catch (const PreconditionViolated& e) {
    reply = error_reply("precondition", e.what());
  } catch (const RuntimeError& e) {
    reply = error_reply("runtime", e.kind() + ": " + e.what());
  } catch (const ArityError& e) {
    reply = error_reply("type", e.what());
  } catch (const TypeMismatch& e) {
    reply = error_reply("type", e.what());
  } catch (const Error& e) {
    reply = error_reply(e.kind(), e.what());
  }
  return reply.dump();
}

void serve(const ProgramPtr& program, int act, std::istream& in, std::ostream& out) {
  EnvironmentInstance env = EnvironmentInstance::instantiate(program, act);
  std::string line;
  bool quit = false;
  while (!quit && std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out << serve_line(program, act, env, line, quit) << '\n' << std::flush;
  }
}

std::string to_json(const FuzzReport& r) {
  json failures = json::array();
  for (const FuzzFailure& f : r.failures) {
    failures.push_back(
        {{"trace", f.trace}, {"step", f.step}, {"kind", f.kind}, {"message", f.message}, {"trace_file", f.trace_file}});
  }
  json j = {{"seed", r.seed},
            {"traces_run", r.traces_run},
            {"steps_total", r.steps_total},
            {"max_trace_length", r.max_trace_length},
            {"terminal_counts", r.terminal_counts},
            {"failures", failures},
            {"seconds", r.seconds}};
  return j.dump(2);
}

std::string to_json(const BenchReport& r) {
  json j = {{"traces", r.traces},
            {"steps", r.steps},
            {"total_seconds", r.total_seconds},
            {"mean_seconds", r.mean_seconds},
            {"action_log_enabled", r.action_log_enabled},
            {"action_table_size", r.action_table_size},
            {"log_entries", r.log_entries}};
  return j.dump(2);
}

}  // namespace rb1
