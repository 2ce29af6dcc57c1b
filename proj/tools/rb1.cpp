#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rb1/serialize.hpp"
#include "rb1/tools.hpp"

namespace {

using namespace rb1;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProgramPtr load(const std::string& file) {
  ProgramPtr p = Program::compile_file(file);
  for (const Diagnostic& w : p->warnings()) std::cerr << format_warning(file, w) << '\n';
  return p;
}

int pick_act(const Program& p, const std::string& name) { return name.empty() ? p.default_act() : p.act(name); }

void print_final(const EnvironmentInstance& env) {
  std::cout << to_text(env) << '\n' << "is_done: " << (env.is_done() ? "true" : "false") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rb1 compiler and runtime"};
  app.require_subcommand(1);

  std::string file, act, fun = "main", out, trace_file, failure_dir, action_log = "off";
  std::uint64_t seed = 1;
  std::int64_t traces = 1000, max_steps = 1000;
  int jobs = 1;

  auto* check = app.add_subcommand("check", "parse, typecheck and lower a program");
  check->add_option("file", file)->required();

  auto* run = app.add_subcommand("run", "call a function and print its result");
  run->add_option("file", file)->required();
  run->add_option("--fun", fun, "function to call")->capture_default_str();

  auto* graph = app.add_subcommand("graph", "print the action flow graph as DOT");
  graph->add_option("file", file)->required();
  graph->add_option("--act", act);
  graph->add_option("--out", out);

  auto* fz = app.add_subcommand("fuzz", "play random traces and check invariants");
  fz->add_option("file", file)->required();
  fz->add_option("--act", act);
  fz->add_option("--seed", seed)->capture_default_str();
  fz->add_option("--traces", traces)->capture_default_str()->check(CLI::PositiveNumber);
  fz->add_option("--max-steps", max_steps)->capture_default_str()->check(CLI::PositiveNumber);
  fz->add_option("--jobs", jobs)->capture_default_str()->check(CLI::PositiveNumber);
  fz->add_option("--failure-dir", failure_dir, "directory for failing traces")->capture_default_str();

  std::int64_t bench_traces = 1024;
  auto* bn = app.add_subcommand("bench", "time random playouts");
  bn->add_option("file", file)->required();
  bn->add_option("--act", act);
  bn->add_option("--traces", bench_traces)->capture_default_str()->check(CLI::PositiveNumber);
  bn->add_option("--seed", seed)->capture_default_str();
  bn->add_option("--action-log", action_log)->check(CLI::IsMember({"on", "off"}))->capture_default_str();

  auto* rp = app.add_subcommand("replay", "apply a trace file and print the final state");
  rp->add_option("file", file)->required();
  rp->add_option("trace", trace_file)->required();
  rp->add_option("--act", act);

  auto* idl = app.add_subcommand("idl", "print the interface description as JSON");
  idl->add_option("file", file)->required();

  auto* sv = app.add_subcommand("serve", "line-delimited JSON session on stdin/stdout");
  sv->add_option("file", file)->required();
  sv->add_option("--act", act);

  CLI11_PARSE(app, argc, argv);

  ProgramPtr program;
  try {
    program = load(file);
  } catch (const Error& e) {
    std::cerr << format_diagnostic(file, e) << '\n';
    return 1;
  }
  if (check->parsed()) return 0;

  try {
    if (run->parsed()) {
      try {
        Value v = run_function(program, fun, {});
        if (v.type != TypeTable::kVoid) std::cout << value_to_text(program->module(), v) << '\n';
        return 0;
      } catch (const RuntimeError& e) {
        std::cerr << format_diagnostic(file, e) << " [" << e.kind() << "]\n";
        return 2;
      }
    }
    int a = pick_act(*program, act);
    if (graph->parsed()) {
      std::string dot = export_dot(build_afg(program->machine(a)));
      if (out.empty()) {
        std::cout << dot;
      } else {
        std::ofstream(out) << dot;
      }
      return 0;
    }
    if (fz->parsed()) {
      FuzzOptions opt;
      opt.act = a;
      opt.seed = seed;
      opt.traces = traces;
      opt.max_steps = max_steps;
      opt.jobs = jobs;
      opt.failure_dir = failure_dir;
      FuzzReport r = fuzz(program, opt);
      std::cout << to_json(r) << '\n';
      return r.failures.empty() ? 0 : 1;
    }
    if (bn->parsed()) {
      BenchOptions opt;
      opt.act = a;
      opt.traces = bench_traces;
      opt.seed = seed;
      opt.action_log = action_log == "on";
      std::cout << to_json(bench(program, opt)) << '\n';
      return 0;
    }
    if (rp->parsed()) {
      std::vector<ActionValue> trace = parse_trace(*program, a, read_file(trace_file));
      EnvironmentInstance env = EnvironmentInstance::instantiate(program, a);
      for (std::size_t k = 0; k < trace.size(); ++k) {
        try {
          env.apply(trace[k]);
        } catch (const Error& e) {
          std::cerr << "step " << k + 1 << ": " << to_string(trace[k]) << ": " << e.what() << '\n';
          print_final(env);
          return 1;
        }
      }
      print_final(env);
      return 0;
    }
    if (idl->parsed()) {
      std::cout << interface_description(*program);
      return 0;
    }
    if (sv->parsed()) {
      serve(program, a, std::cin, std::cout);
      return 0;
    }
  } catch (const RuntimeError& e) {
    std::cerr << format_diagnostic(file, e) << " [" << e.kind() << "]\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << format_diagnostic(trace_file.empty() ? file : trace_file, e) << '\n';
    return 1;
  }
  return 0;
}
