#include "helpers.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

namespace testkit {

std::string corpus_path(const std::string& file) { return std::string(RB1_CORPUS_DIR) + "/" + file; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rb1-tests-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

rb1::ProgramPtr corpus(const std::string& file) {
  static std::mutex mu;
  static std::map<std::string, rb1::ProgramPtr> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[file];
  if (!slot) slot = rb1::Program::compile_file(corpus_path(file));
  return slot;
}

Golden golden(const std::string& stem) {
  std::istringstream in(read_file(corpus_path(stem + ".expected")));
  Golden g;
  std::string line;
  while (std::getline(in, line)) {
    if (line == "dot:") {
      std::ostringstream rest;
      rest << in.rdbuf();
      g.dot = rest.str();
      break;
    }
    auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon), value = line.substr(colon + 2);
    if (key == "act") g.act = value;
    if (key == "tensor_size") g.tensor_size = std::stoul(value);
    if (key == "action_table_size") g.action_table_size = std::stoul(value);
    if (key == "draw_probability") {
      auto slash = value.find('/');
      g.draw_probability = oracle::Fraction{std::stoull(value.substr(0, slash)), std::stoull(value.substr(slash + 1))};
    }
  }
  return g;
}

CliResult run_cli(const std::string& args, const std::string& stdin_text) {
  std::string in = temp_path("cli.in"), out = temp_path("cli.out"), err = temp_path("cli.err");
  write_file(in, stdin_text);
  std::string cmd = std::string("'") + RB1_CLI + "' " + args + " <'" + in + "' >'" + out + "' 2>'" + err + "'";
  int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

Playout random_playout(const rb1::ProgramPtr& program, int act, std::uint64_t seed, std::int64_t max_steps) {
  rb1::SplitMix64 rng(seed);
  Playout p;
  p.states.push_back(rb1::EnvironmentInstance::instantiate(program, act));
  for (std::int64_t step = 0; step < max_steps && !p.states.back().is_done(); ++step) {
    auto legal = p.states.back().legal_indices();
    if (legal.empty()) break;
    std::size_t idx = legal[rng.below(legal.size())];
    rb1::EnvironmentInstance next = p.states.back();
    next.apply_index(idx);
    p.actions.push_back(program->action_table(act).at(idx));
    p.states.push_back(std::move(next));
  }
  return p;
}

std::vector<rb1::EnvironmentInstance> sample_states(const rb1::ProgramPtr& program, int act, std::uint64_t seed,
                                                    std::size_t count) {
  std::vector<rb1::EnvironmentInstance> out;
  rb1::SplitMix64 seeds(seed);
  while (out.size() < count) {
    Playout p = random_playout(program, act, seeds.next());
    for (auto& s : p.states) {
      if (out.size() == count) break;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> one_hot_groups(const rb1::ProgramPtr& program, int act) {
  auto doc = nlohmann::json::parse(rb1::interface_description(*program));
  const auto& a = doc["acts"].at(static_cast<std::size_t>(act));
  nlohmann::json cls;
  for (const auto& c : doc["classes"]) {
    if (c["name"] == a["class"]) cls = c;
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t at = 0;
  for (const auto& leaf : cls["leaves"]) {
    std::size_t width = 1;
    bool one_hot = false;
    if (leaf["path"] == "resume_idx") {
      width = a["suspension_points"].size() + 1;
      one_hot = true;
    } else if (leaf.contains("min")) {
      width = static_cast<std::size_t>(leaf["max"].get<std::int64_t>() - leaf["min"].get<std::int64_t>() + 1);
      one_hot = true;
    }
    if (one_hot) out.emplace_back(at, width);
    at += width;
  }
  return out;
}

std::int64_t int_arg(const rb1::ActionValue& a, std::size_t i) { return std::get<std::int64_t>(a.args.at(i)); }

const std::vector<Game>& games() {
  static const std::vector<Game> g = {
      {"tictactoe.rb1", "tictactoe"}, {"catch.rb1", "catch"}, {"connect_four.rb1", "connect_four"}};
  return g;
}

std::vector<Adjudication> oracle_adjudicate(const std::string& stem, const std::vector<rb1::ActionValue>& trace) {
  std::vector<Adjudication> out;
  if (stem == "tictactoe") {
    oracle::TicTacToe g;
    auto snap = [&] {
      out.push_back({g.outcome != oracle::Outcome::Ongoing, oracle::score_of(g.outcome, 0), g.moves().size()});
    };
    snap();
    for (std::size_t i = 0; i < trace.size(); ++i) {
      int x = static_cast<int>(int_arg(trace[i], 0)), y = static_cast<int>(int_arg(trace[i], 1));
      if (trace[i].name != "mark" || !g.legal(x, y)) throw oracle::InvalidMove(i, "illegal");
      g.play(x, y);
      snap();
    }
  } else if (stem == "connect_four") {
    oracle::ConnectFour g;
    auto snap = [&] {
      out.push_back({g.outcome != oracle::Outcome::Ongoing, oracle::score_of(g.outcome, 0), g.moves().size()});
    };
    snap();
    for (std::size_t i = 0; i < trace.size(); ++i) {
      int c = static_cast<int>(int_arg(trace[i], 0));
      if (trace[i].name != "drop" || !g.legal(c)) throw oracle::InvalidMove(i, "illegal");
      g.play(c);
      snap();
    }
  } else if (stem == "catch") {
    oracle::Catch g;
    auto snap = [&] { out.push_back({g.over, g.over ? (g.caught() ? 1.0 : -1.0) : 0.0, g.moves().size()}); };
    snap();
    for (std::size_t i = 0; i < trace.size(); ++i) {
      int v = static_cast<int>(int_arg(trace[i], 0));
      try {
        if (trace[i].name == "drop") {
          g.drop(v);
        } else if (trace[i].name == "move") {
          g.move(v);
        } else {
          throw oracle::InvalidMove(i, "unknown action");
        }
      } catch (const oracle::InvalidMove&) {
        throw oracle::InvalidMove(i, "illegal");
      }
      snap();
    }
  } else {
    throw std::runtime_error("no oracle for " + stem);
  }
  return out;
}

}  // namespace testkit
