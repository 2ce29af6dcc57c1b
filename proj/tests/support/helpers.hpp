#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rb1/runtime.hpp"
#include "rb1/tools.hpp"

namespace testkit {

std::string corpus_path(const std::string& file);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
std::string temp_path(const std::string& name);

/// Compiled corpus program, cached per file.
rb1::ProgramPtr corpus(const std::string& file);

struct Golden {
  std::string act;
  std::size_t tensor_size = 0;
  std::size_t action_table_size = 0;
  std::optional<oracle::Fraction> draw_probability;
  std::string dot;
};
Golden golden(const std::string& stem);

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};
/// Runs the rb1 executable with `args` (shell-quoted by the caller).
CliResult run_cli(const std::string& args, const std::string& stdin_text = "");

/// A uniformly random playout: the instance after every applied action,
/// starting from the fresh one.
struct Playout {
  std::vector<rb1::ActionValue> actions;
  std::vector<rb1::EnvironmentInstance> states;
};
Playout random_playout(const rb1::ProgramPtr& program, int act, std::uint64_t seed, std::int64_t max_steps = 1000);

/// Reachable states from seeded playouts until `count` are collected.
std::vector<rb1::EnvironmentInstance> sample_states(const rb1::ProgramPtr& program, int act, std::uint64_t seed,
                                                    std::size_t count);

/// One-hot blocks of an act's observation tensor as (offset, width),
/// derived from the interface description leaves.
std::vector<std::pair<std::size_t, std::size_t>> one_hot_groups(const rb1::ProgramPtr& program, int act);

std::int64_t int_arg(const rb1::ActionValue& a, std::size_t i);

/// The three corpus games.
struct Game {
  const char* file;
  const char* stem;
};
const std::vector<Game>& games();

/// Oracle adjudication of a DSL trace, mapped onto the corpus score
/// convention. Throws oracle::InvalidMove.
struct Adjudication {
  bool done = false;
  double score0 = 0.0;
  std::size_t legal_count = 0;
};
std::vector<Adjudication> oracle_adjudicate(const std::string& stem, const std::vector<rb1::ActionValue>& trace);

}  // namespace testkit
