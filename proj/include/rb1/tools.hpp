#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rb1/runtime.hpp"

namespace rb1 {

/// splitmix64. Fuzz and bench draw `next() % n` to pick among n choices.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

/// Per-trace seeds: trace i uses the i-th output of a generator seeded
/// with the master seed.
std::vector<std::uint64_t> trace_seeds(std::uint64_t master, std::int64_t count);

/// Index of `fun score(<act class>, Int<..> player) -> Float`, or -1.
int find_score_function(const Program& program, int act_index);
double score(const EnvironmentInstance& env, int player);

struct FuzzOptions {
  int act = -1;
  std::uint64_t seed = 1;
  std::int64_t traces = 1000;
  std::int64_t max_steps = 1000;
  int jobs = 1;
  std::string failure_dir;  // where failing traces are written; empty = nowhere
  bool check_round_trips = true;
  bool check_afg = true;
};

struct FuzzFailure {
  std::int64_t trace = 0;
  std::int64_t step = 0;
  std::string kind;
  std::string message;
  std::string trace_file;
  std::vector<ActionValue> actions;
};

struct FuzzReport {
  std::uint64_t seed = 0;
  std::int64_t traces_run = 0;
  std::int64_t steps_total = 0;
  std::int64_t max_trace_length = 0;
  std::map<std::string, std::int64_t> terminal_counts;
  std::vector<FuzzFailure> failures;
  double seconds = 0;
};

FuzzReport fuzz(const ProgramPtr& program, const FuzzOptions& options);

struct BenchOptions {
  int act = -1;
  std::int64_t traces = 1024;
  std::uint64_t seed = 1;
  std::int64_t max_steps = 100000;
  bool action_log = false;
};

struct BenchReport {
  std::int64_t traces = 0;
  std::int64_t steps = 0;
  double total_seconds = 0;
  double mean_seconds = 0;
  bool action_log_enabled = false;
  std::size_t action_table_size = 0;
  std::size_t log_entries = 0;
};

/// Random valid traces as action-table indices.
std::vector<std::vector<std::size_t>> generate_index_traces(const ProgramPtr& program, int act, std::uint64_t seed,
                                                            std::int64_t traces, std::int64_t max_steps);
BenchReport bench(const ProgramPtr& program, const BenchOptions& options);
/// Times pre-generated traces; only instantiate and indexed apply run.
BenchReport bench_traces(const ProgramPtr& program, int act, const std::vector<std::vector<std::size_t>>& traces,
                         bool action_log);

/// Interface description as JSON text with sorted keys.
std::string interface_description(const Program& program);

/// Line-delimited JSON session. Returns when `quit` is read or input ends.
void serve(const ProgramPtr& program, int act, std::istream& in, std::ostream& out);
/// Handles one request line; sets `quit` on a quit command.
std::string serve_line(const ProgramPtr& program, int act, EnvironmentInstance& env, const std::string& line,
                       bool& quit);

std::string to_json(const FuzzReport& report);
std::string to_json(const BenchReport& report);

}  // namespace rb1
