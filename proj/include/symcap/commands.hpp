#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "symcap/programs.hpp"

namespace symcap {

struct RunOptions {
  double alpha = 2.0;
  int k = 1;
  double tol = 1e-8;
  int max_iter = 200;
  bool dense = false;
  double perturb = 0.0;
  std::string group;          // "" or "z2"
  std::string export_format;  // "", "json", "sdpa" or "csv"
  std::string out;            // export path
  bool verbose = false;
};

// Output of one command: the RunRecord plus a human-readable rendering.
struct CommandResult {
  nlohmann::json record;
  std::string text;
};

CommandResult cmd_analyze_symmetry(int dx, int dy, int k, const std::string& group = "");

CommandResult cmd_divergence(const std::string& n, const std::string& m, const RunOptions& opt);

CommandResult cmd_classical_capacity(const std::string& channel, const RunOptions& opt);

CommandResult cmd_quantum_capacity(const std::string& channel, const RunOptions& opt);

CommandResult cmd_beta(const std::string& channel, const RunOptions& opt);

CommandResult cmd_solve_sdpa(const std::string& path, const RunOptions& opt);

struct SweepRow {
  double parameter = 0.0;
  double value_bits = 0.0;
  int k = 1;
  double alpha = 2.0;
  std::string status;
  double wall_seconds = 0.0;
};

// Grid from..to inclusive; every channel argument may contain "{p}".
std::vector<double> sweep_grid(double from, double to, double step);

std::vector<SweepRow> cmd_sweep(const std::string& command, const std::vector<std::string>& channels, double from,
                                double to, double step, const RunOptions& opt);

std::string sweep_csv(const std::vector<SweepRow>& rows);

// Re-runs the command stored in a RunRecord and checks the value.
CommandResult cmd_replay(const nlohmann::json& record, double tolerance = 1e-6);

std::string substitute_parameter(const std::string& spec, double p);

}  // namespace symcap
