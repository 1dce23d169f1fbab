#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "symcap/commands.hpp"

using namespace symcap;

namespace {

struct Output {
  bool json = false;
  std::string record_path;
};

void add_run_options(CLI::App* app, RunOptions& o, Output& out, bool with_dense = true) {
  app->add_option("--alpha", o.alpha, "Renyi order alpha (1/alpha must be dyadic)")->capture_default_str();
  app->add_option("-k,--copies", o.k, "number of channel copies")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--tol", o.tol, "solver tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--max-iter", o.max_iter, "solver iteration limit")->capture_default_str();
  if (with_dense) app->add_flag("--dense", o.dense, "use the unreduced program (small k only)");
  app->add_option("--perturb", o.perturb, "add perturb*I to sigma in the geometric-mean constraint");
  app->add_option("--group", o.group, "restrict to a channel symmetry group")->check(CLI::IsMember({"z2"}));
  app->add_option("--export", o.export_format, "export the program or the result")
      ->check(CLI::IsMember({"json", "sdpa", "csv"}));
  app->add_option("--out", o.out, "export path");
  app->add_flag("--json", out.json, "print the run record as JSON");
  app->add_option("--record", out.record_path, "write the run record to a file");
  app->add_flag("-v,--verbose", o.verbose, "print solver iterations");
}

void emit(const CommandResult& r, const Output& out) {
  if (!out.record_path.empty()) {
    std::ofstream f(out.record_path);
    if (!f) throw std::runtime_error("cannot write " + out.record_path);
    f << r.record.dump(2) << '\n';
  }
  if (out.json)
    std::cout << r.record.dump(2) << '\n';
  else
    std::cout << r.text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-reduced SDP bounds for quantum channel divergences and capacities"};
  app.require_subcommand(1);

  RunOptions opt;
  Output out;

  int dx = 2, dy = 2;
  auto* sym = app.add_subcommand("analyze-symmetry", "block structure of the permutation-invariant algebra");
  sym->add_option("--dx", dx, "input dimension")->capture_default_str();
  sym->add_option("--dy", dy, "output dimension")->capture_default_str();
  sym->add_option("-k,--copies", opt.k, "number of copies")->capture_default_str();
  sym->add_option("--group", opt.group, "census for an extra symmetry group")->check(CLI::IsMember({"z2"}));
  sym->add_flag("--json", out.json, "print the run record as JSON");
  sym->add_option("--record", out.record_path, "write the run record to a file");

  std::string ch_n, ch_m;
  auto* div = app.add_subcommand("divergence", "#-Renyi channel divergence D#_alpha(N^k || M^k)");
  div->add_option("N", ch_n, "channel spec, e.g. gad:0.3,0")->required();
  div->add_option("M", ch_m, "channel spec, e.g. gad:0.4,0.9")->required();
  add_run_options(div, opt, out);

  auto* cc = app.add_subcommand("classical-capacity", "Upsilon-information bound on the classical capacity");
  cc->add_option("channel", ch_n, "channel spec")->required();
  add_run_options(cc, opt, out, false);

  auto* qc = app.add_subcommand("quantum-capacity", "Theta-information bound on the two-way quantum capacity");
  qc->add_option("channel", ch_n, "channel spec")->required();
  add_run_options(qc, opt, out, false);

  auto* beta = app.add_subcommand("beta", "the beta SDP of a Choi matrix");
  beta->add_option("channel", ch_n, "channel spec")->required();
  add_run_options(beta, opt, out, false);

  std::string sweep_cmd;
  std::vector<std::string> sweep_channels;
  double from = 0.0, to = 1.0, step = 0.1;
  auto* sweep = app.add_subcommand("sweep", "run a command over a parameter grid; channels may contain {p}");
  sweep->add_option("command", sweep_cmd, "divergence, classical-capacity, quantum-capacity or beta")->required();
  sweep->add_option("channels", sweep_channels, "channel specs")->required();
  sweep->add_option("--from", from, "first parameter value")->required();
  sweep->add_option("--to", to, "last parameter value")->required();
  sweep->add_option("--step", step, "grid step")->required();
  add_run_options(sweep, opt, out);

  std::string path;
  auto* sdpa = app.add_subcommand("solve-sdpa", "solve an SDPA sparse (.dat-s) file");
  sdpa->add_option("file", path, "input file")->required()->check(CLI::ExistingFile);
  sdpa->add_option("--tol", opt.tol, "solver tolerance")->capture_default_str();
  sdpa->add_option("--max-iter", opt.max_iter, "solver iteration limit")->capture_default_str();
  sdpa->add_flag("--json", out.json, "print the run record as JSON");
  sdpa->add_flag("-v,--verbose", opt.verbose, "print solver iterations");

  double replay_tol = 1e-6;
  auto* replay = app.add_subcommand("replay", "re-run a saved run record and compare the value");
  replay->add_option("record", path, "run record JSON")->required()->check(CLI::ExistingFile);
  replay->add_option("--tolerance", replay_tol, "allowed relative difference")->capture_default_str();
  replay->add_flag("--json", out.json, "print the new run record as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sym) {
      emit(cmd_analyze_symmetry(dx, dy, opt.k, opt.group), out);
    } else if (*div) {
      emit(cmd_divergence(ch_n, ch_m, opt), out);
    } else if (*cc) {
      emit(cmd_classical_capacity(ch_n, opt), out);
    } else if (*qc) {
      emit(cmd_quantum_capacity(ch_n, opt), out);
    } else if (*beta) {
      emit(cmd_beta(ch_n, opt), out);
    } else if (*sweep) {
      const auto rows = cmd_sweep(sweep_cmd, sweep_channels, from, to, step, opt);
      const std::string csv = sweep_csv(rows);
      if (!opt.out.empty()) {
        std::ofstream f(opt.out);
        if (!f) throw std::runtime_error("cannot write " + opt.out);
        f << csv;
        std::cout << rows.size() << " rows written to " << opt.out << '\n';
      } else {
        std::cout << csv;
      }
    } else if (*sdpa) {
      emit(cmd_solve_sdpa(path, opt), out);
    } else if (*replay) {
      std::ifstream f(path);
      const auto record = nlohmann::json::parse(f);
      const CommandResult r = cmd_replay(record, replay_tol);
      emit(r, out);
      return r.record["replay"].value("matches", false) ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
