#include "symcap/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "symcap/errors.hpp"
#include "symcap/groupsym.hpp"
#include "symcap/parallel.hpp"

namespace symcap {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v, int prec = 7) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

json matrix_json(const ComplexMatrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array(), c = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return {{"re", re}, {"im", im}};
}

json options_json(const RunOptions& o) {
  return {{"alpha", o.alpha}, {"k", o.k},          {"tol", o.tol},       {"max_iter", o.max_iter},
          {"dense", o.dense}, {"perturb", o.perturb}, {"group", o.group}, {"export", o.export_format},
          {"out", o.out}};
}

RunOptions options_from_json(const json& j) {
  RunOptions o;
  o.alpha = j.value("alpha", 2.0);
  o.k = j.value("k", 1);
  o.tol = j.value("tol", 1e-8);
  o.max_iter = j.value("max_iter", 200);
  o.dense = j.value("dense", false);
  o.perturb = j.value("perturb", 0.0);
  o.group = j.value("group", std::string());
  return o;  // exports are not repeated on replay
}

SolverConfig solver_config(const RunOptions& o) {
  SolverConfig cfg;
  cfg.gap_tol = o.tol;
  cfg.feas_tol = o.tol;
  cfg.max_iter = o.max_iter;
  cfg.verbose = o.verbose;
  return cfg;
}

std::optional<DiagonalSymmetry> symmetry_of(const RunOptions& o) {
  if (o.group.empty()) return std::nullopt;
  if (o.group == "z2") return z2_symmetry();
  throw ParseError("unknown symmetry group '" + o.group + "' (supported: z2)");
}

bool is_real(const ChoiMatrix& c) { return c.matrix().imag().cwiseAbs().maxCoeff() == 0.0; }

ChoiMatrix load_channel(const std::string& text, ValidationMode mode) {
  ChoiMatrix c = build_channel(parse_channel_spec(text));
  const ValidationReport rep = validate(c, mode, 1e-9);
  if (!rep.pass) {
    std::ostringstream os;
    os << "channel '" << text << "' fails validation (min eigenvalue " << rep.min_eigenvalue << ", trace residual "
       << rep.trace_residual << ")";
    throw std::invalid_argument(os.str());
  }
  return c;
}

json solver_json(const BoundResult& r, const RunOptions& o) {
  const SDPSolution& s = r.solution;
  return {{"status", to_string(s.status)},
          {"message", s.message},
          {"iterations", s.iterations},
          {"inexact", r.inexact},
          {"tolerance", {{"requested", o.tol},
                         {"gap", s.gap},
                         {"primal_residual", s.primal_residual},
                         {"dual_residual", s.dual_residual}}}};
}

json bound_values(const BoundResult& r) {
  return {{"units", "bits"}, {"total", r.total}, {"per_copy", r.per_copy}, {"epigraph", r.y}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void export_program(const ReducedProgram& prog, const RunOptions& o, json& record) {
  if (o.export_format.empty() || o.export_format == "csv") return;
  if (o.out.empty()) throw std::invalid_argument("--export needs --out");
  if (o.export_format == "json") {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << to_json(prog).dump(1) << '\n';
  } else if (o.export_format == "sdpa") {
    write_sdpa_file(lower_program(prog), o.out);
  } else {
    throw ParseError("unknown export format '" + o.export_format + "' (json, sdpa, csv)");
  }
  record["outputs"].push_back(o.out);
}

void export_csv_row(double value, const std::string& status, double seconds, const RunOptions& o, json& record) {
  if (o.export_format != "csv") return;
  if (o.out.empty()) throw std::invalid_argument("--export needs --out");
  SweepRow row{std::nan(""), value, o.k, o.alpha, status, seconds};
  std::ofstream f(o.out);
  if (!f) throw std::runtime_error("cannot write " + o.out);
  f << sweep_csv({row});
  record["outputs"].push_back(o.out);
}

json base_record(const std::string& command, const json& params, const RunOptions& o) {
  json r;
  r["command"] = command;
  r["parameters"] = params;
  r["options"] = options_json(o);
  r["alpha"] = o.alpha;
  r["k"] = o.k;
  r["started_at"] = utc_now();
  r["outputs"] = json::array();
  return r;
}

void stamp(json& record, Clock::time_point t0) {
  record["finished_at"] = utc_now();
  record["wall_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string status_text(const BoundResult& r) {
  std::string s = to_string(r.solution.status);
  if (r.inexact) s += " (inexact)";
  return s;
}

}  // namespace

std::string substitute_parameter(const std::string& spec, double p) {
  std::string out = spec;
  std::ostringstream os;
  os << std::setprecision(12) << p;
  for (std::size_t pos; (pos = out.find("{p}")) != std::string::npos;) out.replace(pos, 3, os.str());
  return out;
}

CommandResult cmd_analyze_symmetry(int dx, int dy, int k, const std::string& group) {
  if (dx < 1 || dy < 1 || k < 1) throw DimensionError("analyze-symmetry needs positive dX, dY and k");
  RunOptions o;
  o.k = k;
  o.group = group;
  const auto t0 = Clock::now();
  json record = base_record("analyze-symmetry", {{"dx", dx}, {"dy", dy}, {"group", group}}, o);
  SymmetryReport rep;
  if (group.empty()) {
    rep = symmetry_census(dx * dy, k);
  } else if (group == "z2") {
    if (dx != 2 || dy != 2) throw DimensionError("the z2 census is defined for qubit input and output");
    rep = h_census(gad_z2_spec(), k);
  } else {
    throw ParseError("unknown symmetry group '" + group + "' (supported: z2)");
  }
  record["report"] = {{"ambient_dim", rep.ambient_dim},     {"invariant_dim", rep.invariant_dim},
                      {"labels", rep.labels},               {"block_sizes", rep.block_sizes},
                      {"max_block", rep.max_block()},       {"block_count", rep.block_count()}};
  stamp(record, t0);
  std::ostringstream os;
  if (group.empty()) {
    os << "ambient | invariant | blocks\n" << rep.ambient_dim << " | " << rep.invariant_dim << " | ";
    for (std::size_t i = 0; i < rep.block_sizes.size(); ++i) os << (i ? "," : "") << rep.block_sizes[i];
    os << "\n";
    for (std::size_t i = 0; i < rep.labels.size(); ++i) os << "  " << rep.labels[i] << "  " << rep.block_sizes[i] << "\n";
  } else {
    os << "invariant | max multiplicity | irreps\n"
       << rep.invariant_dim << " | " << rep.max_block() << " | " << rep.block_count() << "\n";
  }
  return {record, os.str()};
}

CommandResult cmd_divergence(const std::string& ns, const std::string& ms, const RunOptions& o) {
  const auto t0 = Clock::now();
  json record = base_record("divergence", {{"channels", {ns, ms}}}, o);
  const ChoiMatrix n = load_channel(ns, ValidationMode::cp);
  const ChoiMatrix m = load_channel(ms, ValidationMode::cp);
  if (n.dx() != m.dx() || n.dy() != m.dy()) throw DimensionError("channels differ in dimensions");
  const auto sym = symmetry_of(o);
  if (sym) {
    require_symmetry(n, *sym);
    require_symmetry(m, *sym);
  }
  ProgramSpec spec;
  if (o.dense) {
    if (sym) throw std::invalid_argument("--group applies to the reduced formulation only");
    spec = build_dsharp_dense(n, m, o.alpha, o.k, o.perturb);
  } else {
    auto ctx = reduction_context(n.dx(), n.dy(), o.k, is_real(n) && is_real(m), sym);
    spec = build_dsharp_reduced(n, m, o.alpha, *ctx, o.perturb);
  }
  record["program"] = {{"scalars", spec.program.scalars.size()}, {"lmis", spec.program.lmis.size()},
                       {"formulation", o.dense ? "dense" : "reduced"}};
  export_program(spec.program, o, record);
  const BoundResult r = solve_bound(spec, o.alpha, o.k, solver_config(o));
  record["solver"] = solver_json(r, o);
  record["values"] = bound_values(r);
  stamp(record, t0);
  export_csv_row(r.per_copy, status_text(r), record["wall_seconds"], o, record);
  std::ostringstream os;
  os << "D#_" << o.alpha << " k=" << o.k << ": total " << fmt(r.total) << " bits, per copy " << fmt(r.per_copy)
     << " bits [" << status_text(r) << "]\n";
  return {record, os.str()};
}

CommandResult cmd_classical_capacity(const std::string& cs, const RunOptions& o) {
  const auto t0 = Clock::now();
  json record = base_record("classical-capacity", {{"channels", {cs}}}, o);
  const ChoiMatrix n = load_channel(cs, ValidationMode::channel);
  const auto sym = symmetry_of(o);
  if (sym) require_symmetry(n, *sym);
  if (o.dense) throw std::invalid_argument("--dense is available for the divergence command only");
  auto ctx = reduction_context(n.dx(), n.dy(), o.k, is_real(n), sym);
  const ProgramSpec spec = build_upsilon(n, o.alpha, *ctx);
  record["program"] = {{"scalars", spec.program.scalars.size()}, {"lmis", spec.program.lmis.size()}};
  export_program(spec.program, o, record);
  const BoundResult r = solve_bound(spec, o.alpha, o.k, solver_config(o));
  record["solver"] = solver_json(r, o);
  record["values"] = bound_values(r);
  stamp(record, t0);
  export_csv_row(r.per_copy, status_text(r), record["wall_seconds"], o, record);
  std::ostringstream os;
  os << "classical capacity bound (Upsilon, alpha=" << o.alpha << ", k=" << o.k << "): " << fmt(r.per_copy)
     << " bits per use [" << status_text(r) << "]\n";
  return {record, os.str()};
}

CommandResult cmd_quantum_capacity(const std::string& cs, const RunOptions& o) {
  const auto t0 = Clock::now();
  json record = base_record("quantum-capacity", {{"channels", {cs}}}, o);
  const ChoiMatrix n = load_channel(cs, ValidationMode::channel);
  const auto sym = symmetry_of(o);
  if (o.dense) throw std::invalid_argument("--dense is available for the divergence command only");
  const ThetaResult th = run_theta(n, o.alpha, o.k, solver_config(o), sym, o.perturb);
  if (!o.export_format.empty() && o.export_format != "csv") {
    auto ctx = reduction_context(n.dx(), n.dy(), o.k, is_real(n) && is_real(th.m_star), sym);
    export_program(build_dsharp_reduced(n, th.m_star, o.alpha, *ctx, o.perturb).program, o, record);
  }
  record["stage1"] = {{"solver", solver_json(th.stage1, o)}, {"values", bound_values(th.stage1)},
                      {"m_star", matrix_json(th.m_star.matrix())}};
  record["solver"] = solver_json(th.stage2, o);
  record["values"] = bound_values(th.stage2);
  stamp(record, t0);
  export_csv_row(th.stage2.per_copy, status_text(th.stage2), record["wall_seconds"], o, record);
  std::ostringstream os;
  os << "two-way quantum capacity bound (Theta, alpha=" << o.alpha << ", k=" << o.k << "): "
     << fmt(th.stage2.per_copy) << " bits per use [" << status_text(th.stage2) << "]\n"
     << "  stage 1 (k=1): " << fmt(th.stage1.total) << " bits\n";
  return {record, os.str()};
}

CommandResult cmd_beta(const std::string& cs, const RunOptions& o) {
  const auto t0 = Clock::now();
  json record = base_record("beta", {{"channels", {cs}}}, o);
  const ChoiMatrix j = load_channel(cs, ValidationMode::cp);
  const double b = beta_sdp(j, solver_config(o));
  record["values"] = {{"units", "bits"}, {"beta", b}, {"log2_beta", std::log2(b)}, {"per_copy", std::log2(b)}};
  record["solver"] = {{"status", "optimal"}, {"tolerance", {{"requested", o.tol}}}};
  stamp(record, t0);
  export_csv_row(std::log2(b), "optimal", record["wall_seconds"], o, record);
  std::ostringstream os;
  os << "beta = " << fmt(b, 9) << ", log2(beta) = " << fmt(std::log2(b)) << " bits\n";
  return {record, os.str()};
}

CommandResult cmd_solve_sdpa(const std::string& path, const RunOptions& o) {
  const auto t0 = Clock::now();
  json record = base_record("solve-sdpa", {{"path", path}}, o);
  const StandardFormSDP sdp = read_sdpa_file(path);
  const SDPSolution s = solve(sdp, solver_config(o));
  record["solver"] = {{"status", to_string(s.status)},
                      {"message", s.message},
                      {"iterations", s.iterations},
                      {"tolerance", {{"requested", o.tol},
                                     {"gap", s.gap},
                                     {"primal_residual", s.primal_residual},
                                     {"dual_residual", s.dual_residual}}}};
  record["values"] = {{"objective", s.objective}, {"dual_objective", s.dual_objective}, {"x", s.x}};
  stamp(record, t0);
  std::ostringstream os;
  os << "objective " << std::setprecision(12) << s.objective << " [" << to_string(s.status) << ", "
     << s.iterations << " iterations]\n";
  return {record, os.str()};
}

std::vector<double> sweep_grid(double from, double to, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("sweep step must be positive");
  std::vector<double> out;
  if (to < from) return out;
  const long long n = static_cast<long long>(std::floor((to - from) / step + 1e-9)) + 1;
  if (n > 1'000'000) throw std::invalid_argument("sweep grid too large");
  for (long long i = 0; i < n; ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

std::vector<SweepRow> cmd_sweep(const std::string& command, const std::vector<std::string>& channels, double from,
                                double to, double step, const RunOptions& opt) {
  const std::size_t need = command == "divergence" ? 2 : 1;
  if (command != "divergence" && command != "classical-capacity" && command != "quantum-capacity" &&
      command != "beta")
    throw ParseError("sweep supports divergence, classical-capacity, quantum-capacity and beta");
  if (channels.size() != need) throw std::invalid_argument(command + " sweep needs " + std::to_string(need) + " channel(s)");
  const std::vector<double> grid = sweep_grid(from, to, step);
  RunOptions o = opt;
  o.export_format.clear();
  o.out.clear();
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const auto t0 = Clock::now();
    SweepRow& row = rows[i];
    row.parameter = grid[i];
    row.k = o.k;
    row.alpha = o.alpha;
    try {
      CommandResult r;
      if (command == "divergence")
        r = cmd_divergence(substitute_parameter(channels[0], grid[i]), substitute_parameter(channels[1], grid[i]), o);
      else if (command == "classical-capacity")
        r = cmd_classical_capacity(substitute_parameter(channels[0], grid[i]), o);
      else if (command == "quantum-capacity")
        r = cmd_quantum_capacity(substitute_parameter(channels[0], grid[i]), o);
      else
        r = cmd_beta(substitute_parameter(channels[0], grid[i]), o);
      const json& v = r.record["values"];
      row.value_bits = v["per_copy"].get<double>();  // the plotted quantity
      row.status = r.record["solver"]["status"].get<std::string>();
      if (r.record["solver"].value("inexact", false)) row.status += " (inexact)";
    } catch (const std::exception& e) {
      row.value_bits = std::nan("");
      row.status = std::string("error: ") + e.what();
    }
    row.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "parameter,value_bits,k,alpha,status,wall_seconds\r\n";
  for (const auto& r : rows)
    os << csv_number(r.parameter) << ',' << csv_number(r.value_bits) << ',' << r.k << ',' << csv_number(r.alpha)
       << ',' << csv_field(r.status) << ',' << csv_number(r.wall_seconds) << "\r\n";
  return os.str();
}

CommandResult cmd_replay(const json& record, double tolerance) {
  const std::string command = record.at("command").get<std::string>();
  RunOptions o = options_from_json(record.value("options", json::object()));
  const json& params = record.at("parameters");
  CommandResult r;
  std::string key = "per_copy";
  if (command == "divergence") {
    auto ch = params.at("channels");
    r = cmd_divergence(ch.at(0).get<std::string>(), ch.at(1).get<std::string>(), o);
  } else if (command == "classical-capacity") {
    r = cmd_classical_capacity(params.at("channels").at(0).get<std::string>(), o);
  } else if (command == "quantum-capacity") {
    r = cmd_quantum_capacity(params.at("channels").at(0).get<std::string>(), o);
  } else if (command == "beta") {
    r = cmd_beta(params.at("channels").at(0).get<std::string>(), o);
    key = "beta";
  } else if (command == "analyze-symmetry") {
    r = cmd_analyze_symmetry(params.at("dx"), params.at("dy"), o.k, params.value("group", std::string()));
    const bool same = r.record["report"] == record.at("report");
    r.record["replay"] = {{"matches", same}};
    r.text += same ? "replay: report matches\n" : "replay: report DIFFERS\n";
    return r;
  } else if (command == "solve-sdpa") {
    r = cmd_solve_sdpa(params.at("path").get<std::string>(), o);
    key = "objective";
  } else {
    throw ParseError("cannot replay command '" + command + "'");
  }
  const double before = record.at("values").at(key).get<double>();
  const double after = r.record["values"][key].get<double>();
  const double diff = std::abs(before - after);
  const bool ok = diff <= tolerance * std::max(1.0, std::abs(before));
  r.record["replay"] = {{"recorded", before}, {"reproduced", after}, {"difference", diff}, {"matches", ok}};
  std::ostringstream os;
  os << "replay: recorded " << fmt(before, 9) << ", reproduced " << fmt(after, 9) << (ok ? " (match)" : " (MISMATCH)")
     << "\n";
  r.text += os.str();
  return r;
}

}  // namespace symcap
