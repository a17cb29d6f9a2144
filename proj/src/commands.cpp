#include "qtraj/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qtraj/artifacts.hpp"
#include "qtraj/config.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/lindblad.hpp"

namespace qtraj {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::filesystem::path output_dir(const RunConfig& cfg, const SimulateOptions& options) {
  return options.output_dir ? *options.output_dir : cfg.output.directory;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
}

json jnum(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json base_manifest(const RunConfig& cfg, const Problem& p, const std::string& command) {
  json m;
  m["schema_version"] = kSchemaVersion;
  m["command"] = command;
  m["config_hash"] = cfg.hash;
  m["seed"] = cfg.engine.seed;
  m["dimension"] = p.basis->dimension();
  m["columns"] = p.observables.columns();
  json ch = json::array();
  for (const auto& c : p.channels) ch.push_back(c.label);
  m["channels"] = ch;
  return m;
}

// Series a directory contributes to a comparison: master.csv if present,
// else the ensemble mean from aggregate.csv.
RunRecord summary_series(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir / "master.csv")) return read_csv(dir / "master.csv").select("master");
  if (std::filesystem::exists(dir / "aggregate.csv")) return read_csv(dir / "aggregate.csv").select("mean");
  throw InvalidArgument(dir.string() + ": no master.csv or aggregate.csv");
}

std::map<std::string, double> parse_tolerance(const std::string& spec) {
  std::map<std::string, double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const std::string key = eq == std::string::npos ? "default" : item.substr(0, eq);
    const std::string val = eq == std::string::npos ? item : item.substr(eq + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(val, &used);
      if (used != val.size() || !(v >= 0.0)) throw std::invalid_argument(val);
      out[key] = v;
    } catch (const std::exception&) {
      throw ConfigError("bad tolerance entry '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int cmd_simulate(const std::filesystem::path& config, const SimulateOptions& options, std::ostream& log) {
  const auto start = Clock::now();
  const RunConfig cfg = load_config(config);
  const Problem p = build_problem(cfg, cfg.dimension_cap);
  const int workers = options.workers ? *options.workers : worker_count();
  if (cfg.output.write_density && p.basis->dimension() > cfg.master_dimension_cap) {
    throw DimensionCapExceeded(p.basis->dimension(), cfg.master_dimension_cap);
  }
  log << "simulate: dimension " << p.basis->dimension() << ", " << cfg.n_traj << " trajectories, " << workers
      << " workers\n";

  const EnsembleInput input{p.psi0, p.h0, p.channels, cfg.engine, cfg.branch};
  const auto runs = run_ensemble(input, p.observables, cfg.n_traj, workers);

  const auto dir = output_dir(cfg, options);
  std::filesystem::create_directories(dir);
  write_text(dir / "config.yaml", cfg.source_text);
  for (const auto& r : runs) write_series_csv(dir / ("traj_" + r.traj_id + ".csv"), r);
  std::vector<EnsembleSeries> agg;
  for (const auto& c : p.observables.columns()) agg.push_back(ensemble_mean(runs, c));
  write_aggregate_csv(dir / "aggregate.csv", p.observables.columns(), agg);
  std::vector<std::string> labels;
  for (const auto& c : p.channels) labels.push_back(c.label);
  write_jump_log(dir / "jumps.csv", runs, labels);
  if (cfg.output.write_density) {
    const auto rhos = ensemble_density(input, cfg.n_traj, workers);
    write_density_csv(dir / "density.csv", runs.front().times, rhos, "ensemble");
  }

  json m = base_manifest(cfg, p, "simulate");
  m["n_traj"] = cfg.n_traj;
  m["branch"] = cfg.branch == JumpMode::NoJump ? "no_jump" : "stochastic";
  json counts = json::array();
  for (const auto& r : runs) counts.push_back(r.jumps.size());
  m["jump_counts"] = counts;
  m["wall_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  log << "simulate: wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_master(const std::filesystem::path& config, const SimulateOptions& options, std::ostream& log) {
  const auto start = Clock::now();
  const RunConfig cfg = load_config(config);
  const Problem p = build_problem(cfg, cfg.master_dimension_cap);
  log << "master: dimension " << p.basis->dimension() << "\n";

  LindbladOptions lo;
  lo.control.dt_max = cfg.engine.dt_max;
  lo.dimension_cap = cfg.master_dimension_cap;
  RunRecord rec;
  rec.traj_id = "master";
  rec.columns = p.observables.columns();
  const auto grid = sample_times(cfg.engine.t_final, cfg.engine.sample_interval);
  const auto rhos = lindblad_evolve(pure_density(p.psi0), p.h0, p.channels, grid, lo, [&](double t, const DenseMatrix& rho) {
    rec.times.push_back(t);
    rec.values.push_back(p.observables.evaluate(rho));
  });

  const auto dir = output_dir(cfg, options);
  std::filesystem::create_directories(dir);
  write_text(dir / "config.yaml", cfg.source_text);
  write_series_csv(dir / "master.csv", rec);
  if (cfg.output.write_density) write_density_csv(dir / "density.csv", grid, rhos, "master");

  json m = base_manifest(cfg, p, "master");
  m["n_traj"] = 0;
  m["jump_counts"] = json::array();
  m["wall_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  log << "master: wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_compare(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b,
                const std::optional<std::string>& tolerance, std::ostream& out) {
  const auto tol = tolerance ? parse_tolerance(*tolerance) : std::map<std::string, double>{};
  auto tol_for = [&](const std::string& name) -> std::optional<double> {
    if (auto it = tol.find(name); it != tol.end()) return it->second;
    if (auto it = tol.find("default"); it != tol.end()) return it->second;
    return std::nullopt;
  };
  const RunRecord a = summary_series(dir_a);
  const RunRecord b = summary_series(dir_b);
  if (a.times.size() != b.times.size()) {
    throw InvalidArgument("time grids differ: " + std::to_string(a.times.size()) + " vs " +
                          std::to_string(b.times.size()) + " samples");
  }
  for (std::size_t t = 0; t < a.times.size(); ++t) {
    if (std::abs(a.times[t] - b.times[t]) > 1e-9 * std::max(1.0, std::abs(a.times[t]))) {
      throw InvalidArgument("time grids differ at sample " + std::to_string(t));
    }
  }

  json report;
  report["dir_a"] = dir_a.string();
  report["dir_b"] = dir_b.string();
  report["samples"] = a.times.size();
  json obs = json::object();
  bool pass = true;
  std::vector<std::string> only_a, only_b;
  for (const auto& c : a.columns) {
    if (std::find(b.columns.begin(), b.columns.end(), c) == b.columns.end()) {
      only_a.push_back(c);
      continue;
    }
    const auto sa = a.series(c), sb = b.series(c);
    double mx = 0.0, sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < sa.size(); ++t) {
      const double d = std::abs(sa[t] - sb[t]);
      if (std::isnan(d)) continue;
      mx = std::max(mx, d);
      sum += d;
      ++n;
    }
    json e;
    e["max_abs"] = n ? json(mx) : json(nullptr);
    e["mean_abs"] = n ? json(sum / double(n)) : json(nullptr);
    if (const auto limit = tol_for(c); limit && n) {
      e["tolerance"] = *limit;
      e["pass"] = mx <= *limit;
      pass = pass && mx <= *limit;
    }
    obs[c] = e;
  }
  for (const auto& c : b.columns)
    if (std::find(a.columns.begin(), a.columns.end(), c) == a.columns.end()) only_b.push_back(c);
  report["observables"] = obs;
  report["only_in_a"] = only_a;
  report["only_in_b"] = only_b;

  if (std::filesystem::exists(dir_a / "density.csv") && std::filesystem::exists(dir_b / "density.csv")) {
    std::vector<double> ta, tb;
    const auto ra = read_density_csv(dir_a / "density.csv", ta);
    const auto rb = read_density_csv(dir_b / "density.csv", tb);
    if (ra.size() != rb.size() || (!ra.empty() && ra.front().rows() != rb.front().rows())) {
      throw InvalidArgument("density files differ in shape");
    }
    json td = json::array();
    double mx = 0.0;
    for (std::size_t t = 0; t < ra.size(); ++t) {
      const double d = trace_distance(ra[t], rb[t]);
      td.push_back({{"time", ta[t]}, {"trace_distance", d}});
      mx = std::max(mx, d);
    }
    json e;
    e["max"] = mx;
    e["final"] = ra.empty() ? 0.0 : trace_distance(ra.back(), rb.back());
    e["series"] = td;
    if (const auto limit = tol_for("trace_distance")) {
      e["tolerance"] = *limit;
      e["pass"] = mx <= *limit;
      pass = pass && mx <= *limit;
    }
    report["trace_distance"] = e;
  }
  report["pass"] = pass;
  out << report.dump(2) << "\n";
  return pass ? kExitOk : kExitToleranceFailed;
}

int cmd_analyze(const std::filesystem::path& dir, const std::string& observable, std::ostream& out) {
  std::vector<RunRecord> runs;
  if (std::filesystem::exists(dir / "master.csv")) {
    runs.push_back(read_csv(dir / "master.csv").select("master"));
  } else {
    runs = read_trajectories(dir);
  }
  if (runs.empty()) throw InvalidArgument(dir.string() + ": no trajectory or master CSV files");
  const auto& cols = runs.front().columns;
  if (std::find(cols.begin(), cols.end(), observable) == cols.end()) {
    std::string avail;
    for (const auto& c : cols) avail += (avail.empty() ? "" : ", ") + c;
    throw ConfigError("observable '" + observable + "' not found; available: " + avail);
  }
  const auto s = ensemble_mean(runs, observable);
  const auto late = late_window_mean(s);
  json r;
  r["observable"] = observable;
  r["runs"] = s.runs;
  r["time"] = s.times;
  json mean = json::array(), se = json::array();
  for (std::size_t t = 0; t < s.times.size(); ++t) {
    mean.push_back(jnum(s.mean[t]));
    se.push_back(jnum(s.std_error[t]));
  }
  r["mean"] = mean;
  r["std_error"] = se;
  r["late_window"] = {{"fraction", 0.25}, {"mean", jnum(late.mean)}, {"std_error", jnum(late.std_error)}};
  out << r.dump(2) << "\n";
  return kExitOk;
}

int guarded(const std::function<int()>& command, std::ostream& err) {
  try {
    return command();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DimensionCapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitDimensionCap;
  } catch (const NumericalFailure& e) {
    err << "error: numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qtraj
