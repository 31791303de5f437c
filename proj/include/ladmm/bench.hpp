#ifndef LADMM_BENCH_HPP_
#define LADMM_BENCH_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ladmm/diagnostics.hpp"
#include "ladmm/instance_io.hpp"
#include "ladmm/lasso.hpp"
#include "ladmm/solvers.hpp"

// Benchmark driver: runs both solvers over a grid of (m, n, seed) LASSO instances and writes
//
//   <out>/report.json        rows + aggregates, deterministic
//   <out>/table.txt          per-size table, deterministic
//   <out>/traces/*.csv       per-iteration traces (--trace)
//   <out>/diagnostics.json   convergence checks per row (--diagnostics)
//   <out>/metadata.json      wall-clock times, timestamp, thread count
//   <out>/metadata/timing/*.csv  per-iteration elapsed_ms (--trace)
namespace ladmm::bench {

inline constexpr const char* kReportVersion = "ladmm-report/1";

enum class SolverKind { oladmm, adaptive };

inline const char* to_string(SolverKind s) { return s == SolverKind::adaptive ? "adaptive" : "oladmm"; }

struct SizePoint {
  Index m = 0;
  Index n = 0;
  auto operator<=>(const SizePoint&) const = default;
};

//! Benchmark sizes from 1000x1500 up to 4000x5000.
inline std::vector<SizePoint> full_grid() {
  return {{1000, 1500}, {1000, 2000}, {1500, 3000}, {2000, 3000},
          {2000, 4000}, {3000, 4000}, {3000, 5000}, {4000, 5000}};
}

//! full_grid() with every dimension divided by ten.
inline std::vector<SizePoint> desk_grid() {
  auto grid = full_grid();
  for (auto& s : grid) {
    s.m /= 10;
    s.n /= 10;
  }
  return grid;
}

struct RunSpec {
  std::vector<SizePoint> sizes{{1000, 1500}};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool run_adaptive = true;
  bool run_oladmm = true;
  SolverConfig config;
  std::string out_dir = "out";
  bool trace = false;
  bool diagnostics = false;
  bool export_instances = false;
  std::string instance_path;  //!< When set, solve this instance instead of generating.
  int threads = 1;

  void validate() const {
    if (instance_path.empty()) {
      if (sizes.empty()) throw std::invalid_argument("RunSpec: no sizes");
      if (seeds.empty()) throw std::invalid_argument("RunSpec: at least one seed is required");
      for (const auto& s : sizes) {
        if (s.m < 1 || s.n < 1) throw std::invalid_argument("RunSpec: m and n must be >= 1");
      }
    }
    if (!run_adaptive && !run_oladmm) throw std::invalid_argument("RunSpec: no solver selected");
    if (threads < 1) throw std::invalid_argument("RunSpec: threads must be >= 1");
    config.validate();
  }
};

struct Row {
  Index m = 0;
  Index n = 0;
  std::uint64_t seed = 0;
  SolverKind solver = SolverKind::adaptive;
  Termination reason = Termination::max_iters;
  int iterations = 0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double sigma = 0.0;
  double wall_seconds = 0.0;
  std::string failure;
  std::vector<IterationRecord> trace;
  nlohmann::ordered_json diagnostics;  //!< null unless requested

  auto key() const { return std::make_tuple(m, n, static_cast<int>(solver), seed); }
};

inline void sort_rows(std::vector<Row>& rows) {
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.key() < b.key(); });
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct Aggregate {
  Index m = 0;
  Index n = 0;
  SolverKind solver = SolverKind::adaptive;
  int runs = 0;
  int converged = 0;
  double median_iters = 0.0;
  int min_iters = 0;
  int max_iters = 0;
  double median_primal = 0.0;
  double median_dual = 0.0;
};

//! Aggregates per (m, n, solver), in row order. Rows must be sorted.
inline std::vector<Aggregate> aggregate(const std::vector<Row>& rows) {
  std::vector<Aggregate> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    std::vector<double> iters, p, q;
    Aggregate a;
    a.m = rows[i].m;
    a.n = rows[i].n;
    a.solver = rows[i].solver;
    a.min_iters = rows[i].iterations;
    a.max_iters = rows[i].iterations;
    while (j < rows.size() && rows[j].m == a.m && rows[j].n == a.n && rows[j].solver == a.solver) {
      const Row& r = rows[j];
      ++a.runs;
      a.converged += r.reason == Termination::converged ? 1 : 0;
      iters.push_back(r.iterations);
      p.push_back(r.primal_res);
      q.push_back(r.dual_res);
      a.min_iters = std::min(a.min_iters, r.iterations);
      a.max_iters = std::max(a.max_iters, r.iterations);
      ++j;
    }
    a.median_iters = median(iters);
    a.median_primal = median(p);
    a.median_dual = median(q);
    out.push_back(a);
    i = j;
  }
  return out;
}

//! oladmm median iterations / adaptive median iterations, when both are present for a size.
inline std::optional<double> speedup(const std::vector<Aggregate>& aggs, Index m, Index n) {
  std::optional<double> ol, ad;
  for (const auto& a : aggs) {
    if (a.m != m || a.n != n) continue;
    (a.solver == SolverKind::adaptive ? ad : ol) = a.median_iters;
  }
  if (!ol || !ad || *ad <= 0.0) return std::nullopt;
  return *ol / *ad;
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trace_csv(const Row& row) {
  std::string out = "iter,primal_res,dual_res,delta_k,objective,backtracks\n";
  for (const auto& r : row.trace) {
    out += std::to_string(r.iter) + ',' + fmt_double(r.primal_res) + ',' + fmt_double(r.dual_res) +
           ',' + fmt_double(r.delta_k) + ',' + fmt_double(r.objective) + ',' +
           std::to_string(r.backtracks) + '\n';
  }
  return out;
}

inline std::string timing_csv(const Row& row) {
  std::string out = "iter,elapsed_ms\n";
  for (const auto& r : row.trace) {
    out += std::to_string(r.iter) + ',' + fmt_double(r.elapsed_ms) + '\n';
  }
  return out;
}

inline std::string cell_name(const Row& r) {
  return std::string(to_string(r.solver)) + "_m" + std::to_string(r.m) + "_n" +
         std::to_string(r.n) + "_s" + std::to_string(r.seed);
}

//! One line per size, Table layout on the aggregated medians. Deterministic: no timings.
inline std::string format_table(const std::vector<Row>& sorted_rows) {
  const auto aggs = aggregate(sorted_rows);
  std::vector<SizePoint> sizes;
  for (const auto& a : aggs) {
    if (sizes.empty() || sizes.back() != SizePoint{a.m, a.n}) sizes.push_back({a.m, a.n});
  }
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%6s %6s | %-8s %8s %10s %10s | %-8s %8s %10s %10s | %7s\n", "m",
                "n", "solver", "iter", "||p||", "||q||", "solver", "iter", "||p||", "||q||",
                "speedup");
  out += buf;
  for (const auto& s : sizes) {
    std::string cols[2];
    for (const auto& a : aggs) {
      if (a.m != s.m || a.n != s.n) continue;
      std::snprintf(buf, sizeof buf, "%-8s %8.1f %10.5f %10.5f", to_string(a.solver),
                    a.median_iters, a.median_primal, a.median_dual);
      cols[a.solver == SolverKind::adaptive ? 1 : 0] = buf;
    }
    for (auto& c : cols) {
      if (c.empty()) {
        std::snprintf(buf, sizeof buf, "%-8s %8s %10s %10s", "-", "-", "-", "-");
        c = buf;
      }
    }
    const auto sp = speedup(aggs, s.m, s.n);
    std::string sp_text = "-";
    if (sp) {
      std::snprintf(buf, sizeof buf, "%.2f", *sp);
      sp_text = buf;
    }
    std::snprintf(buf, sizeof buf, "%6lld %6lld | %s | %s | %7s\n", static_cast<long long>(s.m),
                  static_cast<long long>(s.n), cols[0].c_str(), cols[1].c_str(), sp_text.c_str());
    out += buf;
  }
  return out;
}

inline nlohmann::ordered_json spec_json(const RunSpec& spec) {
  nlohmann::ordered_json j;
  auto sizes = nlohmann::ordered_json::array();
  for (const auto& s : spec.sizes) sizes.push_back({{"m", s.m}, {"n", s.n}});
  j["sizes"] = sizes;
  j["seeds"] = spec.seeds;
  j["solvers"] = nlohmann::ordered_json::array();
  if (spec.run_oladmm) j["solvers"].push_back("oladmm");
  if (spec.run_adaptive) j["solvers"].push_back("adaptive");
  if (!spec.instance_path.empty()) j["instance"] = spec.instance_path;
  const auto& c = spec.config;
  j["config"] = {{"beta", c.beta},
                 {"tau", c.tau},
                 {"eta", c.eta},
                 {"epsilon", c.epsilon},
                 {"delta0_frac", c.delta0_frac},
                 {"delta_min_frac", c.delta_min_frac},
                 {"gram_norm", to_string(c.gram_norm)},
                 {"eps_abs", c.eps_abs},
                 {"eps_rel", c.eps_rel},
                 {"max_iters", c.max_iters},
                 {"max_backtracks_per_iter", c.max_backtracks_per_iter}};
  j["trace"] = spec.trace;
  j["diagnostics"] = spec.diagnostics;
  return j;
}

//! Report on sorted rows; independent of timings and thread count.
inline nlohmann::ordered_json compare_report(const RunSpec& spec, const std::vector<Row>& rows) {
  nlohmann::ordered_json j;
  j["version"] = kReportVersion;
  j["spec"] = spec_json(spec);
  auto jrows = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json jr = {{"m", r.m},
                                 {"n", r.n},
                                 {"seed", r.seed},
                                 {"solver", to_string(r.solver)},
                                 {"termination", to_string(r.reason)},
                                 {"iterations", r.iterations},
                                 {"primal_res", r.primal_res},
                                 {"dual_res", r.dual_res},
                                 {"objective", r.objective},
                                 {"kkt_residual", r.kkt_residual},
                                 {"sigma", r.sigma}};
    if (!r.failure.empty()) jr["failure"] = r.failure;
    jrows.push_back(jr);
  }
  j["rows"] = jrows;
  const auto aggs = aggregate(rows);
  auto jaggs = nlohmann::ordered_json::array();
  for (const auto& a : aggs) {
    nlohmann::ordered_json ja = {{"m", a.m},
                                 {"n", a.n},
                                 {"solver", to_string(a.solver)},
                                 {"runs", a.runs},
                                 {"converged", a.converged},
                                 {"median_iterations", a.median_iters},
                                 {"min_iterations", a.min_iters},
                                 {"max_iterations", a.max_iters},
                                 {"median_primal_res", a.median_primal},
                                 {"median_dual_res", a.median_dual}};
    if (a.solver == SolverKind::adaptive) {
      if (const auto sp = speedup(aggs, a.m, a.n)) ja["speedup_vs_oladmm"] = *sp;
    }
    jaggs.push_back(ja);
  }
  j["aggregates"] = jaggs;
  return j;
}

//! Convergence checks for one recorded run. `reference` is a converged high-accuracy solve.
inline nlohmann::ordered_json diagnose(const SplitProblem& problem, const SolverConfig& config,
                                       const RunSummary& run, const RunSummary& reference) {
  nlohmann::ordered_json d;
  d["m_identity_max_rel_error"] = diagnostics::check_m_identity(problem, run.snapshots, config.beta);
  d["multiplier_identity_max_rel_error"] =
      diagnostics::multiplier_identity_error(problem, run.snapshots, config.beta);
  if (problem.n2() + problem.m() <= diagnostics::kDenseTheoryLimit) {
    d["q_equals_hm_max_abs_error"] = diagnostics::max_q_hm_error(problem, run.snapshots, config.beta);
  }
  d["unaccepted_steps"] = diagnostics::count_unaccepted_steps(problem, run.snapshots, config.epsilon);
  if (reference.reason == Termination::converged) {
    const auto desc =
        diagnostics::check_descent(problem, run.snapshots, reference, config.beta, config.epsilon);
    d["descent"] = {{"checked", desc.checked},
                    {"violations", desc.violations},
                    {"worst_excess", desc.worst_excess}};
  } else {
    d["descent"] = "reference did not converge";
  }
  const auto bt = diagnostics::check_backtracks(run, problem.btb_norm, config);
  d["backtracks"] = {{"max", bt.max_backtracks}, {"bound_violations", bt.violations}};
  d["xi"] = {{"sum", bt.xi_sum},
             {"budget", diagnostics::xi_budget(config, problem.gram_scale(config.gram_norm))},
             {"monotone", bt.xi_monotone}};
  return d;
}

inline Row make_row(const lasso::LassoInstance& inst, SolverKind kind, const RunSummary& run) {
  Row r;
  r.m = inst.m();
  r.n = inst.n();
  r.seed = inst.seed;
  r.solver = kind;
  r.reason = run.reason;
  r.iterations = run.iterations;
  r.primal_res = run.primal_res;
  r.dual_res = run.dual_res;
  r.objective = run.objective;
  r.sigma = inst.sigma;
  r.kkt_residual = lasso::kkt_residual(inst, run.final_iterate.y);
  r.wall_seconds = run.wall_seconds;
  if (run.failure) r.failure = run.failure->message;
  r.trace = run.trace;
  return r;
}

//! Runs the requested solvers on one instance.
inline std::vector<Row> run_instance(const lasso::LassoInstance& inst, const RunSpec& spec) {
  const SplitProblem problem = lasso::to_split_form(inst);
  SolverConfig config = spec.config;
  config.record_iterates = spec.diagnostics;
  std::optional<RunSummary> reference;
  if (spec.diagnostics) {
    SolverConfig tight = spec.config;
    tight.eps_abs *= 1e-3;
    tight.eps_rel *= 1e-3;
    tight.max_iters = std::max(tight.max_iters, 100000);
    reference = solve_adaptive(problem, tight);
  }
  std::vector<Row> rows;
  for (SolverKind kind : {SolverKind::oladmm, SolverKind::adaptive}) {
    if ((kind == SolverKind::adaptive && !spec.run_adaptive) ||
        (kind == SolverKind::oladmm && !spec.run_oladmm)) {
      continue;
    }
    const RunSummary run = kind == SolverKind::adaptive ? solve_adaptive(problem, config)
                                                        : solve_oladmm(problem, config);
    Row row = make_row(inst, kind, run);
    if (reference) {
      row.diagnostics = diagnose(problem, config, run, *reference);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

//! All cells, spread over `spec.threads` workers, returned sorted by (m, n, solver, seed).
inline std::vector<Row> run_cells(const RunSpec& spec) {
  spec.validate();
  std::vector<Row> rows;
  if (!spec.instance_path.empty()) {
    rows = run_instance(lasso::load_instance(spec.instance_path), spec);
    sort_rows(rows);
    return rows;
  }
  std::vector<std::pair<SizePoint, std::uint64_t>> cells;
  for (const auto& s : spec.sizes) {
    for (auto seed : spec.seeds) cells.emplace_back(s, seed);
  }
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= cells.size()) return;
      try {
        const auto inst = lasso::generate(cells[i].first.m, cells[i].first.n, cells[i].second);
        if (spec.export_instances) {
          const auto dir = std::filesystem::path(spec.out_dir) / "instances";
          std::filesystem::create_directories(dir);
          lasso::save_instance((dir / ("m" + std::to_string(inst.m()) + "_n" +
                                       std::to_string(inst.n()) + "_s" +
                                       std::to_string(inst.seed) + ".bin"))
                                   .string(),
                               inst);
        }
        auto cell_rows = run_instance(inst, spec);
        std::lock_guard lock(mu);
        for (auto& r : cell_rows) rows.push_back(std::move(r));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(spec.threads, static_cast<int>(cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  sort_rows(rows);
  return rows;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

//! Writes every artifact for sorted `rows` under spec.out_dir.
inline void write_artifacts(const RunSpec& spec, const std::vector<Row>& rows) {
  namespace fs = std::filesystem;
  const fs::path out(spec.out_dir);
  fs::create_directories(out);
  write_file(out / "report.json", compare_report(spec, rows).dump(2) + "\n");
  write_file(out / "table.txt", format_table(rows));
  if (spec.trace) {
    fs::create_directories(out / "traces");
    fs::create_directories(out / "metadata" / "timing");
    for (const auto& r : rows) {
      write_file(out / "traces" / (cell_name(r) + ".csv"), trace_csv(r));
      write_file(out / "metadata" / "timing" / (cell_name(r) + ".csv"), timing_csv(r));
    }
  }
  if (spec.diagnostics) {
    nlohmann::ordered_json d;
    d["version"] = kReportVersion;
    for (const auto& r : rows) d[cell_name(r)] = r.diagnostics;
    write_file(out / "diagnostics.json", d.dump(2) + "\n");
  }
  nlohmann::ordered_json meta;
  meta["version"] = kReportVersion;
  meta["generated_at"] = utc_timestamp();
  meta["threads"] = spec.threads;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    cells.push_back({{"cell", cell_name(r)}, {"wall_seconds", r.wall_seconds}});
  }
  meta["cells"] = cells;
  write_file(out / "metadata.json", meta.dump(2) + "\n");
}

//! Runs, writes artifacts, prints a table with wall times. Returns the process exit status:
//! 0 unless every row ended in numerical failure.
inline int run(const RunSpec& spec, std::ostream& log) {
  const auto rows = run_cells(spec);
  write_artifacts(spec, rows);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%6s %6s %5s %-8s %-17s %6s %9s %11s %11s\n", "m", "n", "seed",
                "solver", "termination", "iter", "wall(s)", "||p||", "||q||");
  log << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%6lld %6lld %5llu %-8s %-17s %6d %9.3f %11.6f %11.6f\n",
                  static_cast<long long>(r.m), static_cast<long long>(r.n),
                  static_cast<unsigned long long>(r.seed), to_string(r.solver),
                  to_string(r.reason), r.iterations, r.wall_seconds, r.primal_res, r.dual_res);
    log << buf;
  }
  log << '\n' << format_table(rows);
  const bool all_failed =
      std::all_of(rows.begin(), rows.end(),
                  [](const Row& r) { return r.reason == Termination::numerical_failure; });
  return rows.empty() || all_failed ? 1 : 0;
}

}  // namespace ladmm::bench

#endif  // LADMM_BENCH_HPP_
