#ifndef LADMM_CLI_HPP_
#define LADMM_CLI_HPP_

#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ladmm/bench.hpp"

namespace ladmm::cli {

inline constexpr const char* kThreadsEnv = "LADMM_THREADS";

//! "1000x1500,1000x2000" -> sizes
inline std::vector<bench::SizePoint> parse_sizes(const std::string& text) {
  std::vector<bench::SizePoint> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw std::invalid_argument("bad size '" + item + "', want MxN");
    bench::SizePoint p{std::stoll(item.substr(0, x)), std::stoll(item.substr(x + 1))};
    if (p.m < 1 || p.n < 1) throw std::invalid_argument("sizes must be positive: " + item);
    out.push_back(p);
  }
  return out;
}

//! Registers every flag on `app`, writing into `spec`. Call `finalize` after parsing.
class Options {
 public:
  void attach(CLI::App& app, bench::RunSpec& spec) {
    app.add_option("--m", m_, "Rows of the design matrix")->check(CLI::PositiveNumber);
    app.add_option("--n", n_, "Columns of the design matrix")->check(CLI::PositiveNumber);
    app.add_option("--sizes", sizes_, "Comma-separated MxN list, e.g. 1000x1500,1000x2000");
    app.add_option("--grid", grid_, "Named size grid")
        ->check(CLI::IsMember({"full", "desk"}));
    app.add_option("--seeds", spec.seeds, "Instance seeds")->delimiter(',');
    app.add_option("--solver", solver_, "Solvers to run")
        ->check(CLI::IsMember({"adaptive", "oladmm", "both"}));
    auto& c = spec.config;
    app.add_option("--beta", c.beta, "Penalty parameter");
    app.add_option("--tau", c.tau, "Backtracking multiplier (> 1)");
    app.add_option("--eta", c.eta, "Floor escalation factor (> 1)");
    app.add_option("--epsilon", c.epsilon, "Acceptance constant in (0, 1/2)");
    app.add_option("--delta0-frac", c.delta0_frac, "delta_0 as a fraction of ||B^T B||");
    app.add_option("--delta-min-frac", c.delta_min_frac, "Initial floor as a fraction of ||B^T B||");
    app.add_option("--gram-norm", gram_norm_, "Norm of B^T B used to scale delta")
        ->check(CLI::IsMember({"frobenius", "spectral"}));
    app.add_option("--eps-abs", c.eps_abs, "Absolute stopping tolerance");
    app.add_option("--eps-rel", c.eps_rel, "Relative stopping tolerance");
    app.add_option("--max-iters", c.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    app.add_flag("--trace", spec.trace, "Write per-iteration CSV traces");
    app.add_flag("--diagnostics", spec.diagnostics, "Run convergence checks, write diagnostics.json");
    app.add_flag("--export-instances", spec.export_instances, "Write generated instances as .bin");
    app.add_option("--instance", spec.instance_path, "Solve a saved instance instead of generating");
    app.add_option("--out", spec.out_dir, "Output directory");
    app.add_option("--threads", threads_, "Parallel cells (default: $LADMM_THREADS or 1)");
  }

  void finalize(bench::RunSpec& spec) const {
    if (!grid_.empty()) {
      spec.sizes = grid_ == "full" ? bench::full_grid() : bench::desk_grid();
    } else if (!sizes_.empty()) {
      spec.sizes = parse_sizes(sizes_);
    } else if (m_ > 0 || n_ > 0) {
      if (m_ <= 0 || n_ <= 0) throw std::invalid_argument("--m and --n must be given together");
      spec.sizes = {{m_, n_}};
    }
    spec.run_adaptive = solver_ != "oladmm";
    spec.run_oladmm = solver_ != "adaptive";
    spec.config.gram_norm =
        gram_norm_ == "spectral" ? GramNorm::spectral : GramNorm::frobenius;
    if (threads_ > 0) {
      spec.threads = threads_;
    } else if (const char* env = std::getenv(kThreadsEnv)) {
      spec.threads = std::max(1, std::atoi(env));
    }
    spec.validate();
  }

 private:
  long long m_ = 0;
  long long n_ = 0;
  std::string sizes_;
  std::string grid_;
  std::string solver_ = "both";
  std::string gram_norm_ = "frobenius";
  int threads_ = 0;
};

//! Parses argv into a validated RunSpec. Throws CLI::ParseError or std::invalid_argument.
inline bench::RunSpec parse(int argc, const char* const* argv) {
  CLI::App app{"Adaptive linearized ADMM LASSO benchmark"};
  bench::RunSpec spec;
  Options opts;
  opts.attach(app, spec);
  app.parse(argc, argv);
  opts.finalize(spec);
  return spec;
}

}  // namespace ladmm::cli

#endif  // LADMM_CLI_HPP_
