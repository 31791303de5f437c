#ifndef LADMM_SOLVERS_HPP_
#define LADMM_SOLVERS_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ladmm/model.hpp"

namespace ladmm {

//! Parameters shared by the adaptive and the fixed-proximal solvers.
struct SolverConfig {
  double beta = 1.0;             //!< Penalty parameter, also the dual step.
  double tau = 1.1;              //!< Backtracking multiplier for delta.
  double eta = 1.1;              //!< Escalation factor for the delta floor.
  double epsilon = 5.0 / 11.0;   //!< Acceptance constant, in (0, 1/2).
  double delta0_frac = 0.75;     //!< delta_0 = delta0_frac * ||B^T B||.
  double delta_min_frac = 0.05;  //!< Initial floor delta_min = delta_min_frac * ||B^T B||.
  GramNorm gram_norm = GramNorm::frobenius;  //!< Norm used for ||B^T B|| in the delta rules.
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  int max_iters = 10000;
  int max_backtracks_per_iter = 200;
  bool record_iterates = false;  //!< Keep (x, y, lambda, delta) per iteration for diagnostics.

  void validate() const {
    auto fail = [](const char* what) { throw std::invalid_argument(std::string("SolverConfig: ") + what); };
    if (!(beta > 0.0)) fail("beta must be > 0");
    if (!(tau > 1.0)) fail("tau must be > 1");
    if (!(eta > 1.0)) fail("eta must be > 1");
    if (!(epsilon > 0.0 && epsilon < 0.5)) fail("epsilon must lie in (0, 1/2)");
    if (!(delta0_frac > 0.0)) fail("delta0_frac must be > 0");
    if (!(delta_min_frac > 0.0)) fail("delta_min_frac must be > 0");
    if (!(eps_abs >= 0.0) || !(eps_rel >= 0.0)) fail("stopping tolerances must be >= 0");
    if (max_iters <= 0) fail("max_iters must be positive");
    if (max_backtracks_per_iter <= 0) fail("max_backtracks_per_iter must be positive");
  }
};

//! Everything the adaptive rule mutates between iterations.
struct AdaptiveState {
  double delta_k = 0.0;
  double delta_prev = 0.0;
  double delta_min = 0.0;
  int backtracks_this_iter = 0;
  double xi_running_sum = 0.0;
};

struct IterationRecord {
  int iter = 0;  //!< 1-based outer iteration index.
  double primal_res = 0.0;
  double dual_res = 0.0;
  double delta_k = 0.0;      //!< Proximal coefficient used for this step (after backtracking).
  double delta_entry = 0.0;  //!< delta_k before backtracking.
  double objective = 0.0;
  int backtracks = 0;
  double elapsed_ms = 0.0;
  double xi_running_sum = 0.0;
  double delta_min = 0.0;  //!< Floor after this iteration's escalation.
};

//! Full iterate after an accepted step together with the delta that produced it.
struct IterateSnapshot {
  Vector x;
  Vector y;
  Vector lambda;
  double delta = 0.0;
};

enum class Termination { converged, max_iters, numerical_failure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::max_iters:
      return "max_iters";
    case Termination::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

struct FailureInfo {
  std::string message;
  double delta_k = 0.0;
  double dy_norm = 0.0;
  double b_dy_norm = 0.0;
};

struct RunSummary {
  Termination reason = Termination::max_iters;
  int iterations = 0;
  double wall_seconds = 0.0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double objective = 0.0;
  std::vector<IterationRecord> trace;
  Iterate final_iterate;
  std::optional<FailureInfo> failure;
  //! Empty unless SolverConfig::record_iterates. Entry 0 is the initial iterate.
  std::vector<IterateSnapshot> snapshots;
};

//! Result of the residual-based stopping test.
struct StopTest {
  bool stop = false;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double eps_pri = 0.0;
  double eps_dual = 0.0;
};

namespace detail {

//! Residuals ||Ax + By - b|| and ||beta * B dy|| with tolerances
//!   eps_pri  = sqrt(n2) eps_abs + eps_rel max(||Ax||, ||By||, ||b||)
//!   eps_dual = sqrt(n2) eps_abs + eps_rel ||y||
//! For the LASSO split (A = I, B = -A_design, b = 0) these are exactly ||x - A y|| and
//! ||beta A (y+ - y)|| with the usual max(||x||, ||A y||) scale.
inline StopTest stop_test(const Vector& ax, const Vector& by, const Vector& rhs, const Vector& y_new,
                          const Vector& b_dy, double beta, double eps_abs, double eps_rel) {
  StopTest out;
  out.primal_res = (ax + by - rhs).norm();
  out.dual_res = beta * b_dy.norm();
  const double root_n = std::sqrt(static_cast<double>(y_new.size()));
  const double scale = std::max({ax.norm(), by.norm(), rhs.norm()});
  out.eps_pri = root_n * eps_abs + eps_rel * scale;
  out.eps_dual = root_n * eps_abs + eps_rel * y_new.norm();
  out.stop = out.primal_res < out.eps_pri && out.dual_res < out.eps_dual;
  return out;
}

inline bool nearly_unchanged(double dy_norm, double y_scale) {
  return dy_norm <= 1e-14 * (1.0 + y_scale);
}

}  // namespace detail

//! Linearized y-step: prox_{theta2 / (delta beta)} at
//!   y - (1 / (delta beta)) B^T (beta (A x + B y - b) - lambda).
//! `it.x` must already hold the new x.
inline Vector y_update_linearized(const SplitProblem& problem, const Iterate& it, double beta,
                                  double delta) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("y_update_linearized: delta must be > 0");
  }
  const Vector residual = problem.mat_a.apply(it.x) + problem.mat_b.apply(it.y) - problem.rhs_b;
  const Vector grad = problem.mat_b.apply_transpose(beta * residual - it.lambda);
  const double weight = delta * beta;
  return problem.y_prox_oracle(it.y - grad / weight, weight);
}

inline Vector lambda_update(const SplitProblem& problem, const Iterate& it, double beta) {
  Vector next =
      it.lambda - beta * (problem.mat_a.apply(it.x) + problem.mat_b.apply(it.y) - problem.rhs_b);
  if (!next.allFinite()) {
    throw std::runtime_error("lambda_update: non-finite multiplier");
  }
  return next;
}

//! Acceptance test of the backtracking loop. True when
//!   delta ||dy||^2 > (1 / (2 eps)) ||B dy||^2     (strict)
//! or when dy vanishes, i.e. ||dy|| <= 1e-14 (1 + y_scale) with y_scale = ||y^k||.
inline bool accept_step(double delta_k, const Vector& dy, const Vector& b_dy, double epsilon,
                        double y_scale = 0.0) {
  const double dy_sq = dy.squaredNorm();
  if (detail::nearly_unchanged(std::sqrt(dy_sq), y_scale)) {
    return true;
  }
  return delta_k * dy_sq > b_dy.squaredNorm() / (2.0 * epsilon);
}

//! Multiplies the floor by eta when delta grew relative to the previous iteration.
inline AdaptiveState escalate_delta_min(AdaptiveState state, double eta) {
  if (state.delta_k > state.delta_prev) {
    state.delta_min *= eta;
  }
  return state;
}

//! ||B dy||^2 / ||dy||^2, or `fallback` when dy vanishes.
inline double bb_quotient(const Vector& dy, const Vector& b_dy, double fallback,
                          double y_scale = 0.0) {
  const double dy_sq = dy.squaredNorm();
  if (dy_sq == 0.0 || detail::nearly_unchanged(std::sqrt(dy_sq), y_scale)) {
    return fallback;
  }
  return b_dy.squaredNorm() / dy_sq;
}

inline double next_delta(double h, double delta_min, double btb_norm) {
  return std::max(h, std::min(delta_min, btb_norm));
}

//! Stopping test on an iterate whose `x`, `y` hold the new values and `y_prev` the previous y.
inline StopTest check_stop(const Iterate& it, const SplitProblem& problem,
                           const SolverConfig& config) {
  const Vector ax = problem.mat_a.apply(it.x);
  const Vector by = problem.mat_b.apply(it.y);
  const Vector b_dy = problem.mat_b.apply(it.y - it.y_prev);
  return detail::stop_test(ax, by, problem.rhs_b, it.y, b_dy, config.beta, config.eps_abs,
                           config.eps_rel);
}

//! Steps 2-4 of the adaptive scheme: backtracking acceptance, floor escalation and the
//! Rayleigh-quotient proposal for the next delta.
class AdaptiveDelta {
 public:
  AdaptiveDelta(const SolverConfig& config, double btb_norm)
      : tau_(config.tau), eta_(config.eta), epsilon_(config.epsilon), btb_norm_(btb_norm) {
    if (!(btb_norm > 0.0)) {
      throw std::invalid_argument("AdaptiveDelta: ||B^T B|| must be > 0");
    }
    state_.delta_k = config.delta0_frac * btb_norm;
    state_.delta_prev = state_.delta_k;
    state_.delta_min = config.delta_min_frac * btb_norm;
  }

  double delta() const noexcept { return state_.delta_k; }
  const AdaptiveState& state() const noexcept { return state_; }

  bool accept(const Vector& dy, const Vector& b_dy, double y_scale) const {
    return accept_step(state_.delta_k, dy, b_dy, epsilon_, y_scale);
  }

  void backtrack() {
    state_.delta_k *= tau_;
    ++state_.backtracks_this_iter;
  }

  void begin_iteration() { state_.backtracks_this_iter = 0; }

  void finish_iteration(const Vector& dy, const Vector& b_dy, double y_scale) {
    state_ = escalate_delta_min(state_, eta_);
    state_.xi_running_sum += std::max(0.0, state_.delta_k - state_.delta_prev);
    const double h = bb_quotient(dy, b_dy, state_.delta_k, y_scale);
    state_.delta_prev = state_.delta_k;
    state_.delta_k = next_delta(h, state_.delta_min, btb_norm_);
  }

 private:
  AdaptiveState state_;
  double tau_;
  double eta_;
  double epsilon_;
  double btb_norm_;
};

//! Fixed proximal coefficient delta0_frac * ||B^T B||; every step is accepted.
class FixedDelta {
 public:
  FixedDelta(const SolverConfig& config, double btb_norm) {
    state_.delta_k = config.delta0_frac * btb_norm;
    state_.delta_prev = state_.delta_k;
    state_.delta_min = state_.delta_k;
  }

  double delta() const noexcept { return state_.delta_k; }
  const AdaptiveState& state() const noexcept { return state_; }
  bool accept(const Vector&, const Vector&, double) const { return true; }
  void backtrack() {}
  void begin_iteration() {}
  void finish_iteration(const Vector&, const Vector&, double) {}

 private:
  AdaptiveState state_;
};

//! Linearized ADMM main loop. Per outer iteration: x-update, y-update with backtracking on delta
//! (x does not depend on delta, so only the y-step is redone), multiplier update, delta bookkeeping,
//! stopping test, record.
template <typename DeltaRule>
RunSummary run_linearized_admm(const SplitProblem& problem, const SolverConfig& config,
                               Iterate init) {
  config.validate();
  if (init.y.size() != problem.n2() || init.lambda.size() != problem.m()) {
    throw std::invalid_argument("run_linearized_admm: initial iterate has wrong dimensions");
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const double beta = config.beta;

  DeltaRule rule(config, problem.gram_scale(config.gram_norm));
  RunSummary summary;
  Iterate it = std::move(init);
  if (it.x.size() != problem.n1()) {
    it.x = problem.x_oracle(it.y, problem.mat_b.apply(it.y), it.lambda, beta);
  }
  it.y_prev = it.y;
  Vector by = problem.mat_b.apply(it.y);
  if (config.record_iterates) {
    summary.snapshots.push_back({it.x, it.y, it.lambda, rule.delta()});
  }

  auto finish = [&](Termination reason) {
    summary.reason = reason;
    summary.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (!summary.trace.empty()) {
      summary.primal_res = summary.trace.back().primal_res;
      summary.dual_res = summary.trace.back().dual_res;
      summary.objective = summary.trace.back().objective;
    }
    summary.final_iterate = it;
    return summary;
  };

  for (int k = 0; k < config.max_iters; ++k) {
    Vector x_new = problem.x_oracle(it.y, by, it.lambda, beta);
    const Vector ax = problem.mat_a.apply(x_new);
    const Vector grad = problem.mat_b.apply_transpose(beta * (ax + by - problem.rhs_b) - it.lambda);
    const double y_scale = it.y.norm();

    rule.begin_iteration();
    const double delta_entry = rule.delta();
    int backtracks = 0;
    Vector y_new;
    Vector by_new;
    Vector dy;
    Vector b_dy;
    while (true) {
      const double weight = rule.delta() * beta;
      y_new = problem.y_prox_oracle(it.y - grad / weight, weight);
      by_new = problem.mat_b.apply(y_new);
      dy = y_new - it.y;
      b_dy = by_new - by;
      if (rule.accept(dy, b_dy, y_scale)) {
        break;
      }
      if (backtracks == config.max_backtracks_per_iter || !y_new.allFinite()) {
        summary.failure = FailureInfo{"backtracking cap exceeded", rule.delta(), dy.norm(),
                                      b_dy.norm()};
        return finish(Termination::numerical_failure);
      }
      rule.backtrack();
      ++backtracks;
    }
    const double delta_used = rule.delta();

    Vector lambda_new = it.lambda - beta * (ax + by_new - problem.rhs_b);
    if (!x_new.allFinite() || !y_new.allFinite() || !lambda_new.allFinite()) {
      summary.failure = FailureInfo{"non-finite iterate", delta_used, dy.norm(), b_dy.norm()};
      return finish(Termination::numerical_failure);
    }

    rule.finish_iteration(dy, b_dy, y_scale);
    const StopTest stop = detail::stop_test(ax, by_new, problem.rhs_b, y_new, b_dy, beta,
                                            config.eps_abs, config.eps_rel);

    IterationRecord rec;
    rec.iter = k + 1;
    rec.primal_res = stop.primal_res;
    rec.dual_res = stop.dual_res;
    rec.delta_k = delta_used;
    rec.delta_entry = delta_entry;
    rec.objective = problem.objective ? problem.objective(x_new, y_new, by_new)
                                      : std::numeric_limits<double>::quiet_NaN();
    rec.backtracks = backtracks;
    rec.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    rec.xi_running_sum = rule.state().xi_running_sum;
    rec.delta_min = rule.state().delta_min;
    summary.trace.push_back(rec);
    summary.iterations = k + 1;

    it.y_prev = std::move(it.y);
    it.x = std::move(x_new);
    it.y = std::move(y_new);
    it.lambda = std::move(lambda_new);
    by = std::move(by_new);
    if (config.record_iterates) {
      summary.snapshots.push_back({it.x, it.y, it.lambda, delta_used});
    }
    if (stop.stop) {
      return finish(Termination::converged);
    }
  }
  return finish(Termination::max_iters);
}

//! Adaptive linearized ADMM.
inline RunSummary solve_adaptive(const SplitProblem& problem, const SolverConfig& config,
                                 Iterate init) {
  return run_linearized_admm<AdaptiveDelta>(problem, config, std::move(init));
}

inline RunSummary solve_adaptive(const SplitProblem& problem, const SolverConfig& config) {
  return solve_adaptive(problem, config, make_initial_iterate(problem, config.beta));
}

//! Linearized ADMM with the proximal coefficient fixed at delta0_frac * ||B^T B||.
//! Same loop as solve_adaptive without backtracking or delta updates.
inline RunSummary solve_oladmm(const SplitProblem& problem, const SolverConfig& config,
                               Iterate init) {
  return run_linearized_admm<FixedDelta>(problem, config, std::move(init));
}

inline RunSummary solve_oladmm(const SplitProblem& problem, const SolverConfig& config) {
  return solve_oladmm(problem, config, make_initial_iterate(problem, config.beta));
}

}  // namespace ladmm

#endif  // LADMM_SOLVERS_HPP_
