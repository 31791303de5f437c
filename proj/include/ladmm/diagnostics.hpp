#ifndef LADMM_DIAGNOSTICS_HPP_
#define LADMM_DIAGNOSTICS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ladmm/model.hpp"
#include "ladmm/solvers.hpp"

// Post-hoc checks of the convergence machinery on recorded runs. All checks work on the
// reduced iterate v = (y, lambda), ordered y first.
namespace ladmm::diagnostics {

//! Above this size (n2 + m) the block matrices are applied matrix-free.
inline constexpr Index kDenseTheoryLimit = 1000;

struct TheoryMatrices {
  Matrix q_k;    //!< [beta delta I, 0; -B, I/beta]
  Matrix h_k;    //!< [beta delta I, 0; 0, I/beta]
  Matrix m_mat;  //!< [I, 0; -beta B, I]
};

inline TheoryMatrices build_theory_matrices(double delta_k, double beta, const Matrix& mat_b) {
  if (!(delta_k > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("build_theory_matrices: delta and beta must be > 0");
  }
  const Index n2 = mat_b.cols();
  const Index m = mat_b.rows();
  const Index dim = n2 + m;
  TheoryMatrices t;
  t.q_k = Matrix::Zero(dim, dim);
  t.h_k = Matrix::Zero(dim, dim);
  t.m_mat = Matrix::Identity(dim, dim);

  t.q_k.topLeftCorner(n2, n2).diagonal().setConstant(beta * delta_k);
  t.q_k.bottomLeftCorner(m, n2) = -mat_b;
  t.q_k.bottomRightCorner(m, m).diagonal().setConstant(1.0 / beta);

  t.h_k.topLeftCorner(n2, n2).diagonal().setConstant(beta * delta_k);
  t.h_k.bottomRightCorner(m, m).diagonal().setConstant(1.0 / beta);

  t.m_mat.bottomLeftCorner(m, n2) = -beta * mat_b;
  return t;
}

//! max |Q - H M| over entries.
inline double q_hm_error(const TheoryMatrices& t) {
  return (t.q_k - t.h_k * t.m_mat).cwiseAbs().maxCoeff();
}

inline Vector stack(const Vector& y, const Vector& lambda) {
  Vector v(y.size() + lambda.size());
  v << y, lambda;
  return v;
}

//! Predictor built from one step: x~ = x+, y~ = y+, lambda~ = lambda - beta (A x+ + B y - b).
struct TildeIterate {
  Vector x;
  Vector y;
  Vector lambda;

  Vector v() const { return stack(y, lambda); }
};

inline TildeIterate make_tilde(const SplitProblem& problem, const IterateSnapshot& prev,
                               const IterateSnapshot& next, double beta) {
  TildeIterate t;
  t.x = next.x;
  t.y = next.y;
  t.lambda = prev.lambda - beta * (problem.mat_a.apply(next.x) + problem.mat_b.apply(prev.y) -
                                   problem.rhs_b);
  return t;
}

//! M v for M = [I, 0; -beta B, I].
inline Vector apply_m(const SplitProblem& problem, const Vector& v, double beta) {
  const Index n2 = problem.n2();
  Vector out = v;
  out.tail(problem.m()) -= beta * problem.mat_b.apply(v.head(n2));
  return out;
}

//! ||v||_H^2 for H = diag(beta delta I, I/beta).
inline double h_norm_sq(const Vector& v, Index n2, double delta, double beta) {
  return beta * delta * v.head(n2).squaredNorm() + v.tail(v.size() - n2).squaredNorm() / beta;
}

//! max_k ||(v^k - v^{k+1}) - M (v^k - v~^k)|| / (1 + ||v^k - v^{k+1}||) over a recorded run.
inline double check_m_identity(const SplitProblem& problem,
                               const std::vector<IterateSnapshot>& snapshots, double beta) {
  const bool dense = problem.n2() + problem.m() <= kDenseTheoryLimit;
  Matrix m_dense;
  if (dense && snapshots.size() > 1) {
    m_dense = build_theory_matrices(1.0, beta, problem.mat_b.to_dense()).m_mat;
  }
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const Vector vk = stack(snapshots[k].y, snapshots[k].lambda);
    const Vector vk1 = stack(snapshots[k + 1].y, snapshots[k + 1].lambda);
    const Vector vt = make_tilde(problem, snapshots[k], snapshots[k + 1], beta).v();
    const Vector lhs = vk - vk1;
    const Vector rhs = dense ? Vector(m_dense * (vk - vt)) : apply_m(problem, vk - vt, beta);
    worst = std::max(worst, (lhs - rhs).norm() / (1.0 + lhs.norm()));
  }
  return worst;
}

//! max_k ||beta (A x+ + B y+ - b) - (lambda^k - lambda^{k+1})|| / max(1, ||lambda^k||,
//! ||lambda^{k+1}||): the multiplier update read back as a residual.
inline double multiplier_identity_error(const SplitProblem& problem,
                                        const std::vector<IterateSnapshot>& snapshots,
                                        double beta) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const auto& prev = snapshots[k];
    const auto& next = snapshots[k + 1];
    const Vector residual =
        problem.mat_a.apply(next.x) + problem.mat_b.apply(next.y) - problem.rhs_b;
    const Vector diff = prev.lambda - next.lambda;
    const double scale = std::max({1.0, prev.lambda.norm(), next.lambda.norm()});
    worst = std::max(worst, (beta * residual - diff).norm() / scale);
  }
  return worst;
}

struct DescentReport {
  int checked = 0;
  int violations = 0;
  double worst_excess = 0.0;  //!< max of (lhs - rhs) / (1 + ||v^k - v*||_H^2), may be negative.
};

//! Per-step H-norm descent towards a reference (y*, lambda*):
//!   ||v+ - v*||_H^2 <= ||v - v*||_H^2 - (beta ||dy||_D^2 + (1 - 2 eps)/beta ||dlambda||^2)
//! with H = diag(beta delta_k I, I/beta) and D = delta_k I - B^T B / (2 eps). A step counts as a
//! violation when lhs - rhs exceeds 1e-10 (1 + ||v - v*||_H^2).
inline DescentReport check_descent(const SplitProblem& problem,
                                   const std::vector<IterateSnapshot>& snapshots,
                                   const Vector& y_star, const Vector& lambda_star, double beta,
                                   double epsilon, double slack = 1e-10) {
  const Index n2 = problem.n2();
  const bool dense = n2 + problem.m() <= kDenseTheoryLimit;
  Matrix b_dense;
  if (dense) {
    b_dense = problem.mat_b.to_dense();
  }
  const Vector v_star = stack(y_star, lambda_star);
  DescentReport report;
  report.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const auto& prev = snapshots[k];
    const auto& next = snapshots[k + 1];
    const double delta = next.delta;
    const Vector ek = stack(prev.y, prev.lambda) - v_star;
    const Vector ek1 = stack(next.y, next.lambda) - v_star;
    double before;
    double after;
    if (dense) {
      const Matrix h = build_theory_matrices(delta, beta, b_dense).h_k;
      before = ek.dot(h * ek);
      after = ek1.dot(h * ek1);
    } else {
      before = h_norm_sq(ek, n2, delta, beta);
      after = h_norm_sq(ek1, n2, delta, beta);
    }
    const Vector dy = next.y - prev.y;
    const double d_norm_sq =
        delta * dy.squaredNorm() - problem.mat_b.apply(dy).squaredNorm() / (2.0 * epsilon);
    const double decrease =
        beta * d_norm_sq + (1.0 - 2.0 * epsilon) / beta * (next.lambda - prev.lambda).squaredNorm();
    const double excess = (after - (before - decrease)) / (1.0 + before);
    ++report.checked;
    if (excess > slack) {
      ++report.violations;
    }
    report.worst_excess = std::max(report.worst_excess, excess);
  }
  if (report.checked == 0) {
    report.worst_excess = 0.0;
  }
  return report;
}

//! Same check against the final iterate of a converged reference run.
inline DescentReport check_descent(const SplitProblem& problem,
                                   const std::vector<IterateSnapshot>& snapshots,
                                   const RunSummary& reference, double beta, double epsilon,
                                   double slack = 1e-10) {
  if (reference.reason != Termination::converged) {
    throw std::runtime_error("check_descent: reference run did not converge");
  }
  return check_descent(problem, snapshots, reference.final_iterate.y,
                       reference.final_iterate.lambda, beta, epsilon, slack);
}

//! ceil(log_eta(||B^T B|| / delta_min0)) * ||B^T B||, the bound on the summed delta increases.
inline double xi_budget(const SolverConfig& config, double btb_scale) {
  const double ratio = 1.0 / config.delta_min_frac;
  if (ratio <= 1.0) {
    return 0.0;
  }
  return std::ceil(std::log(ratio) / std::log(config.eta)) * btb_scale;
}

//! Largest number of tau-multiplications that can be needed starting from `delta_entry`:
//! once delta > ||B^T B|| / (2 eps) the acceptance test holds for every dy.
inline int backtrack_bound(double btb_spectral, double epsilon, double tau, double delta_entry) {
  const double steps = std::log(btb_spectral / (2.0 * epsilon * delta_entry)) / std::log(tau);
  return std::max(0, static_cast<int>(std::ceil(steps)) + 1);
}

struct BacktrackReport {
  int violations = 0;
  int max_backtracks = 0;
  bool xi_monotone = true;
  double xi_sum = 0.0;
};

inline BacktrackReport check_backtracks(const RunSummary& run, double btb_spectral,
                                        const SolverConfig& config) {
  BacktrackReport r;
  double prev_xi = 0.0;
  for (const auto& rec : run.trace) {
    r.max_backtracks = std::max(r.max_backtracks, rec.backtracks);
    if (rec.backtracks >
        backtrack_bound(btb_spectral, config.epsilon, config.tau, rec.delta_entry)) {
      ++r.violations;
    }
    if (rec.xi_running_sum < prev_xi) {
      r.xi_monotone = false;
    }
    prev_xi = rec.xi_running_sum;
  }
  r.xi_sum = prev_xi;
  return r;
}

//! Re-asserts the strict acceptance inequality on every recorded step (unchanged-y steps pass).
inline int count_unaccepted_steps(const SplitProblem& problem,
                                  const std::vector<IterateSnapshot>& snapshots, double epsilon) {
  int bad = 0;
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const Vector dy = snapshots[k + 1].y - snapshots[k].y;
    if (!accept_step(snapshots[k + 1].delta, dy, problem.mat_b.apply(dy), epsilon,
                     snapshots[k].y.norm())) {
      ++bad;
    }
  }
  return bad;
}

//! max |Q - H M| over the distinct deltas of a run. Dense, so small problems only.
inline double max_q_hm_error(const SplitProblem& problem,
                             const std::vector<IterateSnapshot>& snapshots, double beta) {
  const Matrix b = problem.mat_b.to_dense();
  double worst = 0.0;
  double last_delta = -1.0;
  for (std::size_t k = 1; k < snapshots.size(); ++k) {
    if (snapshots[k].delta == last_delta) {
      continue;
    }
    last_delta = snapshots[k].delta;
    worst = std::max(worst, q_hm_error(build_theory_matrices(last_delta, beta, b)));
  }
  return worst;
}

}  // namespace ladmm::diagnostics

#endif  // LADMM_DIAGNOSTICS_HPP_
