#ifndef LADMM_MODEL_HPP_
#define LADMM_MODEL_HPP_

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace ladmm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

//! Raised by iterative kernels that hit their iteration cap. Carries the last estimate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

//! Elementwise soft-thresholding, the proximal map of `kappa * ||.||_1`.
template <typename Derived>
Vector shrink(const Eigen::MatrixBase<Derived>& v, double kappa) {
  if (!(kappa >= 0.0)) {
    throw std::domain_error("shrink: threshold must be non-negative");
  }
  return v.unaryExpr([kappa](double vi) {
    const double mag = std::abs(vi) - kappa;
    if (mag <= 0.0) {
      return 0.0;
    }
    return std::copysign(mag, vi);
  });
}

//! A dense block of the constraint `Ax + By = b`: `scale * D` where `D` is either a shared dense
//! matrix or the identity. Lets the LASSO split (`I` and `-A`) reuse the design matrix in place.
class LinearBlock {
 public:
  LinearBlock() = default;

  static LinearBlock dense(Matrix m, double scale = 1.0) {
    return shared(std::make_shared<const Matrix>(std::move(m)), scale);
  }

  static LinearBlock shared(std::shared_ptr<const Matrix> m, double scale = 1.0) {
    if (!m) {
      throw std::invalid_argument("LinearBlock: null matrix");
    }
    LinearBlock block;
    block.rows_ = m->rows();
    block.cols_ = m->cols();
    block.matrix_ = std::move(m);
    block.scale_ = scale;
    return block;
  }

  static LinearBlock identity(Index size, double scale = 1.0) {
    LinearBlock block;
    block.rows_ = size;
    block.cols_ = size;
    block.scale_ = scale;
    return block;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  double scale() const noexcept { return scale_; }
  bool is_identity() const noexcept { return matrix_ == nullptr; }

  Vector apply(const Vector& u) const {
    if (is_identity()) {
      return scale_ * u;
    }
    Vector out = *matrix_ * u;
    if (scale_ != 1.0) {
      out *= scale_;
    }
    return out;
  }

  Vector apply_transpose(const Vector& u) const {
    if (is_identity()) {
      return scale_ * u;
    }
    Vector out = matrix_->transpose() * u;
    if (scale_ != 1.0) {
      out *= scale_;
    }
    return out;
  }

  //! Frobenius norm of the Gram matrix (scale D)^T (scale D), via the smaller of D^T D and D D^T.
  double gram_frobenius_norm() const {
    const double s2 = scale_ * scale_;
    if (is_identity()) {
      return s2 * std::sqrt(static_cast<double>(rows_));
    }
    if (matrix_->rows() < matrix_->cols()) {
      return s2 * (*matrix_ * matrix_->transpose()).norm();
    }
    return s2 * (matrix_->transpose() * *matrix_).norm();
  }

  Matrix to_dense() const {
    if (is_identity()) {
      return scale_ * Matrix::Identity(rows_, cols_);
    }
    return scale_ * *matrix_;
  }

 private:
  std::shared_ptr<const Matrix> matrix_;
  Index rows_ = 0;
  Index cols_ = 0;
  double scale_ = 1.0;
};

//! Which norm of B^T B sets the scale of the proximal coefficient (initial delta, floor, cap).
//! The spectral norm is the tight curvature bound; the Frobenius norm is a larger, cheaper scale.
enum class GramNorm { spectral, frobenius };

inline const char* to_string(GramNorm g) { return g == GramNorm::spectral ? "spectral" : "frobenius"; }

struct PowerIterationOptions {
  int max_iterations = 5000;
  double rel_tolerance = 1e-9;
};

//! Largest eigenvalue of the Gram operator `u -> M^T (M u)`, i.e. ||M^T M||.
//!
//! Power iteration from the normalized all-ones vector. Stops when two successive Rayleigh
//! quotients agree to `rel_tolerance`; throws ConvergenceError (with the last quotient) otherwise.
template <typename ApplyFn, typename ApplyTransposeFn>
double gram_spectral_norm(Index cols, ApplyFn&& apply, ApplyTransposeFn&& apply_transpose,
                          const PowerIterationOptions& opts = {}) {
  if (cols <= 0) {
    throw std::invalid_argument("spectral_norm: empty matrix");
  }
  Vector u = Vector::Ones(cols) / std::sqrt(static_cast<double>(cols));
  double rayleigh = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vector mu = apply(u);
    const double next = mu.squaredNorm();
    Vector gu = apply_transpose(mu);
    const double gnorm = gu.norm();
    if (gnorm == 0.0) {
      return next;
    }
    if (it > 0 && std::abs(next - rayleigh) <= opts.rel_tolerance * next) {
      return next;
    }
    rayleigh = next;
    u = gu / gnorm;
  }
  throw ConvergenceError("spectral_norm: power iteration did not converge", rayleigh);
}

template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m, const PowerIterationOptions& opts = {}) {
  if (m.size() == 0) {
    throw std::invalid_argument("spectral_norm: empty matrix");
  }
  return gram_spectral_norm(
      m.cols(), [&](const Vector& u) -> Vector { return m * u; },
      [&](const Vector& v) -> Vector { return m.transpose() * v; }, opts);
}

inline double spectral_norm(const LinearBlock& m, const PowerIterationOptions& opts = {}) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw std::invalid_argument("spectral_norm: empty matrix");
  }
  if (m.is_identity()) {
    return m.scale() * m.scale();
  }
  return gram_spectral_norm(
      m.cols(), [&](const Vector& u) { return m.apply(u); },
      [&](const Vector& v) { return m.apply_transpose(v); }, opts);
}

//! The two-block problem  min theta1(x) + theta2(y)  s.t.  Ax + By = b,  with x, y unconstrained.
//!
//! theta1 and theta2 enter only through their oracles:
//!  - `x_oracle(y, By, lambda, beta)` returns the exact minimizer over x of the augmented
//!    Lagrangian at (y, lambda). `By` is passed so callers need not recompute it.
//!  - `y_prox(p, w)` returns argmin_y theta2(y) + (w/2)||y - p||^2.
//!  - `objective(x, y, By)` is an optional scalar recorded along the trace.
struct SplitProblem {
  using XOracle =
      std::function<Vector(const Vector& y, const Vector& by, const Vector& lambda, double beta)>;
  using YProx = std::function<Vector(const Vector& point, double weight)>;
  using Objective = std::function<double(const Vector& x, const Vector& y, const Vector& by)>;

  LinearBlock mat_a;
  LinearBlock mat_b;
  Vector rhs_b;
  XOracle x_oracle;
  YProx y_prox_oracle;
  Objective objective;
  double btb_norm = 0.0;       //!< ||B^T B||_2 = lambda_max(B^T B).
  double btb_frobenius = 0.0;  //!< ||B^T B||_F.

  Index m() const noexcept { return rhs_b.size(); }
  Index n1() const noexcept { return mat_a.cols(); }
  Index n2() const noexcept { return mat_b.cols(); }

  //! Checks shapes and oracles; fills `btb_norm` (power iteration) and `btb_frobenius` when they
  //! are left at zero.
  void validate() {
    if (mat_a.rows() != rhs_b.size() || mat_b.rows() != rhs_b.size()) {
      throw std::invalid_argument("SplitProblem: A, B and b disagree on the row dimension");
    }
    if (n1() == 0 || n2() == 0) {
      throw std::invalid_argument("SplitProblem: empty variable block");
    }
    if (!x_oracle || !y_prox_oracle) {
      throw std::invalid_argument("SplitProblem: missing subproblem oracle");
    }
    if (!(btb_norm >= 0.0) || !std::isfinite(btb_norm) || !(btb_frobenius >= 0.0) ||
        !std::isfinite(btb_frobenius)) {
      throw std::invalid_argument("SplitProblem: Gram norms must be finite and non-negative");
    }
    if (btb_norm == 0.0) {
      btb_norm = spectral_norm(mat_b);
    }
    if (btb_frobenius == 0.0) {
      btb_frobenius = mat_b.gram_frobenius_norm();
    }
  }

  double gram_scale(GramNorm which) const {
    return which == GramNorm::spectral ? btb_norm : btb_frobenius;
  }

  //! Column-rank deficits (n1 - rank A, n2 - rank B) by dense QR. Only sensible for small blocks.
  std::pair<Index, Index> column_rank_deficiency() const {
    const Matrix a = mat_a.to_dense();
    const Matrix b = mat_b.to_dense();
    const Index rank_a = Eigen::ColPivHouseholderQR<Matrix>(a).rank();
    const Index rank_b = Eigen::ColPivHouseholderQR<Matrix>(b).rank();
    return {a.cols() - rank_a, b.cols() - rank_b};
  }
};

//! (x, y, lambda) plus the previous y for difference terms. The pair (y, lambda) is the reduced
//! iterate used by the convergence analysis.
struct Iterate {
  Vector x;
  Vector y;
  Vector y_prev;
  Vector lambda;

  bool all_finite() const {
    return x.allFinite() && y.allFinite() && y_prev.allFinite() && lambda.allFinite();
  }
};

//! y = 0, lambda = 0 and x from one x-update at that point.
inline Iterate make_initial_iterate(const SplitProblem& problem, double beta) {
  Iterate it;
  it.y = Vector::Zero(problem.n2());
  it.y_prev = it.y;
  it.lambda = Vector::Zero(problem.m());
  it.x = problem.x_oracle(it.y, Vector::Zero(problem.m()), it.lambda, beta);
  return it;
}

}  // namespace ladmm

#endif  // LADMM_MODEL_HPP_
