#ifndef REWL1_CONVEX_HPP
#define REWL1_CONVEX_HPP

#include <rewl1/lp_ipm.hpp>
#include <rewl1/types.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace rewl1 {

struct SolveOptions {
  double tol = 1e-8;       // relative duality gap
  double feas_tol = 1e-9;  // constraint violation, scaled by 1 + ||data||_inf
  int max_iter = 100;

  void validate() const {
    require(tol > 0.0 && feas_tol > 0.0, ErrorCode::invalid_argument, "tolerances must be positive");
    require(max_iter >= 1, ErrorCode::invalid_argument, "max_iter must be positive");
  }
};

enum class SolveStatus { optimal, max_iter, infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max-iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

struct Solution {
  Vector x;
  double objective = 0.0;  // weighted l1 value at x
  SolveStatus status = SolveStatus::max_iter;
  std::optional<Vector> certificate;  // dual nu for equality-constrained problems
  double feas_residual = 0.0;         // scaled constraint violation at x
  int iterations = 0;
};

using SupportSet = std::vector<Index>;

namespace detail {

inline double weighted_l1(const Vector& w, const Vector& v) { return w.dot(v.cwiseAbs()); }

inline void check_weights(const Vector& w, Index len) {
  require(w.size() == len, ErrorCode::invalid_argument, "weight vector has the wrong length");
  require(w.allFinite() && (w.array() > 0.0).all(), ErrorCode::invalid_argument,
          "weights must be finite and strictly positive");
}

inline ipm::Options to_ipm(const SolveOptions& o) { return {o.tol, o.feas_tol, o.max_iter}; }

inline double equality_residual(const Matrix& phi, const Vector& x, const Vector& y) {
  return (phi * x - y).lpNorm<Eigen::Infinity>() / (1.0 + y.lpNorm<Eigen::Infinity>());
}

/// Least-squares residual of y against range(phi), scaled like equality_residual.
inline double range_residual(const Matrix& phi, const Vector& y) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(phi);
  const Vector r = y - phi * cod.solve(y);
  return r.lpNorm<Eigen::Infinity>() / (1.0 + y.lpNorm<Eigen::Infinity>());
}

/// Minimum-norm correction onto {x : phi x = y} for a full-row-rank phi.
inline void polish_equality(const Matrix& phi, const Vector& y, Vector& x) {
  const Vector r = y - phi * x;
  Eigen::LDLT<Matrix> gram(phi * phi.transpose());
  if (gram.info() == Eigen::Success) x += phi.transpose() * gram.solve(r);
}

inline SolveStatus status_from(ipm::Status s) {
  return s == ipm::Status::optimal ? SolveStatus::optimal : SolveStatus::max_iter;
}

/// Runs min w'|L x - l| s.t. [A x = b], [|F'F x - f| <= delta] through the IPM.
/// The weights are rescaled to unit max internally; the objective is reported
/// on the original scale.
struct EpigraphLp {
  const Matrix* L = nullptr;
  Vector l;  // offset, length p
  const Matrix* A = nullptr;
  Vector b;
  const Matrix* F = nullptr;
  Vector f;
  double delta = 0.0;
};

inline ipm::Result run_epigraph(Index n, const EpigraphLp& lp, const Vector& w,
                                const SolveOptions& opts, double& wscale) {
  ipm::EpigraphKkt kkt(n, {lp.L, lp.A, lp.F});
  const Index p = kkt.p();
  wscale = w.maxCoeff();
  Vector c = Vector::Zero(kkt.nx());
  c.tail(p) = w / wscale;
  Vector h(kkt.nz());
  const Vector l = lp.l.size() ? lp.l : Vector::Zero(p);
  h.segment(0, p) = l;
  h.segment(p, p) = -l;
  if (lp.F) {
    h.segment(2 * p, n) = lp.f.array() + lp.delta;
    h.segment(2 * p + n, n) = lp.delta - lp.f.array();
  }
  const Vector b = lp.A ? lp.b : Vector(0);
  return ipm::solve(kkt, c, h, b, to_ipm(opts));
}

}  // namespace detail

/// minimize sum_i w_i |x_i| subject to phi x = y.
inline Solution solve_weighted_bp(const ProblemInstance& problem, const Vector& w,
                                  const SolveOptions& opts = {}) {
  opts.validate();
  const Index n = problem.n();
  detail::check_weights(w, n);
  Solution sol;
  if (detail::range_residual(problem.phi, problem.y) > opts.feas_tol) {
    sol.x = Vector::Zero(n);
    sol.status = SolveStatus::infeasible;
    sol.feas_residual = detail::equality_residual(problem.phi, sol.x, problem.y);
    return sol;
  }
  if (problem.y.isZero(0.0)) {
    sol.x = Vector::Zero(n);
    sol.status = SolveStatus::optimal;
    sol.certificate = Vector::Zero(problem.m());
    return sol;
  }

  detail::EpigraphLp lp;
  lp.A = &problem.phi;
  lp.b = problem.y;
  double wscale = 1.0;
  const auto res = detail::run_epigraph(n, lp, w, opts, wscale);
  sol.x = res.x.head(n);
  detail::polish_equality(problem.phi, problem.y, sol.x);
  sol.objective = detail::weighted_l1(w, sol.x);
  sol.certificate = Vector(-res.y * wscale);
  sol.iterations = res.iterations;
  sol.feas_residual = detail::equality_residual(problem.phi, sol.x, problem.y);
  sol.status = detail::status_from(res.status);
  if (sol.feas_residual > opts.feas_tol) sol.status = SolveStatus::max_iter;
  return sol;
}

/// minimize sum_i w_i |x_i| subject to ||phi' (y - phi x)||_inf <= delta.
inline Solution solve_weighted_dantzig(const ProblemInstance& problem, const Vector& w, double delta,
                                       const SolveOptions& opts = {}) {
  opts.validate();
  const Index n = problem.n();
  detail::check_weights(w, n);
  require(delta >= 0.0, ErrorCode::invalid_argument, "delta must be nonnegative");
  const Vector corr = problem.phi.transpose() * problem.y;
  Solution sol;
  if (corr.lpNorm<Eigen::Infinity>() <= delta) {
    sol.x = Vector::Zero(n);
    sol.status = SolveStatus::optimal;
    return sol;
  }

  detail::EpigraphLp lp;
  lp.F = &problem.phi;
  lp.f = corr;
  lp.delta = delta;
  double wscale = 1.0;
  const auto res = detail::run_epigraph(n, lp, w, opts, wscale);
  sol.x = res.x.head(n);
  sol.objective = detail::weighted_l1(w, sol.x);
  sol.iterations = res.iterations;
  const Vector c = problem.phi.transpose() * (problem.y - problem.phi * sol.x);
  const double viol = std::max(0.0, c.lpNorm<Eigen::Infinity>() - delta);
  sol.feas_residual = viol / (1.0 + corr.lpNorm<Eigen::Infinity>());
  sol.status = detail::status_from(res.status);
  if (sol.feas_residual > opts.feas_tol) sol.status = SolveStatus::max_iter;
  return sol;
}

/// minimize sum_i w_i |y_i - (phi x)_i| for a tall phi of full column rank.
/// w has length m.
inline Solution solve_weighted_residual_l1(const ProblemInstance& problem, const Vector& w,
                                           const SolveOptions& opts = {}) {
  opts.validate();
  const Index m = problem.m();
  const Index n = problem.n();
  require(m >= n, ErrorCode::invalid_argument, "residual l1 needs a tall matrix (m >= n)");
  detail::check_weights(w, m);
  Eigen::ColPivHouseholderQR<Matrix> qr(problem.phi);
  if (qr.rank() < n) throw Error(ErrorCode::rank_deficient, "phi must have full column rank");

  Solution sol;
  detail::EpigraphLp lp;
  lp.L = &problem.phi;
  lp.l = problem.y;
  double wscale = 1.0;
  const auto res = detail::run_epigraph(n, lp, w, opts, wscale);
  sol.x = res.x.head(n);
  sol.objective = detail::weighted_l1(w, problem.y - problem.phi * sol.x);
  sol.iterations = res.iterations;
  sol.status = detail::status_from(res.status);
  return sol;
}

/// Least-squares fit of y on the columns in `support`; zero elsewhere.
inline Vector least_squares_on_support(const ProblemInstance& problem, const SupportSet& support) {
  const Index n = problem.n();
  Vector x = Vector::Zero(n);
  if (support.empty()) return x;
  for (std::size_t a = 0; a < support.size(); ++a) {
    require(support[a] >= 0 && support[a] < n, ErrorCode::invalid_argument, "support index out of range");
    for (std::size_t b = 0; b < a; ++b)
      require(support[a] != support[b], ErrorCode::invalid_argument, "duplicate support index");
  }
  const auto k = static_cast<Index>(support.size());
  Matrix cols(problem.m(), k);
  for (Index j = 0; j < k; ++j) cols.col(j) = problem.phi.col(support[static_cast<std::size_t>(j)]);
  Eigen::ColPivHouseholderQR<Matrix> qr(cols);
  if (qr.rank() < k) throw Error(ErrorCode::singular, "selected columns are linearly dependent");
  const Vector coef = qr.solve(problem.y);
  for (Index j = 0; j < k; ++j) x[support[static_cast<std::size_t>(j)]] = coef[j];
  return x;
}

struct VerifyResult {
  bool pass = false;
  std::string reason;
  explicit operator bool() const { return pass; }
};

/// Checks the first-order optimality certificate of weighted basis pursuit:
/// feasibility, and a dual nu with |phi'nu| <= w (1 + tol) everywhere and
/// phi'nu = w sign(x) on the support. nu is the least-squares solution of the
/// support equations.
inline VerifyResult verify_bp_optimality(const ProblemInstance& problem, const Vector& w, const Vector& x,
                                         double tol = 1e-6, double feas_tol = 1e-9) {
  detail::check_weights(w, problem.n());
  const double resid = (problem.phi * x - problem.y).lpNorm<Eigen::Infinity>();
  if (resid > feas_tol * (1.0 + problem.y.lpNorm<Eigen::Infinity>())) {
    return {false, "infeasible: ||phi x - y||_inf = " + std::to_string(resid)};
  }
  const double xmax = std::max(1.0, x.lpNorm<Eigen::Infinity>());
  std::vector<Index> supp;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > 1e-6 * xmax) supp.push_back(i);

  Vector nu = Vector::Zero(problem.m());
  if (!supp.empty()) {
    const auto k = static_cast<Index>(supp.size());
    Matrix a(k, problem.m());
    Vector rhs(k);
    for (Index j = 0; j < k; ++j) {
      const Index i = supp[static_cast<std::size_t>(j)];
      a.row(j) = problem.phi.col(i).transpose();
      rhs[j] = w[i] * (x[i] > 0.0 ? 1.0 : -1.0);
    }
    nu = a.completeOrthogonalDecomposition().solve(rhs);
    const Vector fit = a * nu - rhs;
    for (Index j = 0; j < k; ++j) {
      const Index i = supp[static_cast<std::size_t>(j)];
      if (std::abs(fit[j]) > tol * std::max(1.0, w[i])) {
        return {false, "suboptimal: support conditions have no dual solution (index " +
                           std::to_string(i) + ")"};
      }
    }
  }
  const Vector corr = problem.phi.transpose() * nu;
  for (Index i = 0; i < corr.size(); ++i) {
    if (std::abs(corr[i]) > w[i] * (1.0 + tol)) {
      return {false, "suboptimal: dual bound violated at index " + std::to_string(i) + " (|phi'nu| = " +
                         std::to_string(std::abs(corr[i])) + " > w = " + std::to_string(w[i]) + ")"};
    }
  }
  return {true, "optimal"};
}

}  // namespace rewl1

#endif  // REWL1_CONVEX_HPP
