#ifndef REWL1_BPDN_HPP
#define REWL1_BPDN_HPP

#include <rewl1/convex.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rewl1 {

namespace detail {

// Largest s such that ||r + s v||^2 < delta^2 (r strictly inside).
inline double ball_step(const Vector& r, const Vector& v, double delta) {
  const double aa = v.squaredNorm();
  if (aa == 0.0) return std::numeric_limits<double>::infinity();
  const double bb = 2.0 * r.dot(v);
  const double cc = r.squaredNorm() - delta * delta;
  const double disc = std::max(0.0, bb * bb - 4.0 * aa * cc);
  // Stable positive root of aa s^2 + bb s + cc = 0 with cc < 0.
  const double sq = std::sqrt(disc);
  return bb >= 0.0 ? (-2.0 * cc) / (bb + sq) : (-bb + sq) / (2.0 * aa);
}

}  // namespace detail

/// minimize sum_i w_i |x_i| subject to ||y - phi x||_2 <= delta.
///
/// Log-barrier Newton method on the epigraph form (x, u), |x| <= u, with the
/// quadratic constraint kept as a single barrier term. The u block is
/// eliminated per coordinate, leaving a dense n x n Newton system.
///
/// If delta equals the least-squares residual floor the feasible set is the
/// affine set of least-squares solutions, handled as basis pursuit on the
/// projected data. A delta below the floor is infeasible.
inline Solution solve_weighted_bpdn(const ProblemInstance& problem, const Vector& w, double delta,
                                    const SolveOptions& opts = {}) {
  opts.validate();
  const Index n = problem.n();
  detail::check_weights(w, n);
  require(delta >= 0.0 && std::isfinite(delta), ErrorCode::invalid_argument, "delta must be nonnegative");
  const Matrix& phi = problem.phi;
  const Vector& y = problem.y;
  const double yscale = 1.0 + y.lpNorm<Eigen::Infinity>();

  Solution sol;
  if (delta >= y.norm()) {
    sol.x = Vector::Zero(n);
    sol.status = SolveStatus::optimal;
    return sol;
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(phi);
  Vector x = cod.solve(y);
  const double floor = (y - phi * x).norm();
  const double band = opts.feas_tol * yscale;
  if (delta < floor - band) {
    sol.x = x;
    sol.status = SolveStatus::infeasible;
    sol.feas_residual = (floor - delta) / yscale;
    return sol;
  }
  if (delta <= floor + band) {
    ProblemInstance projected(phi, phi * x, problem.noise_sigma);
    sol = solve_weighted_bp(projected, w, opts);
    sol.feas_residual = std::max(0.0, (y - phi * sol.x).norm() - delta) / yscale;
    return sol;
  }

  const double wscale = w.maxCoeff();
  const Vector ws = w / wscale;
  const Matrix gram = phi.transpose() * phi;
  const double nconstr = static_cast<double>(2 * n + 1);

  Vector u = 0.95 * x.cwiseAbs() + Vector::Constant(n, 0.10 * x.cwiseAbs().maxCoeff());
  u = u.cwiseMax(1e-12);
  double tau = std::max(nconstr / std::max(ws.dot(x.cwiseAbs()), 1e-12), 1.0);
  const double mu_factor = 10.0;
  const int newton_cap = 60;
  const int total_cap = 10 * opts.max_iter;
  int total_newton = 0;
  bool converged = false;

  auto barrier = [&](const Vector& xv, const Vector& uv, const Vector& r) {
    const double q = 0.5 * (delta * delta - r.squaredNorm());
    const Vector a = uv - xv;
    const Vector b = uv + xv;
    if (q <= 0.0 || (a.array() <= 0.0).any() || (b.array() <= 0.0).any())
      return std::numeric_limits<double>::infinity();
    return tau * ws.dot(uv) - a.array().log().sum() - b.array().log().sum() - std::log(q);
  };

  Vector r = phi * x - y;
  Eigen::LLT<Matrix> chol;
  Matrix hess(n, n);
  while (total_newton < total_cap) {
    for (int it = 0; it < newton_cap && total_newton < total_cap; ++it, ++total_newton) {
      const double q = 0.5 * (delta * delta - r.squaredNorm());
      const Vector g = phi.transpose() * r;
      const Array ia = (u - x).cwiseInverse().array();
      const Array ib = (u + x).cwiseInverse().array();
      const Vector grad_x = (ia - ib).matrix() + g / q;
      const Vector grad_u = (tau * ws.array() - ia - ib).matrix();
      const Array s11 = ia.square() + ib.square();
      const Array s12 = ib.square() - ia.square();

      hess = gram / q;
      hess.noalias() += (g / q) * (g / q).transpose();
      hess.diagonal().array() += s11 - s12.square() / s11;
      chol.compute(hess);
      if (chol.info() != Eigen::Success) {
        hess.diagonal().array() += 1e-14 * hess.diagonal().maxCoeff();
        chol.compute(hess);
        if (chol.info() != Eigen::Success) break;
      }
      const Vector rhs = -grad_x.array() + s12 * grad_u.array() / s11;
      const Vector dx = chol.solve(rhs);
      const Vector du = (-grad_u.array() - s12 * dx.array()) / s11;
      const double decrement = -(grad_x.dot(dx) + grad_u.dot(du));
      if (!std::isfinite(decrement) || decrement / 2.0 < 1e-12) break;

      // Stay strictly feasible, then backtrack on the barrier value.
      const Vector dphi = phi * dx;
      double smax = detail::ball_step(r, dphi, delta);
      for (Index i = 0; i < n; ++i) {
        const double da = du[i] - dx[i];
        const double db = du[i] + dx[i];
        if (da < 0.0) smax = std::min(smax, (u[i] - x[i]) / -da);
        if (db < 0.0) smax = std::min(smax, (u[i] + x[i]) / -db);
      }
      double s = std::min(1.0, 0.99 * smax);
      const double f0 = barrier(x, u, r);
      Vector xn, un, rn;
      for (int bt = 0; bt < 60; ++bt) {
        xn = x + s * dx;
        un = u + s * du;
        rn = r + s * dphi;
        if (barrier(xn, un, rn) <= f0 - 0.01 * s * decrement) break;
        s *= 0.5;
      }
      if (s < 1e-16) break;
      x = std::move(xn);
      u = std::move(un);
      r = std::move(rn);
    }
    const double obj = ws.dot(x.cwiseAbs());
    if (nconstr / tau <= opts.tol * (1.0 + obj)) {
      converged = true;
      break;
    }
    tau *= mu_factor;
  }

  sol.x = x;
  sol.objective = detail::weighted_l1(w, x);
  sol.iterations = total_newton;
  sol.feas_residual = std::max(0.0, (y - phi * x).norm() - delta) / yscale;
  sol.status = converged ? SolveStatus::optimal : SolveStatus::max_iter;
  return sol;
}

}  // namespace rewl1

#endif  // REWL1_BPDN_HPP
