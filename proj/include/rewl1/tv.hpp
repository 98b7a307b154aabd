#ifndef REWL1_TV_HPP
#define REWL1_TV_HPP

#include <rewl1/convex.hpp>
#include <rewl1/fourier.hpp>
#include <rewl1/image.hpp>

#include <chrono>
#include <cmath>
#include <vector>

namespace rewl1 {

struct TvOptions {
  double tol = 1e-6;       // relative primal and dual residuals
  double feas_tol = 1e-9;  // scaled measurement misfit
  int max_iter = 5000;
  int check_every = 10;

  void validate() const {
    require(tol > 0.0 && feas_tol > 0.0, ErrorCode::invalid_argument, "tolerances must be positive");
    require(max_iter >= 1 && check_every >= 1, ErrorCode::invalid_argument, "iteration counts must be positive");
  }
};

struct TvSolution {
  ImageGrid image;
  double objective = 0.0;  // weighted TV at the solution
  SolveStatus status = SolveStatus::max_iter;
  double feas_residual = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

/// minimize sum_ij w_ij ||(D x)_ij|| subject to Phi x = y.
///
/// Primal-dual hybrid gradient on min_x F(D x) + G(x), where F is the
/// weighted sum of site norms and G the indicator of the measurement set.
/// The prox of G is the exact projection through the sampler, so every
/// iterate is feasible to rounding. Step sizes satisfy tau sigma ||D||^2 < 1
/// with ||D||^2 <= 8 and are rebalanced when the primal and dual residuals
/// drift apart.
inline TvSolution solve_weighted_tv(const FourierSampler& sampler, const Vector& y, const Matrix& weights,
                                    const TvOptions& opts = {}) {
  opts.validate();
  const Index n = sampler.n();
  const Index s = n - 1;
  require(y.size() == sampler.m(), ErrorCode::invalid_argument, "measurement length mismatch");
  require(weights.rows() == s && weights.cols() == s, ErrorCode::invalid_argument,
          "TV weights must be (n-1) x (n-1)");
  require(weights.allFinite() && (weights.array() > 0.0).all(), ErrorCode::invalid_argument,
          "TV weights must be finite and strictly positive");

  // The dual variables are bounded by the weights; work with unit-max weights
  // so the step balance does not depend on their scale (the argmin does not).
  const double wscale = weights.maxCoeff();
  const Matrix radius = weights / wscale;
  const Vector zero_y = Vector::Zero(sampler.m());

  Matrix x = sampler.project(Matrix::Zero(n, n), y);
  Matrix px = Matrix::Zero(s, s), py = Matrix::Zero(s, s);
  double tau = 0.99 / std::sqrt(8.0);
  double sigma = 0.99 / std::sqrt(8.0);
  double alpha = 0.5;
  const double eta = 0.95, delta = 1.5;

  TvSolution sol;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iter && !converged; ++it) {
    const Matrix x_prev = x;
    const Matrix px_prev = px, py_prev = py;
    x = sampler.project(x - tau * gradient_adjoint(px, py), y);
    const GradientField g = gradient(2.0 * x - x_prev);
    px += sigma * g.gx;
    py += sigma * g.gy;
    const Eigen::ArrayXXd scale = (px.array().square() + py.array().square()).sqrt().cwiseQuotient(radius.array()).max(1.0);
    px.array() /= scale;
    py.array() /= scale;

    if ((it + 1) % opts.check_every != 0 && it + 1 != opts.max_iter) continue;
    // Residuals of the optimality conditions; the primal one is taken modulo
    // the normal cone of the measurement set, range(Phi').
    const Matrix dtp = gradient_adjoint(px_prev - px, py_prev - py);
    const Matrix pres = sampler.project((x_prev - x) / tau - dtp, zero_y);
    const GradientField dx = gradient(x_prev - x);
    const double dres = std::sqrt(((px_prev - px) / sigma - dx.gx).squaredNorm() +
                                  ((py_prev - py) / sigma - dx.gy).squaredNorm());
    const double pnorm = pres.norm();
    const GradientField gx_now = gradient(x);
    const double pscale = std::max(gradient_adjoint(px, py).norm(), 1e-12);
    const double dscale = std::max(std::sqrt(gx_now.gx.squaredNorm() + gx_now.gy.squaredNorm()), 1e-12);
    sol.primal_residual = pnorm / pscale;
    sol.dual_residual = dres / dscale;
    if (sol.primal_residual <= opts.tol && sol.dual_residual <= opts.tol) {
      converged = true;
      continue;
    }
    if (pnorm > delta * dres) {
      tau /= 1.0 - alpha;
      sigma *= 1.0 - alpha;
      alpha *= eta;
    } else if (pnorm < dres / delta) {
      tau *= 1.0 - alpha;
      sigma /= 1.0 - alpha;
      alpha *= eta;
    }
  }

  sol.image = ImageGrid(x);
  sol.objective = tv_norm(x, weights);
  sol.iterations = it;
  sol.feas_residual = sampler.residual(x, y);
  sol.status = converged && sol.feas_residual <= opts.feas_tol ? SolveStatus::optimal : SolveStatus::max_iter;
  return sol;
}

/// Audit trail of a reweighted TV run; entry l belongs to iteration l.
struct TvTrace {
  std::vector<ImageGrid> images;
  std::vector<Matrix> weights;          // weights used to compute images[l]
  std::vector<double> tv_unweighted;
  std::vector<double> tv_weighted;
  std::vector<double> logsum_objectives;  // sum log(||(D x)_ij|| + eps)
  std::vector<SolveStatus> inner_statuses;
  std::vector<int> inner_iterations;
  std::vector<double> wall_times;

  std::size_t size() const { return images.size(); }
  const ImageGrid& final() const { return images.back(); }
};

/// TV log-sum objective sum_ij log(||(D x)_ij|| + eps).
inline double tv_logsum_objective(const Matrix& x, double eps) {
  return (gradient(x).magnitude().array() + eps).log().sum();
}

/// Reweighted TV: unit weights first, then w_ij = 1 / (||(D x)_ij|| + eps)
/// from the previous image, l_max times.
inline TvTrace reweight_tv_run(const FourierSampler& sampler, const Vector& y, double eps, int l_max,
                               const TvOptions& opts = {}) {
  require(eps > 0.0 && std::isfinite(eps), ErrorCode::invalid_argument, "epsilon must be positive");
  require(l_max >= 0, ErrorCode::invalid_argument, "l_max must be nonnegative");
  const Index s = sampler.n() - 1;
  TvTrace trace;
  Matrix w = Matrix::Ones(s, s);
  for (int l = 0; l <= l_max; ++l) {
    const auto t0 = std::chrono::steady_clock::now();
    TvSolution sol = solve_weighted_tv(sampler, y, w, opts);
    trace.wall_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    const Matrix& x = sol.image.px;
    trace.weights.push_back(w);
    trace.tv_unweighted.push_back(tv_norm(x));
    trace.tv_weighted.push_back(sol.objective);
    trace.logsum_objectives.push_back(tv_logsum_objective(x, eps));
    trace.inner_statuses.push_back(sol.status);
    trace.inner_iterations.push_back(sol.iterations);
    trace.images.push_back(std::move(sol.image));
    if (l == l_max) break;
    w = (gradient(trace.images.back().px).magnitude().array() + eps).inverse().matrix();
  }
  return trace;
}

}  // namespace rewl1

#endif  // REWL1_TV_HPP
