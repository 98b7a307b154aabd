#ifndef REWL1_WEIGHTS_HPP
#define REWL1_WEIGHTS_HPP

#include <rewl1/rng.hpp>
#include <rewl1/types.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace rewl1 {

enum class WeightRuleKind { logsum, atan, residual, tv_gradient };

inline void check_eps(double eps) {
  require(eps > 0.0 && std::isfinite(eps), ErrorCode::invalid_argument, "epsilon must be positive");
}

/// w_i = 1 / (|x_i| + eps)
inline Vector update_weights_logsum(const Vector& x, double eps) {
  check_eps(eps);
  return (x.cwiseAbs().array() + eps).inverse().matrix();
}

/// w_i = 1 / (x_i^2 + eps^2)
inline Vector update_weights_atan(const Vector& x, double eps) {
  check_eps(eps);
  return (x.array().square() + eps * eps).inverse().matrix();
}

/// w_i = 1 / (|r_i| + eps) on a residual vector r = y - phi x.
inline Vector update_weights_residual(const Vector& r, double eps) { return update_weights_logsum(r, eps); }

/// sum_i log(|v_i| + eps), the concave penalty the reweighting descends.
inline double logsum_objective(const Vector& v, double eps) {
  return (v.cwiseAbs().array() + eps).log().sum();
}

/// Order-statistic index i0 = round(m / (4 ln(n/m))), clamped to [1, n].
inline Index adaptive_eps_index(Index m, Index n) {
  require(m >= 1 && n > m, ErrorCode::invalid_argument, "adaptive epsilon needs n > m >= 1");
  const double raw = static_cast<double>(m) / (4.0 * std::log(static_cast<double>(n) / static_cast<double>(m)));
  return std::clamp<Index>(static_cast<Index>(std::lround(raw)), 1, n);
}

/// eps = max(|x|_(i0), 1e-3) where |x|_(i) is the i-th largest magnitude.
inline double eps_adaptive(const Vector& x, Index m, Index n) {
  const Index i0 = adaptive_eps_index(m, n);
  require(x.size() == n, ErrorCode::invalid_argument, "iterate length must equal n");
  std::vector<double> mags(x.data(), x.data() + x.size());
  for (double& v : mags) v = std::abs(v);
  std::nth_element(mags.begin(), mags.begin() + (i0 - 1), mags.end(), std::greater<>());
  return std::max(mags[static_cast<std::size_t>(i0 - 1)], 1e-3);
}

/// Largest ||phi' xi||_inf over n_trials draws xi ~ N(0, sigma^2 I_m); the
/// floor 1e-12 is returned for sigma = 0.
inline double eps_noise_calibrated(const Matrix& phi, double sigma, int n_trials, const RngStream& rng) {
  require(sigma >= 0.0, ErrorCode::invalid_argument, "sigma must be nonnegative");
  require(n_trials >= 1, ErrorCode::invalid_argument, "n_trials must be positive");
  if (sigma == 0.0) return 1e-12;
  RngReader draw(rng);
  Vector xi(phi.rows());
  double best = 0.0;
  for (int t = 0; t < n_trials; ++t) {
    for (Index i = 0; i < xi.size(); ++i) xi[i] = draw.normal();
    best = std::max(best, (phi.transpose() * xi).lpNorm<Eigen::Infinity>());
  }
  return std::max(sigma * best, 1e-12);
}

/// delta = sigma sqrt(m + 2 sqrt(2m)), a likely upper bound on ||z||_2.
inline double delta_noise(double sigma, Index m) {
  require(sigma >= 0.0 && m >= 1, ErrorCode::invalid_argument, "need sigma >= 0 and m >= 1");
  const double md = static_cast<double>(m);
  return sigma * std::sqrt(md + 2.0 * std::sqrt(2.0 * md));
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_std(const Vector& v) {
  require(v.size() >= 2, ErrorCode::invalid_argument, "need at least two samples");
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace rewl1

#endif  // REWL1_WEIGHTS_HPP
