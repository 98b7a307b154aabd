#ifndef REWL1_REWEIGHT_HPP
#define REWL1_REWEIGHT_HPP

#include <rewl1/bpdn.hpp>
#include <rewl1/convex.hpp>
#include <rewl1/weights.hpp>

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace rewl1 {

struct WeightRule {
  WeightRuleKind kind = WeightRuleKind::logsum;
  double epsilon = 0.1;  // current value; overwritten by the eps policy each iteration
};

enum class EpsPolicyKind { fixed, adaptive_order_stat, noise_calibrated, residual_std };

struct EpsPolicy {
  EpsPolicyKind kind = EpsPolicyKind::fixed;
  double value = 0.1;  // fixed
  double sigma = 0.0;  // noise-calibrated
  int n_trials = 100;  // noise-calibrated
  RngStream rng{};     // noise-calibrated
  double beta = 1.0;   // residual-std: eps = beta * std(y)

  static EpsPolicy fixed(double eps) { return {EpsPolicyKind::fixed, eps}; }
  static EpsPolicy adaptive() { return {EpsPolicyKind::adaptive_order_stat}; }
  static EpsPolicy noise_calibrated(double sigma, RngStream rng, int n_trials = 100) {
    EpsPolicy p{EpsPolicyKind::noise_calibrated};
    p.sigma = sigma;
    p.rng = rng;
    p.n_trials = n_trials;
    return p;
  }
  static EpsPolicy residual_std(double beta) {
    EpsPolicy p{EpsPolicyKind::residual_std};
    p.beta = beta;
    return p;
  }
  /// About 10% of the standard deviation of the nonzero coefficients.
  static EpsPolicy tenth_of_std(double coefficient_std) { return fixed(0.1 * coefficient_std); }
};

/// Post-hoc least-squares refit on {i : |x_i| > alpha sigma}.
struct GaussDantzigConfig {
  double sigma = 0.0;
  double alpha = 0.25;
  // Compute the next weights from the refined estimate instead of the raw
  // Dantzig iterate.
  bool weights_from_refined = false;
};

struct ReweightConfig {
  WeightRule rule{};
  EpsPolicy eps_policy{};
  int l_max = 4;
  double conv_tol = 1e-6;
  SolveOptions inner{};
  std::optional<GaussDantzigConfig> gauss_dantzig;

  void validate() const {
    require(l_max >= 0, ErrorCode::invalid_argument, "l_max must be nonnegative");
    require(conv_tol >= 0.0, ErrorCode::invalid_argument, "conv_tol must be nonnegative");
    inner.validate();
  }
};

struct Mode {
  enum Kind { bp, bpdn, dantzig, residual };
  Kind kind = bp;
  double delta = 0.0;

  static Mode basis_pursuit() { return {bp, 0.0}; }
  static Mode quadratic(double delta) { return {bpdn, delta}; }
  static Mode dantzig_selector(double delta) { return {dantzig, delta}; }
  static Mode residual_l1() { return {residual, 0.0}; }
};

/// Audit trail of one reweighting run. Entry l of every list belongs to
/// iteration l; weights[l] are the weights used to compute iterates[l]
/// (weights[0] is all ones) and epsilons[l] is the epsilon derived from
/// iterates[l].
struct IterateTrace {
  std::vector<Vector> iterates;
  std::vector<Vector> weights;
  std::vector<double> epsilons;
  std::vector<double> logsum_objectives;
  std::vector<SolveStatus> inner_statuses;
  std::vector<double> wall_times;  // seconds per inner solve
  std::vector<Vector> refined;     // Gauss-Dantzig estimates, when configured

  std::size_t size() const { return iterates.size(); }
  /// Iterate after `l` reweightings, or the last one if the run stopped early.
  const Vector& at_iteration(std::size_t l) const { return iterates[std::min(l, iterates.size() - 1)]; }
  const Vector& refined_at_iteration(std::size_t l) const {
    return refined[std::min(l, refined.size() - 1)];
  }
  const Vector& final() const { return iterates.back(); }
};

class IterationError : public Error {
 public:
  IterationError(ErrorCode code, int iteration, const std::string& what)
      : Error(code, "reweight iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Support threshold alpha * sigma followed by least squares on that support.
inline Vector gauss_dantzig_refine(const ProblemInstance& problem, const Vector& x, double sigma,
                                   double alpha = 0.25) {
  require(sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
  SupportSet support;
  const double thresh = alpha * sigma;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > thresh) support.push_back(i);
  return least_squares_on_support(problem, support);
}

/// sum (x_hat - x0)^2 / sum min(x0^2, sigma^2)
inline double rho_squared(const Vector& x_hat, const Vector& x0, double sigma) {
  require(x_hat.size() == x0.size(), ErrorCode::invalid_argument, "length mismatch");
  const double denom = x0.array().square().min(sigma * sigma).sum();
  if (!(denom > 0.0)) throw Error(ErrorCode::undefined, "ideal squared error is zero");
  return (x_hat - x0).squaredNorm() / denom;
}

namespace detail {

inline Solution inner_solve(const ProblemInstance& problem, const Mode& mode, const Vector& w,
                            const SolveOptions& opts) {
  switch (mode.kind) {
    case Mode::bp: return solve_weighted_bp(problem, w, opts);
    case Mode::bpdn: return solve_weighted_bpdn(problem, w, mode.delta, opts);
    case Mode::dantzig: return solve_weighted_dantzig(problem, w, mode.delta, opts);
    case Mode::residual: return solve_weighted_residual_l1(problem, w, opts);
  }
  throw Error(ErrorCode::invalid_argument, "unknown mode");
}

}  // namespace detail

/// Iteratively reweighted l1: solve with unit weights, then repeatedly
/// recompute weights from the latest iterate and re-solve, stopping after
/// l_max reweightings or once the iterate moves by at most conv_tol (inf-norm).
inline IterateTrace reweight_run(const ProblemInstance& problem, const Mode& mode,
                                 const ReweightConfig& config) {
  config.validate();
  const bool residual_mode = mode.kind == Mode::residual;
  require(!residual_mode || problem.m() >= problem.n(), ErrorCode::invalid_argument,
          "residual mode needs a tall matrix");
  require(config.rule.kind != WeightRuleKind::tv_gradient, ErrorCode::invalid_argument,
          "tv-gradient weights belong to the TV driver");
  require(residual_mode == (config.rule.kind == WeightRuleKind::residual), ErrorCode::invalid_argument,
          "the residual weight rule is used exactly in residual mode");
  require(!config.gauss_dantzig || mode.kind == Mode::dantzig, ErrorCode::invalid_argument,
          "Gauss-Dantzig refinement applies to Dantzig mode");

  const Index wlen = residual_mode ? problem.m() : problem.n();
  std::optional<double> cached_eps;
  auto next_eps = [&](const Vector& x) -> double {
    const auto& pol = config.eps_policy;
    switch (pol.kind) {
      case EpsPolicyKind::fixed: return pol.value;
      case EpsPolicyKind::adaptive_order_stat: return eps_adaptive(x, problem.m(), problem.n());
      case EpsPolicyKind::noise_calibrated:
        if (!cached_eps) cached_eps = eps_noise_calibrated(problem.phi, pol.sigma, pol.n_trials, pol.rng);
        return *cached_eps;
      case EpsPolicyKind::residual_std:
        if (!cached_eps) cached_eps = pol.beta * sample_std(problem.y);
        return *cached_eps;
    }
    return pol.value;
  };

  IterateTrace trace;
  Vector w = Vector::Ones(wlen);
  for (int l = 0; l <= config.l_max; ++l) {
    const auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    try {
      sol = detail::inner_solve(problem, mode, w, config.inner);
    } catch (const Error& e) {
      throw IterationError(e.code(), l, e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sol.status == SolveStatus::infeasible) {
      throw IterationError(ErrorCode::infeasible, l, "inner problem is infeasible");
    }

    const Vector driver_x = [&] {
      if (residual_mode) return Vector(problem.y - problem.phi * sol.x);
      return sol.x;
    }();
    Vector weight_source = driver_x;
    if (config.gauss_dantzig) {
      const auto& gd = *config.gauss_dantzig;
      try {
        trace.refined.push_back(gauss_dantzig_refine(problem, sol.x, gd.sigma, gd.alpha));
      } catch (const Error& e) {
        throw IterationError(e.code(), l, e.what());
      }
      if (gd.weights_from_refined) weight_source = trace.refined.back();
    }

    const double eps = next_eps(weight_source);
    check_eps(eps);
    trace.iterates.push_back(sol.x);
    trace.weights.push_back(w);
    trace.epsilons.push_back(eps);
    trace.logsum_objectives.push_back(logsum_objective(driver_x, eps));
    trace.inner_statuses.push_back(sol.status);
    trace.wall_times.push_back(dt);

    if (l > 0) {
      const auto& prev = trace.iterates[trace.iterates.size() - 2];
      if ((sol.x - prev).lpNorm<Eigen::Infinity>() <= config.conv_tol) break;
    }
    if (l == config.l_max) break;

    switch (config.rule.kind) {
      case WeightRuleKind::logsum:
      case WeightRuleKind::residual: w = update_weights_logsum(weight_source, eps); break;
      case WeightRuleKind::atan: w = update_weights_atan(weight_source, eps); break;
      case WeightRuleKind::tv_gradient: break;
    }
  }
  return trace;
}

}  // namespace rewl1

#endif  // REWL1_REWEIGHT_HPP
