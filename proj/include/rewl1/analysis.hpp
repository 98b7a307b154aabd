#ifndef REWL1_ANALYSIS_HPP
#define REWL1_ANALYSIS_HPP

#include <rewl1/convex.hpp>
#include <rewl1/reweight.hpp>
#include <rewl1/weights.hpp>

#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

namespace rewl1 {

/// Parameters of one real Gabor atom
/// exp(-((t - t0) / sigma)^2 / 2) * cos(omega (t - t0)) (phase 0) or sin (phase 1).
struct GaborAtom {
  double t0 = 0.0;
  double omega = 0.0;
  double sigma = 1.0;
  int phase = 0;
};

struct Dictionary {
  Matrix psi;  // n x d, unit-norm columns
  std::vector<GaborAtom> atoms;

  Index n() const { return psi.rows(); }
  Index d() const { return psi.cols(); }
  double redundancy() const { return static_cast<double>(d()) / static_cast<double>(n()); }

  /// Orthonormal basis as a (trivially) parameter-free dictionary.
  static Dictionary from_matrix(Matrix psi) {
    Dictionary dict;
    dict.psi = std::move(psi);
    dict.atoms.resize(static_cast<std::size_t>(dict.psi.cols()));
    return dict;
  }
};

inline Vector gabor_waveform(Index n, const GaborAtom& a) {
  Vector v(n);
  for (Index t = 0; t < n; ++t) {
    const double u = static_cast<double>(t) - a.t0;
    const double env = std::exp(-0.5 * (u / a.sigma) * (u / a.sigma));
    v[t] = env * (a.phase == 0 ? std::cos(a.omega * u) : std::sin(a.omega * u));
  }
  return v;
}

/// Gabor frame over scales sigma in `scales`, shifts t0 = 0, s sigma, 2 s sigma,
/// ... < n with s = shift_step, and frequencies omega = 0, f / sigma, 2 f / sigma,
/// ... <= pi with f = freq_step. Each (t0, omega) gives a cosine and a sine
/// atom; atoms with negligible norm (the sine at omega = 0 or pi) are dropped.
inline Dictionary build_gabor_dict(Index n, const std::vector<double>& scales, double freq_step,
                                   double shift_step) {
  require(n >= 8, ErrorCode::invalid_argument, "dictionary length must be at least 8");
  require(!scales.empty() && freq_step > 0.0 && shift_step > 0.0, ErrorCode::invalid_argument,
          "need scales and positive grid steps");
  std::vector<Vector> cols;
  Dictionary dict;
  for (double sigma : scales) {
    require(sigma > 0.0, ErrorCode::invalid_argument, "scales must be positive");
    const double dt = shift_step * sigma;
    const double dw = freq_step / sigma;
    for (double t0 = 0.0; t0 < static_cast<double>(n); t0 += dt) {
      for (double w = 0.0; w <= std::numbers::pi + 1e-12; w += dw) {
        for (int phase = 0; phase < 2; ++phase) {
          const GaborAtom atom{t0, w, sigma, phase};
          Vector v = gabor_waveform(n, atom);
          const double norm = v.norm();
          if (norm < 1e-6 * std::sqrt(sigma)) continue;
          cols.push_back(v / norm);
          dict.atoms.push_back(atom);
        }
      }
    }
  }
  if (static_cast<Index>(cols.size()) < n)
    throw Error(ErrorCode::invalid_argument, "Gabor grid yields fewer atoms than the signal length");
  dict.psi.resize(n, static_cast<Index>(cols.size()));
  for (Index j = 0; j < dict.psi.cols(); ++j) dict.psi.col(j) = cols[static_cast<std::size_t>(j)];
  return dict;
}

/// minimize sum_j w_j |(Psi' x)_j| subject to phi x = y.
inline Solution solve_weighted_l1_analysis(const ProblemInstance& problem, const Dictionary& dict,
                                           const Vector& w, const SolveOptions& opts = {}) {
  opts.validate();
  const Index n = problem.n();
  require(dict.n() == n, ErrorCode::invalid_argument, "dictionary length must equal n");
  detail::check_weights(w, dict.d());
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
    return sol;
  }
  const Matrix analysis = dict.psi.transpose();
  detail::EpigraphLp lp;
  lp.L = &analysis;
  lp.A = &problem.phi;
  lp.b = problem.y;
  double wscale = 1.0;
  const auto res = detail::run_epigraph(n, lp, w, opts, wscale);
  sol.x = res.x.head(n);
  detail::polish_equality(problem.phi, problem.y, sol.x);
  sol.objective = detail::weighted_l1(w, analysis * sol.x);
  sol.certificate = Vector(-res.y * wscale);
  sol.iterations = res.iterations;
  sol.feas_residual = detail::equality_residual(problem.phi, sol.x, problem.y);
  sol.status = detail::status_from(res.status);
  if (sol.feas_residual > opts.feas_tol) sol.status = SolveStatus::max_iter;
  return sol;
}

struct SynthesisSolution : Solution {
  Vector alpha;  // coefficients; x = Psi alpha
};

/// minimize ||alpha||_1 subject to phi Psi alpha = y.
inline SynthesisSolution solve_l1_synthesis(const ProblemInstance& problem, const Dictionary& dict,
                                            const SolveOptions& opts = {}) {
  require(dict.n() == problem.n(), ErrorCode::invalid_argument, "dictionary length must equal n");
  const ProblemInstance coef(problem.phi * dict.psi, problem.y, problem.noise_sigma);
  SynthesisSolution out;
  static_cast<Solution&>(out) = solve_weighted_bp(coef, Vector::Ones(dict.d()), opts);
  out.alpha = out.x;
  out.x = dict.psi * out.alpha;
  return out;
}

/// Reweighted l1 analysis: unit weights first, then w_j = 1 / (|alpha_j| + eps)
/// with alpha = Psi' x from the previous iterate. The log-sum objective is
/// evaluated on alpha.
inline IterateTrace reweight_analysis_run(const ProblemInstance& problem, const Dictionary& dict, double eps,
                                          int l_max, const SolveOptions& opts = {}) {
  check_eps(eps);
  require(l_max >= 0, ErrorCode::invalid_argument, "l_max must be nonnegative");
  IterateTrace trace;
  Vector w = Vector::Ones(dict.d());
  for (int l = 0; l <= l_max; ++l) {
    const auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    try {
      sol = solve_weighted_l1_analysis(problem, dict, w, opts);
    } catch (const Error& e) {
      throw IterationError(e.code(), l, e.what());
    }
    trace.wall_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (sol.status == SolveStatus::infeasible)
      throw IterationError(ErrorCode::infeasible, l, "inner problem is infeasible");
    const Vector alpha = dict.psi.transpose() * sol.x;
    trace.iterates.push_back(sol.x);
    trace.weights.push_back(w);
    trace.epsilons.push_back(eps);
    trace.logsum_objectives.push_back(logsum_objective(alpha, eps));
    trace.inner_statuses.push_back(sol.status);
    if (l == l_max) break;
    w = update_weights_logsum(alpha, eps);
  }
  return trace;
}

struct PulseParams {
  double t0 = 0.0;
  double omega = 0.0;
  double sigma = 1.0;
  double amplitude = 1.0;
  double phase = 0.0;  // radians
};

/// Two Gaussian-windowed sinusoids, scaled to unit peak magnitude.
inline GroundTruth make_two_pulse_signal(Index n, const PulseParams& a, const PulseParams& b) {
  require(n >= 64, ErrorCode::invalid_argument, "pulse signal needs n >= 64");
  Vector x = Vector::Zero(n);
  for (const PulseParams* p : {&a, &b}) {
    require(p->sigma > 0.0, ErrorCode::invalid_argument, "pulse scale must be positive");
    for (Index t = 0; t < n; ++t) {
      const double u = static_cast<double>(t) - p->t0;
      x[t] += p->amplitude * std::exp(-0.5 * (u / p->sigma) * (u / p->sigma)) * std::cos(p->omega * u + p->phase);
    }
  }
  const double peak = x.cwiseAbs().maxCoeff();
  require(peak > 0.0, ErrorCode::invalid_argument, "pulse signal is identically zero");
  return GroundTruth::from_vector(x / peak);
}

/// Largest |<x, psi_j>| / ||x|| over the atoms.
inline double best_atom_correlation(const Dictionary& dict, const Vector& x) {
  return (dict.psi.transpose() * x).cwiseAbs().maxCoeff() / x.norm();
}

}  // namespace rewl1

#endif  // REWL1_ANALYSIS_HPP
