#ifndef REWL1_EXPERIMENTS_HPP
#define REWL1_EXPERIMENTS_HPP

#include <rewl1/analysis.hpp>
#include <rewl1/config.hpp>
#include <rewl1/ensembles.hpp>
#include <rewl1/image.hpp>
#include <rewl1/io.hpp>
#include <rewl1/reweight.hpp>
#include <rewl1/tv.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace rewl1 {

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<long long, double, std::string>;

/// Row-oriented result table rendered as CSV.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<Cell> row) {
    require(row.size() == header_.size(), ErrorCode::invalid_argument, "row width differs from the header");
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) throw Error(ErrorCode::invalid_argument, "no column '" + name + "'");
    return static_cast<std::size_t>(it - header_.begin());
  }

  double number(std::size_t row, const std::string& name) const {
    const Cell& c = rows_.at(row).at(column(name));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
    throw Error(ErrorCode::invalid_argument, "column '" + name + "' is not numeric");
  }

  std::string text(std::size_t row, const std::string& name) const {
    const Cell& c = rows_.at(row).at(column(name));
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return render(c);
  }

  /// Indices of rows whose named columns equal the given values.
  std::vector<std::size_t> select(const std::vector<std::pair<std::string, Cell>>& where) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      bool ok = true;
      for (const auto& [name, value] : where) {
        const Cell& c = rows_[r][column(name)];
        if (render(c) != render(value)) ok = false;
      }
      if (ok) out.push_back(r);
    }
    return out;
  }

  std::string to_csv(const std::string& comment) const {
    std::string out = "# " + comment + "\n";
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
    out += '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + render(row[i]);
      out += '\n';
    }
    return out;
  }

  static std::string render(const Cell& c) {
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    return std::get<std::string>(c);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

inline Cell cell(Index v) { return static_cast<long long>(v); }
inline Cell cell(int v) { return static_cast<long long>(v); }
inline Cell cell(double v) { return v; }
inline Cell cell(bool v) { return static_cast<long long>(v ? 1 : 0); }
inline Cell cell(const std::string& v) { return v; }
inline Cell cell(const char* v) { return std::string(v); }

struct ImageOutput {
  std::string stem;  // file name without extension
  Matrix pixels;
};

struct ExperimentResult {
  ExperimentKind experiment{};
  Table summary;  // <experiment>.csv
  Table trials;   // <experiment>_trials.csv
  std::vector<ImageOutput> images;
  std::optional<Dictionary> dictionary;
};

struct RunOptions {
  int threads = 1;
};

// ---------------------------------------------------------------------------
// Helpers

/// Evaluates fn(0..count-1) on a pool of worker threads; results are
/// returned in index order, so output never depends on the thread count.
template <class F>
auto parallel_map(std::size_t count, int threads, F&& fn) {
  using T = decltype(fn(std::size_t{0}));
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        slots[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nthreads = static_cast<int>(std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1,
                                                                 std::max<std::size_t>(count, 1)));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Stream for trial `trial` of instance family `sweep`. Substreams 0, 1, 2, 3
/// are the sensing matrix, the signal, the noise and any calibration draws.
inline RngStream trial_stream(std::uint64_t master_seed, std::size_t sweep, int trial) {
  return RngStream(master_seed, (static_cast<std::uint64_t>(sweep) << 32) | static_cast<std::uint32_t>(trial));
}

/// ||x0 - xL|| / ||x0 - x0hat|| with both errors floored at
/// 1e-6 max(1, ||x0||); 1 when both are at the floor.
inline double error_ratio(const Vector& x0, const Vector& x_first, const Vector& x_last) {
  const double floor = 1e-6 * std::max(1.0, x0.norm());
  const double e0 = (x0 - x_first).norm();
  const double el = (x0 - x_last).norm();
  if (e0 <= floor && el <= floor) return 1.0;
  return el / std::max(e0, floor);
}

inline double median(std::vector<double> v) {
  require(!v.empty(), ErrorCode::invalid_argument, "median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double mean(const std::vector<double>& v) {
  require(!v.empty(), ErrorCode::invalid_argument, "mean of an empty set");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double linf_error(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

namespace detail {

struct Instance {
  ProblemInstance problem;
  GroundTruth truth;
};

inline Instance sparse_instance(const ExperimentConfig& c, const SignalSpec& spec, const RngStream& s) {
  Matrix phi = gen_gaussian_matrix(c.m, c.n, c.normalize_columns, s.substream(0));
  GroundTruth g = gen_signal(spec, s.substream(1));
  Vector y = phi * g.x0;
  Instance inst{ProblemInstance(std::move(phi), std::move(y)), std::move(g)};
  inst.problem.column_normalized = c.normalize_columns;
  return inst;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

/// Success probability versus sparsity, epsilon and iteration count for
/// reweighted basis pursuit with fixed epsilon.
inline ExperimentResult run_phase_transition(const ExperimentConfig& c, const RunOptions& run = {}) {
  c.validate();
  require(c.experiment == ExperimentKind::phase_transition, ErrorCode::config, "config is not phase-transition");
  const int l_max = *std::max_element(c.iteration_counts.begin(), c.iteration_counts.end());
  struct Trial {
    std::vector<std::vector<Vector>> by_eps;  // [eps][iteration count index]
    Vector x0;
  };
  const std::size_t nk = c.k_values.size();
  const auto jobs = parallel_map(nk * static_cast<std::size_t>(c.trials), run.threads, [&](std::size_t job) {
    const std::size_t ki = job / static_cast<std::size_t>(c.trials);
    const int t = static_cast<int>(job % static_cast<std::size_t>(c.trials));
    const auto inst = detail::sparse_instance(c, {c.signal_kinds[0], c.n, c.k_values[ki]}, trial_stream(c.master_seed, ki, t));
    Trial out;
    out.x0 = inst.truth.x0;
    for (double eps : c.eps_values) {
      ReweightConfig rc;
      rc.eps_policy = EpsPolicy::fixed(eps);
      rc.l_max = l_max;
      const auto trace = reweight_run(inst.problem, Mode::basis_pursuit(), rc);
      std::vector<Vector> xs;
      for (int it : c.iteration_counts) xs.push_back(trace.at_iteration(static_cast<std::size_t>(it)));
      out.by_eps.push_back(std::move(xs));
    }
    return out;
  });

  ExperimentResult res;
  res.experiment = c.experiment;
  res.summary = Table({"k", "eps", "n_iters", "trials", "successes", "prob", "mean_l2_err"});
  res.trials = Table({"k", "eps", "n_iters", "trial", "success", "linf_err", "l2_err"});
  for (std::size_t ki = 0; ki < nk; ++ki) {
    for (std::size_t ei = 0; ei < c.eps_values.size(); ++ei) {
      for (std::size_t ii = 0; ii < c.iteration_counts.size(); ++ii) {
        int succ = 0;
        double l2 = 0.0;
        for (int t = 0; t < c.trials; ++t) {
          const auto& tr = jobs[ki * static_cast<std::size_t>(c.trials) + static_cast<std::size_t>(t)];
          const Vector& x = tr.by_eps[ei][ii];
          const bool ok = exact_recovery(tr.x0, x);
          succ += ok;
          const double e2 = (tr.x0 - x).norm();
          l2 += e2;
          res.trials.add({cell(c.k_values[ki]), cell(c.eps_values[ei]), cell(c.iteration_counts[ii]), cell(t), cell(ok),
                          cell(linf_error(tr.x0, x)), cell(e2)});
        }
        res.summary.add({cell(c.k_values[ki]), cell(c.eps_values[ei]), cell(c.iteration_counts[ii]), cell(c.trials),
                         cell(succ), cell(static_cast<double>(succ) / c.trials), cell(l2 / c.trials)});
      }
    }
  }
  return res;
}

/// Reweighted basis pursuit with the order-statistic epsilon on sparse
/// (success curves) and compressible (error ratios) signals. Sparse kinds
/// share matrix, support and sign pattern at equal k, so Gaussian and
/// Bernoulli spikes are compared on paired instances.
inline ExperimentResult run_adaptive_eps(const ExperimentConfig& c, const RunOptions& run = {}) {
  c.validate();
  require(c.experiment == ExperimentKind::adaptive_eps, ErrorCode::config, "config is not adaptive-eps");
  struct Point {
    SignalKind kind;
    Index k;
    double p;
    std::size_t sweep;
  };
  std::vector<Point> points;
  for (SignalKind kind : c.signal_kinds) {
    if (kind == SignalKind::compressible) {
      for (std::size_t pi = 0; pi < c.p_values.size(); ++pi) points.push_back({kind, 0, c.p_values[pi], 1000 + pi});
    } else {
      for (std::size_t ki = 0; ki < c.k_values.size(); ++ki) points.push_back({kind, c.k_values[ki], 0.0, ki});
    }
  }
  const int l_max = std::max(c.l_max, *std::max_element(c.iteration_counts.begin(), c.iteration_counts.end()));
  struct Trial {
    Vector x0;
    std::vector<Vector> xs;  // per iteration count
    Vector first;
  };
  const std::size_t T = static_cast<std::size_t>(c.trials);
  const auto jobs = parallel_map(points.size() * T, run.threads, [&](std::size_t job) {
    const Point& pt = points[job / T];
    const int t = static_cast<int>(job % T);
    // Bernoulli spikes take the signs of the paired Gaussian spikes, so
    // unweighted recovery, which sees only support and signs, is shared.
    const bool bern = pt.kind == SignalKind::sparse_bernoulli;
    auto inst = detail::sparse_instance(c, {bern ? SignalKind::sparse_gaussian : pt.kind, c.n, pt.k, pt.p},
                                        trial_stream(c.master_seed, pt.sweep, t));
    if (bern) {
      inst.truth = GroundTruth::from_vector(inst.truth.x0.cwiseSign());
      inst.problem.y = inst.problem.phi * inst.truth.x0;
    }
    ReweightConfig rc;
    rc.eps_policy = EpsPolicy::adaptive();
    rc.l_max = l_max;
    const auto trace = reweight_run(inst.problem, Mode::basis_pursuit(), rc);
    Trial out{inst.truth.x0, {}, trace.at_iteration(0)};
    for (int it : c.iteration_counts) out.xs.push_back(trace.at_iteration(static_cast<std::size_t>(it)));
    return out;
  });

  ExperimentResult res;
  res.experiment = c.experiment;
  res.summary = Table({"signal", "k", "p", "n_iters", "trials", "successes", "prob", "mean_l2_err", "median_ratio"});
  res.trials = Table({"signal", "k", "p", "n_iters", "trial", "success", "l2_err", "ratio"});
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const Point& pt = points[pi];
    const bool comp = pt.kind == SignalKind::compressible;
    const Cell kc = comp ? cell("") : cell(pt.k);
    const Cell pc = comp ? cell(pt.p) : cell("");
    for (std::size_t ii = 0; ii < c.iteration_counts.size(); ++ii) {
      int succ = 0;
      double l2 = 0.0;
      std::vector<double> ratios;
      for (std::size_t t = 0; t < T; ++t) {
        const auto& tr = jobs[pi * T + t];
        const Vector& x = tr.xs[ii];
        const bool ok = exact_recovery(tr.x0, x);
        const double e2 = (tr.x0 - x).norm();
        const double ratio = error_ratio(tr.x0, tr.first, x);
        succ += ok;
        l2 += e2;
        ratios.push_back(ratio);
        res.trials.add({cell(to_string(pt.kind)), kc, pc, cell(c.iteration_counts[ii]), cell(static_cast<int>(t)), cell(ok),
                        cell(e2), cell(ratio)});
      }
      res.summary.add({cell(to_string(pt.kind)), kc, pc, cell(c.iteration_counts[ii]), cell(c.trials), cell(succ),
                       cell(static_cast<double>(succ) / c.trials), cell(l2 / c.trials), cell(median(ratios))});
    }
  }
  return res;
}

/// Reweighted BPDN on y = phi x0 + z with ||z|| = beta ||phi x0||,
/// delta^2 = sigma^2 (m + 2 sqrt(2m)) and epsilon from the empirical
/// maximum of ||phi' xi||_inf.
inline ExperimentResult run_noisy(const ExperimentConfig& c, const RunOptions& run = {}) {
  c.validate();
  require(c.experiment == ExperimentKind::noisy, ErrorCode::config, "config is not noisy");
  struct Point {
    SignalKind kind;
    Index k;
    double p;
    double beta;
    std::size_t sweep;
  };
  std::vector<Point> points;
  std::size_t sweep = 0;
  for (SignalKind kind : c.signal_kinds) {
    const std::vector<double> params =
        kind == SignalKind::compressible ? c.p_values : std::vector<double>(c.k_values.begin(), c.k_values.end());
    for (double param : params) {
      for (double beta : c.beta_values) {
        if (kind == SignalKind::compressible) points.push_back({kind, 0, param, beta, sweep++});
        else points.push_back({kind, static_cast<Index>(param), 0.0, beta, sweep++});
      }
    }
  }
  const int l_max = std::max(c.l_max, *std::max_element(c.iteration_counts.begin(), c.iteration_counts.end()));
  struct Trial {
    double sigma, delta, eps;
    Vector x0;
    Vector first;
    std::vector<Vector> xs;
  };
  const std::size_t T = static_cast<std::size_t>(c.trials);
  const auto jobs = parallel_map(points.size() * T, run.threads, [&](std::size_t job) {
    const Point& pt = points[job / T];
    const int t = static_cast<int>(job % T);
    const RngStream s = trial_stream(c.master_seed, pt.sweep, t);
    auto inst = detail::sparse_instance(c, {pt.kind, c.n, pt.k, pt.p}, s);
    RngReader noise(s.substream(2));
    Vector z0(c.m);
    for (Index i = 0; i < c.m; ++i) z0[i] = noise.normal();
    const double sigma = pt.beta * inst.problem.y.norm() / z0.norm();
    inst.problem.y += sigma * z0;
    inst.problem.noise_sigma = sigma;
    const double delta = delta_noise(sigma, c.m);
    ReweightConfig rc;
    rc.eps_policy = EpsPolicy::noise_calibrated(sigma, s.substream(3));
    rc.l_max = l_max;
    const auto trace = reweight_run(inst.problem, Mode::quadratic(delta), rc);
    Trial out{sigma, delta, trace.epsilons.front(), inst.truth.x0, trace.at_iteration(0), {}};
    for (int it : c.iteration_counts) out.xs.push_back(trace.at_iteration(static_cast<std::size_t>(it)));
    return out;
  });

  ExperimentResult res;
  res.experiment = c.experiment;
  res.summary = Table({"signal", "k", "p", "beta", "n_iters", "trials", "median_ratio", "mean_ratio"});
  res.trials = Table({"signal", "k", "p", "beta", "n_iters", "trial", "sigma", "delta", "eps", "l2_err", "ratio"});
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const Point& pt = points[pi];
    const bool comp = pt.kind == SignalKind::compressible;
    const Cell kc = comp ? cell("") : cell(pt.k);
    const Cell pc = comp ? cell(pt.p) : cell("");
    for (std::size_t ii = 0; ii < c.iteration_counts.size(); ++ii) {
      std::vector<double> ratios;
      for (std::size_t t = 0; t < T; ++t) {
        const auto& tr = jobs[pi * T + t];
        const double ratio = error_ratio(tr.x0, tr.first, tr.xs[ii]);
        ratios.push_back(ratio);
        res.trials.add({cell(to_string(pt.kind)), kc, pc, cell(pt.beta), cell(c.iteration_counts[ii]),
                        cell(static_cast<int>(t)), cell(tr.sigma), cell(tr.delta), cell(tr.eps),
                        cell((tr.x0 - tr.xs[ii]).norm()), cell(ratio)});
      }
      res.summary.add({cell(to_string(pt.kind)), kc, pc, cell(pt.beta), cell(c.iteration_counts[ii]), cell(c.trials),
                       cell(median(ratios)), cell(mean(ratios))});
    }
  }
  return res;
}

/// Reweighted Dantzig selector with Gauss-Dantzig refinement after every
/// iteration; compares the refined estimates at the first and last
/// iteration counts by rho^2 and model selection.
inline ExperimentResult run_dantzig(const ExperimentConfig& c, const RunOptions& run = {}) {
  c.validate();
  require(c.experiment == ExperimentKind::dantzig, ErrorCode::config, "config is not dantzig");
  const int first_it = *std::min_element(c.iteration_counts.begin(), c.iteration_counts.end());
  const int last_it = std::max(*std::max_element(c.iteration_counts.begin(), c.iteration_counts.end()), first_it);
  struct Trial {
    double sigma, delta;
    double rho_u, rho_r;
    int fp_u, fp_r, cd_u, cd_r;
  };
  struct Point {
    Index k;
    double eps;
    std::size_t sweep;
  };
  std::vector<Point> points;
  for (std::size_t ki = 0; ki < c.k_values.size(); ++ki)
    for (double eps : c.eps_values) points.push_back({c.k_values[ki], eps, ki});
  const std::size_t T = static_cast<std::size_t>(c.trials);
  const auto jobs = parallel_map(points.size() * T, run.threads, [&](std::size_t job) {
    const Point& pt = points[job / T];
    const int t = static_cast<int>(job % T);
    const RngStream s = trial_stream(c.master_seed, pt.sweep, t);
    Matrix phi = gen_gaussian_matrix(c.m, c.n, c.normalize_columns, s.substream(0));
    const GroundTruth g = gen_dantzig_signal(c.n, pt.k, s.substream(1));
    const double sigma =
        c.sigma > 0.0 ? c.sigma : std::sqrt(static_cast<double>(pt.k) / static_cast<double>(c.m)) / 3.0;
    RngReader noise(s.substream(2));
    Vector y = phi * g.x0;
    for (Index i = 0; i < c.m; ++i) y[i] += sigma * noise.normal();
    ProblemInstance problem(std::move(phi), std::move(y), sigma);
    problem.column_normalized = c.normalize_columns;
    const double delta = eps_noise_calibrated(problem.phi, sigma, 100, s.substream(3));
    ReweightConfig rc;
    rc.eps_policy = EpsPolicy::fixed(pt.eps);
    rc.l_max = last_it;
    rc.gauss_dantzig = GaussDantzigConfig{sigma, 0.25, false};
    const auto trace = reweight_run(problem, Mode::dantzig_selector(delta), rc);
    auto selection = [&](const Vector& x, int& fp, int& cd) {
      fp = cd = 0;
      for (Index i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        (g.x0[i] != 0.0 ? cd : fp) += 1;
      }
    };
    const Vector& xu = trace.refined_at_iteration(static_cast<std::size_t>(first_it));
    const Vector& xr = trace.refined_at_iteration(static_cast<std::size_t>(last_it));
    Trial out{sigma, delta, rho_squared(xu, g.x0, sigma), rho_squared(xr, g.x0, sigma), 0, 0, 0, 0};
    selection(xu, out.fp_u, out.cd_u);
    selection(xr, out.fp_r, out.cd_r);
    return out;
  });

  ExperimentResult res;
  res.experiment = c.experiment;
  res.summary = Table({"k", "eps", "trials", "median_rho2_unweighted", "median_rho2_reweighted", "mean_rho2_unweighted",
                       "mean_rho2_reweighted", "mean_fp_unweighted", "mean_fp_reweighted", "mean_cd_unweighted",
                       "mean_cd_reweighted"});
  res.trials = Table({"k", "eps", "trial", "sigma", "delta", "rho2_unweighted", "rho2_reweighted", "fp_unweighted",
                      "fp_reweighted", "cd_unweighted", "cd_reweighted"});
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    std::vector<double> ru, rr, fu, fr, cu, cr;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& tr = jobs[pi * T + t];
      ru.push_back(tr.rho_u);
      rr.push_back(tr.rho_r);
      fu.push_back(tr.fp_u);
      fr.push_back(tr.fp_r);
      cu.push_back(tr.cd_u);
      cr.push_back(tr.cd_r);
      res.trials.add({cell(points[pi].k), cell(points[pi].eps), cell(static_cast<int>(t)), cell(tr.sigma),
                      cell(tr.delta), cell(tr.rho_u), cell(tr.rho_r), cell(tr.fp_u), cell(tr.fp_r), cell(tr.cd_u),
                      cell(tr.cd_r)});
    }
    res.summary.add({cell(points[pi].k), cell(points[pi].eps), cell(c.trials), cell(median(ru)), cell(median(rr)),
                     cell(mean(ru)), cell(mean(rr)), cell(mean(fu)), cell(mean(fr)), cell(mean(cu)), cell(mean(cr))});
  }
  return res;
}

/// Reweighted l1 decoding of a Gaussian code with k sign-flipped entries;
/// epsilon = beta * std(y).
inline ExperimentResult run_error_correction(const ExperimentConfig& c, const RunOptions& run = {}) {
  c.validate();
  require(c.experiment == ExperimentKind::error_correction, ErrorCode::config, "config is not error-correction");
  const int l_max = std::max(c.l_max, *std::max_element(c.iteration_counts.begin(), c.iteration_counts.end()));
  struct Trial {
    Vector x0;
    std::vector<std::vector<Vector>> by_beta;
    std::vector<double> eps;
  };
  const std::size_t T = static_cast<std::size_t>(c.trials);
  const auto jobs = parallel_map(c.k_values.size() * T, run.threads, [&](std::size_t job) {
    const std::size_t ki = job / T;
    const int t = static_cast<int>(job % T);
    const RngStream s = trial_stream(c.master_seed, ki, t);
    Matrix phi = gen_gaussian_matrix(c.m, c.n, c.normalize_columns, s.substream(0));
    RngReader sig(s.substream(1));
    Vector x0(c.n);
    for (Index i = 0; i < c.n; ++i) x0[i] = sig.normal();
    Vector y = phi * x0;
    RngReader corrupt(s.substream(2));
    for (Index i : sample_support(c.m, c.k_values[ki], corrupt)) y[i] = -y[i];
    const ProblemInstance problem(std::move(phi), std::move(y));
    Trial out{x0, {}, {}};
    for (double beta : c.beta_values) {
      ReweightConfig rc;
      rc.rule.kind = WeightRuleKind::residual;
      rc.eps_policy = EpsPolicy::residual_std(beta);
      rc.l_max = l_max;
      const auto trace = reweight_run(problem, Mode::residual_l1(), rc);
      std::vector<Vector> xs;
      for (int it : c.iteration_counts) xs.push_back(trace.at_iteration(static_cast<std::size_t>(it)));
      out.by_beta.push_back(std::move(xs));
      out.eps.push_back(trace.epsilons.front());
    }
    return out;
  });

  ExperimentResult res;
  res.experiment = c.experiment;
  res.summary = Table({"k", "fraction", "beta", "n_iters", "trials", "successes", "prob"});
  res.trials = Table({"k", "beta", "n_iters", "trial", "eps", "success", "linf_err"});
  for (std::size_t ki = 0; ki < c.k_values.size(); ++ki) {
    const double frac = static_cast<double>(c.k_values[ki]) / static_cast<double>(c.m);
    for (std::size_t bi = 0; bi < c.beta_values.size(); ++bi) {
      for (std::size_t ii = 0; ii < c.iteration_counts.size(); ++ii) {
        int succ = 0;
        for (std::size_t t = 0; t < T; ++t) {
          const auto& tr = jobs[ki * T + t];
          const Vector& x = tr.by_beta[bi][ii];
          const bool ok = exact_recovery(tr.x0, x);
          succ += ok;
          res.trials.add({cell(c.k_values[ki]), cell(c.beta_values[bi]), cell(c.iteration_counts[ii]),
                          cell(static_cast<int>(t)), cell(tr.eps[bi]), cell(ok), cell(linf_error(tr.x0, x))});
        }
        res.summary.add({cell(c.k_values[ki]), cell(frac), cell(c.beta_values[bi]), cell(c.iteration_counts[ii]),
                         cell(c.trials), cell(succ), cell(static_cast<double>(succ) / c.trials)});
      }
    }
  }
  return res;
}

/// Reweighted TV on the Shepp-Logan phantom from pseudo-radial Fourier
/// samples; line count 0 is the full-sampling control. Deterministic, so
/// the trial count is ignored.
inline ExperimentResult run_tv_phantom(const ExperimentConfig& c, const RunOptions& run = {}) {
  c.validate();
  require(c.experiment == ExperimentKind::tv_phantom, ErrorCode::config, "config is not tv-phantom");
  const ImageGrid phantom = shepp_logan(c.n);
  struct Point {
    Index lines;
    double eps;
  };
  std::vector<Point> points;
  for (Index l : c.line_counts)
    for (double e : c.eps_values) points.push_back({l, e});
  struct Out {
    Index m;
    TvTrace trace;
  };
  const auto jobs = parallel_map(points.size(), run.threads, [&](std::size_t i) {
    const FourierSampler sampler = radial_sampler(c.n, points[i].lines);
    const Vector y = sampler.apply(phantom.px);
    return Out{sampler.m(), reweight_tv_run(sampler, y, points[i].eps, c.l_max)};
  });

  ExperimentResult res;
  res.experiment = c.experiment;
  res.summary = Table({"lines", "m", "eps", "iteration", "rel_error", "tv", "weighted_tv", "logsum", "inner_iterations",
                       "status"});
  res.trials = Table({"lines", "m", "eps", "gradient_support", "rel_error_first", "rel_error_final"});
  res.images.push_back({"phantom", phantom.px});
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& tr = jobs[i].trace;
    for (std::size_t l = 0; l < tr.size(); ++l) {
      res.summary.add({cell(points[i].lines), cell(jobs[i].m), cell(points[i].eps), cell(static_cast<int>(l)),
                       cell(relative_error(phantom.px, tr.images[l].px)), cell(tr.tv_unweighted[l]),
                       cell(tr.tv_weighted[l]), cell(tr.logsum_objectives[l]), cell(tr.inner_iterations[l]),
                       cell(to_string(tr.inner_statuses[l]))});
    }
    res.trials.add({cell(points[i].lines), cell(jobs[i].m), cell(points[i].eps), cell(gradient_support_size(phantom.px)),
                    cell(relative_error(phantom.px, tr.images.front().px)),
                    cell(relative_error(phantom.px, tr.final().px))});
    const std::string stem = "tv_lines" + std::to_string(points[i].lines) + "_eps" + format_double(points[i].eps);
    res.images.push_back({stem + "_iter0", tr.images.front().px});
    res.images.push_back({stem + "_iter" + std::to_string(tr.size() - 1), tr.final().px});
  }
  return res;
}

/// The desk Gabor frame used by the pulse experiment: scales 4, 8, 16;
/// shifts one scale apart; frequencies 3 / scale apart.
inline Dictionary desk_gabor_dictionary(Index n) { return build_gabor_dict(n, {4.0, 8.0, 16.0}, 3.0, 1.0); }

/// Two pulses whose positions, scales and frequencies lie off the desk grid.
inline GroundTruth desk_two_pulse(Index n) {
  const double scale = static_cast<double>(n) / 128.0;
  return make_two_pulse_signal(n, {44.3 * scale, 0.5, 10.4 * scale, 1.0, 0.3},
                               {83.8 * scale, 1.3, 8.0 * scale, 0.8, 1.1});
}

/// Synthesis, analysis and reweighted analysis recovery of the two-pulse
/// signal from Bernoulli measurements.
inline ExperimentResult run_gabor_pulse(const ExperimentConfig& c, const RunOptions& run = {}) {
  c.validate();
  require(c.experiment == ExperimentKind::gabor_pulse, ErrorCode::config, "config is not gabor-pulse");
  const Dictionary dict = desk_gabor_dictionary(c.n);
  const GroundTruth g = desk_two_pulse(c.n);
  struct Point {
    double eps;
    int trial;
  };
  std::vector<Point> points;
  for (double e : c.eps_values)
    for (int t = 0; t < c.trials; ++t) points.push_back({e, t});
  struct Out {
    double synthesis;
    std::vector<double> analysis;
  };
  const auto jobs = parallel_map(points.size(), run.threads, [&](std::size_t i) {
    const RngStream s = trial_stream(c.master_seed, 0, points[i].trial);
    Matrix phi = gen_bernoulli_matrix(c.m, c.n, s.substream(0));
    const ProblemInstance problem(phi, phi * g.x0);
    const auto syn = solve_l1_synthesis(problem, dict);
    const auto trace = reweight_analysis_run(problem, dict, points[i].eps, c.l_max);
    Out out{relative_error(g.x0, syn.x), {}};
    for (const auto& x : trace.iterates) out.analysis.push_back(relative_error(g.x0, x));
    return out;
  });

  ExperimentResult res;
  res.experiment = c.experiment;
  res.summary = Table({"eps", "trial", "method", "iteration", "rel_error"});
  res.trials = Table({"eps", "trial", "d", "best_atom_correlation", "synthesis", "analysis", "reweighted_final"});
  const double corr = best_atom_correlation(dict, g.x0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& o = jobs[i];
    res.summary.add({cell(points[i].eps), cell(points[i].trial), cell("synthesis"), cell(0), cell(o.synthesis)});
    for (std::size_t l = 0; l < o.analysis.size(); ++l)
      res.summary.add({cell(points[i].eps), cell(points[i].trial), cell(l == 0 ? "analysis" : "reweighted-analysis"),
                       cell(static_cast<int>(l)), cell(o.analysis[l])});
    res.trials.add({cell(points[i].eps), cell(points[i].trial), cell(dict.d()), cell(corr), cell(o.synthesis),
                    cell(o.analysis.front()), cell(o.analysis.back())});
  }
  res.dictionary = dict;
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& run = {}) {
  switch (c.experiment) {
    case ExperimentKind::phase_transition: return run_phase_transition(c, run);
    case ExperimentKind::adaptive_eps: return run_adaptive_eps(c, run);
    case ExperimentKind::noisy: return run_noisy(c, run);
    case ExperimentKind::dantzig: return run_dantzig(c, run);
    case ExperimentKind::error_correction: return run_error_correction(c, run);
    case ExperimentKind::tv_phantom: return run_tv_phantom(c, run);
    case ExperimentKind::gabor_pulse: return run_gabor_pulse(c, run);
  }
  throw Error(ErrorCode::config, "unknown experiment");
}

inline std::string csv_comment(const ExperimentConfig& c) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(c.hash()));
  return std::string("rewl1 ") + kVersion + " config_hash=" + hash;
}

/// Writes <experiment>.csv, <experiment>_trials.csv and any images or
/// dictionary into `dir`; returns the paths written.
inline std::vector<std::filesystem::path> write_result(const std::filesystem::path& dir, const ExperimentConfig& c,
                                                       const ExperimentResult& r) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const std::string name = to_string(c.experiment);
  const std::string comment = csv_comment(c);
  auto write_text = [&](const std::filesystem::path& p, const std::string& text) {
    auto os = detail::open_out(p, std::ios::out | std::ios::binary);
    os << text;
    if (!os) throw Error(ErrorCode::invalid_argument, "write failed for '" + p.string() + "'");
    written.push_back(p);
  };
  write_text(dir / (name + ".csv"), r.summary.to_csv(comment));
  write_text(dir / (name + "_trials.csv"), r.trials.to_csv(comment));
  for (const auto& img : r.images) {
    write_pgm(dir / (img.stem + ".pgm"), img.pixels);
    write_matrix(dir / (img.stem + ".f64"), img.pixels);
    written.push_back(dir / (img.stem + ".pgm"));
    written.push_back(dir / (img.stem + ".f64"));
  }
  if (r.dictionary) {
    write_dictionary(dir / "gabor_dictionary.f64", *r.dictionary);
    written.push_back(dir / "gabor_dictionary.f64");
    written.push_back(dir / "gabor_dictionary.f64.atoms.tsv");
  }
  return written;
}

}  // namespace rewl1

#endif  // REWL1_EXPERIMENTS_HPP
