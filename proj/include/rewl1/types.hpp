#ifndef REWL1_TYPES_HPP
#define REWL1_TYPES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rewl1 {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Array = Eigen::ArrayXd;
using Index = Eigen::Index;

/// Failure categories surfaced by the library. Solver outcomes that are
/// part of normal operation (optimal / max-iter / infeasible) are reported
/// through Solution::status instead.
enum class ErrorCode {
  invalid_argument,
  singular,
  rank_deficient,
  infeasible,
  no_solution,
  too_large,
  undefined,
  config,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::singular: return "singular";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::no_solution: return "no-solution";
    case ErrorCode::too_large: return "too-large";
    case ErrorCode::undefined: return "undefined";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) throw Error(code, what);
}

/// Dense measurement model y = phi * x (+ noise).
struct ProblemInstance {
  Matrix phi;
  Vector y;
  std::optional<double> noise_sigma;
  bool column_normalized = false;

  ProblemInstance() = default;
  ProblemInstance(Matrix phi_, Vector y_, std::optional<double> sigma = std::nullopt)
      : phi(std::move(phi_)), y(std::move(y_)), noise_sigma(sigma) {
    validate();
  }

  Index m() const { return phi.rows(); }
  Index n() const { return phi.cols(); }

  void validate() const {
    require(phi.rows() >= 1 && phi.cols() >= 1, ErrorCode::invalid_argument,
            "problem dimensions must be positive");
    require(y.size() == phi.rows(), ErrorCode::invalid_argument,
            "observation length must equal the number of rows of phi");
    if (noise_sigma) {
      require(*noise_sigma >= 0.0, ErrorCode::invalid_argument, "noise sigma must be nonnegative");
    }
    if (column_normalized) {
      for (Index j = 0; j < phi.cols(); ++j) {
        require(std::abs(phi.col(j).norm() - 1.0) <= 1e-12, ErrorCode::invalid_argument,
                "column-normalized flag set but a column norm differs from 1");
      }
    }
  }
};

enum class SignalKind { sparse_gaussian, sparse_bernoulli, compressible };

inline const char* to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::sparse_gaussian: return "sparse-gaussian";
    case SignalKind::sparse_bernoulli: return "sparse-bernoulli";
    case SignalKind::compressible: return "compressible";
  }
  return "unknown";
}

inline SignalKind signal_kind_from_string(const std::string& s) {
  if (s == "sparse-gaussian") return SignalKind::sparse_gaussian;
  if (s == "sparse-bernoulli") return SignalKind::sparse_bernoulli;
  if (s == "compressible") return SignalKind::compressible;
  throw Error(ErrorCode::invalid_argument, "unknown signal kind '" + s + "'");
}

struct SignalSpec {
  SignalKind kind = SignalKind::sparse_gaussian;
  Index n = 0;
  Index k = 0;     // sparse kinds
  double p = 1.0;  // compressible kind: magnitudes decay like i^(-1/p)
};

struct GroundTruth {
  Vector x0;
  std::vector<Index> support;  // ascending

  static GroundTruth from_vector(Vector x) {
    GroundTruth g;
    g.x0 = std::move(x);
    for (Index i = 0; i < g.x0.size(); ++i) {
      if (g.x0[i] != 0.0) g.support.push_back(i);
    }
    return g;
  }
};

/// Number of nonzero entries.
inline Index l0_count(const Vector& x) {
  Index count = 0;
  for (Index i = 0; i < x.size(); ++i) count += (x[i] != 0.0);
  return count;
}

/// The success criterion used throughout: ||x0 - x||_inf <= 1e-3.
inline constexpr double kExactRecoveryTol = 1e-3;

inline bool exact_recovery(const Vector& x0, const Vector& x, double tol = kExactRecoveryTol) {
  return (x0 - x).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace rewl1

#endif  // REWL1_TYPES_HPP
