#ifndef REWL1_ENSEMBLES_HPP
#define REWL1_ENSEMBLES_HPP

#include <rewl1/rng.hpp>
#include <rewl1/types.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace rewl1 {

/// i.i.d. N(0,1) entries, filled column by column; optionally every column is
/// rescaled to unit l2 norm.
inline Matrix gen_gaussian_matrix(Index m, Index n, bool normalize_columns, const RngStream& rng) {
  require(m >= 1 && n >= 1, ErrorCode::invalid_argument, "matrix dimensions must be positive");
  RngReader draw(rng);
  Matrix phi(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) phi(i, j) = draw.normal();
  if (normalize_columns) {
    for (Index j = 0; j < n; ++j) {
      const double norm = phi.col(j).norm();
      if (norm > 0.0) phi.col(j) /= norm;
    }
  }
  return phi;
}

/// i.i.d. symmetric +-1 entries.
inline Matrix gen_bernoulli_matrix(Index m, Index n, const RngStream& rng) {
  require(m >= 1 && n >= 1, ErrorCode::invalid_argument, "matrix dimensions must be positive");
  RngReader draw(rng);
  Matrix phi(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) phi(i, j) = draw.sign();
  return phi;
}

/// k distinct indices from {0..n-1} by partial Fisher-Yates, returned sorted.
inline std::vector<Index> sample_support(Index n, Index k, RngReader& draw) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(draw.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(static_cast<std::size_t>(k));
  std::sort(perm.begin(), perm.end());
  return perm;
}

/// Uniformly random permutation of {0..n-1}.
inline std::vector<Index> sample_permutation(Index n, RngReader& draw) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i + 1 < n; ++i) {
    const auto j = i + static_cast<Index>(draw.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

inline GroundTruth gen_signal(const SignalSpec& spec, const RngStream& rng) {
  require(spec.n >= 1, ErrorCode::invalid_argument, "signal length must be positive");
  RngReader draw(rng);
  Vector x = Vector::Zero(spec.n);
  switch (spec.kind) {
    case SignalKind::sparse_gaussian:
    case SignalKind::sparse_bernoulli: {
      require(spec.k >= 0 && spec.k <= spec.n, ErrorCode::invalid_argument,
              "sparsity k must satisfy 0 <= k <= n");
      const auto support = sample_support(spec.n, spec.k, draw);
      for (Index i : support) {
        double v = spec.kind == SignalKind::sparse_gaussian ? draw.normal() : draw.sign();
        // A Gaussian draw of exactly zero would break the l0 contract.
        while (v == 0.0) v = draw.normal();
        x[i] = v;
      }
      break;
    }
    case SignalKind::compressible: {
      require(spec.p > 0.0, ErrorCode::invalid_argument, "decay exponent p must be positive");
      // Magnitudes i^(-1/p), i = 1..n; the largest is 1 so ||x0||_inf = 1.
      const auto perm = sample_permutation(spec.n, draw);
      for (Index i = 0; i < spec.n; ++i) {
        const double mag = std::pow(static_cast<double>(i + 1), -1.0 / spec.p);
        x[perm[static_cast<std::size_t>(i)]] = draw.sign() * mag;
      }
      break;
    }
  }
  return GroundTruth::from_vector(std::move(x));
}

/// k nonzeros x_i = s_i (1 + |a_i|) with s_i = +-1 and a_i ~ N(0,1).
inline GroundTruth gen_dantzig_signal(Index n, Index k, const RngStream& rng) {
  require(n >= 1 && k >= 0 && k <= n, ErrorCode::invalid_argument, "need 0 <= k <= n");
  RngReader draw(rng);
  Vector x = Vector::Zero(n);
  for (Index i : sample_support(n, k, draw)) {
    const double s = draw.sign();
    x[i] = s * (1.0 + std::abs(draw.normal()));
  }
  return GroundTruth::from_vector(std::move(x));
}

}  // namespace rewl1

#endif  // REWL1_ENSEMBLES_HPP
