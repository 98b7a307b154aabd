#ifndef REWL1_ORACLE_HPP
#define REWL1_ORACLE_HPP

#include <rewl1/convex.hpp>
#include <rewl1/types.hpp>

#include <cmath>
#include <vector>

namespace rewl1 {

struct OracleResult {
  Vector x;                     // sparsest consistent vector (or decoded message)
  Index k = 0;                  // l0 of the solution (or of the corruption)
  bool unique = false;          // no other support of size <= k fits
  std::vector<Index> support;   // the fitting support (columns, or corrupted rows)
};

namespace detail {

/// Exhaustive search for the smallest subset S of the columns of `vecs` whose
/// span contains `target`, by depth-first enumeration of combinations with an
/// incrementally orthogonalized basis. At the minimal size the search stops
/// as soon as a second fitting subset is found.
class SubsetSpanSearch {
 public:
  SubsetSpanSearch(const Matrix& vecs, const Vector& target, double fit_tol)
      : vecs_(vecs), target_(target), fit_tol_(fit_tol) {}

  /// Returns false if no subset of size <= k_max fits.
  bool run(Index k_max) {
    for (Index k = 0; k <= k_max; ++k) {
      fits_ = 0;
      basis_.resize(vecs_.rows(), k);
      chosen_.assign(static_cast<std::size_t>(k), 0);
      recurse(0, 0, k, target_);
      if (fits_ > 0) {
        size_ = k;
        return true;
      }
    }
    return false;
  }

  Index size() const { return size_; }
  bool unique() const { return fits_ == 1; }
  const std::vector<Index>& first() const { return first_; }

 private:
  void recurse(Index depth, Index start, Index k, const Vector& resid) {
    if (fits_ >= 2) return;
    if (depth == k) {
      if (resid.norm() <= fit_tol_) {
        if (fits_ == 0) first_.assign(chosen_.begin(), chosen_.end());
        ++fits_;
      }
      return;
    }
    const Index n = vecs_.cols();
    for (Index j = start; j <= n - (k - depth); ++j) {
      Vector v = vecs_.col(j);
      const double vnorm = v.norm();
      if (vnorm == 0.0) continue;
      // Two passes of Gram-Schmidt against the current basis.
      for (int pass = 0; pass < 2; ++pass)
        for (Index b = 0; b < depth; ++b) v -= basis_.col(b).dot(v) * basis_.col(b);
      const double norm = v.norm();
      // Dependent on the chosen columns: a smaller subset already covers it.
      if (norm <= 1e-10 * vnorm) continue;
      basis_.col(depth) = v / norm;
      chosen_[static_cast<std::size_t>(depth)] = j;
      const Vector next = resid - basis_.col(depth).dot(resid) * basis_.col(depth);
      recurse(depth + 1, j + 1, k, next);
      if (fits_ >= 2) return;
    }
  }

  const Matrix& vecs_;
  const Vector& target_;
  double fit_tol_;
  Matrix basis_;
  std::vector<Index> chosen_, first_;
  int fits_ = 0;
  Index size_ = 0;
};

inline double binomial(Index n, Index k) {
  double c = 1.0;
  for (Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

}  // namespace detail

/// Exact fit threshold: residual <= 1e-9 * max(1, ||target||).
inline constexpr double kOracleFitTol = 1e-9;

/// Brute-force sparsest solution of phi x = y over supports of size <= k_max.
inline OracleResult l0_oracle(const ProblemInstance& problem, Index k_max) {
  const Index n = problem.n();
  if (n > 24 || k_max > 4) throw Error(ErrorCode::too_large, "l0 oracle is limited to n <= 24 and k_max <= 4");
  require(k_max >= 0, ErrorCode::invalid_argument, "k_max must be nonnegative");
  const double tol = kOracleFitTol * std::max(1.0, problem.y.norm());
  detail::SubsetSpanSearch search(problem.phi, problem.y, tol);
  if (!search.run(std::min(k_max, n))) throw Error(ErrorCode::no_solution, "no support of size <= k_max fits y");
  OracleResult out;
  out.support = search.first();
  out.k = search.size();
  out.unique = search.unique();
  out.x = least_squares_on_support(problem, out.support);
  return out;
}

/// Brute-force sparsest corruption e with y - e in range(phi), phi tall with
/// full column rank. Works on the syndrome N'y, where the columns of N span
/// the left null space of phi.
inline OracleResult decode_oracle(const ProblemInstance& problem, Index k_max) {
  const Index m = problem.m();
  const Index n = problem.n();
  require(k_max >= 0, ErrorCode::invalid_argument, "k_max must be nonnegative");
  require(m > n && m - n >= k_max, ErrorCode::invalid_argument, "decode oracle needs m - n >= k_max");
  double combos = 0.0;
  for (Index j = 0; j <= k_max; ++j) combos += detail::binomial(m, j);
  if (combos > 2e7) throw Error(ErrorCode::too_large, "corruption search space exceeds 2e7 supports");

  Eigen::HouseholderQR<Matrix> qr(problem.phi);
  Eigen::ColPivHouseholderQR<Matrix> rank_check(problem.phi);
  if (rank_check.rank() < n) throw Error(ErrorCode::rank_deficient, "phi must have full column rank");
  const Matrix q = qr.householderQ();
  const Matrix null_basis = q.rightCols(m - n);
  const Matrix vecs = null_basis.transpose();  // column i is row i of N
  const Vector syndrome = vecs * problem.y;

  const double tol = kOracleFitTol * std::max(1.0, problem.y.norm());
  detail::SubsetSpanSearch search(vecs, syndrome, tol);
  if (!search.run(k_max)) throw Error(ErrorCode::no_solution, "no corruption of size <= k_max explains y");

  OracleResult out;
  out.support = search.first();
  out.k = search.size();
  out.unique = search.unique();
  std::vector<bool> corrupted(static_cast<std::size_t>(m), false);
  for (Index i : out.support) corrupted[static_cast<std::size_t>(i)] = true;
  Matrix rows(m - out.k, n);
  Vector rhs(m - out.k);
  for (Index i = 0, r = 0; i < m; ++i) {
    if (corrupted[static_cast<std::size_t>(i)]) continue;
    rows.row(r) = problem.phi.row(i);
    rhs[r++] = problem.y[i];
  }
  out.x = rows.colPivHouseholderQr().solve(rhs);
  return out;
}

}  // namespace rewl1

#endif  // REWL1_ORACLE_HPP
