#ifndef REWL1_LP_IPM_HPP
#define REWL1_LP_IPM_HPP

#include <rewl1/types.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rewl1::ipm {

// Dense primal-dual interior-point method (Mehrotra predictor-corrector) for
//
//     minimize    c'x
//     subject to  G x + s = h,  s >= 0
//                 A x = b
//
// with dual
//
//     maximize   -h'z - b'y   subject to   G'z + A'y + c = 0,  z >= 0.
//
// The engine is generic in how the Newton system is solved. A KKT policy
// provides the operator products and, for a positive scaling d = z/s, solves
//
//     [ G' diag(d) G   A' ] [dx]   [r1]
//     [ A              0  ] [dy] = [r2]
//
// which lets every problem eliminate its auxiliary variables in closed form.

struct Options {
  double tol = 1e-8;       // relative duality gap
  double feas_tol = 1e-9;  // scaled primal/dual residual
  int max_iter = 100;
};

enum class Status { optimal, max_iter, numerical };

struct Result {
  Vector x, s, z, y;
  double pcost = 0.0;
  double dcost = 0.0;
  double gap = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  int iterations = 0;
  Status status = Status::max_iter;
};

template <class Kkt>
concept KktPolicy = requires(Kkt& k, const Kkt& ck, const Vector& v, Vector& out) {
  { ck.nx() } -> std::convertible_to<Index>;
  { ck.nz() } -> std::convertible_to<Index>;
  { ck.ny() } -> std::convertible_to<Index>;
  { ck.G(v) } -> std::convertible_to<Vector>;
  { ck.Gt(v) } -> std::convertible_to<Vector>;
  { ck.A(v) } -> std::convertible_to<Vector>;
  { ck.At(v) } -> std::convertible_to<Vector>;
  { k.factor(v) } -> std::convertible_to<bool>;
  { ck.solve(v, v, out, out) };
};

namespace detail {

// Largest alpha in (0, 1] keeping v + alpha * dv >= 0.
inline double max_step(const Vector& v, const Vector& dv) {
  double alpha = 1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

inline double inf_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Shift v into the strict interior.
inline void make_interior(Vector& v) {
  const double lo = v.size() ? v.minCoeff() : 1.0;
  if (lo <= 0.0) v.array() += 1.0 - lo;
}

}  // namespace detail

template <KktPolicy Kkt>
Result solve(Kkt& kkt, const Vector& c, const Vector& h, const Vector& b, const Options& opts = {}) {
  const Index nx = kkt.nx();
  const Index nz = kkt.nz();
  const Index ny = kkt.ny();
  require(c.size() == nx && h.size() == nz && b.size() == ny, ErrorCode::invalid_argument,
          "LP dimension mismatch");

  Result res;
  Vector dx(nx), dy(ny);

  // Initial point: least-squares primal and least-norm dual, shifted inside.
  if (!kkt.factor(Vector::Ones(nz))) {
    res.status = Status::numerical;
    return res;
  }
  kkt.solve(kkt.Gt(h), b, dx, dy);
  Vector x = dx;
  Vector s = h - kkt.G(x);
  kkt.solve(-c, Vector::Zero(ny), dx, dy);
  Vector y = dy;
  Vector z = kkt.G(dx);
  detail::make_interior(s);
  detail::make_interior(z);

  const double bnorm = std::max(detail::inf_norm(b), detail::inf_norm(h));
  const double cnorm = detail::inf_norm(c);
  const double m_ineq = static_cast<double>(nz);

  for (int it = 0; it <= opts.max_iter; ++it) {
    const Vector rx = c + kkt.Gt(z) + kkt.At(y);
    const Vector ry = kkt.A(x) - b;
    const Vector rz = kkt.G(x) + s - h;
    const double gap = s.dot(z);
    const double mu = gap / m_ineq;

    res.pcost = c.dot(x);
    res.dcost = -h.dot(z) - b.dot(y);
    res.gap = gap;
    res.pres = std::max(detail::inf_norm(ry), detail::inf_norm(rz)) / (1.0 + bnorm);
    res.dres = detail::inf_norm(rx) / (1.0 + cnorm);
    res.iterations = it;

    const double scale = 1.0 + std::abs(res.pcost);
    if (res.pres <= opts.feas_tol && res.dres <= opts.feas_tol && gap <= opts.tol * scale &&
        std::abs(res.pcost - res.dcost) <= opts.tol * scale) {
      res.status = Status::optimal;
      break;
    }
    if (it == opts.max_iter) {
      res.status = Status::max_iter;
      break;
    }

    const Vector d = z.cwiseQuotient(s);
    if (!kkt.factor(d)) {
      res.status = Status::numerical;
      break;
    }

    // Solves the Newton system for a complementarity target rc.
    auto newton = [&](const Vector& rc, Vector& step_x, Vector& step_y, Vector& step_s,
                      Vector& step_z) {
      const Vector tmp = (z.cwiseProduct(rz) - rc).cwiseQuotient(s);
      kkt.solve(-rx - kkt.Gt(tmp), -ry, step_x, step_y);
      step_z = tmp + d.cwiseProduct(kkt.G(step_x));
      step_s = -rz - kkt.G(step_x);
    };

    Vector dxa(nx), dya(ny), dsa(nz), dza(nz);
    newton(s.cwiseProduct(z), dxa, dya, dsa, dza);
    const double alpha_aff = std::min(detail::max_step(s, dsa), detail::max_step(z, dza));
    const double mu_aff = (s + alpha_aff * dsa).dot(z + alpha_aff * dza) / m_ineq;
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    const Vector rc = s.cwiseProduct(z) + dsa.cwiseProduct(dza) - Vector::Constant(nz, sigma * mu);
    Vector ds(nz), dz(nz);
    newton(rc, dx, dy, ds, dz);
    if (!dx.allFinite() || !dz.allFinite()) {
      res.status = Status::numerical;
      break;
    }

    const double alpha = std::min(1.0, 0.99 * std::min(detail::max_step(s, ds), detail::max_step(z, dz)));
    if (alpha < 1e-14) {
      res.status = Status::numerical;
      break;
    }
    x += alpha * dx;
    y += alpha * dy;
    s += alpha * ds;
    z += alpha * dz;
  }

  res.x = std::move(x);
  res.s = std::move(s);
  res.z = std::move(z);
  res.y = std::move(y);
  return res;
}

/// KKT policy for problems built from absolute-value epigraphs:
///
///     minimize    w' t
///     subject to  |L x - l| <= t            (p terms, L dense or identity)
///                 |F'F x - f| <= delta      (optional Gram box, F given)
///                 A x = b                   (optional)
///
/// over variables (x, t). The t block is eliminated per term; what remains is
/// an n x n system (diagonal when L is the identity and there is no Gram box),
/// followed by a Schur complement on A when equalities are present.
class EpigraphKkt {
 public:
  struct Parts {
    const Matrix* L = nullptr;          // p x n; nullptr means identity (p = n)
    const Matrix* A = nullptr;          // ny x n; nullptr means no equalities
    const Matrix* gram_factor = nullptr;  // F with box rows F'F; nullptr means none
  };

  EpigraphKkt(Index n, Parts parts) : n_(n), parts_(parts) {
    p_ = parts_.L ? parts_.L->rows() : n_;
    q_ = parts_.gram_factor ? n_ : 0;
    ny_ = parts_.A ? parts_.A->rows() : 0;
    if (parts_.gram_factor) gram_ = parts_.gram_factor->transpose() * *parts_.gram_factor;
  }

  Index nx() const { return n_ + p_; }
  Index nz() const { return 2 * p_ + 2 * q_; }
  Index ny() const { return ny_; }
  Index n() const { return n_; }
  Index p() const { return p_; }

  Vector G(const Vector& v) const {
    const auto x = v.head(n_);
    const auto t = v.tail(p_);
    const Vector lx = applyL(x);
    Vector out(nz());
    out.segment(0, p_) = lx - t;
    out.segment(p_, p_) = -lx - t;
    if (q_) {
      const Vector bx = gram_ * x;
      out.segment(2 * p_, q_) = bx;
      out.segment(2 * p_ + q_, q_) = -bx;
    }
    return out;
  }

  Vector Gt(const Vector& zv) const {
    const auto z1 = zv.segment(0, p_);
    const auto z2 = zv.segment(p_, p_);
    Vector out(nx());
    out.head(n_) = applyLt(z1 - z2);
    if (q_) out.head(n_) += gram_ * (zv.segment(2 * p_, q_) - zv.segment(2 * p_ + q_, q_));
    out.tail(p_) = -z1 - z2;
    return out;
  }

  Vector A(const Vector& v) const {
    if (!parts_.A) return Vector(0);
    return *parts_.A * v.head(n_);
  }

  Vector At(const Vector& yv) const {
    Vector out = Vector::Zero(nx());
    if (parts_.A) out.head(n_) = parts_.A->transpose() * yv;
    return out;
  }

  bool factor(const Vector& d) {
    const auto d1 = d.segment(0, p_).array();
    const auto d2 = d.segment(p_, p_).array();
    dsum_ = d1 + d2;
    ratio_ = (d2 - d1) / dsum_.array();
    const Vector sdiag = (4.0 * d1 * d2 / dsum_.array()).matrix();

    diagonal_ = !parts_.L && !q_;
    if (diagonal_) {
      hdiag_ = sdiag;
    } else {
      if (parts_.L) {
        // L' diag(s) L
        Matrix sl = sdiag.asDiagonal() * *parts_.L;
        hxx_.noalias() = parts_.L->transpose() * sl;
      } else {
        hxx_ = sdiag.asDiagonal();
      }
      if (q_) {
        const Vector d34 = d.segment(2 * p_, q_) + d.segment(2 * p_ + q_, q_);
        const Matrix& f = *parts_.gram_factor;
        // (F'F) diag(d34) (F'F) = F' (F diag(d34) F') F
        Matrix fd = f * d34.asDiagonal();
        Matrix mid;
        mid.noalias() = fd * f.transpose();
        Matrix tmp;
        tmp.noalias() = mid * f;
        hxx_.noalias() += f.transpose() * tmp;
      }
      regularize(hxx_);
      hchol_.compute(hxx_);
      if (hchol_.info() != Eigen::Success) return false;
    }

    if (ny_) {
      const Matrix& a = *parts_.A;
      if (diagonal_) {
        Matrix as = a * hdiag_.cwiseInverse().asDiagonal();
        schur_.noalias() = as * a.transpose();
      } else {
        hinv_at_ = hchol_.solve(a.transpose());
        schur_.noalias() = a * hinv_at_;
      }
      regularize(schur_);
      schur_chol_.compute(schur_);
      if (schur_chol_.info() != Eigen::Success) return false;
    }
    return true;
  }

  void solve(const Vector& r1, const Vector& r2, Vector& dx, Vector& dy) const {
    const auto rx = r1.head(n_);
    const auto rt = r1.tail(p_);
    const Vector rhs = rx - applyLt(ratio_.cwiseProduct(rt));

    Vector sx;
    if (ny_) {
      const Matrix& a = *parts_.A;
      const Vector hr = hsolve(rhs);
      dy = schur_chol_.solve(a * hr - r2);
      sx = hsolve(rhs - a.transpose() * dy);
    } else {
      dy.resize(0);
      sx = hsolve(rhs);
    }
    dx.resize(nx());
    dx.head(n_) = sx;
    dx.tail(p_) = (rt - dsum_.cwiseProduct(ratio_).cwiseProduct(applyL(sx))).cwiseQuotient(dsum_);
  }

 private:
  Vector applyL(const auto& x) const {
    if (parts_.L) return *parts_.L * x;
    return x;
  }
  Vector applyLt(const auto& v) const {
    if (parts_.L) return parts_.L->transpose() * v;
    return v;
  }
  Vector hsolve(const Vector& r) const {
    if (diagonal_) return r.cwiseQuotient(hdiag_);
    return hchol_.solve(r);
  }
  static void regularize(Matrix& m) {
    const double scale = m.diagonal().cwiseAbs().maxCoeff();
    m.diagonal().array() += 1e-15 * scale + 1e-300;
  }

  Index n_, p_, q_, ny_;
  Parts parts_;
  Matrix gram_;
  Vector dsum_, ratio_, hdiag_;
  bool diagonal_ = true;
  Matrix hxx_, hinv_at_, schur_;
  Eigen::LLT<Matrix> hchol_, schur_chol_;
};

}  // namespace rewl1::ipm

#endif  // REWL1_LP_IPM_HPP
