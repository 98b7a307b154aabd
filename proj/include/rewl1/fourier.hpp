#ifndef REWL1_FOURIER_HPP
#define REWL1_FOURIER_HPP

#include <rewl1/types.hpp>

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

namespace rewl1 {

namespace detail {

// FFTW's planner is not thread-safe; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t len)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * len))), size(len) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  fftw_complex* data;
  std::size_t size;
};

/// Unnormalized n x n complex DFT pair, row-major buffers.
class Fft2 {
 public:
  explicit Fft2(int n) : n_(n) {
    const auto len = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    FftwBuffer a(len), b(len);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_2d(n, n, a.data, b.data, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n, n, a.data, b.data, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw Error(ErrorCode::invalid_argument, "FFTW planning failed");
  }
  ~Fft2() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  void forward(FftwBuffer& in, FftwBuffer& out) const { fftw_execute_dft(fwd_, in.data, out.data); }
  void backward(FftwBuffer& in, FftwBuffer& out) const { fftw_execute_dft(bwd_, in.data, out.data); }
  int n() const { return n_; }

 private:
  int n_;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace detail

/// Partial 2-D Fourier measurements of a real n x n image.
///
/// Convention: X(k1, k2) = sum_{a,b} x(a, b) exp(-2 pi i (k1 a + k2 b) / n),
/// unnormalized, origin at index (0, 0). The mask is closed under
/// k -> -k mod n. Each conjugate pair {k, -k} is measured once as
/// (Re X(k), Im X(k)) at its lexicographically smaller member; a
/// self-conjugate frequency contributes Re X(k) only. The rows of the
/// resulting real operator are mutually orthogonal, with squared norm n^2 / 2
/// for pair rows and n^2 for self-conjugate rows.
class FourierSampler {
 public:
  struct Coefficient {
    Index k1, k2;
    bool self_conjugate;
  };

  /// Builds from an arbitrary mask (closed under conjugation on return).
  FourierSampler(Index n, std::vector<char> mask, Index lines = 0)
      : n_(n), lines_(lines), mask_(std::move(mask)) {
    require(n >= 2, ErrorCode::invalid_argument, "sampler side must be at least 2");
    require(static_cast<Index>(mask_.size()) == n * n, ErrorCode::invalid_argument, "mask must be n x n");
    for (Index k1 = 0; k1 < n; ++k1)
      for (Index k2 = 0; k2 < n; ++k2)
        if (mask_[idx(k1, k2)]) mask_[idx(neg(k1), neg(k2))] = 1;
    for (Index k1 = 0; k1 < n; ++k1) {
      for (Index k2 = 0; k2 < n; ++k2) {
        if (!mask_[idx(k1, k2)]) continue;
        const Index c1 = neg(k1), c2 = neg(k2);
        const bool self = (c1 == k1 && c2 == k2);
        if (!self && (c1 < k1 || (c1 == k1 && c2 < k2))) continue;  // partner is the representative
        coeffs_.push_back({k1, k2, self});
        m_ += self ? 1 : 2;
      }
    }
    fft_ = std::make_shared<detail::Fft2>(static_cast<int>(n));
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    gram_.resize(m_);
    for (Index r = 0, c = 0; c < static_cast<Index>(coeffs_.size()); ++c) {
      if (coeffs_[c].self_conjugate) {
        gram_[r++] = nn;
      } else {
        gram_[r++] = 0.5 * nn;
        gram_[r++] = 0.5 * nn;
      }
    }
  }

  Index n() const { return n_; }
  Index lines() const { return lines_; }
  Index m() const { return m_; }
  bool selected(Index k1, Index k2) const { return mask_[idx(k1, k2)] != 0; }
  const std::vector<Coefficient>& coefficients() const { return coeffs_; }
  /// Diagonal of Phi Phi'.
  const Vector& gram_diagonal() const { return gram_; }

  Vector apply(const Matrix& img) const {
    require(img.rows() == n_ && img.cols() == n_, ErrorCode::invalid_argument, "image size mismatch");
    const auto len = static_cast<std::size_t>(n_ * n_);
    detail::FftwBuffer in(len), out(len);
    for (Index a = 0; a < n_; ++a)
      for (Index b = 0; b < n_; ++b) {
        in.data[idx(a, b)][0] = img(a, b);
        in.data[idx(a, b)][1] = 0.0;
      }
    fft_->forward(in, out);
    Vector y(m_);
    Index r = 0;
    for (const auto& c : coeffs_) {
      const auto& v = out.data[idx(c.k1, c.k2)];
      y[r++] = v[0];
      if (!c.self_conjugate) y[r++] = v[1];
    }
    return y;
  }

  Matrix adjoint(const Vector& y) const {
    require(y.size() == m_, ErrorCode::invalid_argument, "measurement length mismatch");
    const auto len = static_cast<std::size_t>(n_ * n_);
    detail::FftwBuffer in(len), out(len);
    for (std::size_t i = 0; i < len; ++i) in.data[i][0] = in.data[i][1] = 0.0;
    Index r = 0;
    for (const auto& c : coeffs_) {
      auto& v = in.data[idx(c.k1, c.k2)];
      v[0] = y[r++];
      v[1] = c.self_conjugate ? 0.0 : y[r++];
    }
    // Re sum_k c_k exp(+i theta_k) is the transpose of (Re X, Im X).
    fft_->backward(in, out);
    Matrix img(n_, n_);
    for (Index a = 0; a < n_; ++a)
      for (Index b = 0; b < n_; ++b) img(a, b) = out.data[idx(a, b)][0];
    return img;
  }

  /// Euclidean projection onto {x : Phi x = y}.
  Matrix project(const Matrix& x, const Vector& y) const {
    const Vector r = (y - apply(x)).cwiseQuotient(gram_);
    return x + adjoint(r);
  }

  /// Scaled measurement misfit ||Phi x - y||_inf / (1 + ||y||_inf).
  double residual(const Matrix& x, const Vector& y) const {
    return (apply(x) - y).lpNorm<Eigen::Infinity>() / (1.0 + y.lpNorm<Eigen::Infinity>());
  }

 private:
  std::size_t idx(Index a, Index b) const { return static_cast<std::size_t>(a * n_ + b); }
  Index neg(Index k) const { return (n_ - k) % n_; }

  Index n_;
  Index lines_;
  std::vector<char> mask_;
  std::vector<Coefficient> coeffs_;
  Index m_ = 0;
  Vector gram_;
  std::shared_ptr<detail::Fft2> fft_;
};

/// Pseudo-radial mask: `lines` lines through DC at angles pi t / lines. Each
/// line is rasterized to the nearest grid point along its dominant axis over
/// centred frequencies -n/2+1 .. n/2-1. lines = 0 selects every frequency.
inline FourierSampler radial_sampler(Index n, Index lines) {
  require(n >= 2, ErrorCode::invalid_argument, "sampler side must be at least 2");
  require(lines >= 0 && lines <= n, ErrorCode::invalid_argument, "line count must lie in [0, n]");
  std::vector<char> mask(static_cast<std::size_t>(n * n), lines == 0 ? 1 : 0);
  auto wrap = [n](long long k) { return static_cast<Index>(((k % n) + n) % n); };
  const long long half = static_cast<long long>(n) / 2;
  for (Index t = 0; t < lines; ++t) {
    const double theta = std::numbers::pi * static_cast<double>(t) / static_cast<double>(lines);
    const double c = std::cos(theta), s = std::sin(theta);
    const bool along_k2 = std::abs(c) >= std::abs(s);  // line closer to the k2 axis
    for (long long u = -half + 1; u <= half - 1; ++u) {
      long long k1, k2;
      if (along_k2) {
        k2 = u;
        k1 = std::llround(static_cast<double>(u) * s / c);
      } else {
        k1 = u;
        k2 = std::llround(static_cast<double>(u) * c / s);
      }
      mask[static_cast<std::size_t>(wrap(k1) * n + wrap(k2))] = 1;
    }
  }
  mask[0] = 1;
  return FourierSampler(n, std::move(mask), lines);
}

}  // namespace rewl1

#endif  // REWL1_FOURIER_HPP
