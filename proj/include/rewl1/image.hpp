#ifndef REWL1_IMAGE_HPP
#define REWL1_IMAGE_HPP

#include <rewl1/types.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

namespace rewl1 {

/// n x n pixel array; pixel (i, j) is row i, column j.
struct ImageGrid {
  Matrix px;

  ImageGrid() = default;
  explicit ImageGrid(Matrix pixels) : px(std::move(pixels)) {
    require(px.rows() == px.cols() && px.rows() >= 1, ErrorCode::invalid_argument, "image must be square");
  }
  static ImageGrid zeros(Index n) { return ImageGrid(Matrix::Zero(n, n)); }

  Index n() const { return px.rows(); }
};

/// Forward differences on the (n-1) x (n-1) grid of sites:
/// gx(i, j) = x(i+1, j) - x(i, j), gy(i, j) = x(i, j+1) - x(i, j).
struct GradientField {
  Matrix gx, gy;

  Index sites_side() const { return gx.rows(); }
  /// Per-site Euclidean magnitude.
  Matrix magnitude() const { return (gx.array().square() + gy.array().square()).sqrt().matrix(); }
};

inline GradientField gradient(const Matrix& x) {
  const Index n = x.rows();
  require(n >= 2 && x.cols() == n, ErrorCode::invalid_argument, "gradient needs a square image with n >= 2");
  const Index s = n - 1;
  GradientField g;
  g.gx = x.block(1, 0, s, s) - x.block(0, 0, s, s);
  g.gy = x.block(0, 1, s, s) - x.block(0, 0, s, s);
  return g;
}

inline GradientField gradient(const ImageGrid& img) { return gradient(img.px); }

/// Transpose of the gradient map.
inline Matrix gradient_adjoint(const Matrix& gx, const Matrix& gy) {
  const Index s = gx.rows();
  require(gx.cols() == s && gy.rows() == s && gy.cols() == s, ErrorCode::invalid_argument,
          "gradient field must be square");
  Matrix out = Matrix::Zero(s + 1, s + 1);
  out.block(1, 0, s, s) += gx;
  out.block(0, 1, s, s) += gy;
  out.block(0, 0, s, s) -= gx + gy;
  return out;
}

inline Matrix gradient_adjoint(const GradientField& g) { return gradient_adjoint(g.gx, g.gy); }

/// sum_{ij} w_ij ||(D x)_ij||, unit weights when omitted.
inline double tv_norm(const Matrix& x, const std::optional<Matrix>& weights = std::nullopt) {
  const Matrix mag = gradient(x).magnitude();
  if (weights)
    require(weights->rows() == mag.rows() && weights->cols() == mag.cols(), ErrorCode::invalid_argument,
            "TV weights must be (n-1) x (n-1)");
  // Plain row-by-row accumulation keeps the value independent of Eigen's
  // reduction order.
  double total = 0.0;
  for (Index i = 0; i < mag.rows(); ++i)
    for (Index j = 0; j < mag.cols(); ++j) total += weights ? (*weights)(i, j) * mag(i, j) : mag(i, j);
  return total;
}

inline double tv_norm(const ImageGrid& img, const std::optional<Matrix>& weights = std::nullopt) {
  return tv_norm(img.px, weights);
}

/// Sites whose gradient magnitude exceeds `tol`.
inline Index gradient_support_size(const Matrix& x, double tol = 0.0) {
  return (gradient(x).magnitude().array() > tol).count();
}

/// Shepp-Logan head phantom on [-1, 1]^2, row 0 at the top, with the
/// higher-contrast intensities of the modified (Toft) table so that the
/// inner structures stay visible; pixel values lie in [0, 1].
inline ImageGrid shepp_logan(Index n) {
  require(n >= 16, ErrorCode::invalid_argument, "phantom size must be at least 16");
  // intensity, semi-axis a, semi-axis b, x0, y0, rotation (degrees)
  static constexpr std::array<std::array<double, 6>, 10> ellipses{{
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
      {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
      {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
      {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
      {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
      {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
      {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
  }};
  const double half = 0.5 * static_cast<double>(n - 1);
  Matrix px = Matrix::Zero(n, n);
  for (const auto& e : ellipses) {
    const double phi = e[5] * std::numbers::pi / 180.0;
    const double c = std::cos(phi), s = std::sin(phi);
    const double asq = e[1] * e[1], bsq = e[2] * e[2];
    for (Index j = 0; j < n; ++j) {
      const double x = (static_cast<double>(j) - half) / half - e[3];
      for (Index i = 0; i < n; ++i) {
        const double y = (half - static_cast<double>(i)) / half - e[4];
        const double u = x * c + y * s;
        const double v = y * c - x * s;
        if (u * u / asq + v * v / bsq <= 1.0) px(i, j) += e[0];
      }
    }
  }
  // Sums such as 1 - 0.8 + 0.1 are not exact in binary; snap to the grid of
  // the table's intensities before clipping.
  px = (px.array() * 1e6).round() / 1e6;
  return ImageGrid(px.cwiseMax(0.0).cwiseMin(1.0));
}

inline double relative_error(const Matrix& truth, const Matrix& estimate) {
  const double denom = truth.norm();
  require(denom > 0.0, ErrorCode::undefined, "reference has zero norm");
  return (truth - estimate).norm() / denom;
}

inline double relative_error(const Vector& truth, const Vector& estimate) {
  const double denom = truth.norm();
  require(denom > 0.0, ErrorCode::undefined, "reference has zero norm");
  return (truth - estimate).norm() / denom;
}

}  // namespace rewl1

#endif  // REWL1_IMAGE_HPP
