#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "wd/errors.hpp"

namespace wd {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Point of the Brillouin torus in lattice coordinates, k = k1 e1 + k2 e2.
struct KPoint {
  double k1 = 0.0;
  double k2 = 0.0;

  friend KPoint operator+(KPoint a, KPoint b) { return {a.k1 + b.k1, a.k2 + b.k2}; }
  friend KPoint operator-(KPoint a, KPoint b) { return {a.k1 - b.k1, a.k2 - b.k2}; }
  friend KPoint operator*(double s, KPoint a) { return {s * a.k1, s * a.k2}; }
  friend bool operator==(KPoint a, KPoint b) = default;

  double norm() const { return std::hypot(k1, k2); }
  double max_norm() const { return std::max(std::abs(k1), std::abs(k2)); }
};

/// Cartesian coordinates of a lattice-coordinate vector for the given basis.
inline Eigen::Vector2d to_cartesian(KPoint k, const Eigen::Vector2d& e1, const Eigen::Vector2d& e2) {
  return k.k1 * e1 + k.k2 * e2;
}

namespace linalg {

inline double frobenius(const Mat& a) { return a.norm(); }

/// Operator 2-norm (largest singular value).
inline double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

inline double smallest_singular_value(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

/// Unitary (isometric, for tall input) polar factor U V^* of a = U S V^*.
/// This is the Frobenius-nearest point on the Stiefel manifold.
inline Mat polar_factor(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// f(H) for Hermitian H via its eigendecomposition.
template <class F>
Mat hermitian_function(const Mat& h, F&& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const auto& v = es.eigenvectors();
  Eigen::VectorXcd d(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) d(i) = f(es.eigenvalues()(i));
  return v * d.asDiagonal() * v.adjoint();
}

/// exp(i * theta * H) for Hermitian H.
inline Mat expi_hermitian(const Mat& h, double theta) {
  return hermitian_function(h, [theta](double x) { return std::exp(kI * (theta * x)); });
}

/// G^{-1/2} for Hermitian positive definite G.
inline Mat inverse_sqrt(const Mat& g) {
  return hermitian_function(g, [](double x) { return cplx(1.0 / std::sqrt(x), 0.0); });
}

inline Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

/// Makes the largest-magnitude entry of every column real and positive.
/// Ties are resolved towards the lower row index.
inline void fix_column_phases(Mat& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < basis.rows(); ++r) {
      const double a = std::abs(basis(r, c));
      if (a > best_abs * (1.0 + 1e-12) + 1e-300) {
        best_abs = a;
        best = r;
      }
    }
    if (best_abs > 0.0) basis.col(c) *= std::conj(basis(best, c)) / best_abs;
  }
}

/// Distance between two frames stored as n x m matrices (Frobenius).
inline double frame_distance(const Mat& a, const Mat& b) { return (a - b).norm(); }

inline double orthonormality_defect(const Mat& frame) {
  return (frame.adjoint() * frame - Mat::Identity(frame.cols(), frame.cols())).norm();
}

}  // namespace linalg
}  // namespace wd
