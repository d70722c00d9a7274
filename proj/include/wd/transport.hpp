#pragma once

// Parallel transport with respect to the Berry connection along straight segments,
// its holonomy logarithm, and periodic frames on closed lines of the torus.

#include <cmath>
#include <vector>

#include "wd/errors.hpp"
#include "wd/linalg.hpp"
#include "wd/model.hpp"

namespace wd {

struct TransportConfig {
  /// RK4 steps per unit lattice-coordinate length.
  int steps_per_unit = 256;
  double tol_unitary = 1e-9;
  double tol_periodic = 1e-7;

  int steps_for(double length) const {
    return std::max(1, static_cast<int>(std::ceil(length * steps_per_unit - 1e-9)));
  }
};

struct TransportOp {
  Mat matrix;
  KPoint from;
  KPoint to;
  int steps = 0;
};

/// Solves d/ds t(s) = [dP(x(s))/ds, P(x(s))] t(s), t(0) = Id, x(s) = y + s (x - y),
/// with classical RK4 and a polar re-unitarization after every step. Returns t(1),
/// the transport from y to x. With this sign t P(y) t^* = P(x), since
/// [[dP, P], P] = dP for a projector family.
inline TransportOp transport(const ProjectorFamily& family, KPoint x, KPoint y, int steps) {
  require(steps >= 1, "transport requires steps >= 1");
  const KPoint delta = x - y;
  const int n = family.dim();
  TransportOp op{Mat::Identity(n, n), y, x, steps};
  if (delta.k1 == 0.0 && delta.k2 == 0.0) return op;
  const double h = 1.0 / steps;
  auto generator = [&](double s) {
    const ProjectorJet j = family.jet(y + s * delta);
    const Mat dp = j.directional(delta);
    return Mat(dp * j.p - j.p * dp);
  };
  Mat a0 = generator(0.0);
  Mat& t = op.matrix;
  for (int step = 0; step < steps; ++step) {
    const double s = step * h;
    const Mat a_half = generator(s + 0.5 * h);
    const Mat a1 = generator(s + h);
    const Mat k1 = a0 * t;
    const Mat k2 = a_half * (t + (0.5 * h) * k1);
    const Mat k3 = a_half * (t + (0.5 * h) * k2);
    const Mat k4 = a1 * (t + h * k3);
    t = linalg::polar_factor(t + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    a0 = a1;
  }
  return op;
}

inline TransportOp transport(const ProjectorFamily& family, KPoint x, KPoint y, const TransportConfig& cfg = {}) {
  return transport(family, x, y, cfg.steps_for((x - y).norm()));
}

inline double unitarity_defect(const Mat& u) {
  return (u.adjoint() * u - Mat::Identity(u.cols(), u.cols())).norm();
}

/// ||U P(from) - P(to) U||_F.
inline double intertwining_residual(const ProjectorFamily& family, const TransportOp& op) {
  return (op.matrix * family(op.from) - family(op.to) * op.matrix).norm();
}

struct HolonomyLog {
  Mat m;
  std::vector<double> eigenphases;
};

enum class BranchPolicy {
  /// Eigenphases within 1e-8 of the cut at -pi (== pi) raise BranchDegenerate.
  Strict,
  /// Eigenphases within 1e-8 of the cut are assigned +pi, the closed end of (-pi, pi].
  ClosedAtPi,
};

/// M = -i log U on the principal branch, eigenphases in (-pi, pi].
inline HolonomyLog holonomy_log(const Mat& u, BranchPolicy policy = BranchPolicy::Strict,
                                double tol_unitary = 1e-9) {
  require(u.rows() == u.cols(), "holonomy_log expects a square matrix");
  require(unitarity_defect(u) <= tol_unitary, "holonomy_log expects a unitary matrix");
  Eigen::ComplexSchur<Mat> schur(u);
  const Mat& z = schur.matrixU();
  const Mat& tri = schur.matrixT();
  HolonomyLog out;
  Eigen::VectorXcd phases(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    double theta = std::arg(tri(i, i));
    if (kPi - std::abs(theta) < 1e-8) {
      if (policy == BranchPolicy::Strict)
        fail(ErrorCode::BranchDegenerate, "eigenphase " + std::to_string(theta) + " lies on the branch cut at -pi");
      theta = kPi;
    }
    out.eigenphases.push_back(theta);
    phases(i) = theta;
  }
  std::sort(out.eigenphases.begin(), out.eigenphases.end());
  out.m = linalg::hermitian_part(z * phases.asDiagonal() * z.adjoint());
  return out;
}

/// Periodic frame along the closed line base + s * direction, s in [0, 1]:
/// Phi(s) = t(x(s), base) Phi(0) exp(-i s M), where exp(i M) is the loop holonomy
/// written in the basis Phi(0) of Ran P(base).
class LineFrame {
 public:
  KPoint base;
  KPoint direction;
  int n = 0;
  std::vector<Mat> samples;  ///< n + 1 frames at s = j / n
  Mat holonomy;              ///< m x m, Phi(0)^* t(base + direction, base) Phi(0)
  Mat log_holonomy;          ///< m x m Hermitian M

  KPoint point(int j) const { return base + (static_cast<double>(j) / n) * direction; }

  double periodicity_residual() const { return linalg::frame_distance(samples.back(), samples.front()); }

  /// Frame at an arbitrary parameter s in [0, 1], transported from the nearest sample.
  Mat at(const ProjectorFamily& family, double s, const TransportConfig& cfg) const {
    const int j = std::clamp(static_cast<int>(std::lround(s * n)), 0, n);
    const double ds = s - static_cast<double>(j) / n;
    if (ds == 0.0) return samples[static_cast<std::size_t>(j)];
    const KPoint from = point(j);
    const KPoint to = base + s * direction;
    const Mat t = transport(family, to, from, cfg).matrix;
    return t * samples[static_cast<std::size_t>(j)] * linalg::expi_hermitian(log_holonomy, -ds);
  }
};

inline LineFrame line_frame(const ProjectorFamily& family, KPoint direction, KPoint base_k, const Mat& base_frame,
                            int n, const TransportConfig& cfg = {}) {
  require(n >= 1, "line_frame requires n >= 1");
  require(base_frame.rows() == family.dim() && base_frame.cols() == family.rank(), "base frame has wrong shape");
  require(linalg::orthonormality_defect(base_frame) <= 1e-9, "base frame is not orthonormal");
  require((family(base_k) * base_frame - base_frame).norm() <= 1e-6, "base frame is not in Ran P(base)");
  LineFrame lf;
  lf.base = base_k;
  lf.direction = direction;
  lf.n = n;
  const int steps = cfg.steps_for(direction.norm() / n);
  // Cumulative transports t(x_j, base) by the group property.
  std::vector<Mat> cumulative;
  cumulative.reserve(static_cast<std::size_t>(n) + 1);
  cumulative.push_back(Mat::Identity(family.dim(), family.dim()));
  for (int j = 1; j <= n; ++j) {
    const Mat seg = transport(family, lf.point(j), lf.point(j - 1), steps).matrix;
    cumulative.push_back(seg * cumulative.back());
  }
  const Mat reduced = base_frame.adjoint() * cumulative.back() * base_frame;
  lf.holonomy = linalg::polar_factor(reduced);
  // Inversion-symmetric models pin boundary-line holonomies to exactly -1; any logarithm
  // yields a periodic frame, so the closed end of the branch interval is taken.
  lf.log_holonomy = holonomy_log(lf.holonomy, BranchPolicy::ClosedAtPi).m;
  lf.samples.reserve(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    const double s = static_cast<double>(j) / n;
    lf.samples.push_back(cumulative[static_cast<std::size_t>(j)] * base_frame *
                         linalg::expi_hermitian(lf.log_holonomy, -s));
  }
  return lf;
}

}  // namespace wd
