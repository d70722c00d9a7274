#pragma once

// Bloch frames on the unit cell: the 1-skeleton, the radial extension, a column
// parallel-transport gauge for trivial bundles, Kato-Nagy local smoothing,
// determinant Gram-Schmidt and mollify-and-reproject.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "wd/errors.hpp"
#include "wd/kmesh.hpp"
#include "wd/linalg.hpp"
#include "wd/model.hpp"
#include "wd/parallel.hpp"
#include "wd/transport.hpp"

namespace wd {

/// Frame sampled on a mesh: an n x m matrix per mesh index, zero at singular points.
struct Frame {
  KMesh mesh;
  int dim = 0;
  int rank = 0;
  std::vector<Mat> vectors;
  std::vector<std::uint8_t> singular;
  std::vector<KPoint> singular_points;

  Frame(KMesh m, int n, int r)
      : mesh(std::move(m)), dim(n), rank(r), vectors(mesh.size(), Mat::Zero(n, r)), singular(mesh.size(), 0) {}

  bool defined(std::size_t idx) const { return singular[idx] == 0; }
  const Mat& operator[](std::size_t idx) const { return vectors[idx]; }
  Mat& operator[](std::size_t idx) { return vectors[idx]; }

  void mark_singular(std::size_t idx) {
    singular[idx] = 1;
    vectors[idx].setZero();
    singular_points.push_back(mesh.point(idx));
  }
};

/// Frame sampled from a function of k on every mesh point.
template <class Fn>
Frame sample_frame(const KMesh& mesh, int dim, int rank, Fn&& fn) {
  Frame f(mesh, dim, rank);
  parallel_for(mesh.size(), [&](std::size_t idx) { f.vectors[idx] = fn(mesh.point(idx)); });
  return f;
}

struct FrameDefects {
  double orthonormality = 0.0;  ///< max ||Phi^* Phi - I||_F
  double subordination = 0.0;   ///< max_a ||P phi_a - phi_a||
};

inline FrameDefects frame_defects(const Frame& frame, const ProjectorFamily& family) {
  std::vector<FrameDefects> per(frame.mesh.size());
  parallel_for(per.size(), [&](std::size_t idx) {
    if (!frame.defined(idx)) return;
    const Mat& phi = frame[idx];
    const Mat p = family(frame.mesh.point(idx));
    per[idx].orthonormality = linalg::orthonormality_defect(phi);
    const Mat r = p * phi - phi;
    for (Eigen::Index a = 0; a < r.cols(); ++a) per[idx].subordination = std::max(per[idx].subordination, r.col(a).norm());
  });
  FrameDefects out;
  for (const auto& d : per) {
    out.orthonormality = std::max(out.orthonormality, d.orthonormality);
    out.subordination = std::max(out.subordination, d.subordination);
  }
  return out;
}

/// Deterministic orthonormal basis of Ran P(k) with fixed column phases.
inline Mat initial_frame(const ProjectorFamily& family, KPoint k) {
  Mat b = family.basis(k);
  linalg::fix_column_phases(b);
  return b;
}

/// Frame on the boundary of the unit cell assembled from four periodic line frames
/// with common base frame Phi(v1): E1 (k2 = -1/2) and E4 (k1 = -1/2) start at v1,
/// E3 starts at v4 and E2 at v2. The two copies of each edge pair are computed
/// independently, so the vertex and edge residuals measure the construction.
struct SkeletonFrame {
  int n = 0;
  Mat base;
  LineFrame e1;  ///< k2 = -1/2, k1 increasing
  LineFrame e2;  ///< k1 = +1/2, k2 increasing
  LineFrame e3;  ///< k2 = +1/2, k1 increasing
  LineFrame e4;  ///< k1 = -1/2, k2 increasing
  double vertex_residual = 0.0;
  double edge_residual = 0.0;

  /// Frame along the closed loop v1 -> v2 -> v3 -> v4 of KMesh::boundary_loop.
  std::vector<Mat> loop() const {
    std::vector<Mat> out;
    out.reserve(4 * static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) out.push_back(e1.samples[static_cast<std::size_t>(s)]);
    for (int s = 0; s < n; ++s) out.push_back(e2.samples[static_cast<std::size_t>(s)]);
    for (int s = 0; s < n; ++s) out.push_back(e3.samples[static_cast<std::size_t>(n - s)]);
    for (int s = 0; s < n; ++s) out.push_back(e4.samples[static_cast<std::size_t>(n - s)]);
    return out;
  }

  /// Frame at an arbitrary boundary point. Points with |k1| = 1/2 use the E4 line,
  /// points with |k2| = 1/2 the E1 line; the vertices carry the base frame.
  Mat at(const ProjectorFamily& family, KPoint b, const TransportConfig& cfg) const {
    const bool on_vertical = std::abs(std::abs(b.k1) - 0.5) < 1e-12;
    const bool on_horizontal = std::abs(std::abs(b.k2) - 0.5) < 1e-12;
    require(on_vertical || on_horizontal, "point is not on the cell boundary");
    if (on_vertical && on_horizontal) return base;
    if (on_vertical) return e4.at(family, b.k2 + 0.5, cfg);
    return e1.at(family, b.k1 + 0.5, cfg);
  }
};

inline SkeletonFrame skeleton_frame(const ProjectorFamily& family, const KMesh& mesh, const TransportConfig& cfg = {}) {
  SkeletonFrame sk;
  sk.n = mesh.n();
  const KPoint v1{-0.5, -0.5}, v2{0.5, -0.5}, v4{-0.5, 0.5};
  sk.base = initial_frame(family, v1);
  sk.e1 = line_frame(family, {1.0, 0.0}, v1, sk.base, sk.n, cfg);
  sk.e4 = line_frame(family, {0.0, 1.0}, v1, sk.base, sk.n, cfg);
  sk.e3 = line_frame(family, {1.0, 0.0}, v4, sk.base, sk.n, cfg);
  sk.e2 = line_frame(family, {0.0, 1.0}, v2, sk.base, sk.n, cfg);
  const auto last = static_cast<std::size_t>(sk.n);
  for (const Mat* v : {&sk.e1.samples[last], &sk.e2.samples[0], &sk.e2.samples[last], &sk.e3.samples[0],
                       &sk.e3.samples[last], &sk.e4.samples[last]})
    sk.vertex_residual = std::max(sk.vertex_residual, linalg::frame_distance(*v, sk.base));
  for (std::size_t j = 0; j <= last; ++j) {
    sk.edge_residual = std::max(sk.edge_residual, linalg::frame_distance(sk.e3.samples[j], sk.e1.samples[j]));
    sk.edge_residual = std::max(sk.edge_residual, linalg::frame_distance(sk.e2.samples[j], sk.e4.samples[j]));
  }
  return sk;
}

/// Extends the skeleton frame to every mesh point except k = 0 by parallel transport
/// along the ray through each point, starting from the ray's boundary intersection.
inline Frame radial_extension(const ProjectorFamily& family, const SkeletonFrame& skeleton, const KMesh& mesh,
                              const TransportConfig& cfg = {}) {
  require(skeleton.n == mesh.n(), "skeleton and mesh sizes differ");
  Frame frame(mesh, family.dim(), family.rank());
  const RayFan fan = build_ray_fan(mesh);
  parallel_for(fan.rays.size(), [&](std::size_t r) {
    const Ray& ray = fan.rays[r];
    Mat current = skeleton.at(family, ray.boundary, cfg);
    KPoint from = ray.boundary;
    for (std::size_t idx : ray.points) {
      const KPoint to = mesh.point(idx);
      current = transport(family, to, from, cfg).matrix * current;
      frame.vectors[idx] = current;
      from = to;
    }
  });
  frame.mark_singular(mesh.origin_index());
  return frame;
}

struct ColumnGaugeDetail {
  double closure_winding = 0.0;  ///< total winding of arg det of the k2-holonomies over k1, divided by 2 pi
};

/// Periodic frame obtained by parallel transport along every k2-line from the bottom
/// edge, corrected by exp(-i s M(k1)) where exp(i M(k1)) is the line holonomy. The
/// logarithm follows the unwrapped determinant phase, so the frame is periodic and
/// smooth exactly when that phase does not wind, i.e. for a trivial bundle.
inline Frame column_gauge_frame(const ProjectorFamily& family, const KMesh& mesh, const TransportConfig& cfg = {},
                                ColumnGaugeDetail* detail = nullptr) {
  const int n = mesh.n(), m = family.rank();
  const KPoint v1{-0.5, -0.5};
  const LineFrame bottom = line_frame(family, {1.0, 0.0}, v1, initial_frame(family, v1), n, cfg);
  const int steps = cfg.steps_for(1.0 / n);
  // cumulative[i][j]: transport from (k1_i, -1/2) to (k1_i, -1/2 + j/N), j = 0..N.
  std::vector<std::vector<Mat>> cumulative(static_cast<std::size_t>(n) + 1);
  std::vector<Mat> holonomy(static_cast<std::size_t>(n) + 1);
  parallel_for(cumulative.size(), [&](std::size_t i) {
    auto& col = cumulative[i];
    col.reserve(static_cast<std::size_t>(n) + 1);
    col.push_back(Mat::Identity(family.dim(), family.dim()));
    const KPoint base = bottom.point(static_cast<int>(i));
    for (int j = 1; j <= n; ++j) {
      const KPoint a = base + KPoint{0.0, static_cast<double>(j - 1) / n};
      const KPoint b = base + KPoint{0.0, static_cast<double>(j) / n};
      col.push_back(transport(family, b, a, steps).matrix * col.back());
    }
    const Mat& phi0 = bottom.samples[i];
    holonomy[i] = linalg::polar_factor(phi0.adjoint() * col.back() * phi0);
  });
  std::vector<double> theta(holonomy.size());
  for (std::size_t i = 0; i < holonomy.size(); ++i) {
    double t = std::arg(holonomy[i].determinant());
    if (i > 0) t += kTwoPi * std::round((theta[i - 1] - t) / kTwoPi);
    theta[i] = t;
  }
  const double winding = (theta.back() - theta.front()) / kTwoPi;
  if (detail) detail->closure_winding = winding;
  if (std::abs(winding) > 0.5)
    fail(ErrorCode::TopologicalObstruction,
         "k2-holonomy determinant winds " + std::to_string(std::lround(winding)) + " times; no periodic column gauge");
  Frame frame(mesh, family.dim(), m);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const cplx unwind = std::exp(-kI * (theta[i] / m));
    const Mat log_m = Mat::Identity(m, m) * (theta[i] / m) + holonomy_log(holonomy[i] * unwind).m;
    const Mat& phi0 = bottom.samples[i];
    for (int j = 0; j < n; ++j) {
      const double s = static_cast<double>(j) / n;
      frame.vectors[mesh.index(static_cast<int>(i), j)] =
          cumulative[i][static_cast<std::size_t>(j)] * phi0 * linalg::expi_hermitian(log_m, -s);
    }
  });
  return frame;
}

/// Kato-Nagy unitary W with W P W^* = P0.
inline Mat kato_nagy(const Mat& p, const Mat& p0) {
  require(p.rows() == p0.rows() && p.cols() == p0.cols(), "projector shapes differ");
  const Mat diff = p0 - p;
  const double gap = linalg::op_norm(diff);
  if (gap >= 1.0 - 1e-6)
    fail(ErrorCode::ProjectorsTooFar, "||P0 - P|| = " + std::to_string(gap) + " is not below 1");
  const Mat id = Mat::Identity(p.rows(), p.cols());
  return linalg::inverse_sqrt(linalg::hermitian_part(id - diff * diff)) * (p0 * p + (id - p0) * (id - p));
}

namespace detail {

/// exp(-1 / (1 - r^2)) on the unit disk, 0 outside.
inline double bump(double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

/// Smooth step equal to 1 for t <= 0 and 0 for t >= 1.
inline double smooth_step_down(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return b / (a + b);
}

/// Minimal periodic displacement between two points of the torus, lattice coordinates.
inline KPoint torus_delta(KPoint a, KPoint b) {
  KPoint d = a - b;
  d.k1 -= std::round(d.k1);
  d.k2 -= std::round(d.k2);
  return d;
}

/// Mesh offsets (di, dj) within radius `width` in lattice units, with bump weights.
struct Stencil {
  std::vector<std::pair<int, int>> offsets;
  std::vector<double> weights;
};

inline Stencil bump_stencil(const KMesh& mesh, double width) {
  Stencil st;
  const int reach = static_cast<int>(std::ceil(width * mesh.n()));
  for (int dj = -reach; dj <= reach; ++dj)
    for (int di = -reach; di <= reach; ++di) {
      const double r = std::hypot(di * mesh.step(), dj * mesh.step()) / width;
      const double w = bump(r);
      if (w <= 0.0) continue;
      st.offsets.emplace_back(di, dj);
      st.weights.push_back(w);
    }
  if (st.offsets.empty()) {
    st.offsets.emplace_back(0, 0);
    st.weights.push_back(1.0);
  }
  return st;
}

}  // namespace detail

/// Disk of the torus (lattice coordinates) on which local smoothing acts.
struct SmoothingRegion {
  KPoint center;
  double radius = 0.1;
};

/// Local smoothing: conjugate the frame into Ran P(center) with the Kato-Nagy
/// unitary, mollify chi * Phi^W over defined points, add (1 - chi) * Phi^W, map back
/// and correct with G^{-1/2}. chi is 1 on the inner half of the disk and decays
/// smoothly to 0 at its rim; the frame is untouched outside the disk. Singular points
/// where chi = 1 receive the mollified value and leave the singular set.
inline Frame local_smooth(const Frame& frame, const ProjectorFamily& family, const SmoothingRegion& region,
                          double kernel_width) {
  require(kernel_width > 0.0 && region.radius > 0.0, "local_smooth requires positive widths");
  const KMesh& mesh = frame.mesh;
  const Mat p0 = family(region.center);
  std::vector<std::size_t> inside;
  for (std::size_t idx = 0; idx < mesh.size(); ++idx)
    if (detail::torus_delta(mesh.point(idx), region.center).norm() < region.radius) inside.push_back(idx);
  std::vector<double> chi(mesh.size(), 0.0);
  std::vector<Mat> w(mesh.size());
  std::vector<Mat> phi_w(mesh.size());
  parallel_for(inside.size(), [&](std::size_t t) {
    const std::size_t idx = inside[t];
    const double d = detail::torus_delta(mesh.point(idx), region.center).norm() / region.radius;
    chi[idx] = detail::smooth_step_down(2.0 * d - 1.0);
    w[idx] = kato_nagy(family(mesh.point(idx)), p0);
    if (frame.defined(idx)) phi_w[idx] = w[idx] * frame[idx];
  });
  const detail::Stencil st = detail::bump_stencil(mesh, kernel_width);
  Frame out = frame;
  std::vector<std::uint8_t> filled(inside.size(), 0);
  std::vector<double> gram_defect(inside.size(), 0.0);
  parallel_for(inside.size(), [&](std::size_t t) {
    const std::size_t idx = inside[t];
    auto [i, j] = mesh.coords(idx);
    Mat acc = Mat::Zero(frame.dim, frame.rank);
    double norm = 0.0;
    for (std::size_t s = 0; s < st.offsets.size(); ++s) {
      const std::size_t q = mesh.index(i + st.offsets[s].first, j + st.offsets[s].second);
      if (!frame.defined(q)) continue;
      norm += st.weights[s];
      if (chi[q] > 0.0) acc += (st.weights[s] * chi[q]) * phi_w[q];
    }
    if (norm <= 0.0) return;
    Mat candidate = acc / norm;
    if (frame.defined(idx)) {
      candidate += (1.0 - chi[idx]) * phi_w[idx];
    } else if (chi[idx] < 1.0) {
      return;
    }
    const Mat back = w[idx].adjoint() * candidate;
    const Mat g = back.adjoint() * back;
    gram_defect[t] = linalg::op_norm(g - Mat::Identity(frame.rank, frame.rank));
    if (gram_defect[t] > 0.5) return;
    out.vectors[idx] = back * linalg::inverse_sqrt(linalg::hermitian_part(g));
    filled[t] = 1;
  });
  for (std::size_t t = 0; t < inside.size(); ++t) {
    if (gram_defect[t] > 0.5)
      fail(ErrorCode::SmoothingGramSingular, "||G - I|| = " + std::to_string(gram_defect[t]) + " at " +
                                                 detail::describe(mesh.point(inside[t])) + " exceeds 1/2");
  }
  out.singular_points.clear();
  for (std::size_t t = 0; t < inside.size(); ++t)
    if (filled[t]) out.singular[inside[t]] = 0;
  for (std::size_t idx = 0; idx < mesh.size(); ++idx)
    if (!out.defined(idx)) out.singular_points.push_back(mesh.point(idx));
  return out;
}

namespace detail {

/// Gram determinants G_1..G_m of the columns of v, G_0 = 1.
inline std::vector<double> gram_determinants(const Mat& v) {
  const Mat g = v.adjoint() * v;
  std::vector<double> dets(static_cast<std::size_t>(v.cols()) + 1, 1.0);
  for (Eigen::Index j = 1; j <= v.cols(); ++j) dets[static_cast<std::size_t>(j)] = g.topLeftCorner(j, j).determinant().real();
  return dets;
}

}  // namespace detail

/// Gram-Schmidt by the determinant formula: xi_a is the formal determinant whose first
/// a - 1 rows hold <v_c, v_b> (row c, column b) and whose last row holds v_1..v_a,
/// divided by sqrt(G_{a-1} G_a). Expanded along the last row.
inline Mat gram_schmidt(const Mat& v, double tol = 1e-12) {
  const auto dets = detail::gram_determinants(v);
  for (std::size_t j = 1; j < dets.size(); ++j)
    if (std::abs(dets[j]) <= tol)
      fail(ErrorCode::NearDependent, "Gram determinant G_" + std::to_string(j) + " = " + std::to_string(dets[j]));
  const Mat g = v.adjoint() * v;
  Mat out(v.rows(), v.cols());
  for (Eigen::Index a = 1; a <= v.cols(); ++a) {
    Vec xi = Vec::Zero(v.rows());
    for (Eigen::Index b = 1; b <= a; ++b) {
      // Minor: rows 1..a-1 of the Gram block, column b removed.
      Mat minor(a - 1, a - 1);
      for (Eigen::Index r = 0; r < a - 1; ++r)
        for (Eigen::Index c = 0, cc = 0; c < a; ++c) {
          if (c == b - 1) continue;
          minor(r, cc++) = g(r, c);
        }
      const cplx cof = (a == 1 ? cplx(1.0) : minor.determinant()) * (((a + b) % 2 == 0) ? 1.0 : -1.0);
      xi += cof * v.col(b - 1);
    }
    out.col(a - 1) = xi / std::sqrt(dets[static_cast<std::size_t>(a - 1)] * dets[static_cast<std::size_t>(a)]);
  }
  return out;
}

/// Classical sequential Gram-Schmidt, the reference for the determinant formula.
inline Mat gram_schmidt_sequential(const Mat& v, double tol = 1e-12) {
  Mat out(v.rows(), v.cols());
  for (Eigen::Index a = 0; a < v.cols(); ++a) {
    Vec x = v.col(a);
    for (Eigen::Index b = 0; b < a; ++b) x -= out.col(b) * out.col(b).dot(v.col(a));
    const double nrm = x.norm();
    if (nrm * nrm <= tol) fail(ErrorCode::NearDependent, "vector " + std::to_string(a) + " is nearly dependent");
    out.col(a) = x / nrm;
  }
  return out;
}

struct MollifyOptions {
  double width = 0.0;                      ///< kernel radius in lattice units
  std::optional<SmoothingRegion> region;   ///< only points inside are replaced
  double singular_tol = 1e-8;              ///< smallest admissible singular value
  const ProjectorFamily* compress = nullptr;  ///< if set, apply P(k) before the polar factor
};

/// Mollify the frame as a map into C^{n x m} and project back to the nearest
/// orthonormal m-frame (polar factor). Singular points are skipped in the average.
inline Frame mollify_reproject(const Frame& frame, const MollifyOptions& opt) {
  require(opt.width > 0.0, "mollify_reproject requires a positive width");
  const KMesh& mesh = frame.mesh;
  const detail::Stencil st = detail::bump_stencil(mesh, opt.width);
  Frame out = frame;
  std::vector<double> sigma(mesh.size(), 1.0);
  parallel_for(mesh.size(), [&](std::size_t idx) {
    if (opt.region && detail::torus_delta(mesh.point(idx), opt.region->center).norm() >= opt.region->radius) return;
    auto [i, j] = mesh.coords(idx);
    Mat acc = Mat::Zero(frame.dim, frame.rank);
    double norm = 0.0;
    for (std::size_t s = 0; s < st.offsets.size(); ++s) {
      const std::size_t q = mesh.index(i + st.offsets[s].first, j + st.offsets[s].second);
      if (!frame.defined(q)) continue;
      acc += st.weights[s] * frame[q];
      norm += st.weights[s];
    }
    if (norm <= 0.0) return;
    acc /= norm;
    if (opt.compress) acc = (*opt.compress)(mesh.point(idx)) * acc;
    sigma[idx] = linalg::smallest_singular_value(acc);
    if (sigma[idx] < opt.singular_tol) return;
    out.vectors[idx] = linalg::polar_factor(acc);
    out.singular[idx] = 0;
  });
  for (std::size_t idx = 0; idx < mesh.size(); ++idx)
    if (sigma[idx] < opt.singular_tol)
      fail(ErrorCode::ReprojectionSingular, "mollified frame at " + detail::describe(mesh.point(idx)) +
                                                " has smallest singular value " + std::to_string(sigma[idx]));
  out.singular_points.clear();
  for (std::size_t idx = 0; idx < mesh.size(); ++idx)
    if (!out.defined(idx)) out.singular_points.push_back(mesh.point(idx));
  return out;
}

struct GradientBoundReport {
  double sup_weighted = 0.0;    ///< max |k| ||grad Phi(k)||
  double sup_unweighted = 0.0;  ///< max ||grad Phi(k)||
  std::vector<std::pair<double, double>> per_radius_profile;  ///< (radius, max ||grad Phi||)
};

/// Finite-difference gradient of a frame, Frobenius norm over both lattice directions.
/// Central differences with periodic wrap; one-sided next to singular points, which
/// are excluded from the suprema together with their four nearest neighbours.
/// Returns a negative value where no difference is available.
inline std::vector<double> frame_gradient_norms(const Frame& frame) {
  const KMesh& mesh = frame.mesh;
  const double h = mesh.step();
  std::vector<double> g(mesh.size(), -1.0);
  parallel_for(mesh.size(), [&](std::size_t idx) {
    if (!frame.defined(idx)) return;
    double sq = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
      const std::size_t fw = mesh.neighbor(idx, axis, +1), bw = mesh.neighbor(idx, axis, -1);
      Mat d;
      if (frame.defined(fw) && frame.defined(bw))
        d = (frame[fw] - frame[bw]) / (2.0 * h);
      else if (frame.defined(fw))
        d = (frame[fw] - frame[idx]) / h;
      else if (frame.defined(bw))
        d = (frame[idx] - frame[bw]) / h;
      else
        return;
      sq += d.squaredNorm();
    }
    g[idx] = std::sqrt(sq);
  });
  return g;
}

inline GradientBoundReport gradient_bound(const Frame& frame) {
  const KMesh& mesh = frame.mesh;
  const auto g = frame_gradient_norms(frame);
  std::vector<std::uint8_t> excluded(mesh.size(), 0);
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) {
    if (frame.defined(idx)) continue;
    excluded[idx] = 1;
    for (int axis = 0; axis < 2; ++axis)
      for (int dir : {-1, 1}) excluded[mesh.neighbor(idx, axis, dir)] = 1;
  }
  GradientBoundReport rep;
  const int bins = mesh.n();
  std::vector<double> profile(static_cast<std::size_t>(bins), -1.0);
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) {
    if (excluded[idx] || g[idx] < 0.0) continue;
    const double r = mesh.point(idx).norm();
    rep.sup_weighted = std::max(rep.sup_weighted, r * g[idx]);
    rep.sup_unweighted = std::max(rep.sup_unweighted, g[idx]);
    const auto b = static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(r / mesh.step() + 0.5)));
    profile[b] = std::max(profile[b], g[idx]);
  }
  for (int b = 0; b < bins; ++b)
    if (profile[static_cast<std::size_t>(b)] >= 0.0)
      rep.per_radius_profile.emplace_back(b * mesh.step(), profile[static_cast<std::size_t>(b)]);
  return rep;
}

/// Maximum nearest-neighbour frame increment over mesh points inside a disk.
inline double max_increment(const Frame& frame, const SmoothingRegion& region) {
  const KMesh& mesh = frame.mesh;
  double best = 0.0;
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) {
    if (!frame.defined(idx)) continue;
    if (detail::torus_delta(mesh.point(idx), region.center).norm() >= region.radius) continue;
    for (int axis = 0; axis < 2; ++axis) {
      const std::size_t q = mesh.neighbor(idx, axis, +1);
      if (frame.defined(q)) best = std::max(best, linalg::frame_distance(frame[q], frame[idx]));
    }
  }
  return best;
}

}  // namespace wd
