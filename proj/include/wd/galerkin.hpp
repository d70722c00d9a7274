#pragma once

// Finite-dimensional reduction of a projector family onto the span V_n of the first n
// ambient orbitals, frame truncation and the discrete H^1 distance of projector families.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "wd/errors.hpp"
#include "wd/frames.hpp"
#include "wd/kmesh.hpp"
#include "wd/linalg.hpp"
#include "wd/model.hpp"
#include "wd/parallel.hpp"
#include "wd/topology.hpp"

namespace wd {

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace detail

inline constexpr double kInjectivityHardFloor = 1e-6;
inline constexpr double kInjectivityCertified = 1e-3;

struct TruncationReport {
  int n = 0;
  double min_injectivity = 1.0;
  KPoint argmin_k{};
  bool certified = true;  ///< min_injectivity >= 1e-3
  bool chern_preserved = true;
  int chern_input = 0;
  int chern_truncated = 0;
  double projector_h1_distance = 0.0;  ///< to the input, after embedding back
};

/// Family k -> [Q(k) 0; 0 0] on C^dim.
inline ProjectorFamily embed(const ProjectorFamily& q, int dim) {
  require(dim >= q.dim(), "embedding dimension below the family dimension");
  if (dim == q.dim()) return q;
  return ProjectorFamily(dim, q.rank(), [q, dim](const KPoint& k) {
    Mat b = Mat::Zero(dim, q.rank());
    b.topRows(q.dim()) = q.basis(k);
    return b;
  });
}

/// sqrt(mean ||Q - P||_F^2 + mean ||grad (Q - P)||_F^2) with periodic central differences.
inline double projector_h1_distance(const ProjectorFamily& q, const ProjectorFamily& p, const KMesh& mesh) {
  require(q.dim() == p.dim(), "projector families live in different spaces");
  std::vector<Mat> diff(mesh.size());
  parallel_for(mesh.size(), [&](std::size_t idx) {
    const KPoint k = mesh.point(idx);
    diff[idx] = q(k) - p(k);
  });
  const double h = mesh.step();
  double l2 = 0.0, grad = 0.0;
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) {
    l2 += diff[idx].squaredNorm();
    for (int axis = 0; axis < 2; ++axis)
      grad += ((diff[mesh.neighbor(idx, axis, +1)] - diff[mesh.neighbor(idx, axis, -1)]) / (2.0 * h)).squaredNorm();
  }
  return std::sqrt((l2 + grad) / static_cast<double>(mesh.size()));
}

struct TruncatedFamily {
  ProjectorFamily family;
  TruncationReport report;
};

/// P_n(k) = orthogonal projector onto E_n Ran P(k) in V_n = span(e_0..e_{n-1}), with
/// the injectivity of E_n on Ran P(k) certified over the mesh.
inline TruncatedFamily truncate_family(const ProjectorFamily& p, int n, const KMesh& mesh) {
  require(n >= p.rank() && n <= p.dim(), "truncation dimension must satisfy rank <= n <= dim");
  TruncationReport rep;
  rep.n = n;
  if (n == p.dim()) {
    rep.chern_input = rep.chern_truncated = chern_fhs(p, mesh);
    return {p, rep};
  }
  std::vector<double> sigma(mesh.size());
  parallel_for(mesh.size(), [&](std::size_t idx) {
    sigma[idx] = linalg::smallest_singular_value(p.basis(mesh.point(idx)).topRows(n));
  });
  rep.min_injectivity = 1.0;
  for (std::size_t idx = 0; idx < mesh.size(); ++idx)
    if (sigma[idx] < rep.min_injectivity) {
      rep.min_injectivity = sigma[idx];
      rep.argmin_k = mesh.point(idx);
    }
  if (rep.min_injectivity < kInjectivityHardFloor)
    fail(ErrorCode::TruncationNotInjective, "E_" + std::to_string(n) + " restricted to Ran P has singular value " +
                                                detail::sci(rep.min_injectivity) + " at " +
                                                detail::describe(rep.argmin_k));
  rep.certified = rep.min_injectivity >= kInjectivityCertified;
  ProjectorFamily q(n, p.rank(), [p, n](const KPoint& k) { return linalg::polar_factor(p.basis(k).topRows(n)); });
  rep.chern_input = chern_fhs(p, mesh);
  try {
    rep.chern_truncated = chern_fhs(q, mesh);
    rep.chern_preserved = rep.chern_truncated == rep.chern_input;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PlaquetteTooCoarse) throw;
    rep.chern_preserved = false;
  }
  rep.projector_h1_distance = projector_h1_distance(embed(q, p.dim()), p, mesh);
  return {q, rep};
}

struct FrameTruncation {
  Frame frame;
  double h1_distance = 0.0;  ///< discrete H^1 distance to the input frame, embedded back
  double min_gram = 1.0;     ///< smallest Gram determinant G_j over the mesh
};

/// Projects every frame vector onto V_n and re-orthonormalizes with the determinant
/// Gram-Schmidt formula. Requires all Gram determinants G_j > 1/2.
inline FrameTruncation frame_truncate(const Frame& frame, int n) {
  require(n >= frame.rank && n <= frame.dim, "truncation dimension must satisfy rank <= n <= dim");
  const KMesh& mesh = frame.mesh;
  FrameTruncation out{Frame(mesh, n, frame.rank), 0.0, 1.0};
  std::vector<double> gmin(mesh.size(), 1.0);
  parallel_for(mesh.size(), [&](std::size_t idx) {
    if (!frame.defined(idx)) return;
    const Mat v = frame[idx].topRows(n);
    const auto dets = detail::gram_determinants(v);
    for (std::size_t j = 1; j < dets.size(); ++j) gmin[idx] = std::min(gmin[idx], dets[j]);
    if (gmin[idx] <= 0.5) return;
    out.frame.vectors[idx] = gram_schmidt(v);
  });
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) {
    if (!frame.defined(idx)) {
      out.frame.mark_singular(idx);
      continue;
    }
    out.min_gram = std::min(out.min_gram, gmin[idx]);
    if (gmin[idx] <= 0.5)
      fail(ErrorCode::GramTooSmall, "Gram determinant " + detail::sci(gmin[idx]) + " <= 1/2 at " +
                                        detail::describe(mesh.point(idx)));
  }
  std::vector<Mat> diff(mesh.size());
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) {
    diff[idx] = -frame[idx];
    diff[idx].topRows(n) += out.frame[idx];
  }
  const double h = mesh.step();
  double sum = 0.0;
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) {
    sum += diff[idx].squaredNorm();
    for (int axis = 0; axis < 2; ++axis)
      sum += ((diff[mesh.neighbor(idx, axis, +1)] - diff[mesh.neighbor(idx, axis, -1)]) / (2.0 * h)).squaredNorm();
  }
  out.h1_distance = std::sqrt(sum / static_cast<double>(mesh.size()));
  return out;
}

}  // namespace wd
