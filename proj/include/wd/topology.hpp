#pragma once

// Berry curvature, Chern numbers (continuum integrand and link variables), the
// abelian Berry connection of a frame and Stokes residuals.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <vector>

#include "wd/errors.hpp"
#include "wd/frames.hpp"
#include "wd/kmesh.hpp"
#include "wd/linalg.hpp"
#include "wd/model.hpp"
#include "wd/parallel.hpp"

namespace wd {

enum class DerivativeMethod {
  CentralDifference,  ///< mesh-spaced central differences of P with periodic wrap
  Analytic,           ///< ProjectorFamily::jet
};

/// Omega(k) = -i tr(P [d1 P, d2 P]) at every mesh point, per unit lattice-coordinate area.
struct CurvatureField {
  KMesh mesh;
  std::vector<double> omega;
  double max_imag = 0.0;

  double integral() const {
    double s = 0.0;
    for (double w : omega) s += w;
    return s * mesh.step() * mesh.step();
  }
};

inline CurvatureField berry_curvature(const ProjectorFamily& family, const KMesh& mesh,
                                      DerivativeMethod method = DerivativeMethod::CentralDifference) {
  CurvatureField field{mesh, std::vector<double>(mesh.size(), 0.0), 0.0};
  std::vector<Mat> p;
  if (method == DerivativeMethod::CentralDifference) {
    p.resize(mesh.size());
    parallel_for(mesh.size(), [&](std::size_t idx) { p[idx] = family(mesh.point(idx)); });
  }
  std::vector<double> imag(mesh.size(), 0.0);
  const double h = mesh.step();
  parallel_for(mesh.size(), [&](std::size_t idx) {
    Mat pk, d1, d2;
    if (method == DerivativeMethod::CentralDifference) {
      pk = p[idx];
      d1 = (p[mesh.neighbor(idx, 0, +1)] - p[mesh.neighbor(idx, 0, -1)]) / (2.0 * h);
      d2 = (p[mesh.neighbor(idx, 1, +1)] - p[mesh.neighbor(idx, 1, -1)]) / (2.0 * h);
    } else {
      const ProjectorJet j = family.jet(mesh.point(idx));
      pk = j.p;
      d1 = j.d1;
      d2 = j.d2;
    }
    const cplx tr = (pk * (d1 * d2 - d2 * d1)).trace();
    const cplx w = -kI * tr;
    field.omega[idx] = w.real();
    imag[idx] = std::abs(w.imag());
  });
  for (double v : imag) field.max_imag = std::max(field.max_imag, v);
  return field;
}

/// (1 / 2 pi) times the integral of the curvature, dk1 ^ dk2 positive.
inline double chern_continuum(const ProjectorFamily& family, const KMesh& mesh,
                              DerivativeMethod method = DerivativeMethod::CentralDifference) {
  return berry_curvature(family, mesh, method).integral() / kTwoPi;
}

struct LinkChern {
  int value = 0;
  double raw = 0.0;             ///< sum of plaquette phases / 2 pi before rounding
  double max_plaquette = 0.0;   ///< largest |F| over plaquettes
};

/// Link-variable Chern number: plaquette phases of determinant overlaps of occupied
/// frames, counter-clockwise in (k1, k2).
inline LinkChern chern_fhs_detail(const ProjectorFamily& family, const KMesh& mesh) {
  std::vector<Mat> basis(mesh.size());
  parallel_for(mesh.size(), [&](std::size_t idx) { basis[idx] = family.basis(mesh.point(idx)); });
  auto link = [&](std::size_t a, std::size_t b) {
    const cplx d = (basis[a].adjoint() * basis[b]).determinant();
    return d / std::abs(d);
  };
  std::vector<double> phase(mesh.size());
  parallel_for(mesh.size(), [&](std::size_t idx) {
    const std::size_t r = mesh.neighbor(idx, 0, +1), u = mesh.neighbor(idx, 1, +1);
    const std::size_t ru = mesh.neighbor(r, 1, +1);
    phase[idx] = std::arg(link(idx, r) * link(r, ru) * std::conj(link(u, ru)) * std::conj(link(idx, u)));
  });
  LinkChern out;
  double total = 0.0;
  for (double f : phase) {
    total += f;
    out.max_plaquette = std::max(out.max_plaquette, std::abs(f));
  }
  out.raw = total / kTwoPi;
  out.value = static_cast<int>(std::lround(out.raw));
  if (out.max_plaquette >= kPi - 0.1)
    fail(ErrorCode::PlaquetteTooCoarse,
         "plaquette phase " + std::to_string(out.max_plaquette) + " too close to pi; refine the mesh");
  if (std::abs(out.raw - out.value) >= 0.05)
    fail(ErrorCode::PlaquetteTooCoarse, "link-variable sum " + std::to_string(out.raw) + " is not near an integer");
  return out;
}

inline int chern_fhs(const ProjectorFamily& family, const KMesh& mesh) { return chern_fhs_detail(family, mesh).value; }

struct ChernResult {
  double value_float = 0.0;
  int value_int = 0;
  double discrepancy = 0.0;
};

inline ChernResult chern(const ProjectorFamily& family, const KMesh& int_mesh, const KMesh& float_mesh) {
  ChernResult r;
  r.value_int = chern_fhs(family, int_mesh);
  r.value_float = chern_continuum(family, float_mesh);
  r.discrepancy = std::abs(r.value_float - r.value_int);
  return r;
}

/// Abelian Berry connection from link phases: a[axis][idx] = arg det(Phi(k)^* Phi(k + h e_axis)) / h,
/// the connection on the forward edge from k. Edges touching a singular point are masked.
struct ConnectionField {
  KMesh mesh;
  std::vector<double> a[2];
  std::vector<std::uint8_t> mask[2];
};

inline ConnectionField abelian_connection(const Frame& frame) {
  const KMesh& mesh = frame.mesh;
  ConnectionField c{mesh, {}, {}};
  for (int axis = 0; axis < 2; ++axis) {
    c.a[axis].assign(mesh.size(), 0.0);
    c.mask[axis].assign(mesh.size(), 0);
  }
  parallel_for(mesh.size(), [&](std::size_t idx) {
    for (int axis = 0; axis < 2; ++axis) {
      const std::size_t q = mesh.neighbor(idx, axis, +1);
      if (!frame.defined(idx) || !frame.defined(q)) {
        c.mask[axis][idx] = 1;
        continue;
      }
      c.a[axis][idx] = std::arg((frame[idx].adjoint() * frame[q]).determinant()) / mesh.step();
    }
  });
  return c;
}

/// Rectangle of mesh plaquettes [i0, i1) x [j0, j1) in (unwrapped) mesh indices.
struct MeshRect {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;

  bool contains_plaquette(int i, int j) const { return i >= i0 && i < i1 && j >= j0 && j < j1; }
};

/// Counter-clockwise line integral of A along the boundary of the rectangle.
inline double loop_integral(const ConnectionField& c, const MeshRect& r) {
  const KMesh& mesh = c.mesh;
  const double h = mesh.step();
  double s = 0.0;
  auto edge = [&](int i, int j, int axis, double sign) {
    const std::size_t idx = mesh.index(i, j);
    require(!c.mask[axis][idx], "loop crosses a singular point of the frame");
    s += sign * c.a[axis][idx] * h;
  };
  for (int i = r.i0; i < r.i1; ++i) edge(i, r.j0, 0, +1.0);
  for (int j = r.j0; j < r.j1; ++j) edge(r.i1, j, 1, +1.0);
  for (int i = r.i1 - 1; i >= r.i0; --i) edge(i, r.j1, 0, -1.0);
  for (int j = r.j1 - 1; j >= r.j0; --j) edge(r.i0, j, 1, -1.0);
  return s;
}

/// Curvature integral over plaquettes of a rectangle, corner-averaged, optionally with a hole.
inline double curvature_integral(const CurvatureField& omega, const MeshRect& r,
                                 const std::optional<MeshRect>& hole = std::nullopt) {
  const KMesh& mesh = omega.mesh;
  const double area = mesh.step() * mesh.step();
  double s = 0.0;
  for (int j = r.j0; j < r.j1; ++j)
    for (int i = r.i0; i < r.i1; ++i) {
      if (hole && hole->contains_plaquette(i, j)) continue;
      const double avg = 0.25 * (omega.omega[mesh.index(i, j)] + omega.omega[mesh.index(i + 1, j)] +
                                 omega.omega[mesh.index(i, j + 1)] + omega.omega[mesh.index(i + 1, j + 1)]);
      s += avg * area;
    }
  return s;
}

struct StokesReport {
  double curvature = 0.0;  ///< integral of Omega over the region
  double outer = 0.0;      ///< loop integral of A along the outer boundary
  double inner = 0.0;      ///< loop integral of A along the hole boundary (0 without hole)
  double residual = 0.0;   ///< |curvature - (outer - inner)|
};

/// Stokes check on a rectangle (optionally an annulus with a rectangular hole). The
/// curvature comes from P; the analytic derivative is used when the family has one.
inline StokesReport stokes_residual(const Frame& frame, const ProjectorFamily& family, const MeshRect& region,
                                    const std::optional<MeshRect>& hole = std::nullopt) {
  const CurvatureField omega = berry_curvature(
      family, frame.mesh,
      family.has_analytic_derivative() ? DerivativeMethod::Analytic : DerivativeMethod::CentralDifference);
  const ConnectionField a = abelian_connection(frame);
  StokesReport rep;
  rep.curvature = curvature_integral(omega, region, hole);
  rep.outer = loop_integral(a, region);
  if (hole) rep.inner = loop_integral(a, *hole);
  rep.residual = std::abs(rep.curvature - (rep.outer - rep.inner));
  return rep;
}

/// Whole cell as a plaquette rectangle.
inline MeshRect full_cell(const KMesh& mesh) { return {0, 0, mesh.n(), mesh.n()}; }

/// Square of plaquettes around k = 0 with half-width `half` mesh steps.
inline MeshRect square_around_origin(const KMesh& mesh, int half) {
  const int c = mesh.n() / 2;
  return {c - half, c - half, c + half, c + half};
}

inline void write_curvature_csv(std::ostream& os, const CurvatureField& field) {
  os << "k1,k2,omega\n";
  char buf[96];
  for (std::size_t idx = 0; idx < field.mesh.size(); ++idx) {
    const KPoint k = field.mesh.point(idx);
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", k.k1, k.k2, field.omega[idx]);
    os << buf;
  }
}

}  // namespace wd
