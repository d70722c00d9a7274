#pragma once

// Composite Wannier functions from a frame by the discrete inverse Bloch-Floquet
// transform, and their localization measures: power moments, the quadratic spread,
// exponential decay fits and Fourier H^s norms.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
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

/// Wannier amplitudes w_a(R, orb) on the sites R in [-L, L)^2. The discrete transform is
/// N-periodic in R; its values are stored on the centred period [-N/2, N/2)^2 and the
/// remaining sites of the window are zero.
struct WannierSet {
  int L = 0;
  int mesh_n = 0;
  int dim = 0;
  int rank = 0;
  int masked_points = 0;
  std::vector<Mat> values;  ///< per band: (2L)^2 x dim, row = site_index(R1, R2)

  int side() const { return 2 * L; }
  Eigen::Index site_index(int r1, int r2) const { return static_cast<Eigen::Index>(r2 + L) * side() + (r1 + L); }
  cplx operator()(int band, int r1, int r2, int orb) const {
    return values[static_cast<std::size_t>(band)](site_index(r1, r2), orb);
  }
  /// Upper bound of the Parseval deficit caused by zero-filled singular points.
  double parseval_deficit_bound() const {
    return static_cast<double>(masked_points) / (static_cast<double>(mesh_n) * mesh_n);
  }
  double mass(int band) const { return values[static_cast<std::size_t>(band)].squaredNorm(); }
};

namespace detail {

/// F(r, i) = exp(sign * 2 pi i k_i R_r) with k_i = i/N - 1/2 and R_r = r - N/2.
inline Mat fourier_matrix(int n, double sign) {
  Mat f(n, n);
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(i) / n - 0.5;
      const double rr = r - n / 2;
      // Reduce the phase k * R modulo 1 before scaling for accuracy.
      const double ph = k * rr - std::floor(k * rr);
      f(r, i) = std::exp(cplx(0.0, sign * kTwoPi * ph));
    }
  return f;
}

}  // namespace detail

/// w_a(R, orb) = (1/N^2) sum_k exp(2 pi i k.R) phi_a(k)_orb.
inline WannierSet synthesize(const Frame& frame, int L) {
  const int n = frame.mesh.n();
  if (2 * L < n)
    fail(ErrorCode::SupercellTooSmall, "supercell L = " + std::to_string(L) + " is below N/2 = " + std::to_string(n / 2));
  WannierSet w;
  w.L = L;
  w.mesh_n = n;
  w.dim = frame.dim;
  w.rank = frame.rank;
  for (std::size_t idx = 0; idx < frame.mesh.size(); ++idx) w.masked_points += frame.defined(idx) ? 0 : 1;
  w.values.assign(static_cast<std::size_t>(frame.rank), Mat::Zero(static_cast<Eigen::Index>(w.side()) * w.side(), frame.dim));
  const Mat f = detail::fourier_matrix(n, +1.0);
  const double scale = 1.0 / (static_cast<double>(n) * n);
  const std::size_t jobs = static_cast<std::size_t>(frame.rank) * frame.dim;
  std::vector<Mat> blocks(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const int a = static_cast<int>(job) / frame.dim, orb = static_cast<int>(job) % frame.dim;
    Mat x(n, n);  // x(i, j) = phi_a(k1_i, k2_j)_orb
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) x(i, j) = frame[frame.mesh.index(i, j)](orb, a);
    blocks[job] = scale * (f * x * f.transpose());
  });
  for (std::size_t job = 0; job < jobs; ++job) {
    const int a = static_cast<int>(job) / frame.dim, orb = static_cast<int>(job) % frame.dim;
    for (int r2 = 0; r2 < n; ++r2)
      for (int r1 = 0; r1 < n; ++r1)
        w.values[static_cast<std::size_t>(a)](w.site_index(r1 - n / 2, r2 - n / 2), orb) = blocks[job](r1, r2);
  }
  return w;
}

/// Cartesian position of site R.
inline Eigen::Vector2d site_position(int r1, int r2, const Eigen::Vector2d& a1, const Eigen::Vector2d& a2) {
  return static_cast<double>(r1) * a1 + static_cast<double>(r2) * a2;
}

inline const std::vector<double>& default_s_grid() {
  static const std::vector<double> grid{0.25, 0.5, 0.75, 0.9, 1.0};
  return grid;
}

struct MomentReport {
  std::vector<double> s_grid;
  std::vector<std::vector<double>> moments;       ///< [band][s]: sum |x|^{2s} |w|^2
  std::vector<std::vector<double>> tail_moments;  ///< [band][s]: same, restricted to |x| >= 1
  std::vector<double> second_moment;              ///< [band]: <X^2>
  std::vector<Eigen::Vector2d> center;            ///< [band]: <X>
  double mv_spread = 0.0;                         ///< sum_a <X^2>_a - |<X>_a|^2

  double total_second_moment() const {
    double s = 0.0;
    for (double v : second_moment) s += v;
    return s;
  }
};

inline MomentReport moments(const WannierSet& w, const std::vector<double>& s_grid, const Eigen::Vector2d& a1,
                            const Eigen::Vector2d& a2) {
  MomentReport rep;
  rep.s_grid = s_grid;
  for (int a = 0; a < w.rank; ++a) {
    std::vector<double> mom(s_grid.size(), 0.0), tail(s_grid.size(), 0.0);
    double x2 = 0.0;
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int r2 = -w.L; r2 < w.L; ++r2)
      for (int r1 = -w.L; r1 < w.L; ++r1) {
        const double p = w.values[static_cast<std::size_t>(a)].row(w.site_index(r1, r2)).squaredNorm();
        if (p == 0.0) continue;
        const Eigen::Vector2d x = site_position(r1, r2, a1, a2);
        const double r = x.norm();
        x2 += r * r * p;
        c += p * x;
        if (r == 0.0) continue;
        for (std::size_t t = 0; t < s_grid.size(); ++t) {
          const double v = std::pow(r, 2.0 * s_grid[t]) * p;
          mom[t] += v;
          if (r >= 1.0 - 1e-12) tail[t] += v;
        }
      }
    rep.moments.push_back(mom);
    rep.tail_moments.push_back(tail);
    rep.second_moment.push_back(x2);
    rep.center.push_back(c);
    rep.mv_spread += x2 - c.squaredNorm();
  }
  return rep;
}

struct ExpFit {
  double beta = 0.0;
  double r2 = 0.0;
  int shells = 0;  ///< shells used in the fit
};

/// Shell profile of one band: for bins of width max(|a1|, |a2|) in |x|, the largest
/// site amplitude sqrt(sum_orb |w|^2) and the radius of the site attaining it.
/// Only sites inside the disk inscribed in the symmetric part of the window count, and
/// shells below 1e-13 of the peak amplitude are roundoff of the transform and dropped.
inline std::vector<std::pair<double, double>> shell_profile(const WannierSet& w, int band, const Eigen::Vector2d& a1,
                                                            const Eigen::Vector2d& a2) {
  const double width = std::max(a1.norm(), a2.norm());
  const double cross = std::abs(a1.x() * a2.y() - a1.y() * a2.x());
  const double inscribed = (w.L - 1) * cross / width;
  const int bins = static_cast<int>(inscribed / width) + 1;
  std::vector<std::pair<double, double>> best(static_cast<std::size_t>(bins), {0.0, -1.0});
  for (int r2 = -w.L; r2 < w.L; ++r2)
    for (int r1 = -w.L; r1 < w.L; ++r1) {
      const double r = site_position(r1, r2, a1, a2).norm();
      if (r > inscribed) continue;
      const double amp = w.values[static_cast<std::size_t>(band)].row(w.site_index(r1, r2)).norm();
      auto& slot = best[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(r / width)))];
      if (amp > slot.second) slot = {r, amp};
    }
  double peak = 0.0;
  for (const auto& s : best) peak = std::max(peak, s.second);
  std::vector<std::pair<double, double>> out;
  for (const auto& s : best)
    if (s.second > 1e-13 * peak) out.push_back(s);
  return out;
}

/// Least-squares fit of log(shell max |w|) against shell radius over the middle 60% of
/// the shells; beta = -slope.
inline ExpFit exp_fit_profile(const std::vector<std::pair<double, double>>& profile) {
  const int total = static_cast<int>(profile.size());
  if (total < 8)
    fail(ErrorCode::InsufficientSupport, "only " + std::to_string(total) + " shells carry mass; 8 are required");
  const int lo = static_cast<int>(std::floor(0.2 * total)), hi = static_cast<int>(std::ceil(0.8 * total));
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const int cnt = hi - lo;
  for (int i = lo; i < hi; ++i) {
    const double x = profile[static_cast<std::size_t>(i)].first, y = std::log(profile[static_cast<std::size_t>(i)].second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vx = sxx - sx * sx / cnt, vy = syy - sy * sy / cnt, cxy = sxy - sx * sy / cnt;
  ExpFit fit;
  fit.shells = cnt;
  fit.beta = vx > 0.0 ? -cxy / vx : 0.0;
  fit.r2 = (vx > 0.0 && vy > 0.0) ? cxy * cxy / (vx * vy) : 0.0;
  return fit;
}

inline std::vector<ExpFit> exp_fit(const WannierSet& w, const Eigen::Vector2d& a1, const Eigen::Vector2d& a2) {
  std::vector<ExpFit> out;
  for (int a = 0; a < w.rank; ++a) out.push_back(exp_fit_profile(shell_profile(w, a, a1, a2)));
  return out;
}

struct HsReport {
  double s = 0.0;
  int mesh_n = 0;
  std::vector<double> norm_per_band;
  double norm = 0.0;      ///< sqrt of the band-averaged squared norm
  double seminorm = 0.0;  ///< same with weight |gamma|^{2s}
};

/// Fourier H^s norm sqrt(sum_gamma (1 + |gamma|^2)^s ||phi_hat_gamma||^2) over the
/// symmetric integer window of the N x N transform. Singular points count as zero.
inline HsReport hs_norm(const WannierSet& coeffs, double s) {
  HsReport rep;
  rep.s = s;
  rep.mesh_n = coeffs.mesh_n;
  double total = 0.0, semi = 0.0;
  const int half = coeffs.mesh_n / 2;
  for (int a = 0; a < coeffs.rank; ++a) {
    double band = 0.0;
    for (int g2 = -half; g2 < half; ++g2)
      for (int g1 = -half; g1 < half; ++g1) {
        const double p = coeffs.values[static_cast<std::size_t>(a)].row(coeffs.site_index(g1, g2)).squaredNorm();
        const double gg = static_cast<double>(g1) * g1 + static_cast<double>(g2) * g2;
        band += std::pow(1.0 + gg, s) * p;
        if (gg > 0.0) semi += std::pow(gg, s) * p;
      }
    rep.norm_per_band.push_back(std::sqrt(band));
    total += band;
  }
  rep.norm = std::sqrt(total / coeffs.rank);
  rep.seminorm = std::sqrt(semi / coeffs.rank);
  return rep;
}

inline HsReport hs_norm(const Frame& frame, double s) { return hs_norm(synthesize(frame, frame.mesh.n() / 2), s); }

struct DichotomyRow {
  int L = 0;
  int mesh_n = 0;
  std::vector<double> x2;  ///< <X^2> per band
  double f_mv = 0.0;
};

struct HsRow {
  double s = 0.0;
  int mesh_n = 0;
  double norm = 0.0;
  double seminorm = 0.0;
};

enum class Classification { Trivial, NonTrivial, Inconclusive };

inline std::string to_string(Classification c) {
  switch (c) {
    case Classification::Trivial: return "TRIVIAL";
    case Classification::NonTrivial: return "NONTRIVIAL";
    case Classification::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

struct DichotomyOptions {
  std::vector<double> s_grid = default_s_grid();
  TransportConfig transport;
  double gap_tol = kDefaultGapTolerance;
};

struct DichotomyReport {
  std::string model;
  std::map<std::string, double> params;
  int mesh_n = 0;
  double gap_floor = 0.0;
  int chern_int = 0;
  double chern_float = 0.0;
  std::string frame_kind;  ///< "column_gauge" or "radial"
  std::vector<DichotomyRow> per_L;
  std::vector<HsRow> hs_table;
  std::optional<ExpFit> exp;  ///< worst band; empty when the support is compact
  bool compact_support = false;
  double x2_log_slope = 0.0;  ///< fit of sum_a <X^2>_a against log L
  double x2_log_r2 = 0.0;
  double x2_relative_change = 0.0;  ///< between the two largest L
  Classification classification = Classification::Inconclusive;
};

namespace detail {

inline void linear_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& r2) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, c = sxy - sx * sy / n;
  slope = vx > 0.0 ? c / vx : 0.0;
  r2 = (vx > 0.0 && vy > 0.0) ? c * c / (vx * vy) : 0.0;
}

}  // namespace detail

/// Frame used for a model with the given link-variable Chern number: the periodic column
/// gauge when the bundle is trivial, the radial parallel-transport frame otherwise.
inline Frame dichotomy_frame(const ProjectorFamily& family, const KMesh& mesh, int chern_int,
                             const TransportConfig& cfg) {
  if (chern_int == 0) return column_gauge_frame(family, mesh, cfg);
  return radial_extension(family, skeleton_frame(family, mesh, cfg), mesh, cfg);
}

inline DichotomyReport dichotomy_report(const BlochModel& model, int n, std::vector<int> l_list,
                                        const DichotomyOptions& opt = {}) {
  require(!l_list.empty(), "dichotomy_report needs at least one supercell size");
  std::sort(l_list.begin(), l_list.end());
  l_list.erase(std::unique(l_list.begin(), l_list.end()), l_list.end());
  DichotomyReport rep;
  rep.model = model.name();
  rep.params = model.params();
  rep.mesh_n = n;
  const GapReport gap = certify_gap(model, n, opt.gap_tol);
  rep.gap_floor = gap.certified_floor;
  const ProjectorFamily family = projector_family(model, opt.gap_tol);
  const KMesh mesh(n);
  rep.chern_int = chern_fhs(family, mesh);
  rep.chern_float = chern_continuum(family, mesh);
  rep.frame_kind = rep.chern_int == 0 ? "column_gauge" : "radial";

  std::optional<WannierSet> largest;
  for (int L : l_list) {
    const KMesh row_mesh(2 * L);
    const Frame frame = dichotomy_frame(family, row_mesh, rep.chern_int, opt.transport);
    WannierSet w = synthesize(frame, L);
    const MomentReport mom = moments(w, opt.s_grid, model.a1(), model.a2());
    rep.per_L.push_back({L, row_mesh.n(), mom.second_moment, mom.mv_spread});
    for (double s : opt.s_grid) {
      const HsReport hs = hs_norm(w, s);
      rep.hs_table.push_back({s, row_mesh.n(), hs.norm, hs.seminorm});
    }
    largest = std::move(w);
  }

  try {
    for (const ExpFit& f : exp_fit(*largest, model.a1(), model.a2()))
      if (!rep.exp || f.r2 < rep.exp->r2) rep.exp = f;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientSupport) throw;
    rep.compact_support = true;
  }

  std::vector<double> logl, x2;
  for (const auto& row : rep.per_L) {
    double s = 0.0;
    for (double v : row.x2) s += v;
    logl.push_back(std::log(static_cast<double>(row.L)));
    x2.push_back(s);
  }
  if (x2.size() >= 2) {
    detail::linear_fit(logl, x2, rep.x2_log_slope, rep.x2_log_r2);
    const double prev = x2[x2.size() - 2], last = x2.back();
    // Spreads below 1e-12 (lattice units squared) are transform roundoff around a point mass.
    rep.x2_relative_change = std::abs(last - prev) / std::max({std::abs(last), std::abs(prev), 1e-12});
  }

  const bool exponential = rep.compact_support || (rep.exp && rep.exp->r2 > 0.97 && rep.exp->beta > 0.0);
  const bool stable = x2.size() >= 2 && rep.x2_relative_change < 0.01;
  const bool growing = x2.size() >= 2 && rep.x2_log_slope > 0.0 && rep.x2_log_r2 > 0.9;
  if (rep.chern_int == 0 && exponential && stable)
    rep.classification = Classification::Trivial;
  else if (std::abs(rep.chern_int) >= 1 && growing)
    rep.classification = Classification::NonTrivial;
  else
    rep.classification = Classification::Inconclusive;
  return rep;
}

inline void write_wannier_csv(std::ostream& os, const WannierSet& w) {
  os << "band,R1,R2,orbital,re,im\n";
  char buf[160];
  for (int a = 0; a < w.rank; ++a)
    for (int r2 = -w.L; r2 < w.L; ++r2)
      for (int r1 = -w.L; r1 < w.L; ++r1)
        for (int o = 0; o < w.dim; ++o) {
          const cplx v = w(a, r1, r2, o);
          std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.12g,%.12g\n", a, r1, r2, o, v.real(), v.imag());
          os << buf;
        }
}

}  // namespace wd
