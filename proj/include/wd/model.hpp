#pragma once

// Tight-binding Bloch Hamiltonians and the periodic projector families they induce.

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "wd/errors.hpp"
#include "wd/linalg.hpp"

namespace wd {

inline constexpr double kDefaultGapTolerance = 1e-8;

/// Hopping matrix T_R between the home cell and the cell at lattice vector R.
/// H(k) = sum_R exp(2 pi i k.R) T_R, so H is exactly periodic in lattice coordinates.
struct Hopping {
  int r1 = 0;
  int r2 = 0;
  Mat t;
};

/// Contiguous window of band indices in ascending eigenvalue order.
struct BandWindow {
  int first = 0;
  int count = 1;
};

class BlochModel {
 public:
  BlochModel(std::string name, int dim, std::vector<Hopping> hoppings, BandWindow occupied,
             Eigen::Vector2d a1, Eigen::Vector2d a2, std::map<std::string, double> params = {})
      : name_(std::move(name)),
        dim_(dim),
        hoppings_(std::move(hoppings)),
        occupied_(occupied),
        a1_(std::move(a1)),
        a2_(std::move(a2)),
        params_(std::move(params)) {
    require(dim_ >= 2, "model dimension must be at least 2");
    require(occupied_.count >= 1 && occupied_.count < dim_, "occupied band count must satisfy 1 <= m < n");
    require(occupied_.first >= 0 && occupied_.first + occupied_.count <= dim_, "occupied window out of range");
    for (const auto& h : hoppings_)
      require(h.t.rows() == dim_ && h.t.cols() == dim_, "hopping matrix has wrong shape");
    validate_hermiticity();
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int rank() const { return occupied_.count; }
  BandWindow occupied() const { return occupied_; }
  const Eigen::Vector2d& a1() const { return a1_; }
  const Eigen::Vector2d& a2() const { return a2_; }
  const std::map<std::string, double>& params() const { return params_; }
  const std::vector<Hopping>& hoppings() const { return hoppings_; }

  void set_occupied(BandWindow w) {
    require(w.count >= 1 && w.count < dim_ && w.first >= 0 && w.first + w.count <= dim_,
            "occupied window out of range");
    occupied_ = w;
  }

  Mat hamiltonian(KPoint k) const {
    Mat h = Mat::Zero(dim_, dim_);
    for (const auto& hop : hoppings_) h += phase(k, hop) * hop.t;
    return h;
  }

  /// Analytic gradient (d/dk1, d/dk2) of H in lattice coordinates.
  std::array<Mat, 2> hamiltonian_gradient(KPoint k) const {
    std::array<Mat, 2> g{Mat::Zero(dim_, dim_), Mat::Zero(dim_, dim_)};
    for (const auto& hop : hoppings_) {
      const cplx e = phase(k, hop);
      if (hop.r1 != 0) g[0] += (kI * (kTwoPi * hop.r1)) * e * hop.t;
      if (hop.r2 != 0) g[1] += (kI * (kTwoPi * hop.r2)) * e * hop.t;
    }
    return g;
  }

  /// Upper bound on sup_k ||dH/dk1|| + sup_k ||dH/dk2|| (operator norms).
  double gradient_norm_bound() const {
    double b = 0.0;
    for (const auto& hop : hoppings_)
      b += kTwoPi * (std::abs(hop.r1) + std::abs(hop.r2)) * linalg::op_norm(hop.t);
    return b;
  }

 private:
  static cplx phase(KPoint k, const Hopping& hop) {
    return std::exp(kI * (kTwoPi * (k.k1 * hop.r1 + k.k2 * hop.r2)));
  }

  void validate_hermiticity() const {
    std::map<std::pair<int, int>, Mat> sum;
    for (const auto& h : hoppings_) {
      auto [it, inserted] = sum.try_emplace({h.r1, h.r2}, h.t);
      if (!inserted) it->second += h.t;
    }
    for (const auto& [r, t] : sum) {
      auto mirror = sum.find({-r.first, -r.second});
      const double scale = std::max(1.0, t.norm());
      if (mirror == sum.end()) {
        if (t.norm() > 1e-12 * scale)
          fail(ErrorCode::InvalidArgument, "hopping list is not Hermitian: missing T_{-R} for R=(" +
                                               std::to_string(r.first) + "," + std::to_string(r.second) + ")");
        continue;
      }
      if ((mirror->second - t.adjoint()).norm() > 1e-12 * scale)
        fail(ErrorCode::InvalidArgument, "hopping list is not Hermitian: T_{-R} != T_R^* for R=(" +
                                             std::to_string(r.first) + "," + std::to_string(r.second) + ")");
    }
  }

  std::string name_;
  int dim_;
  std::vector<Hopping> hoppings_;
  BandWindow occupied_;
  Eigen::Vector2d a1_;
  Eigen::Vector2d a2_;
  std::map<std::string, double> params_;
};

/// Projector together with its lattice-coordinate gradient at one k-point.
struct ProjectorJet {
  Mat p;
  Mat d1;
  Mat d2;

  Mat directional(KPoint dir) const { return dir.k1 * d1 + dir.k2 * d2; }
};

/// Periodic smooth family k -> P(k) of rank-m orthogonal projectors on C^n.
///
/// The family is described by an orthonormal basis of Ran P(k); when no analytic
/// derivative is supplied, gradients come from fourth-order central differences.
class ProjectorFamily {
 public:
  using BasisFn = std::function<Mat(const KPoint&)>;
  using JetFn = std::function<ProjectorJet(const KPoint&)>;

  ProjectorFamily(int dim, int rank, BasisFn basis, JetFn jet = {})
      : dim_(dim), rank_(rank), basis_(std::move(basis)), jet_(std::move(jet)) {
    require(dim_ >= 1 && rank_ >= 1 && rank_ <= dim_, "invalid projector family dimensions");
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  bool has_analytic_derivative() const { return static_cast<bool>(jet_); }

  double gap_floor() const { return gap_floor_; }
  void set_gap_floor(double g) { gap_floor_ = g; }

  /// Orthonormal n x m basis of Ran P(k).
  Mat basis(KPoint k) const { return basis_(k); }

  Mat operator()(KPoint k) const {
    const Mat b = basis_(k);
    return b * b.adjoint();
  }

  ProjectorJet jet(KPoint k) const {
    if (jet_) return jet_(k);
    constexpr double h = 2e-4;
    ProjectorJet j;
    j.p = (*this)(k);
    auto diff = [&](KPoint dir) {
      const Mat f1 = (*this)(k + h * dir), fm1 = (*this)(k - h * dir);
      const Mat f2 = (*this)(k + 2.0 * h * dir), fm2 = (*this)(k - 2.0 * h * dir);
      return Mat((8.0 * (f1 - fm1) - (f2 - fm2)) / (12.0 * h));
    };
    j.d1 = diff({1.0, 0.0});
    j.d2 = diff({0.0, 1.0});
    return j;
  }

 private:
  int dim_;
  int rank_;
  BasisFn basis_;
  JetFn jet_;
  double gap_floor_ = 0.0;
};

namespace detail {

inline double window_gap(const Eigen::VectorXd& e, BandWindow w) {
  double gap = std::numeric_limits<double>::infinity();
  if (w.first > 0) gap = std::min(gap, e(w.first) - e(w.first - 1));
  const int top = w.first + w.count;
  if (top < e.size()) gap = std::min(gap, e(top) - e(top - 1));
  return gap;
}

inline std::string describe(KPoint k) {
  std::ostringstream os;
  os.precision(12);
  os << "(" << k.k1 << ", " << k.k2 << ")";
  return os.str();
}

struct Spectrum {
  Eigen::VectorXd energies;
  Mat vectors;
  double gap;
};

inline Spectrum diagonalize(const BlochModel& model, KPoint k, double gap_tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(model.hamiltonian(k));
  Spectrum s{es.eigenvalues(), es.eigenvectors(), window_gap(es.eigenvalues(), model.occupied())};
  if (!(s.gap > gap_tol)) {
    std::ostringstream os;
    os.precision(6);
    os << "local gap " << s.gap << " at k=" << describe(k) << " is below tolerance " << gap_tol;
    fail(ErrorCode::GapClosure, os.str());
  }
  return s;
}

}  // namespace detail

/// Occupied eigenvectors of H(k) with deterministic phases (largest component real positive).
inline Mat occupied_basis(const BlochModel& model, KPoint k, double gap_tol = kDefaultGapTolerance) {
  const auto s = detail::diagonalize(model, k, gap_tol);
  Mat b = s.vectors.middleCols(model.occupied().first, model.rank());
  linalg::fix_column_phases(b);
  return b;
}

/// P(k) = sum over occupied bands of |u_a(k)><u_a(k)|.
inline Mat spectral_projector(const BlochModel& model, KPoint k, double gap_tol = kDefaultGapTolerance) {
  const auto s = detail::diagonalize(model, k, gap_tol);
  const Mat u = s.vectors.middleCols(model.occupied().first, model.rank());
  return u * u.adjoint();
}

/// P(k) and its gradient from first-order perturbation theory with the analytic dH:
/// dP = sum_{a occ, b unocc} (|a><a|dH|b><b| + h.c.) / (E_a - E_b).
inline ProjectorJet spectral_projector_jet(const BlochModel& model, KPoint k,
                                           double gap_tol = kDefaultGapTolerance) {
  const auto s = detail::diagonalize(model, k, gap_tol);
  const int n = model.dim(), m = model.rank(), first = model.occupied().first;
  const Mat u = s.vectors.middleCols(first, m);
  Mat v(n, n - m);
  Eigen::VectorXd ev(n - m);
  for (int b = 0, c = 0; b < n; ++b) {
    if (b >= first && b < first + m) continue;
    v.col(c) = s.vectors.col(b);
    ev(c++) = s.energies(b);
  }
  const auto grad = model.hamiltonian_gradient(k);
  ProjectorJet j;
  j.p = u * u.adjoint();
  std::array<Mat*, 2> out{&j.d1, &j.d2};
  for (int dir = 0; dir < 2; ++dir) {
    Mat x = u.adjoint() * grad[dir] * v;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < n - m; ++b) x(a, b) /= (s.energies(first + a) - ev(b));
    const Mat ux = u * x * v.adjoint();
    *out[dir] = ux + ux.adjoint();
  }
  return j;
}

inline ProjectorFamily projector_family(const BlochModel& model, double gap_tol = kDefaultGapTolerance) {
  return ProjectorFamily(
      model.dim(), model.rank(), [model, gap_tol](const KPoint& k) { return occupied_basis(model, k, gap_tol); },
      [model, gap_tol](const KPoint& k) { return spectral_projector_jet(model, k, gap_tol); });
}

/// Haldane model on the honeycomb lattice, orbitals (A, B), periodic gauge.
/// Next-nearest-neighbour hoppings carry exp(-i phi) on A and exp(+i phi) on B along
/// a1, a2 - a1, -a2; with this choice the lower band of (t2 > 0, phi = pi/2, M = 0)
/// has Chern number -1 for the dk1 ^ dk2 orientation.
inline BlochModel build_haldane(double t1, double t2, double phi, double mass) {
  require(t1 != 0.0, "Haldane model requires t1 != 0");
  std::vector<Hopping> hops;
  auto add = [&](int r1, int r2, int a, int b, cplx value) {
    Mat t = Mat::Zero(2, 2);
    t(a, b) = value;
    hops.push_back({r1, r2, t});
  };
  add(0, 0, 0, 0, mass);
  add(0, 0, 1, 1, -mass);
  // A(0) - B(R) for R in {0, -a1, -a2} and the Hermitian conjugates.
  for (auto [r1, r2] : {std::pair{0, 0}, std::pair{-1, 0}, std::pair{0, -1}}) {
    add(r1, r2, 0, 1, t1);
    add(-r1, -r2, 1, 0, t1);
  }
  const cplx ea = std::exp(-kI * phi);
  for (auto [r1, r2] : {std::pair{1, 0}, std::pair{-1, 1}, std::pair{0, -1}}) {
    add(r1, r2, 0, 0, t2 * ea);
    add(-r1, -r2, 0, 0, t2 * std::conj(ea));
    add(r1, r2, 1, 1, t2 * std::conj(ea));
    add(-r1, -r2, 1, 1, t2 * ea);
  }
  return BlochModel("haldane", 2, std::move(hops), {0, 1}, Eigen::Vector2d(1.0, 0.0),
                    Eigen::Vector2d(0.5, std::sqrt(3.0) / 2.0),
                    {{"t1", t1}, {"t2", t2}, {"phi", phi}, {"M", mass}});
}

/// Harper matrix of the Hofstadter model with flux p/q per plaquette on the q x 1
/// magnetic unit cell (Landau gauge, periodic gauge). Lattice basis a1 = (q, 0), a2 = (0, 1).
inline BlochModel build_hofstadter(int p, int q, BandWindow occupied = {0, 1}) {
  if (q < 2 || std::gcd(p, q) != 1)
    fail(ErrorCode::NonCoprimeFlux, "flux p/q requires gcd(p,q)=1 and q>=2, got p=" + std::to_string(p) +
                                        " q=" + std::to_string(q));
  std::vector<Hopping> hops;
  Mat intra = Mat::Zero(q, q);
  for (int j = 0; j + 1 < q; ++j) {
    intra(j, j + 1) = -1.0;
    intra(j + 1, j) = -1.0;
  }
  hops.push_back({0, 0, intra});
  Mat wrap = Mat::Zero(q, q);
  wrap(q - 1, 0) = -1.0;
  hops.push_back({1, 0, wrap});
  hops.push_back({-1, 0, wrap.adjoint()});
  Mat up = Mat::Zero(q, q);
  for (int j = 0; j < q; ++j) up(j, j) = -std::exp(-kI * (kTwoPi * p * j / q));
  hops.push_back({0, 1, up});
  hops.push_back({0, -1, up.adjoint()});
  return BlochModel("hofstadter", q, std::move(hops), occupied, Eigen::Vector2d(q, 0.0), Eigen::Vector2d(0.0, 1.0),
                    {{"p", static_cast<double>(p)}, {"q", static_cast<double>(q)}});
}

/// k-independent Hamiltonian H(k) = diag(energies).
inline BlochModel build_constant(const std::vector<double>& energies, BandWindow occupied = {0, 1}) {
  const int n = static_cast<int>(energies.size());
  Mat h = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = energies[i];
  return BlochModel("constant", n, {{0, 0, h}}, occupied, Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0));
}

/// Same model in a rotated orbital basis: T_R -> U T_R U^*.
inline BlochModel rotate_orbitals(const BlochModel& model, const Mat& u, std::string name = {}) {
  require(u.rows() == model.dim() && u.cols() == model.dim(), "rotation has wrong shape");
  require((u.adjoint() * u - Mat::Identity(model.dim(), model.dim())).norm() <= 1e-12, "rotation is not unitary");
  std::vector<Hopping> hops;
  for (const auto& h : model.hoppings()) hops.push_back({h.r1, h.r2, u * h.t * u.adjoint()});
  return BlochModel(name.empty() ? model.name() : std::move(name), model.dim(), std::move(hops), model.occupied(),
                    model.a1(), model.a2(), model.params());
}

/// Four orbitals with on-site energies (-1, -1, 1, 1) and the two lower bands occupied.
/// Orbital 0 couples to 2 and orbital 1 to 3 through eps * (cos 2 pi k1 + i sin 2 pi k2),
/// which vanishes at k = (+-1/4, 0).
inline BlochModel build_coupled4(double eps02, double eps13) {
  std::vector<Hopping> hops;
  Mat onsite = Mat::Zero(4, 4);
  onsite.diagonal() << -1.0, -1.0, 1.0, 1.0;
  hops.push_back({0, 0, onsite});
  auto couple = [&](int a, int b, double eps) {
    const double c = 0.5 * eps;
    for (auto [r1, r2, up, down] : {std::tuple{1, 0, c, c}, std::tuple{-1, 0, c, c}, std::tuple{0, 1, c, -c},
                                    std::tuple{0, -1, -c, c}}) {
      Mat t = Mat::Zero(4, 4);
      t(a, b) = up;
      t(b, a) = down;
      hops.push_back({r1, r2, t});
    }
  };
  couple(0, 2, eps02);
  couple(1, 3, eps13);
  return BlochModel("coupled4", 4, std::move(hops), {0, 2}, Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0),
                    {{"eps02", eps02}, {"eps13", eps13}});
}

/// Haldane model embedded in four orbitals: 0 is a flat band at -3, (1, 2) carry the
/// Haldane sublattices A and B, 3 is a flat band at +3. Orbitals 2 and 3 are then mixed
/// by a constant rotation of angle theta. The lower Haldane band and orbital 0 are occupied.
inline BlochModel build_haldane4(double t1, double t2, double phi, double mass, double theta) {
  const BlochModel h = build_haldane(t1, t2, phi, mass);
  std::vector<Hopping> hops;
  for (const auto& hop : h.hoppings()) {
    Mat t = Mat::Zero(4, 4);
    t.block(1, 1, 2, 2) = hop.t;
    hops.push_back({hop.r1, hop.r2, t});
  }
  Mat flat = Mat::Zero(4, 4);
  flat(0, 0) = -3.0;
  flat(3, 3) = 3.0;
  hops.push_back({0, 0, flat});
  const BlochModel embedded("haldane4", 4, std::move(hops), {0, 2}, h.a1(), h.a2(),
                            {{"t1", t1}, {"t2", t2}, {"phi", phi}, {"M", mass}, {"theta", theta}});
  Mat u = Mat::Identity(4, 4);
  u(2, 2) = std::cos(theta);
  u(3, 3) = std::cos(theta);
  u(3, 2) = std::sin(theta);
  u(2, 3) = -std::sin(theta);
  return rotate_orbitals(embedded, u);
}

/// Reads "l1 l2 i j re im" rows (# comments allowed); dimension is the largest index + 1.
inline BlochModel load_hopping_file(const std::string& path, BandWindow occupied,
                                    Eigen::Vector2d a1 = {1.0, 0.0}, Eigen::Vector2d a2 = {0.0, 1.0}) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open hopping file " + path);
  struct Row {
    int l1, l2, i, j;
    cplx v;
  };
  std::vector<Row> rows;
  int dim = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    Row r{};
    double re = 0, im = 0;
    if (!(ls >> r.l1)) continue;
    if (!(ls >> r.l2 >> r.i >> r.j >> re >> im) || r.i < 0 || r.j < 0)
      fail(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": expected 'l1 l2 i j re im'");
    r.v = {re, im};
    dim = std::max({dim, r.i + 1, r.j + 1});
    rows.push_back(r);
  }
  if (rows.empty()) fail(ErrorCode::ConfigError, "hopping file " + path + " has no entries");
  std::map<std::pair<int, int>, Mat> blocks;
  for (const auto& r : rows) {
    auto [it, _] = blocks.try_emplace({r.l1, r.l2}, Mat::Zero(dim, dim));
    it->second(r.i, r.j) += r.v;
  }
  std::vector<Hopping> hops;
  for (auto& [r, t] : blocks) hops.push_back({r.first, r.second, t});
  try {
    return BlochModel("matrixfile", dim, std::move(hops), occupied, a1, a2);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, std::string(e.what()));
  }
}

struct GapReport {
  double min_gap = 0.0;
  KPoint argmin_k;
  int mesh_size = 0;
  /// Lower bound on the gap over the whole torus from min_gap and a Lipschitz bound on H.
  double certified_floor = 0.0;
};

/// Minimum local gap over the uniform mesh k = (i/N - 1/2, j/N - 1/2), scanned with k1 fastest.
inline GapReport check_gap(const BlochModel& model, int mesh_size) {
  require(mesh_size >= 2, "check_gap requires mesh_size >= 2");
  GapReport r;
  r.mesh_size = mesh_size;
  r.min_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < mesh_size; ++j) {
    for (int i = 0; i < mesh_size; ++i) {
      const KPoint k{static_cast<double>(i) / mesh_size - 0.5, static_cast<double>(j) / mesh_size - 0.5};
      Eigen::SelfAdjointEigenSolver<Mat> es(model.hamiltonian(k), Eigen::EigenvaluesOnly);
      const double g = detail::window_gap(es.eigenvalues(), model.occupied());
      if (g < r.min_gap) {
        r.min_gap = g;
        r.argmin_k = k;
      }
    }
  }
  // Every k is within h/2 of a mesh point in each coordinate; by Weyl's inequality each
  // eigenvalue moves by at most (h/2) * (||dH/dk1|| + ||dH/dk2||).
  const double h = 1.0 / mesh_size;
  r.certified_floor = r.min_gap - h * model.gradient_norm_bound();
  return r;
}

/// Refines the scan mesh (doubling from start_mesh up to max_mesh) until the gap is
/// certified positive on the whole torus. Throws GapClosure otherwise.
inline GapReport certify_gap(const BlochModel& model, int start_mesh, double gap_tol = kDefaultGapTolerance,
                             int max_mesh = 1024) {
  for (int n = std::max(2, start_mesh);; n *= 2) {
    GapReport r = check_gap(model, n);
    if (r.min_gap <= gap_tol) {
      std::ostringstream os;
      os << "gap " << r.min_gap << " at k=" << detail::describe(r.argmin_k) << " on mesh " << n;
      fail(ErrorCode::GapClosure, os.str());
    }
    if (r.certified_floor > 0.0) return r;
    if (2 * n > max_mesh) {
      std::ostringstream os;
      os << "gap could not be certified up to mesh " << n << " (min gap " << r.min_gap << " at k="
         << detail::describe(r.argmin_k) << ")";
      fail(ErrorCode::GapClosure, os.str());
    }
  }
}

/// tau-covariant family P(k + e_j) = tau_j P(k) tau_j^{-1}.
struct CovariantFamily {
  ProjectorFamily family;
  std::array<Mat, 2> tau;
};

/// Conjugates a tau-covariant family by V(k) = exp(-i (k1 M1 + k2 M2)) into a periodic one,
/// where tau_j = exp(i M_j) and the generators commute.
inline ProjectorFamily periodize(const CovariantFamily& input, const std::array<Mat, 2>& generators) {
  const int n = input.family.dim();
  for (const auto& g : generators) {
    require(g.rows() == n && g.cols() == n, "generator has wrong shape");
    require((g - g.adjoint()).norm() <= 1e-10 * std::max(1.0, g.norm()), "generator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() > -kPi && es.eigenvalues().maxCoeff() <= kPi + 1e-12,
            "generator spectrum must lie in (-pi, pi]");
  }
  if (linalg::commutator(generators[0], generators[1]).norm() > 1e-10)
    fail(ErrorCode::NonCommutingGenerators, "generators M1, M2 do not commute");
  for (int j = 0; j < 2; ++j) {
    if ((linalg::expi_hermitian(generators[j], 1.0) - input.tau[j]).norm() > 1e-10)
      fail(ErrorCode::CovarianceMismatch, "exp(i M_" + std::to_string(j + 1) + ") does not reproduce tau_" +
                                              std::to_string(j + 1));
  }
  for (KPoint k : {KPoint{0.1, -0.2}, KPoint{-0.37, 0.21}, KPoint{0.45, 0.05}}) {
    const Mat p = input.family(k);
    for (int j = 0; j < 2; ++j) {
      const KPoint shift = j == 0 ? KPoint{1.0, 0.0} : KPoint{0.0, 1.0};
      const Mat expected = input.tau[j] * p * input.tau[j].adjoint();
      if ((input.family(k + shift) - expected).norm() > 1e-8)
        fail(ErrorCode::CovarianceMismatch, "family is not covariant under tau_" + std::to_string(j + 1));
    }
  }
  const bool identity = generators[0].norm() == 0.0 && generators[1].norm() == 0.0;
  if (identity) return input.family;
  auto v = [generators](const KPoint& k) {
    return Mat(linalg::expi_hermitian(generators[0], -k.k1) * linalg::expi_hermitian(generators[1], -k.k2));
  };
  ProjectorFamily src = input.family;
  return ProjectorFamily(
      n, src.rank(), [src, v](const KPoint& k) { return Mat(v(k) * src.basis(k)); },
      [src, v, generators](const KPoint& k) {
        const Mat vk = v(k);
        const ProjectorJet in = src.jet(k);
        ProjectorJet out;
        out.p = vk * in.p * vk.adjoint();
        out.d1 = vk * (in.d1 - kI * linalg::commutator(generators[0], in.p)) * vk.adjoint();
        out.d2 = vk * (in.d2 - kI * linalg::commutator(generators[1], in.p)) * vk.adjoint();
        return out;
      });
}

}  // namespace wd
