#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "oracles.hpp"
#include "support.hpp"
#include "wd/kmesh.hpp"
#include "wd/model.hpp"
#include "wd/topology.hpp"
#include "wd/transport.hpp"

using namespace wd;
using namespace wdtest;

// ---------------------------------------------------------------- kmesh

TEST(KMesh, TwoByTwoEnumeration) {
  const KMesh mesh(2);
  ASSERT_EQ(mesh.size(), 4u);
  const std::vector<KPoint> want{{-0.5, -0.5}, {0.0, -0.5}, {-0.5, 0.0}, {0.0, 0.0}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(mesh.point(i).k1, want[i].k1);
    EXPECT_EQ(mesh.point(i).k2, want[i].k2);
  }
}

TEST(KMesh, SizeAndStep) {
  const KMesh mesh(64);
  EXPECT_EQ(mesh.size(), 4096u);
  EXPECT_EQ(mesh.step(), 1.0 / 64);
}

TEST(KMesh, OddSizeRejected) {
  EXPECT_WD_ERROR(KMesh(3), ErrorCode::OddMeshSize);
  EXPECT_WD_ERROR(KMesh(0), ErrorCode::OddMeshSize);
}

TEST(KMesh, IndexBijectionAndNeighbourRoundTrip) {
  for (int n : {2, 6, 16}) {
    const KMesh mesh(n);
    std::set<std::size_t> seen;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = mesh.index(i, j);
        EXPECT_TRUE(seen.insert(idx).second);
        EXPECT_EQ(mesh.coords(idx), std::make_pair(i, j));
        for (int axis = 0; axis < 2; ++axis)
          EXPECT_EQ(mesh.neighbor(mesh.neighbor(idx, axis, +1), axis, -1), idx);
      }
    EXPECT_EQ(seen.size(), mesh.size());
  }
}

TEST(KMesh, ContainsVerticesAndOrigin) {
  const KMesh mesh(8);
  EXPECT_EQ(mesh.point(mesh.origin_index()).norm(), 0.0);
  EXPECT_EQ(mesh.point(0).k1, -0.5);
  EXPECT_EQ(mesh.point(0).k2, -0.5);
}

TEST(KMesh, BoundaryLoopTwo) {
  const auto loop = KMesh(2).boundary_loop();
  const std::vector<KPoint> want{{-0.5, -0.5}, {0.0, -0.5}, {0.5, -0.5}, {0.5, 0.0},
                                 {0.5, 0.5},   {0.0, 0.5},  {-0.5, 0.5}, {-0.5, 0.0}};
  ASSERT_EQ(loop.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(loop[i].k1, want[i].k1);
    EXPECT_EQ(loop[i].k2, want[i].k2);
  }
}

TEST(KMesh, BoundaryLoopSpacingAndClosure) {
  const auto loop = KMesh(64).boundary_loop();
  ASSERT_EQ(loop.size(), 256u);
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const KPoint next = loop[(i + 1) % loop.size()];
    EXPECT_NEAR((next - loop[i]).norm(), 1.0 / 64, 1e-15);
  }
  // The step after the last point returns exactly to v1.
  const KPoint end = loop.back() + KPoint{0.0, -1.0 / 64};
  EXPECT_EQ(end.k1, -0.5);
  EXPECT_EQ(end.k2, -0.5);
}

TEST(KMesh, RayFanPartition) {
  const KMesh mesh(16);
  const RayFan fan = build_ray_fan(mesh);
  std::vector<int> count(mesh.size(), 0);
  double last_angle = -10.0;
  for (const Ray& ray : fan.rays) {
    EXPECT_GT(ray.angle, last_angle);
    last_angle = ray.angle;
    EXPECT_NEAR(ray.boundary.max_norm(), 0.5, 1e-15);
    double prev = 1.0;
    for (std::size_t idx : ray.points) {
      ++count[idx];
      const KPoint k = mesh.point(idx);
      EXPECT_NEAR(k.k1 * ray.boundary.k2 - k.k2 * ray.boundary.k1, 0.0, 1e-14);
      EXPECT_GT(k.k1 * ray.boundary.k1 + k.k2 * ray.boundary.k2, 0.0);
      EXPECT_LT(k.max_norm(), prev);
      prev = k.max_norm();
    }
  }
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) EXPECT_EQ(count[idx], idx == mesh.origin_index() ? 0 : 1);
}

// ---------------------------------------------------------------- model

TEST(Model, HamiltonianHermitianAndPeriodic) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (const BlochModel* m : {&haldane_nontrivial(), &haldane_trivial()}) {
    for (int t = 0; t < 20; ++t) {
      const KPoint k{u(rng), u(rng)};
      const Mat h = m->hamiltonian(k);
      EXPECT_LE((h - h.adjoint()).norm() / h.norm(), 1e-12);
      EXPECT_LE((m->hamiltonian(k + KPoint{1.0, 0.0}) - h).norm(), 1e-12);
      EXPECT_LE((m->hamiltonian(k + KPoint{0.0, -1.0}) - h).norm(), 1e-12);
    }
  }
  const BlochModel hof = build_hofstadter(1, 3);
  const Mat h = hof.hamiltonian({0.13, -0.41});
  EXPECT_LE((h - h.adjoint()).norm(), 1e-12);
  EXPECT_LE((hof.hamiltonian({1.13, 0.59}) - h).norm(), 1e-12);
}

TEST(Model, NonHermitianHoppingRejected) {
  Mat t = Mat::Zero(2, 2);
  t(0, 1) = 1.0;
  EXPECT_WD_ERROR(BlochModel("x", 2, {{1, 0, t}}, {0, 1}, {1, 0}, {0, 1}), ErrorCode::InvalidArgument);
}

TEST(Model, AnalyticGradientMatchesDifferences) {
  const BlochModel& m = haldane_nontrivial();
  const KPoint k{0.21, -0.17};
  const auto g = m.hamiltonian_gradient(k);
  const double h = 1e-6;
  EXPECT_LE((g[0] - (m.hamiltonian(k + KPoint{h, 0}) - m.hamiltonian(k - KPoint{h, 0})) / (2 * h)).norm(), 1e-6);
  EXPECT_LE((g[1] - (m.hamiltonian(k + KPoint{0, h}) - m.hamiltonian(k - KPoint{0, h})) / (2 * h)).norm(), 1e-6);
}

TEST(Model, SpectralProjectorConstant) {
  const BlochModel m = build_constant({-1.0, 1.0});
  for (KPoint k : {KPoint{0, 0}, KPoint{0.3, -0.2}}) {
    Mat want = Mat::Zero(2, 2);
    want(0, 0) = 1.0;
    EXPECT_LE((spectral_projector(m, k) - want).norm(), 1e-15);
  }
}

TEST(Model, SpectralProjectorHaldaneAtOrigin) {
  const Mat p = spectral_projector(haldane_nontrivial(), {0.0, 0.0});
  EXPECT_NEAR(p.trace().real(), 1.0, 1e-12);
  EXPECT_LT((p * p - p).norm(), 1e-12);
}

TEST(Model, ProjectorInvariantsProperty) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const BlochModel hof = build_hofstadter(1, 3, {0, 2});
  for (const BlochModel* m : {&haldane_nontrivial(), &haldane_trivial(), &hof}) {
    for (int t = 0; t < 25; ++t) {
      const KPoint k{u(rng), u(rng)};
      const Mat p = spectral_projector(*m, k);
      EXPECT_LE((p * p - p).norm(), 1e-10);
      EXPECT_LE((p - p.adjoint()).norm(), 1e-10);
      EXPECT_NEAR(p.trace().real(), m->rank(), 1e-10);
      EXPECT_LE((spectral_projector(*m, k + KPoint{1, 0}) - p).norm(), 1e-10);
      EXPECT_LE((spectral_projector(*m, k + KPoint{0, 1}) - p).norm(), 1e-10);
    }
  }
}

TEST(Model, AnalyticProjectorJetMatchesDifferences) {
  const ProjectorFamily& f = nontrivial_family();
  const ProjectorFamily numeric(f.dim(), f.rank(), [f](const KPoint& k) { return f.basis(k); });
  for (KPoint k : {KPoint{0.1, 0.2}, KPoint{-0.33, 0.31}, KPoint{0.5, -0.5}}) {
    const ProjectorJet a = f.jet(k), b = numeric.jet(k);
    EXPECT_LE((a.d1 - b.d1).norm(), 1e-7);
    EXPECT_LE((a.d2 - b.d2).norm(), 1e-7);
  }
}

TEST(Model, GrapheneLimitGapless) {
  const BlochModel g = build_haldane(1.0, 0.0, 0.0, 0.0);
  EXPECT_LT(check_gap(g, 96).min_gap, 1e-8);
  const GapReport odd = check_gap(g, 63);
  EXPECT_GT(odd.min_gap, 0.0);
  EXPECT_LT(odd.min_gap, 0.5);
  EXPECT_WD_ERROR(spectral_projector(g, {1.0 / 3.0, -1.0 / 3.0}), ErrorCode::GapClosure);
  EXPECT_WD_ERROR(certify_gap(g, 64), ErrorCode::GapClosure);
}

TEST(Model, GapReports) {
  const GapReport c = check_gap(build_constant({-1.0, 1.0}), 8);
  EXPECT_EQ(c.min_gap, 2.0);
  const GapReport h = check_gap(haldane_nontrivial(), 64);
  EXPECT_GT(h.min_gap, 0.0);
  const GapReport cert = certify_gap(haldane_nontrivial(), 16);
  EXPECT_GT(cert.certified_floor, 0.0);
  EXPECT_LE(cert.certified_floor, cert.min_gap);
}

TEST(Model, GapNestedMeshMonotone) {
  for (const BlochModel* m : {&haldane_nontrivial(), &haldane_trivial()}) {
    double prev = check_gap(*m, 8).min_gap;
    for (int n : {16, 32, 64}) {
      const double g = check_gap(*m, n).min_gap;
      EXPECT_LE(g, prev);
      prev = g;
    }
  }
}

TEST(Model, HofstadterArguments) {
  EXPECT_WD_ERROR(build_hofstadter(0, 1), ErrorCode::NonCoprimeFlux);
  EXPECT_WD_ERROR(build_hofstadter(2, 4), ErrorCode::NonCoprimeFlux);
  const BlochModel m = build_hofstadter(1, 3);
  EXPECT_EQ(m.dim(), 3);
  EXPECT_EQ(m.occupied().first, 0);
  EXPECT_EQ(m.rank(), 1);
}

TEST(Model, HofstadterHalfFluxGapCloses) {
  EXPECT_WD_ERROR(certify_gap(build_hofstadter(1, 2), 16), ErrorCode::GapClosure);
}

TEST(Model, PeriodizeIdentity) {
  const ProjectorFamily& f = nontrivial_family();
  const Mat id = Mat::Identity(2, 2);
  const ProjectorFamily g = periodize({f, {id, id}}, {Mat::Zero(2, 2), Mat::Zero(2, 2)});
  for (KPoint k : {KPoint{0.1, 0.2}, KPoint{-0.4, 0.3}}) EXPECT_EQ((g(k) - f(k)).norm(), 0.0);
}

TEST(Model, PeriodizeCovariantFamily) {
  const ProjectorFamily& f = nontrivial_family();
  Mat m1 = Mat::Zero(2, 2), m2 = Mat::Zero(2, 2);
  m1(1, 1) = 0.7;
  m2(0, 0) = -1.3;
  // Covariant input: V(k)^* P(k) V(k) with V(k) = exp(-i (k1 M1 + k2 M2)).
  const ProjectorFamily cov(2, 1, [f, m1, m2](const KPoint& k) {
    const Mat v = linalg::expi_hermitian(m1, -k.k1) * linalg::expi_hermitian(m2, -k.k2);
    return Mat(v.adjoint() * f.basis(k));
  });
  const std::array<Mat, 2> tau{linalg::expi_hermitian(m1, 1.0), linalg::expi_hermitian(m2, 1.0)};
  const ProjectorFamily per = periodize({cov, tau}, {m1, m2});
  for (KPoint k : {KPoint{0.1, 0.2}, KPoint{-0.4, 0.3}, KPoint{0.5, -0.5}}) {
    EXPECT_LE((per(k + KPoint{1, 0}) - per(k)).norm(), 1e-10);
    EXPECT_LE((per(k + KPoint{0, 1}) - per(k)).norm(), 1e-10);
    EXPECT_LE((per(k) - f(k)).norm(), 1e-10);
  }
}

TEST(Model, PeriodizeRejectsBadGenerators) {
  const ProjectorFamily& f = nontrivial_family();
  Mat sx = Mat::Zero(2, 2), sz = Mat::Zero(2, 2);
  sx(0, 1) = sx(1, 0) = 0.5;
  sz(0, 0) = 0.5;
  sz(1, 1) = -0.5;
  const Mat id = Mat::Identity(2, 2);
  EXPECT_WD_ERROR(periodize({f, {id, id}}, {sx, sz}), ErrorCode::NonCommutingGenerators);
  EXPECT_WD_ERROR(periodize({f, {id, id}}, {sz, Mat::Zero(2, 2)}), ErrorCode::CovarianceMismatch);
}

TEST(Model, HoppingFileRoundTrip) {
  const BlochModel m = load_hopping_file(WD_TEST_DATA "/qwz.txt", {0, 1});
  EXPECT_EQ(m.dim(), 2);
  const KPoint k{0.1, 0.3};
  const double s1 = std::sin(kTwoPi * k.k1), s2 = std::sin(kTwoPi * k.k2);
  const double mz = 1.0 + std::cos(kTwoPi * k.k1) + std::cos(kTwoPi * k.k2);
  Mat want(2, 2);
  want << mz, cplx(s1, -s2), cplx(s1, s2), -mz;
  EXPECT_LE((m.hamiltonian(k) - want).norm(), 1e-12);
  EXPECT_WD_ERROR(load_hopping_file(WD_TEST_DATA "/missing.txt", {0, 1}), ErrorCode::ConfigError);
}

// ---------------------------------------------------------------- Chern numbers (model examples)

TEST(Chern, HaldanePhases) {
  EXPECT_EQ(chern_fhs(nontrivial_family(), KMesh(16)), -1);
  EXPECT_EQ(chern_fhs(trivial_family(), KMesh(16)), 0);
  EXPECT_NEAR(chern_continuum(trivial_family(), KMesh(96)), 0.0, 5e-3);
}

TEST(Chern, HofstadterMatchesDiophantine) {
  for (auto [p, q] : {std::pair{1, 3}, std::pair{1, 5}, std::pair{2, 5}, std::pair{2, 7}}) {
    const auto want = diophantine_cherns(p, q);
    for (int band = 0; band < q; ++band) {
      const ProjectorFamily f = projector_family(build_hofstadter(p, q, {band, 1}));
      EXPECT_EQ(chern_fhs(f, KMesh(24)), want[static_cast<std::size_t>(band)]) << p << "/" << q << " band " << band;
    }
  }
  EXPECT_EQ(diophantine_cherns(1, 3)[0], 1);
}

// ---------------------------------------------------------------- transport

TEST(Transport, ConstantFamilyIdentity) {
  const TransportOp op = transport(constant_family(), {0.5, 0.1}, {-0.2, 0.3}, 64);
  EXPECT_LE((op.matrix - Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(Transport, UnitarityAfterPolarCorrection) {
  const TransportOp op = transport(nontrivial_family(), {0.5, 0.0}, {0.0, 0.0}, 256);
  EXPECT_LT(unitarity_defect(op.matrix), 1e-10);
  EXPECT_LT(intertwining_residual(nontrivial_family(), op), 1e-7);
}

TEST(Transport, GroupProperty) {
  const ProjectorFamily& f = nontrivial_family();
  const KPoint x{0.5, 0.0}, y{0.25, 0.0}, z{0.0, 0.0};
  const Mat xy = transport(f, x, y, 256).matrix, yz = transport(f, y, z, 256).matrix;
  const Mat xz = transport(f, x, z, 256).matrix;
  EXPECT_LT((xy * yz - xz).norm(), 1e-6);
}

TEST(Transport, GroupPropertyConvergesAtFourthOrder) {
  const ProjectorFamily& f = nontrivial_family();
  const KPoint x{0.3, 0.45}, y{0.1, 0.15}, z{-0.2, -0.3};
  auto residual = [&](int steps) {
    return (transport(f, x, y, steps).matrix * transport(f, y, z, steps).matrix - transport(f, x, z, 2 * steps).matrix)
        .norm();
  };
  const double coarse = residual(8), fine = residual(16);
  EXPECT_LT(residual(256), 1e-5);
  EXPECT_GT(coarse / fine, 8.0);
}

TEST(Transport, IntertwiningOrderAndUnitarity) {
  const ProjectorFamily& f = nontrivial_family();
  const KPoint x{0.3, -0.1}, y{-0.2, 0.25};
  std::vector<double> res;
  for (int steps : {8, 16, 32}) {
    const TransportOp op = transport(f, x, y, steps);
    EXPECT_LE(unitarity_defect(op.matrix), 1e-9);
    res.push_back(intertwining_residual(f, op));
  }
  EXPECT_GE(std::log2(res[0] / res[1]), 3.5);
  EXPECT_GE(std::log2(res[1] / res[2]), 3.5);
}

TEST(Transport, PeriodicShiftInvariance) {
  const ProjectorFamily& f = nontrivial_family();
  const KPoint x{0.3, -0.1}, y{-0.2, 0.25}, lambda{1.0, -1.0};
  const Mat a = transport(f, x, y, 64).matrix, b = transport(f, x - lambda, y - lambda, 64).matrix;
  EXPECT_LE((a - b).norm(), 1e-9);
}

TEST(Transport, UnitarityProperty) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 10; ++t) {
    const TransportOp op = transport(trivial_family(), {u(rng), u(rng)}, {u(rng), u(rng)}, TransportConfig{});
    EXPECT_LE(unitarity_defect(op.matrix), 1e-9);
  }
}

TEST(HolonomyLog, Identity) {
  const HolonomyLog h = holonomy_log(Mat::Identity(3, 3));
  EXPECT_LE(h.m.norm(), 1e-15);
}

TEST(HolonomyLog, Diagonal) {
  Mat u = Mat::Identity(2, 2);
  u(0, 0) = std::exp(cplx(0, kPi / 2));
  Mat want = Mat::Zero(2, 2);
  want(0, 0) = kPi / 2;
  EXPECT_LE((holonomy_log(u).m - want).norm(), 1e-12);
}

TEST(HolonomyLog, BranchCut) {
  Mat u = Mat::Identity(2, 2);
  u(0, 0) = -1.0;
  EXPECT_WD_ERROR(holonomy_log(u), ErrorCode::BranchDegenerate);
  const HolonomyLog h = holonomy_log(u, BranchPolicy::ClosedAtPi);
  EXPECT_NEAR(h.eigenphases.back(), kPi, 1e-15);
}

TEST(HolonomyLog, ReproducesRandomUnitaries) {
  std::mt19937 rng(3);
  for (int t = 0; t < 50; ++t) {
    const Mat u = random_unitary(3, rng);
    const HolonomyLog h = holonomy_log(u);
    EXPECT_LE((linalg::expi_hermitian(h.m, 1.0) - u).norm(), 1e-9);
    EXPECT_LE((h.m - h.m.adjoint()).norm(), 1e-12);
    for (double p : h.eigenphases) {
      EXPECT_GT(p, -kPi);
      EXPECT_LE(p, kPi);
    }
  }
}

TEST(LineFrame, ConstantFamily) {
  const ProjectorFamily& f = constant_family();
  const Mat base = initial_frame(f, {-0.5, -0.5});
  const LineFrame lf = line_frame(f, {1, 0}, {-0.5, -0.5}, base, 16);
  for (const Mat& s : lf.samples) EXPECT_LE((s - base).norm(), 1e-14);
}

TEST(LineFrame, HaldanePeriodicAndSubordinate) {
  const ProjectorFamily& f = nontrivial_family();
  const KPoint base_k{-0.5, -0.5};
  const Mat base = initial_frame(f, base_k);
  const LineFrame lf = line_frame(f, {0, 1}, base_k, base, 64);
  EXPECT_LT(lf.periodicity_residual(), 1e-6);
  for (int j = 0; j <= 64; ++j) {
    const Mat& s = lf.samples[static_cast<std::size_t>(j)];
    EXPECT_LE(linalg::orthonormality_defect(s), 1e-9);
    EXPECT_LE((f(lf.point(j)) * s - s).norm(), 1e-6);
  }
}

TEST(LineFrame, TrivialPhasePeriodic) {
  const ProjectorFamily& f = trivial_family();
  const KPoint base_k{-0.5, 0.1};
  const LineFrame lf = line_frame(f, {1, 0}, base_k, initial_frame(f, base_k), 64);
  EXPECT_LT(lf.periodicity_residual(), 1e-7);
}

TEST(LineFrame, LinearInBaseFrame) {
  const ProjectorFamily& f = nontrivial_family();
  const KPoint base_k{-0.5, -0.5};
  const Mat base = initial_frame(f, base_k);
  const cplx phase = std::exp(cplx(0, 0.8));
  const LineFrame a = line_frame(f, {0, 1}, base_k, base, 32), b = line_frame(f, {0, 1}, base_k, phase * base, 32);
  for (std::size_t j = 0; j < a.samples.size(); ++j) EXPECT_LE((b.samples[j] - phase * a.samples[j]).norm(), 1e-12);
}

TEST(LineFrame, RejectsForeignBaseFrame) {
  const ProjectorFamily& f = nontrivial_family();
  Mat bad = Mat::Zero(2, 1);
  bad(0, 0) = 1.0;
  EXPECT_WD_ERROR(line_frame(f, {1, 0}, {0.1, 0.1}, bad, 8), ErrorCode::InvalidArgument);
}
