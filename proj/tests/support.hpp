#pragma once

#include <random>

#include "wd/linalg.hpp"
#include "wd/model.hpp"

#define EXPECT_WD_ERROR(stmt, expected)                   \
  try {                                                   \
    stmt;                                                 \
    ADD_FAILURE() << "expected " << to_string(expected);  \
  } catch (const ::wd::Error& wd_error_) {                \
    EXPECT_EQ(wd_error_.code(), expected) << wd_error_.what(); \
  }

namespace wdtest {

using wd::cplx;
using wd::Mat;

inline Mat random_matrix(int rows, int cols, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a;
}

inline Mat random_unitary(int n, std::mt19937& rng) { return wd::linalg::polar_factor(random_matrix(n, n, rng)); }

/// Rank-m projector on C^n with a random range.
inline Mat random_projector(int n, int m, std::mt19937& rng) {
  const Mat b = wd::linalg::polar_factor(random_matrix(n, m, rng));
  return b * b.adjoint();
}

inline const wd::BlochModel& haldane_nontrivial() {
  static const wd::BlochModel m = wd::build_haldane(1.0, 0.1, wd::kPi / 2, 0.0);
  return m;
}

inline const wd::BlochModel& haldane_trivial() {
  static const wd::BlochModel m = wd::build_haldane(1.0, 0.1, wd::kPi / 2, 1.0);
  return m;
}

inline const wd::ProjectorFamily& nontrivial_family() {
  static const wd::ProjectorFamily f = wd::projector_family(haldane_nontrivial());
  return f;
}

inline const wd::ProjectorFamily& trivial_family() {
  static const wd::ProjectorFamily f = wd::projector_family(haldane_trivial());
  return f;
}

inline const wd::ProjectorFamily& constant_family() {
  static const wd::ProjectorFamily f = wd::projector_family(wd::build_constant({-1.0, 1.0}));
  return f;
}

/// Same projectors, basis columns multiplied by k-dependent phases.
inline wd::ProjectorFamily rephased(const wd::ProjectorFamily& f) {
  return wd::ProjectorFamily(f.dim(), f.rank(), [f](const wd::KPoint& k) {
    Mat b = f.basis(k);
    for (int a = 0; a < b.cols(); ++a) b.col(a) *= std::exp(cplx(0.0, 3.0 * k.k1 - 5.0 * k.k2 + a));
    return b;
  });
}

}  // namespace wdtest
