#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "wd/errors.hpp"
#include "wd/linalg.hpp"

namespace wd {

/// Uniform N x N mesh of the unit cell, k = (i/N - 1/2, j/N - 1/2), enumerated
/// row-major with k1 fastest: index = j * N + i.
class KMesh {
 public:
  explicit KMesh(int n) : n_(n) {
    if (n_ < 2 || n_ % 2 != 0) fail(ErrorCode::OddMeshSize, "mesh size must be even and >= 2, got " + std::to_string(n));
    neighbors_.resize(size());
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i)
        neighbors_[index(i, j)] = {index(i + 1, j), index(i - 1, j), index(i, j + 1), index(i, j - 1)};
  }

  int n() const { return n_; }
  double step() const { return 1.0 / n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

  /// Index with periodic wrap of (i, j).
  std::size_t index(int i, int j) const {
    const int ii = ((i % n_) + n_) % n_, jj = ((j % n_) + n_) % n_;
    return static_cast<std::size_t>(jj) * n_ + ii;
  }

  std::pair<int, int> coords(std::size_t idx) const {
    return {static_cast<int>(idx % n_), static_cast<int>(idx / n_)};
  }

  KPoint point(int i, int j) const {
    return {static_cast<double>(i) / n_ - 0.5, static_cast<double>(j) / n_ - 0.5};
  }
  KPoint point(std::size_t idx) const {
    auto [i, j] = coords(idx);
    return point(i, j);
  }

  /// Neighbour along axis (0: k1, 1: k2) in direction +1 or -1, periodic.
  std::size_t neighbor(std::size_t idx, int axis, int dir) const {
    return neighbors_[idx][static_cast<std::size_t>(2 * axis + (dir > 0 ? 0 : 1))];
  }

  /// Mesh index of k = 0.
  std::size_t origin_index() const { return index(n_ / 2, n_ / 2); }

  /// Closed loop v1 -> v2 -> v3 -> v4 along E1..E4; 4N points, the return to v1 is implicit.
  std::vector<KPoint> boundary_loop() const {
    std::vector<KPoint> loop;
    loop.reserve(4 * size_t(n_));
    const double h = step();
    for (int s = 0; s < n_; ++s) loop.push_back({-0.5 + s * h, -0.5});
    for (int s = 0; s < n_; ++s) loop.push_back({0.5, -0.5 + s * h});
    for (int s = 0; s < n_; ++s) loop.push_back({0.5 - s * h, 0.5});
    for (int s = 0; s < n_; ++s) loop.push_back({-0.5, 0.5 - s * h});
    return loop;
  }

 private:
  int n_;
  std::vector<std::array<std::size_t, 4>> neighbors_;
};

/// One ray of the radial fan: its intersection with the cell boundary and the mesh
/// points on it, ordered from the boundary towards the origin.
struct Ray {
  KPoint boundary;
  double angle = 0.0;
  std::vector<std::size_t> points;
};

/// Partition of the non-origin mesh points into rays through k = 0.
struct RayFan {
  KPoint origin;
  std::vector<Ray> rays;
};

/// Each non-origin mesh point lies exactly on the ray of its primitive lattice
/// direction, so the nearest-angle assignment is exact and unique. Rays are
/// ordered by ascending angle in (-pi, pi].
inline RayFan build_ray_fan(const KMesh& mesh) {
  const int n = mesh.n(), half = n / 2;
  std::map<std::pair<int, int>, Ray> by_direction;
  for (std::size_t idx = 0; idx < mesh.size(); ++idx) {
    if (idx == mesh.origin_index()) continue;
    auto [i, j] = mesh.coords(idx);
    const int a = i - half, b = j - half;
    const int g = std::gcd(std::abs(a), std::abs(b));
    const int pa = a / g, pb = b / g;
    auto [it, inserted] = by_direction.try_emplace({pa, pb});
    if (inserted) {
      const double scale = 0.5 / std::max(std::abs(pa), std::abs(pb));
      it->second.boundary = {pa * scale, pb * scale};
      it->second.angle = std::atan2(static_cast<double>(pb), static_cast<double>(pa));
    }
    it->second.points.push_back(idx);
  }
  RayFan fan;
  fan.rays.reserve(by_direction.size());
  for (auto& [dir, ray] : by_direction) {
    std::sort(ray.points.begin(), ray.points.end(), [&](std::size_t x, std::size_t y) {
      return mesh.point(x).max_norm() > mesh.point(y).max_norm();
    });
    fan.rays.push_back(std::move(ray));
  }
  std::sort(fan.rays.begin(), fan.rays.end(), [](const Ray& x, const Ray& y) { return x.angle < y.angle; });
  return fan;
}

}  // namespace wd
