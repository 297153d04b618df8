#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rauf/geometry.hpp"

namespace rauf {

/// Uniform spatial hash grid over a fixed point set for exact
/// nearest-neighbor queries. Cells at growing Chebyshev radius are scanned
/// until no unvisited cell can hold a closer point, so results match a
/// brute-force linear scan bit for bit (both compare the same squared
/// Euclidean distances).
class PointIndex {
 public:
  /// cell_size > 0; picks a heuristic edge from the bounding box when <= 0.
  /// Throws MetricError when points is empty.
  explicit PointIndex(std::span<const CartesianPoint> points,
                      double cell_size = 0.0);

  /// Index into the constructed span and squared distance of the nearest
  /// point (lowest index wins exact ties, as in a linear scan).
  std::pair<std::size_t, double> nearest(const CartesianPoint& query) const;

  double nearest_distance_sq(const CartesianPoint& query) const {
    return nearest(query).second;
  }

  std::size_t size() const { return points_.size(); }
  double cell_size() const { return cell_; }

 private:
  struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
  };
  struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const;
  };

  CellKey cell_of(const CartesianPoint& p) const;

  std::vector<CartesianPoint> points_;
  double cell_ = 1.0;
  CartesianPoint origin_ = CartesianPoint::Zero();
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells_;
  CellKey lo_{0, 0, 0}, hi_{0, 0, 0};  // occupied-cell bounding box
};

/// For each point of queries, squared distance to its nearest neighbor in
/// index, in query order (parallelized, deterministic).
std::vector<double> nearest_distances_sq(std::span<const CartesianPoint> queries,
                                         const PointIndex& index);

/// Symmetric Chamfer distance: mean over P of the unsquared Euclidean
/// nearest distance to Q, plus the same with the roles swapped.
/// Throws MetricError when either cloud is empty.
double chamfer_distance(std::span<const CartesianPoint> p,
                        std::span<const CartesianPoint> q);

struct FScore {
  double f = 0.0;
  double precision = 0.0;  // fraction of P within tau of Q
  double recall = 0.0;     // fraction of Q within tau of P
};

/// F-score at match radius tau (inclusive). Throws MetricError when either
/// cloud is empty or tau <= 0.
FScore f_score(std::span<const CartesianPoint> p,
               std::span<const CartesianPoint> q, double tau);

/// Default clutter distance threshold, meters.
inline constexpr double kDefaultZeta = 0.5;

/// Clutter point ratio: fraction of P strictly farther than zeta from every
/// point of Q. Throws MetricError when P is empty or zeta <= 0; an empty
/// reference Q makes every point clutter (returns 1).
double cpr(std::span<const CartesianPoint> p, std::span<const CartesianPoint> q,
           double zeta = kDefaultZeta);

struct MetricReport {
  double chamfer = 0.0;
  double f = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double cpr = 0.0;
  double tau = kDefaultZeta;
  double zeta = kDefaultZeta;
};

/// All metrics of cloud p against reference q in one pass.
MetricReport evaluate(std::span<const CartesianPoint> p,
                      std::span<const CartesianPoint> q, double tau,
                      double zeta);

}  // namespace rauf
