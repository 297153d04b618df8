#include "rauf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rauf/errors.hpp"
#include "rauf/parallel.hpp"

namespace rauf {

namespace {

std::int64_t cell_coord(double x, double origin, double cell) {
  return static_cast<std::int64_t>(std::floor((x - origin) / cell));
}

/// Mean of the square roots, accumulated in index order so callers that
/// compare against a straight loop get bitwise-equal results.
double mean_root(const std::vector<double>& squared) {
  double sum = 0.0;
  for (const double d : squared) sum += std::sqrt(d);
  return sum / static_cast<double>(squared.size());
}

}  // namespace

std::size_t PointIndex::CellKeyHash::operator()(const CellKey& k) const {
  // splitmix-style avalanche over the three packed coordinates
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (const std::int64_t v : {k.x, k.y, k.z}) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
  }
  return static_cast<std::size_t>(h);
}

PointIndex::PointIndex(std::span<const CartesianPoint> points, double cell_size)
    : points_(points.begin(), points.end()) {
  if (points_.empty()) throw MetricError("point index requires a non-empty cloud");

  CartesianPoint lo = points_[0], hi = points_[0];
  for (const CartesianPoint& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if (cell_size > 0.0) {
    cell_ = cell_size;
  } else {
    // aim for order one point per cell on uniform data
    const double diag = (hi - lo).norm();
    cell_ = diag > 0.0
                ? diag / std::max(1.0, std::cbrt(static_cast<double>(points_.size())))
                : 1.0;
  }
  origin_ = lo;

  cells_.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i)
    cells_[cell_of(points_[i])].push_back(i);

  lo_ = hi_ = cell_of(points_[0]);
  for (const auto& [key, unused] : cells_) {
    lo_ = {std::min(lo_.x, key.x), std::min(lo_.y, key.y), std::min(lo_.z, key.z)};
    hi_ = {std::max(hi_.x, key.x), std::max(hi_.y, key.y), std::max(hi_.z, key.z)};
  }
}

PointIndex::CellKey PointIndex::cell_of(const CartesianPoint& p) const {
  return {cell_coord(p.x(), origin_.x(), cell_),
          cell_coord(p.y(), origin_.y(), cell_),
          cell_coord(p.z(), origin_.z(), cell_)};
}

std::pair<std::size_t, double> PointIndex::nearest(
    const CartesianPoint& query) const {
  const CellKey qc = cell_of(query);

  const auto axis_start = [](std::int64_t c, std::int64_t lo, std::int64_t hi) {
    return std::max<std::int64_t>({lo - c, c - hi, 0});
  };
  const auto axis_reach = [](std::int64_t c, std::int64_t lo, std::int64_t hi) {
    return std::max(std::llabs(c - lo), std::llabs(c - hi));
  };
  // first ring that can intersect the occupied box, and the last that does
  const std::int64_t k_start =
      std::max({axis_start(qc.x, lo_.x, hi_.x), axis_start(qc.y, lo_.y, hi_.y),
                axis_start(qc.z, lo_.z, hi_.z)});
  const std::int64_t k_max =
      std::max({axis_reach(qc.x, lo_.x, hi_.x), axis_reach(qc.y, lo_.y, hi_.y),
                axis_reach(qc.z, lo_.z, hi_.z)});

  std::size_t best_idx = points_.size();
  double best_sq = std::numeric_limits<double>::infinity();

  for (std::int64_t k = k_start; k <= k_max; ++k) {
    // a point in a cell at Chebyshev ring k lies more than (k-1)*cell away;
    // the extra ring of slack makes the cutoff immune to cell-edge rounding
    if (best_idx != points_.size() &&
        static_cast<double>(k - 1) * cell_ > std::sqrt(best_sq))
      break;

    const std::int64_t x0 = std::max(qc.x - k, lo_.x), x1 = std::min(qc.x + k, hi_.x);
    const std::int64_t y0 = std::max(qc.y - k, lo_.y), y1 = std::min(qc.y + k, hi_.y);
    const std::int64_t z0 = std::max(qc.z - k, lo_.z), z1 = std::min(qc.z + k, hi_.z);
    for (std::int64_t x = x0; x <= x1; ++x)
      for (std::int64_t y = y0; y <= y1; ++y)
        for (std::int64_t z = z0; z <= z1; ++z) {
          const std::int64_t cheb = std::max(
              {std::llabs(x - qc.x), std::llabs(y - qc.y), std::llabs(z - qc.z)});
          if (cheb != k) continue;  // interior cells were scanned earlier
          const auto it = cells_.find(CellKey{x, y, z});
          if (it == cells_.end()) continue;
          for (const std::size_t i : it->second) {
            const double d_sq = (points_[i] - query).squaredNorm();
            if (d_sq < best_sq) {
              best_sq = d_sq;
              best_idx = i;
            }
          }
        }
  }
  return {best_idx, best_sq};
}

std::vector<double> nearest_distances_sq(std::span<const CartesianPoint> queries,
                                         const PointIndex& index) {
  std::vector<double> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    out[i] = index.nearest_distance_sq(queries[i]);
  });
  return out;
}

double chamfer_distance(std::span<const CartesianPoint> p,
                        std::span<const CartesianPoint> q) {
  if (p.empty() || q.empty())
    throw MetricError("chamfer distance requires two non-empty clouds");
  const PointIndex index_p(p), index_q(q);
  return mean_root(nearest_distances_sq(p, index_q)) +
         mean_root(nearest_distances_sq(q, index_p));
}

namespace {

FScore f_score_from(const std::vector<double>& p_sq,
                    const std::vector<double>& q_sq, double tau) {
  const double tau_sq = tau * tau;
  const auto within = [tau_sq](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(
               v.begin(), v.end(), [tau_sq](double d) { return d <= tau_sq; })) /
           static_cast<double>(v.size());
  };
  FScore s;
  s.precision = within(p_sq);
  s.recall = within(q_sq);
  s.f = s.precision + s.recall > 0.0
            ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
            : 0.0;
  return s;
}

double cpr_from(const std::vector<double>& p_sq, double zeta) {
  const double zeta_sq = zeta * zeta;
  return static_cast<double>(
             std::count_if(p_sq.begin(), p_sq.end(),
                           [zeta_sq](double d) { return d > zeta_sq; })) /
         static_cast<double>(p_sq.size());
}

}  // namespace

FScore f_score(std::span<const CartesianPoint> p,
               std::span<const CartesianPoint> q, double tau) {
  if (p.empty() || q.empty())
    throw MetricError("f-score requires two non-empty clouds");
  if (!(tau > 0.0)) throw MetricError("f-score match radius must be positive");
  const PointIndex index_p(p, tau), index_q(q, tau);
  return f_score_from(nearest_distances_sq(p, index_q),
                      nearest_distances_sq(q, index_p), tau);
}

double cpr(std::span<const CartesianPoint> p, std::span<const CartesianPoint> q,
           double zeta) {
  if (p.empty()) throw MetricError("clutter ratio requires a non-empty cloud");
  if (!(zeta > 0.0)) throw MetricError("clutter distance threshold must be positive");
  if (q.empty()) return 1.0;  // nothing to match: everything is clutter
  const PointIndex index_q(q, zeta);
  return cpr_from(nearest_distances_sq(p, index_q), zeta);
}

MetricReport evaluate(std::span<const CartesianPoint> p,
                      std::span<const CartesianPoint> q, double tau,
                      double zeta) {
  if (p.empty() || q.empty())
    throw MetricError("evaluation requires two non-empty clouds");
  if (!(tau > 0.0) || !(zeta > 0.0))
    throw MetricError("metric thresholds must be positive");

  const double cell = std::max(tau, zeta);
  const PointIndex index_p(p, cell), index_q(q, cell);
  const std::vector<double> p_sq = nearest_distances_sq(p, index_q);
  const std::vector<double> q_sq = nearest_distances_sq(q, index_p);

  MetricReport report;
  report.chamfer = mean_root(p_sq) + mean_root(q_sq);
  const FScore s = f_score_from(p_sq, q_sq, tau);
  report.f = s.f;
  report.precision = s.precision;
  report.recall = s.recall;
  report.cpr = cpr_from(p_sq, zeta);
  report.tau = tau;
  report.zeta = zeta;
  return report;
}

}  // namespace rauf
