#include "reorient/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reorient/assignment.hpp"
#include "reorient/error.hpp"

namespace reorient {

namespace {

double nearest_sq(const Eigen::VectorXd& x, const CoordSet& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : set) best = std::min(best, (x - y).squaredNorm());
  return best;
}

}  // namespace

double chamfer(const CoordSet& a, const CoordSet& b, int dim) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySet, "chamfer of an empty set");
  for (const auto* s : {&a, &b}) {
    for (const auto& x : *s) {
      if (x.size() != dim) throw Error(ErrorCode::DimensionMismatch, "chamfer dimension mismatch");
    }
  }
  double sum = 0.0;
  for (const auto& x : a) sum += nearest_sq(x, b);
  for (const auto& y : b) sum += nearest_sq(y, a);
  return sum;
}

CoordSet PoseSet::translations() const {
  CoordSet out;
  for (const auto& p : poses_) out.emplace_back(p.translation());
  return out;
}

CoordSet PoseSet::orientations() const {
  CoordSet out;
  for (const auto& p : poses_) out.emplace_back(p.euler());
  return out;
}

CoordSet PoseSet::coords6(double orientation_weight) const {
  CoordSet out;
  for (const auto& p : poses_) {
    Eigen::VectorXd v(6);
    v << p.translation(), orientation_weight * p.euler();
    out.push_back(std::move(v));
  }
  return out;
}

double stage_loss(const PoseSet& pred, const PoseSet& gt, int stage, double orientation_weight) {
  if (pred.empty() || gt.empty()) throw Error(ErrorCode::EmptySet, "stage loss of an empty pose set");
  const double six = chamfer(pred.coords6(orientation_weight), gt.coords6(orientation_weight), 6);
  if (stage == 1) return chamfer(pred.translations(), gt.translations(), 3) + six;
  if (stage == 2) return chamfer(pred.orientations(), gt.orientations(), 3) + six;
  throw Error(ErrorCode::BadConfig, "stage must be 1 or 2");
}

double cross_entropy(const std::array<double, 2>& x, int label) {
  if (label != 0 && label != 1) throw Error(ErrorCode::BadConfig, "label must be 0 or 1");
  const double m = std::max(x[0], x[1]);
  return -x[label] + m + std::log(std::exp(x[0] - m) + std::exp(x[1] - m));
}

double emd(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "emd needs equal-size clouds");
  if (a.empty()) throw Error(ErrorCode::EmptySet, "emd of empty clouds");
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = (a[i] - b[j]).norm();
  return solve_assignment(cost).cost;
}

double diversity_distance(std::span<const Vec3> pq1, std::span<const Vec3> pq2, std::size_t n_obj,
                          double L, std::span<const std::size_t> subsample) {
  if (pq1.size() != pq2.size() || pq1.size() != n_obj) {
    throw Error(ErrorCode::SizeMismatch, "diversity distance needs two clouds of n_obj points");
  }
  if (!(L > 0.0)) throw Error(ErrorCode::NonpositiveDiameter, "support diameter must be positive");
  if (n_obj <= kDiversitySubsample) return emd(pq1, pq2) / (static_cast<double>(n_obj) * L);

  std::vector<std::size_t> idx(subsample.begin(), subsample.end());
  if (idx.empty()) {
    PointList mid(pq1.size());
    for (std::size_t i = 0; i < pq1.size(); ++i) mid[i] = 0.5 * (pq1[i] + pq2[i]);
    idx = farthest_point_indices(mid, kDiversitySubsample);
  }
  PointList a, b;
  for (std::size_t i : idx) {
    a.push_back(pq1[i]);
    b.push_back(pq2[i]);
  }
  return emd(a, b) / (static_cast<double>(idx.size()) * L);
}

DiversityMetric::DiversityMetric(std::span<const Vec3> initial_object, double support_diameter,
                                 std::size_t max_points)
    : L_(support_diameter) {
  if (!(support_diameter > 0.0)) {
    throw Error(ErrorCode::NonpositiveDiameter, "support diameter must be positive");
  }
  if (initial_object.empty()) throw Error(ErrorCode::EmptySet, "empty object cloud");
  if (initial_object.size() <= max_points) {
    indices_.resize(initial_object.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) indices_[i] = i;
  } else {
    indices_ = farthest_point_indices(initial_object, max_points);
  }
  n_obj_ = indices_.size();
}

PointList DiversityMetric::pick(std::span<const Vec3> cloud) const {
  PointList out;
  out.reserve(indices_.size());
  for (std::size_t i : indices_) out.push_back(cloud[i]);
  return out;
}

double DiversityMetric::distance(std::span<const Vec3> a, std::span<const Vec3> b) const {
  return emd(pick(a), pick(b)) / (static_cast<double>(n_obj_) * L_);
}

bool DiversityMetric::exceeds(std::span<const Vec3> a, std::span<const Vec3> b,
                              double delta) const {
  const PointList pa = pick(a), pb = pick(b);
  const double budget = delta * static_cast<double>(n_obj_) * L_;
  // n * |centroid difference| <= EMD <= identity-matching cost
  const double lower = static_cast<double>(n_obj_) * (centroid(pa) - centroid(pb)).norm();
  if (lower > budget) return true;
  double upper = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) upper += (pa[i] - pb[i]).norm();
  if (upper <= budget) return false;
  return emd(pa, pb) > budget;
}

std::vector<std::size_t> dedup_filter(std::span<const PointList> clouds, double delta,
                                      const DiversityMetric& metric) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    bool distinct = true;
    for (std::size_t k : kept) {
      if (!metric.exceeds(clouds[i], clouds[k], delta)) {
        distinct = false;
        break;
      }
    }
    if (distinct) kept.push_back(i);
  }
  return kept;
}

}  // namespace reorient
