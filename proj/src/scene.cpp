#include "reorient/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "reorient/error.hpp"

namespace reorient {

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Pose6D::Pose6D(const Vec3& translation, const Vec3& euler) : t_(translation) {
  if (!translation.allFinite() || !euler.allFinite()) {
    throw Error(ErrorCode::ParseError, "pose has non-finite components");
  }
  for (int i = 0; i < 3; ++i) o_[i] = wrap_angle(euler[i]);
}

Pose6D Pose6D::from_array(std::span<const double> v) {
  if (v.size() != 6) throw Error(ErrorCode::ParseError, "pose needs 6 numbers");
  return Pose6D(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]));
}

std::array<double, 6> Pose6D::to_array() const {
  return {t_.x(), t_.y(), t_.z(), o_.x(), o_.y(), o_.z()};
}

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << 1, 0, 0, 0, c, -s, 0, s, c;
  return R;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, 0, s, 0, 1, 0, -s, 0, c;
  return R;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, -s, 0, s, c, 0, 0, 0, 1;
  return R;
}

RigidTransform pose_to_transform(const Pose6D& p) {
  const Vec3& o = p.euler();
  return {rot_z(o.z()) * rot_y(o.y()) * rot_x(o.x()), p.translation()};
}

Pose6D transform_to_pose(const RigidTransform& T) {
  const Mat3& R = T.R;
  const double pitch = std::atan2(-R(2, 0), std::hypot(R(0, 0), R(1, 0)));
  double roll = 0.0, yaw = 0.0;
  if (std::abs(std::cos(pitch)) > 1e-12) {
    roll = std::atan2(R(2, 1), R(2, 2));
    yaw = std::atan2(R(1, 0), R(0, 0));
  } else {
    // gimbal lock: only roll - yaw (or roll + yaw) is observable
    yaw = 0.0;
    roll = std::atan2(-R(1, 2), R(1, 1));
  }
  return Pose6D(T.t, Vec3(roll, pitch, yaw));
}

PointList transform_cloud(std::span<const Vec3> points, const RigidTransform& T) {
  PointList out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(T.apply(p));
  return out;
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 c = Vec3::Zero();
  if (points.empty()) return c;
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

double rotation_angle(const Mat3& R) {
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

RelativeRotation relative_rotation(const RigidTransform& T_i, const RigidTransform& T_j) {
  Mat3 R = T_j.R * T_i.R.transpose();
  return {R, rotation_angle(R)};
}

std::vector<std::size_t> farthest_point_indices(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  if (k == 0 || k > n) {
    throw Error(ErrorCode::BadCount, "farthest point sampling needs 1 <= k <= |points|");
  }
  const Vec3 c = centroid(points);
  std::size_t first = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (points[i] - c).squaredNorm();
    if (d < best) {
      best = d;
      first = i;
    }
  }

  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  chosen.push_back(first);
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  taken[first] = 1;
  std::size_t last = first;
  while (chosen.size() < k) {
    std::size_t arg = n;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double d = (points[i] - points[last]).squaredNorm();
      if (d < min_d[i]) min_d[i] = d;
      if (min_d[i] > far) {
        far = min_d[i];
        arg = i;
      }
    }
    taken[arg] = 1;
    chosen.push_back(arg);
    last = arg;
  }
  return chosen;
}

PointList farthest_point_sample(std::span<const Vec3> points, std::size_t k) {
  PointList out;
  for (std::size_t i : farthest_point_indices(points, k)) out.push_back(points[i]);
  return out;
}

PointList estimate_normals(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  if (k < 3 || n < k) {
    throw Error(ErrorCode::TooFewPoints, "normal estimation needs |points| >= k >= 3");
  }
  const Vec3 c = centroid(points);
  PointList normals(n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = {(points[j] - points[i]).squaredNorm(), j};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    Vec3 mean = Vec3::Zero();
    for (std::size_t m = 0; m < k; ++m) mean += points[dist[m].second];
    mean /= static_cast<double>(k);
    Mat3 cov = Mat3::Zero();
    for (std::size_t m = 0; m < k; ++m) {
      const Vec3 d = points[dist[m].second] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    Vec3 nrm = es.eigenvectors().col(0).normalized();
    if (nrm.dot(points[i] - c) < 0.0) nrm = -nrm;
    normals[i] = nrm;
  }
  return normals;
}

double support_diameter(std::span<const Vec3> support_points) {
  if (support_points.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "support diameter needs at least 2 points");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < support_points.size(); ++i) {
    for (std::size_t j = i + 1; j < support_points.size(); ++j) {
      best = std::max(best, (support_points[i] - support_points[j]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

namespace {

// Largest-remainder apportionment of `total` over `counts`; every non-empty
// class gets at least one slot when possible.
std::array<std::size_t, 3> proportional_quotas(const std::array<std::size_t, 3>& counts,
                                               std::size_t total) {
  const std::size_t sum = counts[0] + counts[1] + counts[2];
  std::array<std::size_t, 3> q{0, 0, 0};
  std::array<double, 3> rem{0, 0, 0};
  std::size_t used = 0;
  for (int l = 0; l < 3; ++l) {
    const double exact = static_cast<double>(total) * static_cast<double>(counts[l]) /
                         static_cast<double>(sum);
    q[l] = static_cast<std::size_t>(std::floor(exact));
    rem[l] = exact - static_cast<double>(q[l]);
    used += q[l];
  }
  while (used < total) {
    int arg = 0;
    for (int l = 1; l < 3; ++l)
      if (rem[l] > rem[arg]) arg = l;
    ++q[arg];
    rem[arg] = -1.0;
    ++used;
  }
  for (int l = 0; l < 3; ++l) {
    if (counts[l] > 0 && q[l] == 0) {
      int donor = 0;
      for (int m = 1; m < 3; ++m)
        if (q[m] > q[donor]) donor = m;
      --q[donor];
      ++q[l];
    }
  }
  return q;
}

// FPS down to `k`; when the class has fewer points, the FPS order is repeated.
// A class already at its quota is kept as given.
PointList resample(const PointList& pts, std::size_t k) {
  if (k == 0 || pts.empty()) return {};
  if (k == pts.size()) return pts;
  const std::size_t take = std::min(k, pts.size());
  const auto idx = farthest_point_indices(pts, take);
  PointList out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(pts[idx[i % idx.size()]]);
  return out;
}

}  // namespace

SegmentedScene SegmentedScene::from_clouds(PointList object, PointList support, PointList table,
                                           std::size_t size) {
  if (object.empty() || support.empty()) {
    throw Error(ErrorCode::EmptyClass, "scene needs at least one object and one support point");
  }
  for (const auto* cloud : {&object, &support, &table}) {
    for (const auto& p : *cloud) {
      if (!p.allFinite()) throw Error(ErrorCode::ParseError, "non-finite coordinate");
    }
  }
  if (size < 2) throw Error(ErrorCode::BadCount, "scene size must be at least 2");
  const auto q = proportional_quotas({object.size(), support.size(), table.size()}, size);

  SegmentedScene s;
  s.object_ = resample(object, q[0]);
  s.support_ = resample(support, q[1]);
  s.table_ = resample(table, q[2]);
  s.support_detail_ = std::move(support);
  if (!table.empty()) {
    std::vector<double> z;
    z.reserve(table.size());
    for (const auto& p : table) z.push_back(p.z());
    std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(z.size() / 2), z.end());
    s.table_z_ = z[z.size() / 2];
  }
  return s;
}

PointList SegmentedScene::points() const {
  PointList out;
  out.reserve(size());
  out.insert(out.end(), object_.begin(), object_.end());
  out.insert(out.end(), support_.begin(), support_.end());
  out.insert(out.end(), table_.begin(), table_.end());
  return out;
}

std::vector<Label> SegmentedScene::labels() const {
  std::vector<Label> out;
  out.reserve(size());
  out.insert(out.end(), object_.size(), Label::Object);
  out.insert(out.end(), support_.size(), Label::Support);
  out.insert(out.end(), table_.size(), Label::Table);
  return out;
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

void append_number(std::string& line, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, ptr);
}

}  // namespace

RawScene read_pts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open scene file: " + path.string());
  RawScene raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;

    std::array<std::string_view, 5> tok;
    std::size_t ntok = 0;
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto b = rest.find_first_not_of(" \t");
      if (b == std::string_view::npos) break;
      rest.remove_prefix(b);
      const auto e = rest.find_first_of(" \t");
      const auto t = rest.substr(0, e);
      if (ntok == tok.size()) {
        ntok = tok.size() + 1;
        break;
      }
      tok[ntok++] = t;
      if (e == std::string_view::npos) break;
      rest.remove_prefix(e);
    }
    if (ntok != 4) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": expected `x y z label`");
    }
    double x, y, z;
    if (!parse_double(tok[0], x) || !parse_double(tok[1], y) || !parse_double(tok[2], z) ||
        !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad coordinate");
    }
    if (tok[3] == "0") {
      raw.object.emplace_back(x, y, z);
    } else if (tok[3] == "1") {
      raw.support.emplace_back(x, y, z);
    } else if (tok[3] == "2") {
      raw.table.emplace_back(x, y, z);
    } else {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": label must be 0, 1 or 2");
    }
  }
  return raw;
}

void write_pts(const std::filesystem::path& path, const RawScene& raw) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write scene file: " + path.string());
  std::string buf = "# frame=support_bottom units=m\n";
  const std::array<std::pair<const PointList*, char>, 3> parts{
      {{&raw.object, '0'}, {&raw.support, '1'}, {&raw.table, '2'}}};
  for (const auto& [cloud, label] : parts) {
    for (const auto& p : *cloud) {
      append_number(buf, p.x());
      buf.push_back(' ');
      append_number(buf, p.y());
      buf.push_back(' ');
      append_number(buf, p.z());
      buf.push_back(' ');
      buf.push_back(label);
      buf.push_back('\n');
    }
  }
  out << buf;
  if (!out) throw Error(ErrorCode::IoError, "failed writing scene file: " + path.string());
}

RawScene to_support_frame(RawScene raw) {
  if (raw.support.empty()) return raw;
  Vec3 lo = raw.support.front(), hi = raw.support.front();
  for (const auto& p : raw.support) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 origin((lo.x() + hi.x()) / 2.0, (lo.y() + hi.y()) / 2.0, lo.z());
  if (origin.isZero(0.0)) return raw;
  for (auto* cloud : {&raw.object, &raw.support, &raw.table}) {
    for (auto& p : *cloud) p -= origin;
  }
  return raw;
}

SegmentedScene load_scene(const std::filesystem::path& path, std::size_t size) {
  RawScene raw = to_support_frame(read_pts(path));
  return SegmentedScene::from_clouds(std::move(raw.object), std::move(raw.support),
                                     std::move(raw.table), size);
}

}  // namespace reorient
