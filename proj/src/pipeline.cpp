#include "reorient/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "reorient/error.hpp"
#include "reorient/parallel.hpp"

namespace reorient {

namespace {

constexpr std::uint64_t kStreamPropose = 1;
constexpr std::uint64_t kStreamRefine = 2;

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  if (q.norm() < 1e-12) return Mat3::Identity();
  q.normalize();
  return q.toRotationMatrix();
}

/// Rotation about a uniformly random axis by |N(0, sigma)|, capped at `cap`.
Mat3 small_rotation(std::mt19937_64& rng, double sigma, double cap) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 axis(n(rng), n(rng), n(rng));
  if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
  const double angle = std::min(std::abs(n(rng)) * sigma, cap);
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Pose whose rotation is R and whose object centroid lands at c.
Pose6D pose_with_centroid(const Mat3& R, const Vec3& c, const Vec3& c0) {
  return transform_to_pose({R, c - R * c0});
}

}  // namespace

std::string_view sampler_kind_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::GaussianPrior: return "gaussian_prior";
    case SamplerKind::LibraryPrior: return "library_prior";
    case SamplerKind::ExternalFile: return "external_file";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_name(std::string_view s) {
  for (auto k : {SamplerKind::GaussianPrior, SamplerKind::LibraryPrior, SamplerKind::ExternalFile}) {
    if (sampler_kind_name(k) == s) return k;
  }
  throw Error(ErrorCode::BadSamplerConfig, "unknown sampler kind: " + std::string(s));
}

void SamplerConfig::validate() const {
  if (M < 1) throw Error(ErrorCode::BadSamplerConfig, "proposal count M must be at least 1");
  if (!(translation_spread > 0.0) || !(orientation_spread > 0.0)) {
    throw Error(ErrorCode::BadSamplerConfig, "sampler spreads must be positive");
  }
}

void PipelineParams::validate() const {
  if (!(s1_min >= 0 && s1_min <= 1 && s2_min >= 0 && s2_min <= 1 && delta1 >= 0 &&
        delta2 >= 0 && n_seeds >= 1 && max_refine >= 1 && jitter_orientation >= 0 &&
        jitter_translation >= 0 && step_angle > 0 && step_z > 0 && min_step_angle > 0 &&
        min_step_z > 0 && max_evaluations >= 1)) {
    throw Error(ErrorCode::BadConfig, "pipeline parameters out of range");
  }
}

std::vector<Pose6D> read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadSamplerSource, "cannot open pose file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::ParseError, path.string() + ": expected an array");
  std::vector<Pose6D> poses;
  for (const auto& rec : doc) {
    const nlohmann::json& arr = rec.is_object() && rec.contains("pose") ? rec.at("pose") : rec;
    if (!arr.is_array() || arr.size() != 6) {
      throw Error(ErrorCode::ParseError, path.string() + ": pose records need 6 numbers");
    }
    std::array<double, 6> v;
    for (std::size_t k = 0; k < 6; ++k) {
      if (!arr[k].is_number()) throw Error(ErrorCode::ParseError, path.string() + ": non-numeric pose");
      v[k] = arr[k].get<double>();
    }
    poses.push_back(Pose6D::from_array(v));
  }
  return poses;
}

PlacementCandidate score_candidate(const StabilityOracle& oracle, const Pose6D& delta, int stage) {
  PlacementCandidate c;
  c.delta = delta;
  c.stage = stage;
  c.transformed_object = oracle.place(delta);
  try {
    c.report = oracle.classify(delta);
  } catch (const Error& e) {
    c.error = std::string(error_code_name(e.code())) + ": " + e.what();
  }
  return c;
}

std::vector<PlacementCandidate> propose_stage1(const StabilityOracle& oracle,
                                               const SegmentedScene& scene,
                                               const SamplerConfig& cfg, unsigned threads) {
  cfg.validate();
  std::vector<Pose6D> deltas;
  const PointList& obj = scene.object();
  const Vec3 c0 = centroid(obj);

  switch (cfg.kind) {
    case SamplerKind::ExternalFile:
      deltas = read_pose_file(cfg.path);
      break;
    case SamplerKind::LibraryPrior: {
      const auto library = read_pose_file(cfg.path);
      if (library.empty()) throw Error(ErrorCode::BadSamplerSource, "empty placement library");
      deltas.resize(cfg.M);
      for (std::size_t i = 0; i < cfg.M; ++i) {
        auto rng = derived_rng(cfg.seed, kStreamPropose, i);
        std::uniform_int_distribution<std::size_t> pick(0, library.size() - 1);
        std::normal_distribution<double> n(0.0, cfg.translation_spread);
        const RigidTransform base = pose_to_transform(library[pick(rng)]);
        const Vec3 c = base.apply(c0) + Vec3(n(rng), n(rng), n(rng));
        const Mat3 R = small_rotation(rng, cfg.orientation_spread, std::numbers::pi) * base.R;
        deltas[i] = pose_with_centroid(R, c, c0);
      }
      break;
    }
    case SamplerKind::GaussianPrior: {
      const PointList& sup = scene.support();
      Vec3 lo = sup.front(), hi = sup.front();
      for (const auto& p : sup) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      double radius = 0.0;
      for (const auto& p : obj) radius = std::max(radius, (p - c0).norm());
      const Vec3 mean(0.5 * (lo.x() + hi.x()), 0.5 * (lo.y() + hi.y()), hi.z() + radius);
      deltas.resize(cfg.M);
      for (std::size_t i = 0; i < cfg.M; ++i) {
        auto rng = derived_rng(cfg.seed, kStreamPropose, i);
        std::normal_distribution<double> n(0.0, cfg.translation_spread);
        const Vec3 c = mean + Vec3(n(rng), n(rng), n(rng));
        deltas[i] = pose_with_centroid(random_rotation(rng), c, c0);
      }
      break;
    }
  }

  std::vector<PlacementCandidate> out(deltas.size());
  parallel_for(deltas.size(), threads,
               [&](std::size_t i) { out[i] = score_candidate(oracle, deltas[i], 1); });
  return out;
}

std::vector<PlacementCandidate> filter_candidates(std::vector<PlacementCandidate> cands,
                                                  double s_min, double delta,
                                                  const DiversityMetric& metric) {
  std::erase_if(cands, [&](const PlacementCandidate& c) {
    return !c.ok() || c.report.score < s_min;
  });
  std::stable_sort(cands.begin(), cands.end(),
                   [](const PlacementCandidate& a, const PlacementCandidate& b) {
                     return a.report.score > b.report.score;
                   });
  std::vector<PointList> clouds;
  clouds.reserve(cands.size());
  for (const auto& c : cands) clouds.push_back(c.transformed_object);
  std::vector<PlacementCandidate> kept;
  for (std::size_t i : dedup_filter(clouds, delta, metric)) kept.push_back(std::move(cands[i]));
  return kept;
}

namespace {

/// Local search state: rotation and centroid of the object.
struct AscentPoint {
  Mat3 R;
  Vec3 c;
};

PlacementCandidate ascend(const StabilityOracle& oracle, const Vec3& c0, AscentPoint x,
                          const PipelineParams& params) {
  PlacementCandidate best = score_candidate(oracle, pose_with_centroid(x.R, x.c, c0), 2);
  if (!best.ok()) return best;
  double step_a = params.step_angle;
  double step_z = params.step_z;
  std::size_t evals = 1;
  while (step_a >= params.min_step_angle && step_z >= params.min_step_z &&
         evals < params.max_evaluations) {
    bool improved = false;
    for (int coord = 0; coord < 4 && !improved; ++coord) {
      for (int sign : {1, -1}) {
        if (evals >= params.max_evaluations) break;
        AscentPoint y = x;
        if (coord < 3) {
          y.R = Eigen::AngleAxisd(sign * step_a, Vec3::Unit(coord)).toRotationMatrix() * x.R;
        } else {
          y.c.z() += sign * step_z;
        }
        PlacementCandidate c = score_candidate(oracle, pose_with_centroid(y.R, y.c, c0), 2);
        ++evals;
        if (c.ok() && c.report.score > best.report.score) {
          best = std::move(c);
          x = y;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      step_a *= 0.5;
      step_z *= 0.5;
    }
  }
  return best;
}

}  // namespace

std::vector<PlacementCandidate> refine_stage2(const StabilityOracle& oracle,
                                              const PlacementCandidate& cand,
                                              const PipelineParams& params, std::uint64_t seed) {
  const Vec3 c0 = centroid(oracle.object());
  const RigidTransform T = pose_to_transform(cand.delta);
  std::vector<PlacementCandidate> out;
  for (std::size_t s = 0; s < params.n_seeds; ++s) {
    AscentPoint x{T.R, T.apply(c0)};
    if (s > 0) {
      auto rng = derived_rng(seed, kStreamRefine, s);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Vec3 dt;
      do {
        dt = Vec3(u(rng), u(rng), u(rng));
      } while (dt.norm() > 1.0);
      x.c += params.jitter_translation * dt;
      x.R = small_rotation(rng, params.jitter_orientation / 2.0, params.jitter_orientation) * x.R;
    }
    PlacementCandidate best = ascend(oracle, c0, x, params);
    if (best.ok()) {
      try {
        const SettleResult sr = oracle.settle(best.delta);
        PlacementCandidate snapped = score_candidate(oracle, sr.settled, 2);
        if (snapped.ok() && snapped.report.score >= best.report.score) best = std::move(snapped);
      } catch (const Error&) {
        // keep the ascent result
      }
    }
    out.push_back(std::move(best));
  }
  return out;
}

DiversityMetric scene_diversity_metric(const SegmentedScene& scene) {
  return DiversityMetric(scene.object(), support_diameter(scene.support()));
}

PipelineResult generate_placements(const SegmentedScene& scene, const SamplerConfig& cfg,
                                   const PipelineParams& params,
                                   const StabilityParams& stability) {
  if (scene.support().empty()) throw Error(ErrorCode::NoSupport, "scene has no support points");
  params.validate();
  const StabilityOracle oracle(scene, stability);
  const DiversityMetric metric = scene_diversity_metric(scene);

  PipelineResult res;
  auto stage1 = propose_stage1(oracle, scene, cfg, params.threads);
  res.proposed = stage1.size();
  auto kept = filter_candidates(std::move(stage1), params.s1_min, params.delta1, metric);
  res.stage1_kept = kept.size();
  if (kept.size() > params.max_refine) kept.resize(params.max_refine);

  std::vector<std::vector<PlacementCandidate>> refined(kept.size());
  parallel_for(kept.size(), params.threads, [&](std::size_t i) {
    refined[i] = refine_stage2(oracle, kept[i], params, cfg.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
  });
  std::vector<PlacementCandidate> stage2;
  for (auto& r : refined) {
    for (auto& c : r) stage2.push_back(std::move(c));
  }
  res.refined = stage2.size();
  res.placements = filter_candidates(std::move(stage2), params.s2_min, params.delta2, metric);
  res.empty_warning = res.placements.empty();
  return res;
}

}  // namespace reorient
