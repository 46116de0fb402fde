#include "clipmot/scenario_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clipmot/rng.hpp"

namespace clipmot {

namespace {

bool is_rate(double v) { return v >= 0.0 && v <= 1.0; }

Embedding random_unit(Rng& rng, int dim) {
  Embedding v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

// Unit vector in the nuisance span, or isotropic when the span is empty.
Embedding nuisance_direction(Rng& rng, const std::vector<Embedding>& basis, int dim) {
  if (basis.empty()) return random_unit(rng, dim);
  Embedding v = Embedding::Zero(dim);
  do {
    v.setZero();
    for (const auto& b : basis) v += rng.normal() * b;
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

bool affects(const Interruption& in, int identity_index, int frame) {
  if (frame < in.first_frame || frame > in.last_frame) return false;
  if (in.identities.empty()) return true;
  return std::find(in.identities.begin(), in.identities.end(), identity_index) !=
         in.identities.end();
}

BoundingBox clamp_to_arena(BoundingBox b, double width, double height) {
  b.w = std::min(b.w, width);
  b.h = std::min(b.h, height);
  b.x = std::clamp(b.x, 0.0, width - b.w);
  b.y = std::clamp(b.y, 0.0, height - b.h);
  return b;
}

constexpr std::uint64_t kStreamLatent = 1;
constexpr std::uint64_t kStreamMotion = 2;
constexpr std::uint64_t kStreamObserve = 3;
constexpr std::uint64_t kStreamRender = 4;

}  // namespace

void ScenarioConfig::validate() const {
  if (frames < 1) throw std::invalid_argument("scenario needs at least one frame");
  if (identities < 1) throw std::invalid_argument("scenario needs at least one identity");
  if (embedding_dim < 2) throw std::invalid_argument("embedding_dim must be >= 2");
  if (!(arena_width > 0.0) || !(arena_height > 0.0)) throw std::invalid_argument("arena must be positive");
  if (!(box_min > 0.0) || box_max < box_min) throw std::invalid_argument("invalid box size range");
  if (box_max > std::min(arena_width, arena_height)) throw std::invalid_argument("boxes larger than arena");
  for (double s : {speed, turn_sigma, box_sigma, embedding_sigma, drift_rate, light_strength,
                   camera_jump, min_separation}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("noise parameters must be finite and >= 0");
  }
  if (nuisance_rank < 0 || nuisance_rank >= embedding_dim) {
    throw std::invalid_argument("nuisance_rank must lie in [0, embedding_dim)");
  }
  if (!is_rate(fp_rate) || !is_rate(fn_rate) || !is_rate(loc_error_rate)) {
    throw std::invalid_argument("rates must lie in [0, 1]");
  }
  for (const auto& in : interruptions) {
    if (in.first_frame < 0 || in.last_frame < in.first_frame) {
      throw std::invalid_argument("invalid interruption window");
    }
    for (int id : in.identities)
      if (id < 0 || id >= identities) throw std::invalid_argument("interruption identity out of range");
  }
}

Embedding IdentityTruth::latent_at(int frame, double drift_rate) const {
  if (drift_rate == 0.0) return latent;
  const double a = drift_rate * frame;
  return std::cos(a) * latent + std::sin(a) * drift_axis;
}

std::size_t Scenario::detection_count() const {
  std::size_t n = 0;
  for (const auto& f : detections) n += f.size();
  return n;
}

bool IoUBand::contains(double v) const {
  if (v < lo) return false;
  if (hi >= 1.0) return v <= 1.0;
  return v < hi;
}

std::vector<Embedding> nuisance_basis(int dim, int rank) {
  std::vector<Embedding> basis;
  Rng rng(0x4E55, static_cast<std::uint64_t>(dim));
  while (static_cast<int>(basis.size()) < rank) {
    Embedding v = random_unit(rng, dim);
    for (const auto& b : basis) v -= v.dot(b) * b;
    if (v.norm() > 1e-6) basis.push_back(v / v.norm());
  }
  return basis;
}

TrackSet truth_tracks(const GroundTruth& gt) {
  TrackSet out;
  for (const auto& id : gt.identities) {
    auto& boxes = out[id.id];
    for (const auto& [f, b] : id.boxes) boxes.push_back(TrackBox{f, b, 1.0});
  }
  return out;
}

Scenario generate(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.config = cfg;
  sc.truth.frames = cfg.frames;

  Rng latent_rng(cfg.seed, kStreamLatent);
  const double min_cos = std::cos(cfg.min_separation);
  const std::vector<Embedding> nuisance = nuisance_basis(cfg.embedding_dim, cfg.nuisance_rank);
  // Identity appearance lives outside the nuisance span.
  auto identity_part = [&](Embedding v) {
    for (const auto& b : nuisance) v -= v.dot(b) * b;
    return Embedding(v / v.norm());
  };
  for (int i = 0; i < cfg.identities; ++i) {
    IdentityTruth t;
    t.id = i + 1;
    bool placed = false;
    for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
      Embedding cand = random_unit(latent_rng, cfg.embedding_dim);
      if (!nuisance.empty()) cand = identity_part(cand);
      placed = std::all_of(sc.truth.identities.begin(), sc.truth.identities.end(),
                           [&](const IdentityTruth& o) { return cand.dot(o.latent) <= min_cos; });
      if (placed) t.latent = cand;
    }
    if (!placed) {
      throw std::invalid_argument("cannot place identity latents with the requested separation");
    }
    Embedding axis = random_unit(latent_rng, cfg.embedding_dim);
    if (!nuisance.empty()) axis = identity_part(axis);
    axis -= axis.dot(t.latent) * t.latent;
    t.drift_axis = axis / axis.norm();
    sc.truth.identities.push_back(std::move(t));
  }
  sc.light_bias = nuisance_direction(latent_rng, nuisance, cfg.embedding_dim);

  // Camera jump offsets per frame.
  Rng motion(cfg.seed, kStreamMotion);
  std::vector<std::pair<double, double>> cam(cfg.frames, {0.0, 0.0});
  for (const auto& in : cfg.interruptions) {
    if (in.kind != InterruptionKind::camera_jump) continue;
    const double ang = motion.uniform(0.0, 2.0 * std::numbers::pi);
    for (int f = in.first_frame; f <= std::min(in.last_frame, cfg.frames - 1); ++f) {
      cam[f].first += cfg.camera_jump * std::cos(ang);
      cam[f].second += cfg.camera_jump * std::sin(ang);
    }
  }

  for (int i = 0; i < cfg.identities; ++i) {
    auto& t = sc.truth.identities[i];
    const double w = motion.uniform(cfg.box_min, cfg.box_max);
    const double h = std::min(w * motion.uniform(1.0, 2.5), cfg.arena_height);
    double x = motion.uniform(0.0, cfg.arena_width - w);
    double y = motion.uniform(0.0, cfg.arena_height - h);
    double heading = motion.uniform(0.0, 2.0 * std::numbers::pi);
    for (int f = 0; f < cfg.frames; ++f) {
      if (f > 0) {
        heading += cfg.turn_sigma * motion.normal();
        x += cfg.speed * std::cos(heading);
        y += cfg.speed * std::sin(heading);
        // Reflect at the walls.
        if (x < 0.0) { x = -x; heading = std::numbers::pi - heading; }
        if (x > cfg.arena_width - w) { x = 2.0 * (cfg.arena_width - w) - x; heading = std::numbers::pi - heading; }
        if (y < 0.0) { y = -y; heading = -heading; }
        if (y > cfg.arena_height - h) { y = 2.0 * (cfg.arena_height - h) - y; heading = -heading; }
        x = std::clamp(x, 0.0, cfg.arena_width - w);
        y = std::clamp(y, 0.0, cfg.arena_height - h);
      }
      bool occluded = false;
      for (const auto& in : cfg.interruptions)
        if (in.kind == InterruptionKind::occlusion && affects(in, i, f)) occluded = true;
      if (occluded) continue;
      BoundingBox b{x + cam[f].first, y + cam[f].second, w, h};
      t.boxes[f] = clamp_to_arena(b, cfg.arena_width, cfg.arena_height);
    }
  }

  Rng obs(cfg.seed, kStreamObserve);
  sc.detections.resize(cfg.frames);
  sc.labels.resize(cfg.frames);
  for (int f = 0; f < cfg.frames; ++f) {
    std::vector<std::pair<Detection, int>> frame_dets;
    for (int i = 0; i < cfg.identities; ++i) {
      const auto& t = sc.truth.identities[i];
      auto it = t.boxes.find(f);
      if (it == t.boxes.end()) continue;
      if (obs.bernoulli(cfg.fn_rate)) continue;
      Detection d;
      d.frame = f;
      d.score = obs.uniform(0.6, 1.0);
      const BoundingBox& g = it->second;
      if (obs.bernoulli(cfg.loc_error_rate)) {
        const std::uint64_t s = obs.next_u64();
        d.box = jittered_proposals(sc.truth, i, f, IoUBand{0.3, 0.5}, 1, s).front().box;
        d.embedding = render_embedding(sc, i, f, d.box, s);
      } else {
        const double jx = cfg.box_sigma * obs.normal(), jy = cfg.box_sigma * obs.normal();
        const double jw = cfg.box_sigma * obs.normal(), jh = cfg.box_sigma * obs.normal();
        d.box = BoundingBox{g.x + jx * g.w, g.y + jy * g.h, g.w * std::exp(jw), g.h * std::exp(jh)};
        Embedding e = t.latent_at(f, cfg.drift_rate);
        for (const auto& in : cfg.interruptions)
          if (in.kind == InterruptionKind::light_change && affects(in, i, f))
            e += cfg.light_strength * sc.light_bias;
        if (cfg.embedding_sigma > 0.0)
          for (int k = 0; k < cfg.embedding_dim; ++k) e[k] += cfg.embedding_sigma * obs.normal();
        d.embedding = l2_normalized(e);
      }
      frame_dets.emplace_back(std::move(d), t.id);
    }
    if (obs.bernoulli(cfg.fp_rate)) {
      Detection d;
      d.frame = f;
      d.score = obs.uniform(0.5, 0.9);
      const double w = obs.uniform(cfg.box_min, cfg.box_max);
      const double h = std::min(w * obs.uniform(1.0, 2.5), cfg.arena_height);
      d.box = BoundingBox{obs.uniform(0.0, cfg.arena_width - w), obs.uniform(0.0, cfg.arena_height - h), w, h};
      d.embedding = random_unit(obs, cfg.embedding_dim);
      frame_dets.emplace_back(std::move(d), -1);
    }
    obs.shuffle(frame_dets);
    for (std::size_t k = 0; k < frame_dets.size(); ++k) {
      frame_dets[k].first.source_index = static_cast<int>(k);
      sc.detections[f].push_back(std::move(frame_dets[k].first));
      sc.labels[f].push_back(frame_dets[k].second);
    }
  }
  return sc;
}

std::vector<Proposal> jittered_proposals(const GroundTruth& gt, int identity_index, int frame,
                                         IoUBand band, int count, std::uint64_t seed) {
  if (identity_index < 0 || identity_index >= static_cast<int>(gt.identities.size())) {
    throw std::invalid_argument("identity index out of range");
  }
  if (!(band.lo > 0.0) || band.lo > 1.0 || band.hi < band.lo) {
    throw std::invalid_argument("IoU band must lie within (0, 1]");
  }
  const auto& boxes = gt.identities[identity_index].boxes;
  auto it = boxes.find(frame);
  if (it == boxes.end()) throw std::invalid_argument("identity not visible at frame");
  const BoundingBox g = it->second;
  std::vector<Proposal> out;
  if (band.lo >= 1.0) {
    out.assign(count, Proposal{g, 1.0});
    return out;
  }
  Rng rng(seed, 0x9000 + static_cast<std::uint64_t>(identity_index) * 100003ULL + frame);
  constexpr int kMaxIterations = 200000;
  int iterations = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++iterations > kMaxIterations) {
      throw std::runtime_error("IoU band unreachable within the iteration cap");
    }
    const double s = rng.uniform(0.0, 0.8);
    BoundingBox p{g.x + g.w * rng.uniform(-s, s), g.y + g.h * rng.uniform(-s, s),
                  g.w * std::exp(rng.uniform(-s, s)), g.h * std::exp(rng.uniform(-s, s))};
    const double v = iou(g, p);
    if (band.contains(v)) out.push_back(Proposal{p, v});
  }
  return out;
}

Embedding render_embedding(const Scenario& sc, int identity_index, int frame,
                           const BoundingBox& box, std::uint64_t seed) {
  const auto& cfg = sc.config;
  const auto& t = sc.truth.identities.at(identity_index);
  auto it = t.boxes.find(frame);
  if (it == t.boxes.end()) throw std::invalid_argument("identity not visible at frame");
  const double w = iou(it->second, box);
  Rng rng(seed, kStreamRender);
  const Embedding bg =
      nuisance_direction(rng, nuisance_basis(cfg.embedding_dim, cfg.nuisance_rank), cfg.embedding_dim);
  Embedding e = w * t.latent_at(frame, cfg.drift_rate) + (1.0 - w) * bg;
  for (const auto& in : cfg.interruptions)
    if (in.kind == InterruptionKind::light_change && affects(in, identity_index, frame))
      e += cfg.light_strength * sc.light_bias;
  if (cfg.embedding_sigma > 0.0)
    for (int k = 0; k < cfg.embedding_dim; ++k) e[k] += cfg.embedding_sigma * rng.normal();
  return l2_normalized(e);
}

}  // namespace clipmot
