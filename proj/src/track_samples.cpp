#include "clipmot/clip_training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clipmot/rng.hpp"

namespace clipmot {

void AugmentConfig::validate() const {
  if (!(negative_band.lo < negative_band.hi)) throw std::invalid_argument("negative band needs lo < hi");
  double sum = 0.0;
  for (double p : type_probs) {
    if (p < 0.0) throw std::invalid_argument("track-type probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("track-type probabilities must sum to 1");
  if (mixup_bound < 0.0 || mixup_bound > 1.0) throw std::invalid_argument("mixup bound must lie in [0, 1]");
  if (mixup_prob < 0.0 || mixup_prob > 1.0) throw std::invalid_argument("mixup probability must lie in [0, 1]");
  if (positive_iou <= 0.0 || positive_iou > 1.0) throw std::invalid_argument("positive IoU must lie in (0, 1]");
  if (min_length < 1 || max_length < min_length) throw std::invalid_argument("invalid sample length range");
  if (frame_range < 1) throw std::invalid_argument("frame_range must be >= 1");
}

AugmentConfig AugmentConfig::none() { return AugmentConfig{}; }

AugmentConfig AugmentConfig::negatives() {
  AugmentConfig a;
  a.type_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return a;
}

AugmentConfig AugmentConfig::negatives_mixup() {
  AugmentConfig a = negatives();
  a.mixup_prob = 0.5;
  return a;
}

ProposalPool build_proposal_pool(const Scenario& sc, const AugmentConfig& aug, int per_frame,
                                 int video, std::uint64_t seed) {
  aug.validate();
  ProposalPool pool;
  pool.video = video;
  Rng rng(seed, 0x9001);
  const IoUBand pos_band{aug.positive_iou, 1.0};
  for (std::size_t i = 0; i < sc.truth.identities.size(); ++i) {
    const auto& t = sc.truth.identities[i];
    IdentityPool ip;
    ip.identity = t.id;
    for (const auto& [frame, box] : t.boxes) {
      const int ii = static_cast<int>(i);
      ip.positives.push_back({frame, 1.0, render_embedding(sc, ii, frame, box, rng.next_u64())});
      if (per_frame <= 0) continue;
      for (const auto& p : jittered_proposals(sc.truth, ii, frame, pos_band, per_frame, rng.next_u64()))
        ip.positives.push_back({frame, p.iou, render_embedding(sc, ii, frame, p.box, rng.next_u64())});
      for (const auto& p :
           jittered_proposals(sc.truth, ii, frame, aug.negative_band, per_frame, rng.next_u64()))
        ip.negatives.push_back({frame, p.iou, render_embedding(sc, ii, frame, p.box, rng.next_u64())});
    }
    pool.identities.push_back(std::move(ip));
  }
  return pool;
}

namespace {

enum class TrackType { positive_only = 0, negative_only = 1, hybrid = 2 };

TrackType draw_type(const AugmentConfig& aug, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < 3; ++k) {
    acc += aug.type_probs[k];
    if (u < acc) return static_cast<TrackType>(k);
  }
  for (int k = 2; k >= 0; --k)
    if (aug.type_probs[k] > 0.0) return static_cast<TrackType>(k);
  return TrackType::positive_only;
}

std::vector<const PooledProposal*> in_window(const std::vector<PooledProposal>& v, int lo, int hi) {
  std::vector<const PooledProposal*> out;
  for (const auto& p : v)
    if (p.frame >= lo && p.frame <= hi) out.push_back(&p);
  return out;
}

}  // namespace

std::vector<TrainSample> build_track_samples(const ProposalPool& pool, const AugmentConfig& aug,
                                             int samples_per_identity, std::uint64_t seed) {
  aug.validate();
  Rng rng(seed, 0x9002);
  std::vector<TrainSample> out;
  for (const auto& ip : pool.identities) {
    if (ip.positives.empty() && ip.negatives.empty()) continue;
    for (int s = 0; s < samples_per_identity; ++s) {
      TrainSample sample;
      sample.identity = ip.identity;
      sample.video = pool.video;
      // Window around a random anchor frame.
      const auto& any = !ip.positives.empty() ? ip.positives : ip.negatives;
      const int centre = any[rng.below(any.size())].frame;
      const int lo = centre - aug.frame_range / 2;
      const int hi = lo + aug.frame_range - 1;
      const auto pos = in_window(ip.positives, lo, hi);
      const auto neg = in_window(ip.negatives, lo, hi);

      TrackType type = draw_type(aug, rng);
      for (int tries = 0;; ++tries) {
        const bool ok = (type == TrackType::positive_only && !pos.empty()) ||
                        (type == TrackType::negative_only && !neg.empty()) ||
                        (type == TrackType::hybrid && (!pos.empty() || !neg.empty()));
        if (ok) break;
        if (tries > 64) {
          type = !pos.empty() ? TrackType::positive_only : TrackType::negative_only;
          break;
        }
        type = draw_type(aug, rng);
      }
      const int len = aug.min_length + static_cast<int>(rng.below(aug.max_length - aug.min_length + 1));
      for (int k = 0; k < len; ++k) {
        bool use_pos = type == TrackType::positive_only;
        if (type == TrackType::hybrid) {
          use_pos = rng.bernoulli(0.5);
          if (use_pos && pos.empty()) use_pos = false;
          if (!use_pos && neg.empty()) use_pos = true;
        }
        const auto& src = use_pos ? pos : neg;
        sample.elements.push_back(src[rng.below(src.size())]->embedding);
        sample.tags.push_back(use_pos ? ElementTag::positive : ElementTag::negative);
      }
      out.push_back(std::move(sample));
    }
  }
  if (out.empty() && !pool.identities.empty()) {
    throw std::invalid_argument("proposal pool has no eligible proposals");
  }
  return out;
}

TrainSample track_mixup_ratio(const TrainSample& track, const TrainSample& donor, double ratio,
                              std::uint64_t seed, bool scattered) {
  if (ratio <= 0.0 || donor.elements.empty()) return track;
  if (donor.identity == track.identity && donor.video == track.video) {
    throw std::invalid_argument("mixup donor must be a different identity");
  }
  const int len = static_cast<int>(track.elements.size());
  const int k = std::max(1, static_cast<int>(std::floor(ratio * len)));
  if (k >= len) return track;
  Rng rng(seed, 0x9003);
  TrainSample out = track;
  std::vector<int> slots;
  if (scattered) {
    std::vector<int> all(len);
    for (int i = 0; i < len; ++i) all[i] = i;
    rng.shuffle(all);
    slots.assign(all.begin(), all.begin() + k);
  } else {
    const int offset = static_cast<int>(rng.below(len - k + 1));
    for (int i = 0; i < k; ++i) slots.push_back(offset + i);
  }
  for (int s : slots) {
    out.elements[s] = donor.elements[rng.below(donor.elements.size())];
    out.tags[s] = ElementTag::mixed_in;
  }
  return out;
}

TrainSample track_mixup(const TrainSample& track, const TrainSample& donor, double bound,
                        std::uint64_t seed, bool scattered) {
  if (bound <= 0.0) return track;
  Rng rng(seed, 0x9004);
  const double u = bound * (1.0 - rng.uniform());  // (0, bound]
  return track_mixup_ratio(track, donor, u, rng.next_u64(), scattered);
}

}  // namespace clipmot
