#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "clipmot/clip_transformer.hpp"
#include "clipmot/scenario_sim.hpp"

namespace clipmot {

struct AugmentConfig {
  double positive_iou = 0.7;
  IoUBand negative_band{0.3, 0.5};
  /// Probabilities of positive-only, negative-only and hybrid tracks.
  std::array<double, 3> type_probs{1.0, 0.0, 0.0};
  double mixup_bound = 0.3;
  /// Chance that a sample is mixed with another identity; 0 disables mixup.
  double mixup_prob = 0.0;
  /// Replace scattered positions instead of one contiguous segment.
  bool scattered_mixup = false;
  int min_length = 2;
  int max_length = 10;
  /// Elements of one sample come from a window of this many frames.
  int frame_range = 30;

  void validate() const;

  static AugmentConfig none();
  static AugmentConfig negatives();        // + negative proposals
  static AugmentConfig negatives_mixup();  // + negative proposals + mixup
};

struct PooledProposal {
  int frame = 0;
  double iou = 1.0;
  Embedding embedding;
};

struct IdentityPool {
  int identity = 0;  // 1-based id from the ground truth
  std::vector<PooledProposal> positives;
  std::vector<PooledProposal> negatives;
};

struct ProposalPool {
  int video = 0;
  std::vector<IdentityPool> identities;
};

/// Proposals for every visible (identity, frame): the exact ground-truth box,
/// `per_frame` positives with IoU >= positive_iou and `per_frame` negatives in
/// the negative band, each with an embedding rendered through its box.
ProposalPool build_proposal_pool(const Scenario& scenario, const AugmentConfig& aug,
                                 int per_frame, int video, std::uint64_t seed);

/// `samples_per_identity` order-free track samples for each identity in the
/// pool. Track type is drawn from aug.type_probs; a type whose eligible pool
/// is empty is redrawn. Mixup is not applied here.
std::vector<TrainSample> build_track_samples(const ProposalPool& pool, const AugmentConfig& aug,
                                             int samples_per_identity, std::uint64_t seed);

/// Replaces max(1, floor(u * L)) elements with donor elements, u uniform in
/// (0, bound]. Identity is preserved; returns the input unchanged when
/// bound <= 0 or the replacement would cover the whole track.
TrainSample track_mixup(const TrainSample& track, const TrainSample& donor, double bound,
                        std::uint64_t seed, bool scattered = false);
/// Same, with the ratio u given explicitly.
TrainSample track_mixup_ratio(const TrainSample& track, const TrainSample& donor, double ratio,
                              std::uint64_t seed, bool scattered = false);

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  int epochs = 30;
  int batches_per_epoch = 20;
  int videos_per_batch = 4;
  int tracks_per_video = 4;
  int samples_per_identity = 2;
  /// When > 0, the samples drawn from one video for a batch all come from a
  /// shared random window of this many frames.
  int video_window = 0;
  double grad_clip = 5.0;  // global norm; <= 0 disables
  std::uint64_t seed = 0;
  bool deterministic = true;

  void validate() const;
};

/// Produces one training batch for a given seed.
using BatchSource = std::function<std::vector<TrainSample>(std::uint64_t batch_seed)>;

/// Batches drawn from proposal pools of synthetic training videos.
class TrainingData {
 public:
  TrainingData(std::vector<ProposalPool> pools, AugmentConfig aug);

  /// `videos` scenarios generated from `base` with derived seeds.
  static TrainingData synthesize(const ScenarioConfig& base, int videos, const AugmentConfig& aug,
                                 int proposals_per_frame, std::uint64_t seed);

  std::vector<TrainSample> make_batch(const TrainConfig& cfg, std::uint64_t batch_seed) const;
  const std::vector<ProposalPool>& pools() const { return pools_; }
  const AugmentConfig& augment() const { return aug_; }

 private:
  std::vector<ProposalPool> pools_;
  AugmentConfig aug_;
};

struct TrainResult {
  SummarizerWeights weights;
  std::vector<double> loss_history;  // mean batch loss per epoch
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// SGD with momentum on the mean contrastive loss. Deterministic for fixed
/// seeds when cfg.deterministic is set.
TrainResult train(const BatchSource& source, const ModelDims& dims, std::uint64_t init_seed,
                  const TrainConfig& cfg);
TrainResult train(const TrainingData& data, const ModelDims& dims, std::uint64_t init_seed,
                  const TrainConfig& cfg);

}  // namespace clipmot
