#include <algorithm>
#include <cmath>
#include <string>

#include "clipmot/clip_training.hpp"
#include "clipmot/rng.hpp"

namespace clipmot {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batches_per_epoch < 1 || videos_per_batch < 1 || tracks_per_video < 1) {
    throw std::invalid_argument("batch composition counts must be >= 1");
  }
  if (samples_per_identity < 2) {
    throw std::invalid_argument("samples_per_identity must be >= 2 so anchors have positives");
  }
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (video_window < 0) throw std::invalid_argument("video_window must be >= 0");
}

TrainingData::TrainingData(std::vector<ProposalPool> pools, AugmentConfig aug)
    : pools_(std::move(pools)), aug_(aug) {
  aug_.validate();
  if (pools_.empty()) throw std::invalid_argument("training data needs at least one video");
}

TrainingData TrainingData::synthesize(const ScenarioConfig& base, int videos,
                                      const AugmentConfig& aug, int proposals_per_frame,
                                      std::uint64_t seed) {
  Rng rng(seed, 0x7001);
  std::vector<ProposalPool> pools;
  for (int v = 0; v < videos; ++v) {
    ScenarioConfig cfg = base;
    cfg.seed = rng.next_u64();
    const Scenario sc = generate(cfg);
    pools.push_back(build_proposal_pool(sc, aug, proposals_per_frame, v, rng.next_u64()));
  }
  return TrainingData(std::move(pools), aug);
}

std::vector<TrainSample> TrainingData::make_batch(const TrainConfig& cfg,
                                                  std::uint64_t batch_seed) const {
  Rng rng(batch_seed, 0x7002);
  std::vector<int> vids(pools_.size());
  for (std::size_t i = 0; i < vids.size(); ++i) vids[i] = static_cast<int>(i);
  rng.shuffle(vids);
  vids.resize(std::min<std::size_t>(vids.size(), cfg.videos_per_batch));

  std::vector<TrainSample> batch;
  for (int v : vids) {
    const ProposalPool& full = pools_[v];
    ProposalPool sub;
    sub.video = full.video;
    std::vector<int> ids;
    for (std::size_t i = 0; i < full.identities.size(); ++i)
      if (!full.identities[i].positives.empty()) ids.push_back(static_cast<int>(i));
    rng.shuffle(ids);
    ids.resize(std::min<std::size_t>(ids.size(), cfg.tracks_per_video));
    std::sort(ids.begin(), ids.end());
    int lo = 0, hi = -1;
    if (cfg.video_window > 0) {
      int first = 0, last = 0;
      bool any = false;
      for (int i : ids)
        for (const auto& p : full.identities[i].positives) {
          first = any ? std::min(first, p.frame) : p.frame;
          last = any ? std::max(last, p.frame) : p.frame;
          any = true;
        }
      const int span = std::max(0, last - first + 1 - cfg.video_window);
      lo = first + static_cast<int>(rng.below(static_cast<std::uint64_t>(span) + 1));
      hi = lo + cfg.video_window - 1;
    }
    auto in_range = [&](const PooledProposal& p) { return hi < lo || (p.frame >= lo && p.frame <= hi); };
    for (int i : ids) {
      IdentityPool ip;
      ip.identity = full.identities[i].identity;
      for (const auto& p : full.identities[i].positives)
        if (in_range(p)) ip.positives.push_back(p);
      for (const auto& p : full.identities[i].negatives)
        if (in_range(p)) ip.negatives.push_back(p);
      if (!ip.positives.empty() || !ip.negatives.empty()) sub.identities.push_back(std::move(ip));
    }
    if (sub.identities.empty()) continue;

    std::vector<TrainSample> samples =
        build_track_samples(sub, aug_, cfg.samples_per_identity, rng.next_u64());
    if (aug_.mixup_prob > 0.0 && aug_.mixup_bound > 0.0 && sub.identities.size() > 1) {
      const std::vector<TrainSample> originals = samples;
      for (auto& s : samples) {
        if (!rng.bernoulli(aug_.mixup_prob)) continue;
        std::vector<const TrainSample*> donors;
        for (const auto& o : originals)
          if (o.identity != s.identity) donors.push_back(&o);
        const TrainSample& donor = *donors[rng.below(donors.size())];
        s = track_mixup(s, donor, aug_.mixup_bound, rng.next_u64(), aug_.scattered_mixup);
      }
    }
    for (auto& s : samples) batch.push_back(std::move(s));
  }
  return batch;
}

TrainResult train(const BatchSource& source, const ModelDims& dims, std::uint64_t init_seed,
                  const TrainConfig& cfg) {
  cfg.validate();
  TrainResult res{SummarizerWeights::random(dims, init_seed), {}};
  auto& params = res.weights.params();
  std::vector<double> velocity(params.size(), 0.0);
  Rng rng(cfg.seed, 0x7003);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double sum = 0.0;
    int counted = 0;
    for (int b = 0; b < cfg.batches_per_epoch; ++b) {
      const std::vector<TrainSample> batch = source(rng.next_u64());
      if (batch.empty()) continue;
      GradientResult g;
      try {
        g = kernels::gradient_parallel(res.weights, batch, cfg.deterministic);
      } catch (const std::runtime_error& e) {
        throw TrainingDiverged(epoch, std::string(e.what()) + " at epoch " + std::to_string(epoch));
      }
      if (!std::isfinite(g.loss)) {
        throw TrainingDiverged(epoch, "non-finite loss at epoch " + std::to_string(epoch));
      }
      double norm2 = 0.0;
      for (double v : g.grad) norm2 += v * v;
      if (!std::isfinite(norm2)) {
        throw TrainingDiverged(epoch, "non-finite gradient at epoch " + std::to_string(epoch));
      }
      double scale = 1.0;
      if (cfg.grad_clip > 0.0 && std::sqrt(norm2) > cfg.grad_clip) scale = cfg.grad_clip / std::sqrt(norm2);
      for (std::size_t k = 0; k < params.size(); ++k) {
        velocity[k] = cfg.momentum * velocity[k] + scale * g.grad[k];
        params[k] -= cfg.learning_rate * velocity[k];
      }
      sum += g.loss;
      ++counted;
    }
    if (counted == 0) throw std::invalid_argument("batch source produced no samples");
    res.loss_history.push_back(sum / counted);
  }
  return res;
}

TrainResult train(const TrainingData& data, const ModelDims& dims, std::uint64_t init_seed,
                  const TrainConfig& cfg) {
  return train([&](std::uint64_t s) { return data.make_batch(cfg, s); }, dims, init_seed, cfg);
}

}  // namespace clipmot
