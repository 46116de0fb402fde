#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "clipmot/core.hpp"

namespace clipmot {

struct ModelDims {
  int input_dim = 16;
  int model_dim = 64;
  int layers = 3;
  int heads = 8;
  int ff_dim = 256;

  bool operator==(const ModelDims&) const = default;
};

/// Offsets of every tensor inside the flat parameter vector. This is also
/// the order in which parameters are serialized:
///
///   input_w [model x input], input_b [model], token [model],
///   per layer: ln1_g, ln1_b [model], wq, wk, wv, wo [model x model] each
///              followed by its bias [model], ln2_g, ln2_b [model],
///              ff1_w [ff x model], ff1_b [ff], ff2_w [model x ff], ff2_b [model]
///   head1_w [model x model], head1_b, head2_w [model x model], head2_b
///
/// Matrices are row-major, out x in.
struct ParamLayout {
  struct Layer {
    std::size_t ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo;
    std::size_t ln2_g, ln2_b, ff1_w, ff1_b, ff2_w, ff2_b;
  };
  std::size_t input_w = 0, input_b = 0, token = 0;
  std::vector<Layer> layers;
  std::size_t head1_w = 0, head1_b = 0, head2_w = 0, head2_b = 0;
  std::size_t total = 0;

  explicit ParamLayout(const ModelDims& dims);
};

/// Parameters of the track-history summarizer: input projection, learnable
/// track token, pre-norm encoder layers and a one-hidden-layer output head.
class SummarizerWeights {
 public:
  explicit SummarizerWeights(const ModelDims& dims);

  /// Scaled-uniform init for matrices, small normal track token, zero
  /// biases, unit norm gains.
  static SummarizerWeights random(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  const ParamLayout& layout() const { return layout_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Little-endian binary: magic "CLIPTRKW", u32 version, u32 input, model,
  /// layers, heads, ff, u64 parameter count, then float64 parameters.
  void save(const std::filesystem::path& path) const;
  static SummarizerWeights load(const std::filesystem::path& path);

  static constexpr std::uint32_t kFormatVersion = 1;

 private:
  ModelDims dims_;
  ParamLayout layout_;
  std::vector<double> params_;
};

/// Summary embedding (unnormalized, model_dim) of a track's embedding set.
/// With `canonical` set, elements are sorted lexicographically before the
/// pass so the result is bit-identical for any input permutation.
Embedding forward_summarize(const SummarizerWeights& weights,
                            const std::vector<Embedding>& track,
                            bool canonical = true);

/// Multi-positive contrastive loss
///   log(1 + sum_p sum_n exp(z.z_n - z.z_p)),
/// evaluated with a shifted log-sum-exp. Zero when negatives are empty.
double contrastive_loss(const Embedding& anchor, const std::vector<Embedding>& positives,
                        const std::vector<Embedding>& negatives);

struct ContrastiveGrad {
  double loss = 0.0;
  Embedding d_anchor;
  std::vector<Embedding> d_positives;
  std::vector<Embedding> d_negatives;
};
ContrastiveGrad contrastive_loss_grad(const Embedding& anchor,
                                      const std::vector<Embedding>& positives,
                                      const std::vector<Embedding>& negatives);

enum class ElementTag { positive, negative, mixed_in };

struct TrainSample {
  std::vector<Embedding> elements;
  std::vector<ElementTag> tags;
  int identity = 0;
  int video = 0;
};

struct GradientResult {
  double loss = 0.0;          // mean over anchors that had a positive
  std::vector<double> grad;   // d loss / d params, same layout as weights
  int anchors = 0;
};

/// Exact gradient of the mean contrastive loss over the batch. Anchors,
/// positives and negatives are the L2-normalized summaries of the samples;
/// same (video, identity) means positive, anything else negative. Anchors
/// without a positive are skipped; throws std::invalid_argument if all are.
GradientResult gradient(const SummarizerWeights& weights,
                        const std::vector<TrainSample>& batch,
                        bool deterministic = true);

/// Mean loss only, same definition as gradient(). Used by finite differences.
double batch_loss(const SummarizerWeights& weights, const std::vector<TrainSample>& batch);

namespace kernels {
/// Summaries for many tracks. The parallel version distributes tracks over
/// OpenMP threads; results are identical to the serial reference.
std::vector<Embedding> summarize_batch_serial(const SummarizerWeights& weights,
                                              const std::vector<std::vector<Embedding>>& tracks);
std::vector<Embedding> summarize_batch_parallel(const SummarizerWeights& weights,
                                                const std::vector<std::vector<Embedding>>& tracks);
/// Batch gradient with per-sample backward passes run serially, or in
/// parallel with a fixed-order reduction (deterministic) or a thread-local
/// reduction whose summation order depends on scheduling.
GradientResult gradient_serial(const SummarizerWeights& weights,
                               const std::vector<TrainSample>& batch);
GradientResult gradient_parallel(const SummarizerWeights& weights,
                                 const std::vector<TrainSample>& batch,
                                 bool deterministic);
}  // namespace kernels

}  // namespace clipmot
