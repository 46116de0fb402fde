#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "clipmot/core.hpp"

namespace clipmot {

enum class InterruptionKind { occlusion, camera_jump, light_change };

struct Interruption {
  InterruptionKind kind = InterruptionKind::occlusion;
  int first_frame = 0;  // inclusive, 0-based
  int last_frame = 0;   // inclusive
  std::vector<int> identities;  // empty = all identities
};

struct ScenarioConfig {
  int frames = 100;
  int identities = 5;
  double arena_width = 1920.0;
  double arena_height = 1080.0;
  double speed = 4.0;          // pixels per frame
  double turn_sigma = 0.05;    // radians per frame
  double box_min = 40.0;
  double box_max = 120.0;
  int embedding_dim = 16;
  /// Minimum angle (radians) between any two identity latents.
  double min_separation = 1.0;
  double box_sigma = 0.0;      // jitter, fraction of box size
  double embedding_sigma = 0.0;
  double drift_rate = 0.0;     // latent rotation, radians per frame
  double light_strength = 1.0; // norm of the shared light-change bias
  double camera_jump = 300.0;  // pixels
  /// Probability that a detection is mislocalized (IoU with its ground
  /// truth box in [0.3, 0.5)) with its embedding rendered from that box.
  double loc_error_rate = 0.0;
  /// Rank of the fixed nuisance subspace shared by every scenario of this
  /// embedding dimension. When > 0 the light-change bias and the background
  /// seen through mislocalized boxes lie in it and identity latents and drift
  /// axes lie in its orthogonal complement; 0 leaves everything isotropic.
  int nuisance_rank = 0;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  std::vector<Interruption> interruptions;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct IdentityTruth {
  int id = 0;  // 1-based, as written to ground-truth files
  Embedding latent;      // unit norm
  Embedding drift_axis;  // unit norm, orthogonal to latent
  std::map<int, BoundingBox> boxes;  // visible frames only

  /// Appearance at a frame: the latent rotated towards drift_axis.
  Embedding latent_at(int frame, double drift_rate) const;
};

struct GroundTruth {
  int frames = 0;
  std::vector<IdentityTruth> identities;
};

struct Scenario {
  ScenarioConfig config;
  GroundTruth truth;
  /// detections[f] for frame f; source_index matches the position.
  std::vector<std::vector<Detection>> detections;
  /// Generating identity (1-based) per detection, -1 for clutter.
  std::vector<std::vector<int>> labels;
  /// Shared light-change bias direction (unit norm).
  Embedding light_bias;

  std::size_t detection_count() const;
};

/// Deterministic synthetic video. Throws std::invalid_argument when the
/// identities cannot be placed with the requested latent separation.
Scenario generate(const ScenarioConfig& config);

struct IoUBand {
  double lo = 0.0;
  double hi = 1.0;  // exclusive unless hi >= 1
  bool contains(double v) const;
};

struct Proposal {
  BoundingBox box;
  double iou = 1.0;
};

/// Rejection-sampled jitters of an identity's box at a frame whose IoU with
/// the ground-truth box lies in the band. Throws std::invalid_argument if the
/// identity is not visible and std::runtime_error if the band is not reached
/// within the iteration cap.
std::vector<Proposal> jittered_proposals(const GroundTruth& gt, int identity_index, int frame,
                                         IoUBand band, int count, std::uint64_t seed);

/// Appearance observed through an arbitrary box: the identity latent weighted
/// by the box's IoU with the truth, the rest filled by a random background
/// direction, plus noise and any active light bias.
Embedding render_embedding(const Scenario& scenario, int identity_index, int frame,
                           const BoundingBox& box, std::uint64_t seed);

TrackSet truth_tracks(const GroundTruth& gt);

/// Orthonormal basis of the nuisance subspace; depends only on (dim, rank).
std::vector<Embedding> nuisance_basis(int dim, int rank);

}  // namespace clipmot
