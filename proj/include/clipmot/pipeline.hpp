#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clipmot/clip_transformer.hpp"
#include "clipmot/inter_clip.hpp"
#include "clipmot/intra_clip.hpp"
#include "clipmot/metrics.hpp"

namespace clipmot {

enum class IntraVariant { directional, direction_free };
std::string to_string(IntraVariant v);
IntraVariant parse_intra(const std::string& s);

struct PipelineConfig {
  int clip_size = 10;
  int clip_interval = 5;
  IntraVariant intra = IntraVariant::directional;
  Matcher inter = Matcher::clip_tracker;
  Management management = Management::feature_bank;
  int buffer_size = 30;
  double init_score = 0.5;
  double intra_match_threshold = 0.5;
  double inter_match_threshold = 0.5;
  double merge_threshold = 0.4;
  double iou_gate = 0.5;  // IoU chaining threshold
  int patience = -1;      // < 0: clip size
  double temperature = 0.05;
  double min_cosine = 0.3;
  double momentum = 0.8;
  std::string weights_path;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
  int effective_patience() const { return patience < 0 ? clip_size : patience; }

  /// Clip 10 / interval 5 / buffer 30.
  static PipelineConfig high_fps();
  /// Clip 6 / interval 3 / buffer 10.
  static PipelineConfig low_fps();
};

struct Video {
  int frames = 0;
  std::vector<std::vector<Detection>> detections;  // per frame
};

struct PipelineResult {
  std::vector<GlobalTrack> tracks;  // ascending id
  int clips = 0;
};

/// Windows [i, min(i + clip_size, frames) - 1] for i = 0, interval, ...,
/// ending with the first window that reaches the last frame.
std::vector<std::pair<int, int>> clip_windows(int frames, int clip_size, int clip_interval);

/// Clip-wise tracking: intra-clip association then inter-clip match and
/// merge into the global store, clip after clip. `weights` is required for
/// the clip_tracker matcher.
PipelineResult run(const Video& video, const PipelineConfig& cfg,
                   const SummarizerWeights* weights = nullptr);

/// Frame-by-frame appearance tracker: every frame, last-seen track
/// embeddings are cosine-matched to detections (gate 1 - threshold) and
/// unmatched detections with score >= init_score open new tracks.
PipelineResult run_frame_by_frame(const Video& video, double init_score, double threshold);

TrackSet to_track_set(const std::vector<GlobalTrack>& tracks);

struct SweepCell {
  int clip_size = 0;
  int clip_interval = 0;
  IntraVariant intra = IntraVariant::directional;
  Matcher inter = Matcher::temporal_average;
  Management management = Management::feature_bank;
};

struct SweepGrid {
  std::vector<std::pair<int, int>> clips;
  std::vector<IntraVariant> intra;
  std::vector<Matcher> inter;
  std::vector<Management> management;

  std::vector<SweepCell> cells() const;
};

struct SweepRow {
  SweepCell cell;
  std::optional<EvalReport> report;
  std::string error;
};

/// One run + evaluation per grid cell; rows follow grid order. Cell errors
/// are captured in the row.
std::vector<SweepRow> sweep(const Video& video, const TrackSet& truth, const SweepGrid& grid,
                            const PipelineConfig& base, const SummarizerWeights* weights);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace clipmot
