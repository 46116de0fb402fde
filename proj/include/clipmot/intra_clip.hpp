#pragma once

#include <map>
#include <vector>

#include "clipmot/core.hpp"

namespace clipmot {

struct Clip {
  int start_frame = 0;
  int end_frame = 0;  // inclusive
  /// detections_per_frame[k] holds the detections of frame start_frame + k.
  std::vector<std::vector<Detection>> detections_per_frame;

  int length() const { return end_frame - start_frame + 1; }
  std::size_t detection_count() const;
};

struct DirectionalParams {
  double init_score = 0.5;
  double match_threshold = 0.5;
  int patience = 10;
  double temperature = 0.05;
  /// Pairs whose cosine similarity is below this are never linked.
  double min_cosine = 0.3;
};

/// Lost tracks kept for rebirth, keyed by local id.
struct RebirthMemory {
  struct Entry {
    Embedding last_embedding;
    int last_frame = 0;
    int frames_since_lost = 0;
  };
  std::map<int, Entry> lost;
  int patience = 0;
};

/// Left-to-right frame linking with bisoftmax affinity and track rebirth.
std::vector<Tracklet> associate_directional(const Clip& clip,
                                            const DirectionalParams& params);

/// Heap-based agglomerative single-linkage clustering over all detections in
/// the clip. Distance is 1 - cosine; two detections in the same frame never
/// link and clusters with overlapping frames never merge.
std::vector<Tracklet> associate_direction_free(const Clip& clip,
                                               double merge_threshold);

/// Orders tracklets by (first frame, first source index) and renumbers
/// local ids from 0.
void canonicalize_tracklets(std::vector<Tracklet>& tracklets);

}  // namespace clipmot
