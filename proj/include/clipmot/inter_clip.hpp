#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clipmot/clip_transformer.hpp"
#include "clipmot/core.hpp"

namespace clipmot {

enum class Management { two_clip, moving_average, feature_bank };
enum class Matcher { iou_chain, temporal_average, clip_tracker };

std::string to_string(Management m);
std::string to_string(Matcher m);
Management parse_management(const std::string& s);
Matcher parse_matcher(const std::string& s);

struct MatchConfig {
  Matcher matcher = Matcher::clip_tracker;
  double match_threshold = 0.5;
};

/// Video-level tracks. Ids start at 1 and are never reused. Rows of every
/// Assignment against the store index tracks in ascending id order.
class GlobalTrackStore {
 public:
  GlobalTrackStore(int buffer_size, Management management, double momentum = 0.8);

  const std::map<int, GlobalTrack>& tracks() const { return tracks_; }
  std::vector<const GlobalTrack*> ordered() const;
  int next_id() const { return next_id_; }
  int buffer_size() const { return buffer_size_; }
  Management management() const { return management_; }
  double momentum() const { return momentum_; }
  bool claimed(int frame, int source_index) const;

  /// Appends matched tracklets' unseen frames to their tracks and opens new
  /// tracks for unmatched tracklets. Detections already owned by a track are
  /// skipped; an unmatched tracklet with nothing left opens no track.
  void merge(const Assignment& assignment, const std::vector<Tracklet>& tracklets);

 private:
  void append(GlobalTrack& track, const std::vector<const Detection*>& fresh);

  std::map<int, GlobalTrack> tracks_;
  std::set<std::pair<int, int>> owned_;  // (frame, source_index)
  int next_id_ = 1;
  int buffer_size_;
  Management management_;
  double momentum_;
};

/// Embeddings that stand for a track's history under a strategy.
std::vector<Embedding> history_representation(const GlobalTrack& track, Management strategy,
                                              double momentum);

/// True when the track and tracklet hold different detections in a shared frame.
bool conflicting(const GlobalTrack& track, const Tracklet& tracklet);

/// IoU in the earliest overlap frame where both sides have a box. Throws
/// std::invalid_argument when overlap_frames is empty.
Assignment match_iou_chain(const GlobalTrackStore& store, const std::vector<Tracklet>& tracklets,
                           const std::vector<int>& overlap_frames, double iou_threshold);

/// Cosine between L2-normalized means of both sides.
Assignment match_temporal_average(const GlobalTrackStore& store,
                                  const std::vector<Tracklet>& tracklets, double threshold);

/// Cosine between L2-normalized summarizer outputs of both sides. Throws
/// std::invalid_argument when the weights' input dimension differs from the
/// embeddings.
Assignment match_clip_tracker(const GlobalTrackStore& store, const std::vector<Tracklet>& tracklets,
                              const SummarizerWeights& weights, double threshold);

}  // namespace clipmot
