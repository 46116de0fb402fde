#pragma once

#include <Eigen/Dense>

#include <deque>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clipmot {

using Embedding = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Malformed or inconsistent input data (files, scenario contents).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundingBox {
  double x = 0.0;  // left
  double y = 0.0;  // top
  double w = 1.0;
  double h = 1.0;

  /// Validating constructor; throws std::invalid_argument on w/h <= 0 or
  /// non-finite coordinates.
  static BoundingBox make(double x, double y, double w, double h);

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  bool operator==(const BoundingBox&) const = default;
};

struct Detection {
  int frame = 0;  // 0-based
  BoundingBox box;
  double score = 1.0;
  Embedding embedding;
  int source_index = 0;  // ordinal within its frame
};

/// Clip-local track. Entries are strictly increasing in frame.
struct Tracklet {
  int local_id = 0;
  std::vector<Detection> entries;
  int start_frame = 0;
  int end_frame = 0;

  int first_frame() const { return entries.front().frame; }
  int last_frame() const { return entries.back().frame; }
  const Detection* at_frame(int frame) const;
};

struct BufferedEmbedding {
  int frame;
  Embedding value;
};

/// Video-level track owned by the GlobalTrackStore.
struct GlobalTrack {
  int id = 0;
  std::vector<Detection> entries;
  /// Most recent <= B embeddings, oldest first.
  std::deque<BufferedEmbedding> embedding_buffer;
  int last_frame = -1;

  /// Embeddings appended by the latest merge that appended anything.
  std::vector<Embedding> recent;
  /// Exponentially smoothed embedding; empty until the first append.
  Embedding moving_average;

  const Detection* at_frame(int frame) const;
};

/// One box of an identity-labelled track, as read from or written to
/// MOT-style files.
struct TrackBox {
  int frame = 0;
  BoundingBox box;
  double score = 1.0;
};
/// id -> boxes sorted by frame.
using TrackSet = std::map<int, std::vector<TrackBox>>;

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

/// Intersection over union of two valid boxes, in [0, 1].
double iou(const BoundingBox& a, const BoundingBox& b);

/// dot(a, b) / (|a| |b|). Throws std::invalid_argument on zero norm or
/// dimension mismatch.
double cosine_similarity(const Embedding& a, const Embedding& b);

/// Throws std::invalid_argument on zero norm.
Embedding l2_normalized(const Embedding& v);

/// Bi-directional softmax affinity:
/// a_ij = 0.5 * (softmax_j(q_i . r_j / t) + softmax_i(q_i . r_j / t)).
Matrix bisoftmax_affinity(const std::vector<Embedding>& queries,
                          const std::vector<Embedding>& refs,
                          double temperature);

}  // namespace clipmot
