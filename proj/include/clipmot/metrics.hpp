#pragma once

#include <string>

#include "clipmot/core.hpp"

namespace clipmot {

struct EvalReport {
  double idf1 = 0.0;
  double mota = 0.0;      // clamped to [0, 1]
  double mota_raw = 0.0;  // may be negative
  long id_switches = 0;
  long fragmentations = 0;
  long idtp = 0, idfp = 0, idfn = 0;
  long tp = 0, fp = 0, fn = 0;
  long gt_boxes = 0, pred_boxes = 0;
};

/// Per-frame optimal IoU matching (IoU >= iou_gate) for MOTA, ID switches and
/// fragmentation; IDF1 from the identity bijection maximizing IDTP. Throws
/// std::invalid_argument when the ground truth holds no boxes.
EvalReport evaluate(const TrackSet& gt, const TrackSet& pred, double iou_gate = 0.5);

/// Frames-where-matched count for every (gt id, pred id) pair, rows and
/// columns in ascending id order. Exposed for oracle tests.
Matrix identity_overlap_counts(const TrackSet& gt, const TrackSet& pred, double iou_gate);

std::string report_json(const EvalReport& r);
std::string report_text(const EvalReport& r);

}  // namespace clipmot
