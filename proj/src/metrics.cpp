#include "clipmot/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clipmot/assignment.hpp"

namespace clipmot {

namespace {

struct FrameBoxes {
  std::vector<int> ids;
  std::vector<BoundingBox> boxes;
};

std::map<int, FrameBoxes> by_frame(const TrackSet& s) {
  std::map<int, FrameBoxes> out;
  for (const auto& [id, boxes] : s) {
    for (const auto& b : boxes) {
      auto& f = out[b.frame];
      f.ids.push_back(id);
      f.boxes.push_back(b.box);
    }
  }
  return out;
}

long box_count(const TrackSet& s) {
  long n = 0;
  for (const auto& [id, boxes] : s) n += static_cast<long>(boxes.size());
  return n;
}

}  // namespace

Matrix identity_overlap_counts(const TrackSet& gt, const TrackSet& pred, double iou_gate) {
  std::map<int, int> gi, pi;
  for (const auto& [id, b] : gt) gi.emplace(id, static_cast<int>(gi.size()));
  for (const auto& [id, b] : pred) pi.emplace(id, static_cast<int>(pi.size()));
  Matrix counts = Matrix::Zero(gi.size(), pi.size());
  const auto gf = by_frame(gt);
  const auto pf = by_frame(pred);
  for (const auto& [frame, g] : gf) {
    auto it = pf.find(frame);
    if (it == pf.end()) continue;
    const auto& p = it->second;
    for (std::size_t a = 0; a < g.ids.size(); ++a)
      for (std::size_t b = 0; b < p.ids.size(); ++b)
        if (iou(g.boxes[a], p.boxes[b]) >= iou_gate) counts(gi[g.ids[a]], pi[p.ids[b]]) += 1.0;
  }
  return counts;
}

EvalReport evaluate(const TrackSet& gt, const TrackSet& pred, double iou_gate) {
  EvalReport r;
  r.gt_boxes = box_count(gt);
  r.pred_boxes = box_count(pred);
  if (r.gt_boxes == 0) throw std::invalid_argument("ground truth has no boxes");

  const auto gf = by_frame(gt);
  const auto pf = by_frame(pred);
  std::set<int> frames;
  for (const auto& [f, v] : gf) frames.insert(f);
  for (const auto& [f, v] : pf) frames.insert(f);

  std::map<int, int> last_match;     // gt id -> pred id
  std::map<int, bool> in_gap;        // gt id tracked before, currently lost
  std::map<int, bool> tracked_prev;  // gt id matched in its previous frame
  for (int frame : frames) {
    static const FrameBoxes kEmpty;
    auto git = gf.find(frame);
    auto pit = pf.find(frame);
    const FrameBoxes& g = git == gf.end() ? kEmpty : git->second;
    const FrameBoxes& p = pit == pf.end() ? kEmpty : pit->second;
    std::vector<int> match(g.ids.size(), -1);
    if (!g.ids.empty() && !p.ids.empty()) {
      Matrix cost(g.ids.size(), p.ids.size());
      for (std::size_t a = 0; a < g.ids.size(); ++a)
        for (std::size_t b = 0; b < p.ids.size(); ++b) {
          const double v = iou(g.boxes[a], p.boxes[b]);
          cost(a, b) = v >= iou_gate ? 1.0 - v : kInf;
        }
      for (auto [a, b] : solve_assignment(cost, kInf).pairs) match[a] = b;
    }
    long matched = 0;
    for (std::size_t a = 0; a < g.ids.size(); ++a) {
      const int gid = g.ids[a];
      if (match[a] < 0) {
        if (tracked_prev[gid]) in_gap[gid] = true;
        tracked_prev[gid] = false;
        continue;
      }
      ++matched;
      const int pid = p.ids[match[a]];
      auto lm = last_match.find(gid);
      if (lm != last_match.end() && lm->second != pid) ++r.id_switches;
      last_match[gid] = pid;
      if (in_gap[gid]) {
        ++r.fragmentations;
        in_gap[gid] = false;
      }
      tracked_prev[gid] = true;
    }
    r.tp += matched;
    r.fn += static_cast<long>(g.ids.size()) - matched;
    r.fp += static_cast<long>(p.ids.size()) - matched;
  }
  r.mota_raw = 1.0 - static_cast<double>(r.fn + r.fp + r.id_switches) / r.gt_boxes;
  r.mota = std::clamp(r.mota_raw, 0.0, 1.0);

  const Matrix counts = identity_overlap_counts(gt, pred, iou_gate);
  if (counts.size() > 0) {
    Matrix cost(counts.rows(), counts.cols());
    for (Eigen::Index i = 0; i < counts.rows(); ++i)
      for (Eigen::Index j = 0; j < counts.cols(); ++j)
        cost(i, j) = counts(i, j) > 0.0 ? -counts(i, j) : kInf;
    for (auto [i, j] : solve_assignment(cost, 0.0).pairs) r.idtp += static_cast<long>(counts(i, j));
  }
  r.idfp = r.pred_boxes - r.idtp;
  r.idfn = r.gt_boxes - r.idtp;
  r.idf1 = 2.0 * r.idtp / static_cast<double>(2 * r.idtp + r.idfp + r.idfn);
  return r;
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["idf1"] = r.idf1;
  j["mota"] = r.mota;
  j["mota_raw"] = r.mota_raw;
  j["id_switches"] = r.id_switches;
  j["fragmentations"] = r.fragmentations;
  j["idtp"] = r.idtp;
  j["idfp"] = r.idfp;
  j["idfn"] = r.idfn;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["gt_boxes"] = r.gt_boxes;
  j["pred_boxes"] = r.pred_boxes;
  return j.dump(2);
}

std::string report_text(const EvalReport& r) {
  std::ostringstream os;
  char buf[96];
  auto row = [&](const char* key, const std::string& value) {
    std::snprintf(buf, sizeof buf, "%-16s %12s\n", key, value.c_str());
    os << buf;
  };
  auto real = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6f", v);
    return std::string(b);
  };
  row("idf1", real(r.idf1));
  row("mota", real(r.mota));
  row("mota_raw", real(r.mota_raw));
  row("id_switches", std::to_string(r.id_switches));
  row("fragmentations", std::to_string(r.fragmentations));
  row("idtp", std::to_string(r.idtp));
  row("idfp", std::to_string(r.idfp));
  row("idfn", std::to_string(r.idfn));
  row("tp", std::to_string(r.tp));
  row("fp", std::to_string(r.fp));
  row("fn", std::to_string(r.fn));
  row("gt_boxes", std::to_string(r.gt_boxes));
  row("pred_boxes", std::to_string(r.pred_boxes));
  return os.str();
}

}  // namespace clipmot
