#include "clipmot/intra_clip.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "clipmot/assignment.hpp"
#include "clipmot/kernels.hpp"

namespace clipmot {

std::size_t Clip::detection_count() const {
  std::size_t n = 0;
  for (const auto& f : detections_per_frame) n += f.size();
  return n;
}

void canonicalize_tracklets(std::vector<Tracklet>& tracklets) {
  std::sort(tracklets.begin(), tracklets.end(), [](const Tracklet& a, const Tracklet& b) {
    const auto& x = a.entries.front();
    const auto& y = b.entries.front();
    return std::tie(x.frame, x.source_index) < std::tie(y.frame, y.source_index);
  });
  for (std::size_t i = 0; i < tracklets.size(); ++i)
    tracklets[i].local_id = static_cast<int>(i);
}

namespace {

Tracklet start_tracklet(int id, const Clip& clip, const Detection& d) {
  Tracklet t;
  t.local_id = id;
  t.start_frame = clip.start_frame;
  t.end_frame = clip.end_frame;
  t.entries.push_back(d);
  return t;
}

}  // namespace

std::vector<Tracklet> associate_directional(const Clip& clip,
                                            const DirectionalParams& params) {
  std::vector<Tracklet> done;
  std::map<int, Tracklet> open;  // local id -> tracklet being built
  RebirthMemory memory;
  memory.patience = params.patience;
  std::map<int, Embedding> active;  // matched on the previous processed frame
  int next_id = 0;

  const double gate = 1.0 - params.match_threshold;
  for (int k = 0; k < clip.length(); ++k) {
    std::vector<const Detection*> dets;
    if (k < static_cast<int>(clip.detections_per_frame.size())) {
      for (const auto& d : clip.detections_per_frame[k])
        if (d.score >= params.init_score) dets.push_back(&d);
    }

    // Candidates: active and lost tracks in local-id order.
    std::vector<int> cand_ids;
    std::vector<Embedding> cand_emb;
    {
      std::map<int, const Embedding*> all;
      for (const auto& [id, e] : active) all[id] = &e;
      for (const auto& [id, e] : memory.lost) all[id] = &e.last_embedding;
      for (const auto& [id, e] : all) {
        cand_ids.push_back(id);
        cand_emb.push_back(*e);
      }
    }

    std::vector<char> det_matched(dets.size(), 0);
    std::vector<char> cand_matched(cand_ids.size(), 0);
    if (!dets.empty() && !cand_ids.empty()) {
      std::vector<Embedding> det_emb;
      det_emb.reserve(dets.size());
      for (const auto* d : dets) det_emb.push_back(d->embedding);
      const Matrix aff = bisoftmax_affinity(cand_emb, det_emb, params.temperature);
      const Matrix dist = kernels::cosine_distance_matrix(cand_emb, det_emb);
      Matrix cost = Matrix::Ones(aff.rows(), aff.cols()) - aff;
      for (Eigen::Index i = 0; i < cost.rows(); ++i)
        for (Eigen::Index j = 0; j < cost.cols(); ++j)
          if (1.0 - dist(i, j) < params.min_cosine) cost(i, j) = kInf;
      const Assignment asg = solve_assignment(cost, gate);
      for (auto [r, c] : asg.pairs) {
        const int id = cand_ids[r];
        open.at(id).entries.push_back(*dets[c]);
        cand_matched[r] = 1;
        det_matched[c] = 1;
      }
    }

    std::map<int, Embedding> next_active;
    for (std::size_t i = 0; i < cand_ids.size(); ++i) {
      const int id = cand_ids[i];
      if (cand_matched[i]) {
        memory.lost.erase(id);
        next_active[id] = open.at(id).entries.back().embedding;
        continue;
      }
      auto it = memory.lost.find(id);
      if (it == memory.lost.end()) {
        const Tracklet& t = open.at(id);
        it = memory.lost
                 .emplace(id, RebirthMemory::Entry{t.entries.back().embedding,
                                                   t.entries.back().frame, 0})
                 .first;
      }
      it->second.frames_since_lost += 1;
      if (it->second.frames_since_lost > memory.patience) {
        done.push_back(std::move(open.at(id)));
        open.erase(id);
        memory.lost.erase(it);
      }
    }
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (det_matched[j]) continue;
      const int id = next_id++;
      open.emplace(id, start_tracklet(id, clip, *dets[j]));
      next_active[id] = dets[j]->embedding;
    }
    active = std::move(next_active);
  }
  for (auto& [id, t] : open) done.push_back(std::move(t));
  canonicalize_tracklets(done);
  return done;
}

std::vector<Tracklet> associate_direction_free(const Clip& clip,
                                               double merge_threshold) {
  std::vector<const Detection*> dets;
  for (const auto& frame : clip.detections_per_frame)
    for (const auto& d : frame) dets.push_back(&d);
  const int n = static_cast<int>(dets.size());
  std::vector<Tracklet> out;
  if (n == 0) return out;

  std::vector<Embedding> emb;
  emb.reserve(n);
  for (const auto* d : dets) emb.push_back(d->embedding);
  // Single-linkage distances between live clusters, ignoring frame overlap.
  Matrix link = kernels::cosine_distance_matrix(emb, emb);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i == j || dets[i]->frame == dets[j]->frame) link(i, j) = kInf;

  std::vector<std::vector<int>> members(n);
  std::vector<std::vector<int>> frames(n);  // sorted
  std::vector<int> stamp(n, 0);
  std::vector<char> alive(n, 1);
  for (int i = 0; i < n; ++i) {
    members[i] = {i};
    frames[i] = {dets[i]->frame};
  }

  auto disjoint = [&](int a, int b) {
    const auto& fa = frames[a];
    const auto& fb = frames[b];
    std::size_t i = 0, j = 0;
    while (i < fa.size() && j < fb.size()) {
      if (fa[i] == fb[j]) return false;
      if (fa[i] < fb[j]) ++i; else ++j;
    }
    return true;
  };

  using Entry = std::tuple<double, int, int, int, int>;  // d, lo, hi, stamp lo, stamp hi
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  auto push = [&](int a, int b) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    const double d = link(lo, hi);
    if (d <= merge_threshold && disjoint(lo, hi))
      heap.emplace(d, lo, hi, stamp[lo], stamp[hi]);
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) push(i, j);

  while (!heap.empty()) {
    const auto [dist, a, b, sa, sb] = heap.top();
    heap.pop();
    if (!alive[a] || !alive[b] || stamp[a] != sa || stamp[b] != sb) continue;
    // a < b: the merged cluster keeps id a.
    members[a].insert(members[a].end(), members[b].begin(), members[b].end());
    std::vector<int> merged;
    std::merge(frames[a].begin(), frames[a].end(), frames[b].begin(), frames[b].end(),
               std::back_inserter(merged));
    frames[a] = std::move(merged);
    alive[b] = 0;
    ++stamp[a];
    for (int k = 0; k < n; ++k) {
      if (!alive[k] || k == a) continue;
      const double v = std::min(link(a, k), link(b, k));
      link(a, k) = link(k, a) = v;
    }
    for (int k = 0; k < n; ++k)
      if (alive[k] && k != a) push(a, k);
  }

  for (int i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    Tracklet t;
    t.start_frame = clip.start_frame;
    t.end_frame = clip.end_frame;
    for (int m : members[i]) t.entries.push_back(*dets[m]);
    std::sort(t.entries.begin(), t.entries.end(),
              [](const Detection& x, const Detection& y) { return x.frame < y.frame; });
    out.push_back(std::move(t));
  }
  canonicalize_tracklets(out);
  return out;
}

}  // namespace clipmot
