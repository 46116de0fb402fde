#include "clipmot/inter_clip.hpp"

#include <algorithm>
#include <cmath>

#include "clipmot/assignment.hpp"

namespace clipmot {

std::string to_string(Management m) {
  switch (m) {
    case Management::two_clip: return "two_clip";
    case Management::moving_average: return "moving_average";
    case Management::feature_bank: return "feature_bank";
  }
  return "?";
}

std::string to_string(Matcher m) {
  switch (m) {
    case Matcher::iou_chain: return "iou_chain";
    case Matcher::temporal_average: return "temporal_average";
    case Matcher::clip_tracker: return "clip_tracker";
  }
  return "?";
}

Management parse_management(const std::string& s) {
  if (s == "two_clip") return Management::two_clip;
  if (s == "moving_average") return Management::moving_average;
  if (s == "feature_bank") return Management::feature_bank;
  throw std::invalid_argument("unknown management strategy: " + s);
}

Matcher parse_matcher(const std::string& s) {
  if (s == "iou_chain") return Matcher::iou_chain;
  if (s == "temporal_average") return Matcher::temporal_average;
  if (s == "clip_tracker") return Matcher::clip_tracker;
  throw std::invalid_argument("unknown matcher: " + s);
}

GlobalTrackStore::GlobalTrackStore(int buffer_size, Management management, double momentum)
    : buffer_size_(buffer_size), management_(management), momentum_(momentum) {
  if (buffer_size < 1) throw std::invalid_argument("buffer size must be >= 1");
  if (momentum < 0.0 || momentum > 1.0) throw std::invalid_argument("momentum must lie in [0, 1]");
}

std::vector<const GlobalTrack*> GlobalTrackStore::ordered() const {
  std::vector<const GlobalTrack*> out;
  out.reserve(tracks_.size());
  for (const auto& [id, t] : tracks_) out.push_back(&t);
  return out;
}

bool GlobalTrackStore::claimed(int frame, int source_index) const {
  return owned_.count({frame, source_index}) != 0;
}

void GlobalTrackStore::append(GlobalTrack& track, const std::vector<const Detection*>& fresh) {
  if (fresh.empty()) return;
  track.recent.clear();
  for (const Detection* d : fresh) {
    track.entries.push_back(*d);
    track.last_frame = d->frame;
    track.embedding_buffer.push_back({d->frame, d->embedding});
    while (static_cast<int>(track.embedding_buffer.size()) > buffer_size_)
      track.embedding_buffer.pop_front();
    track.recent.push_back(d->embedding);
    owned_.insert({d->frame, d->source_index});
  }
}

void GlobalTrackStore::merge(const Assignment& assignment, const std::vector<Tracklet>& tracklets) {
  const auto rows = ordered();
  std::vector<int> row_ids;
  for (const auto* t : rows) row_ids.push_back(t->id);
  std::vector<char> matched(tracklets.size(), 0);
  for (auto [r, c] : assignment.pairs) {
    if (r < 0 || r >= static_cast<int>(row_ids.size()) || c < 0 ||
        c >= static_cast<int>(tracklets.size())) {
      throw std::invalid_argument("assignment index out of range");
    }
    matched[c] = 1;
    GlobalTrack& track = tracks_.at(row_ids[r]);
    std::vector<const Detection*> fresh;
    for (const auto& d : tracklets[c].entries)
      if (d.frame > track.last_frame && !claimed(d.frame, d.source_index)) fresh.push_back(&d);
    append(track, fresh);
  }
  for (std::size_t c = 0; c < tracklets.size(); ++c) {
    if (matched[c]) continue;
    std::vector<const Detection*> fresh;
    for (const auto& d : tracklets[c].entries)
      if (!claimed(d.frame, d.source_index)) fresh.push_back(&d);
    if (fresh.empty()) continue;
    GlobalTrack t;
    t.id = next_id_++;
    append(t, fresh);
    tracks_.emplace(t.id, std::move(t));
  }
}

std::vector<Embedding> history_representation(const GlobalTrack& track, Management strategy,
                                              double momentum) {
  if (track.entries.empty()) throw std::invalid_argument("empty global track");
  switch (strategy) {
    case Management::two_clip:
      return track.recent;
    case Management::moving_average: {
      Embedding m = track.entries.front().embedding;
      for (std::size_t i = 1; i < track.entries.size(); ++i)
        m = momentum * m + (1.0 - momentum) * track.entries[i].embedding;
      return {m};
    }
    case Management::feature_bank: {
      std::vector<Embedding> out;
      for (const auto& b : track.embedding_buffer) out.push_back(b.value);
      return out;
    }
  }
  return {};
}

bool conflicting(const GlobalTrack& track, const Tracklet& tracklet) {
  for (const auto& d : tracklet.entries) {
    if (d.frame > track.last_frame) break;
    const Detection* g = track.at_frame(d.frame);
    if (g && g->source_index != d.source_index) return true;
  }
  return false;
}

namespace {

Embedding mean_direction(const std::vector<Embedding>& v, bool& ok) {
  ok = false;
  if (v.empty()) return {};
  Embedding m = Embedding::Zero(v.front().size());
  for (const auto& e : v) m += e;
  m /= static_cast<double>(v.size());
  const double n = m.norm();
  if (!(n > 0.0)) return m;
  ok = true;
  return m / n;
}

std::vector<Embedding> tracklet_embeddings(const Tracklet& t) {
  std::vector<Embedding> out;
  out.reserve(t.entries.size());
  for (const auto& d : t.entries) out.push_back(d.embedding);
  return out;
}

Assignment empty_assignment(std::size_t rows, std::size_t cols) {
  Assignment a;
  for (std::size_t r = 0; r < rows; ++r) a.unmatched_rows.push_back(static_cast<int>(r));
  for (std::size_t c = 0; c < cols; ++c) a.unmatched_cols.push_back(static_cast<int>(c));
  return a;
}

// Cost 1 - cos between unit-norm representatives; conflicting pairs and
// degenerate representatives are forbidden.
Assignment match_unit_vectors(const std::vector<const GlobalTrack*>& rows,
                              const std::vector<Tracklet>& tracklets,
                              const std::vector<Embedding>& row_vec, const std::vector<char>& row_ok,
                              const std::vector<Embedding>& col_vec, const std::vector<char>& col_ok,
                              double threshold) {
  Matrix cost(rows.size(), tracklets.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < tracklets.size(); ++c) {
      if (!row_ok[r] || !col_ok[c] || conflicting(*rows[r], tracklets[c])) {
        cost(r, c) = kInf;
      } else {
        cost(r, c) = 1.0 - std::clamp(row_vec[r].dot(col_vec[c]), -1.0, 1.0);
      }
    }
  }
  return solve_assignment(cost, 1.0 - threshold);
}

}  // namespace

Assignment match_iou_chain(const GlobalTrackStore& store, const std::vector<Tracklet>& tracklets,
                           const std::vector<int>& overlap_frames, double iou_threshold) {
  if (overlap_frames.empty()) {
    throw std::invalid_argument("IoU chaining needs at least one overlapping frame");
  }
  std::vector<int> frames = overlap_frames;
  std::sort(frames.begin(), frames.end());
  const auto rows = store.ordered();
  if (rows.empty() || tracklets.empty()) return empty_assignment(rows.size(), tracklets.size());
  Matrix cost(rows.size(), tracklets.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < tracklets.size(); ++c) {
      cost(r, c) = kInf;
      for (int f : frames) {
        const Detection* g = rows[r]->at_frame(f);
        const Detection* t = tracklets[c].at_frame(f);
        if (g && t) {
          cost(r, c) = 1.0 - iou(g->box, t->box);
          break;
        }
      }
    }
  }
  return solve_assignment(cost, 1.0 - iou_threshold);
}

Assignment match_temporal_average(const GlobalTrackStore& store,
                                  const std::vector<Tracklet>& tracklets, double threshold) {
  const auto rows = store.ordered();
  if (rows.empty() || tracklets.empty()) return empty_assignment(rows.size(), tracklets.size());
  std::vector<Embedding> rv(rows.size()), cv(tracklets.size());
  std::vector<char> rok(rows.size()), cok(tracklets.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool ok = false;
    rv[r] = mean_direction(
        history_representation(*rows[r], store.management(), store.momentum()), ok);
    rok[r] = ok;
  }
  for (std::size_t c = 0; c < tracklets.size(); ++c) {
    bool ok = false;
    cv[c] = mean_direction(tracklet_embeddings(tracklets[c]), ok);
    cok[c] = ok;
  }
  return match_unit_vectors(rows, tracklets, rv, rok, cv, cok, threshold);
}

Assignment match_clip_tracker(const GlobalTrackStore& store, const std::vector<Tracklet>& tracklets,
                              const SummarizerWeights& weights, double threshold) {
  const auto rows = store.ordered();
  if (rows.empty() || tracklets.empty()) return empty_assignment(rows.size(), tracklets.size());
  std::vector<std::vector<Embedding>> seqs;
  for (const auto* t : rows)
    seqs.push_back(history_representation(*t, store.management(), store.momentum()));
  for (const auto& t : tracklets) seqs.push_back(tracklet_embeddings(t));
  for (const auto& s : seqs)
    for (const auto& e : s)
      if (e.size() != weights.dims().input_dim)
        throw std::invalid_argument("summarizer input dimension does not match embeddings");

  const auto summaries = kernels::summarize_batch_parallel(weights, seqs);
  std::vector<Embedding> rv(rows.size()), cv(tracklets.size());
  std::vector<char> rok(rows.size()), cok(tracklets.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const double n = summaries[i].norm();
    const bool ok = n > 0.0 && std::isfinite(n);
    const Embedding u = ok ? Embedding(summaries[i] / n) : summaries[i];
    if (i < rows.size()) {
      rv[i] = u;
      rok[i] = ok;
    } else {
      cv[i - rows.size()] = u;
      cok[i - rows.size()] = ok;
    }
  }
  return match_unit_vectors(rows, tracklets, rv, rok, cv, cok, threshold);
}

}  // namespace clipmot
