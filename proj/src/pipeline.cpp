#include "clipmot/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "clipmot/assignment.hpp"

namespace clipmot {

std::string to_string(IntraVariant v) {
  return v == IntraVariant::directional ? "directional" : "direction_free";
}

IntraVariant parse_intra(const std::string& s) {
  if (s == "directional") return IntraVariant::directional;
  if (s == "direction_free") return IntraVariant::direction_free;
  throw std::invalid_argument("unknown intra-clip variant: " + s);
}

void PipelineConfig::validate() const {
  if (clip_size < 1) throw std::invalid_argument("clip_size must be >= 1");
  if (clip_interval < 1 || clip_interval > clip_size) {
    throw std::invalid_argument("clip_interval must satisfy 1 <= clip_interval <= clip_size");
  }
  if (buffer_size < 1) throw std::invalid_argument("buffer_size must be >= 1");
  for (double v : {init_score, intra_match_threshold, inter_match_threshold, iou_gate, momentum}) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("thresholds must lie in [0, 1]");
  }
  if (!(merge_threshold >= 0.0)) throw std::invalid_argument("merge_threshold must be >= 0");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
}

PipelineConfig PipelineConfig::high_fps() { return PipelineConfig{}; }

PipelineConfig PipelineConfig::low_fps() {
  PipelineConfig c;
  c.clip_size = 6;
  c.clip_interval = 3;
  c.buffer_size = 10;
  return c;
}

std::vector<std::pair<int, int>> clip_windows(int frames, int clip_size, int clip_interval) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < frames; i += clip_interval) {
    out.emplace_back(i, std::min(i + clip_size, frames) - 1);
    if (out.back().second == frames - 1) break;
  }
  return out;
}

PipelineResult run(const Video& video, const PipelineConfig& cfg, const SummarizerWeights* weights) {
  cfg.validate();
  if (cfg.inter == Matcher::clip_tracker && weights == nullptr) {
    throw std::invalid_argument("clip_tracker matcher needs summarizer weights");
  }
  if (static_cast<int>(video.detections.size()) < video.frames) {
    throw std::invalid_argument("video has fewer detection lists than frames");
  }
  GlobalTrackStore store(cfg.buffer_size, cfg.management, cfg.momentum);
  DirectionalParams dp;
  dp.init_score = cfg.init_score;
  dp.match_threshold = cfg.intra_match_threshold;
  dp.patience = cfg.effective_patience();
  dp.temperature = cfg.temperature;
  dp.min_cosine = cfg.min_cosine;

  PipelineResult res;
  int prev_end = -1;
  for (auto [start, end] : clip_windows(video.frames, cfg.clip_size, cfg.clip_interval)) {
    Clip clip;
    clip.start_frame = start;
    clip.end_frame = end;
    for (int f = start; f <= end; ++f) clip.detections_per_frame.push_back(video.detections[f]);

    std::vector<Tracklet> tracklets = cfg.intra == IntraVariant::directional
                                          ? associate_directional(clip, dp)
                                          : associate_direction_free(clip, cfg.merge_threshold);
    Assignment asg;
    if (store.tracks().empty() || tracklets.empty()) {
      for (std::size_t c = 0; c < tracklets.size(); ++c) asg.unmatched_cols.push_back(static_cast<int>(c));
      for (std::size_t r = 0; r < store.tracks().size(); ++r) asg.unmatched_rows.push_back(static_cast<int>(r));
    } else {
      switch (cfg.inter) {
        case Matcher::iou_chain: {
          std::vector<int> overlap;
          for (int f = start; f <= prev_end; ++f) overlap.push_back(f);
          asg = match_iou_chain(store, tracklets, overlap, cfg.iou_gate);
          break;
        }
        case Matcher::temporal_average:
          asg = match_temporal_average(store, tracklets, cfg.inter_match_threshold);
          break;
        case Matcher::clip_tracker:
          asg = match_clip_tracker(store, tracklets, *weights, cfg.inter_match_threshold);
          break;
      }
    }
    store.merge(asg, tracklets);
    prev_end = end;
    ++res.clips;
  }
  for (const auto& [id, t] : store.tracks()) res.tracks.push_back(t);
  return res;
}

PipelineResult run_frame_by_frame(const Video& video, double init_score, double threshold) {
  PipelineResult res;
  std::vector<GlobalTrack> tracks;
  for (int f = 0; f < video.frames; ++f) {
    std::vector<const Detection*> dets;
    for (const auto& d : video.detections[f])
      if (d.score >= init_score) dets.push_back(&d);
    std::vector<char> used(dets.size(), 0);
    if (!tracks.empty() && !dets.empty()) {
      Matrix cost(tracks.size(), dets.size());
      for (std::size_t r = 0; r < tracks.size(); ++r)
        for (std::size_t c = 0; c < dets.size(); ++c)
          cost(r, c) = 1.0 - cosine_similarity(tracks[r].entries.back().embedding, dets[c]->embedding);
      for (auto [r, c] : solve_assignment(cost, 1.0 - threshold).pairs) {
        tracks[r].entries.push_back(*dets[c]);
        tracks[r].last_frame = f;
        used[c] = 1;
      }
    }
    for (std::size_t c = 0; c < dets.size(); ++c) {
      if (used[c]) continue;
      GlobalTrack t;
      t.id = static_cast<int>(tracks.size()) + 1;
      t.entries.push_back(*dets[c]);
      t.last_frame = f;
      tracks.push_back(std::move(t));
    }
    ++res.clips;
  }
  res.tracks = std::move(tracks);
  return res;
}

TrackSet to_track_set(const std::vector<GlobalTrack>& tracks) {
  TrackSet out;
  for (const auto& t : tracks) {
    auto& v = out[t.id];
    for (const auto& d : t.entries) v.push_back(TrackBox{d.frame, d.box, d.score});
  }
  return out;
}

std::vector<SweepCell> SweepGrid::cells() const {
  std::vector<SweepCell> out;
  for (auto [cs, ci] : clips)
    for (auto iv : intra)
      for (auto m : inter)
        for (auto g : management) out.push_back(SweepCell{cs, ci, iv, m, g});
  return out;
}

std::vector<SweepRow> sweep(const Video& video, const TrackSet& truth, const SweepGrid& grid,
                            const PipelineConfig& base, const SummarizerWeights* weights) {
  const auto cells = grid.cells();
  std::vector<SweepRow> rows(cells.size());
  const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    SweepRow& row = rows[i];
    row.cell = cells[i];
    try {
      PipelineConfig cfg = base;
      cfg.clip_size = cells[i].clip_size;
      cfg.clip_interval = cells[i].clip_interval;
      cfg.intra = cells[i].intra;
      cfg.inter = cells[i].inter;
      cfg.management = cells[i].management;
      const PipelineResult res = run(video, cfg, weights);
      row.report = evaluate(truth, to_track_set(res.tracks), 0.5);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "clip_size,clip_interval,intra,inter,management,idf1,mota,mota_raw,id_switches,"
        "fragmentations,idtp,idfp,idfn,status\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.cell.clip_size << ',' << r.cell.clip_interval << ',' << to_string(r.cell.intra) << ','
       << to_string(r.cell.inter) << ',' << to_string(r.cell.management) << ',';
    if (r.report) {
      const auto& e = *r.report;
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f", e.idf1, e.mota, e.mota_raw);
      os << buf << ',' << e.id_switches << ',' << e.fragmentations << ',' << e.idtp << ','
         << e.idfp << ',' << e.idfn << ",ok\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      os << ",,,,,,,,error: " << msg << '\n';
    }
  }
  return os.str();
}

}  // namespace clipmot
