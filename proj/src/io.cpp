#include "clipmot/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace clipmot::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

// Split on commas and whitespace, dropping empties.
std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool to_double(const std::string& s, double& v) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && p == e;
}

template <class Int>
bool to_int(const std::string& s, Int& v) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && p == e;
}

DataError line_error(int line, const std::string& msg) {
  return DataError("line " + std::to_string(line) + ": " + msg);
}

struct MotRow {
  int frame;
  int id;
  BoundingBox box;
  double score;
};

template <class F>
void for_each_line(const std::string& text, F&& f) {
  std::istringstream is(text);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty()) continue;
    f(t, n);
  }
}

MotRow parse_mot_row(const std::string& line, int n) {
  const auto f = split(line, ',');
  if (f.size() < 7 || f.size() > 10) {
    throw line_error(n, "expected 7 to 10 comma-separated fields, got " + std::to_string(f.size()));
  }
  MotRow r{};
  double x, y, w, h;
  if (!to_int(f[0], r.frame) || r.frame < 1) throw line_error(n, "frame must be a positive integer");
  double id_value;
  if (!to_double(f[1], id_value)) throw line_error(n, "id is not a number");
  r.id = static_cast<int>(id_value);
  if (!to_double(f[2], x) || !to_double(f[3], y) || !to_double(f[4], w) || !to_double(f[5], h) ||
      !to_double(f[6], r.score)) {
    throw line_error(n, "box or confidence is not a number");
  }
  if (!(w > 0.0) || !(h > 0.0)) throw line_error(n, "box width and height must be positive");
  try {
    r.box = BoundingBox::make(x, y, w, h);
  } catch (const std::invalid_argument& e) {
    throw line_error(n, e.what());
  }
  r.frame -= 1;
  return r;
}

template <class T>
void set_from(KeyValueFile& file, const std::string& key, T& field) {
  const auto* e = file.get(key);
  if (!e) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (e->value == "true" || e->value == "1") field = true;
    else if (e->value == "false" || e->value == "0") field = false;
    else throw line_error(e->line, key + ": expected true or false");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!to_double(e->value, field)) throw line_error(e->line, key + ": expected a number");
  } else if constexpr (std::is_integral_v<T>) {
    if (!to_int(e->value, field)) throw line_error(e->line, key + ": expected an integer");
  } else {
    field = e->value;
  }
}

template <class T, class P>
void set_enum(KeyValueFile& file, const std::string& key, T& field, P parse) {
  const auto* e = file.get(key);
  if (!e) return;
  try {
    field = parse(e->value);
  } catch (const std::invalid_argument& ex) {
    throw line_error(e->line, ex.what());
  }
}

std::string str(double v) { return format_double(v); }
std::string str(int v) { return std::to_string(v); }
std::string str(std::uint64_t v) { return std::to_string(v); }
std::string str(bool v) { return v ? "true" : "false"; }

InterruptionKind parse_kind(const std::string& s) {
  if (s == "occlusion") return InterruptionKind::occlusion;
  if (s == "camera_jump") return InterruptionKind::camera_jump;
  if (s == "light_change") return InterruptionKind::light_change;
  throw std::invalid_argument("unknown interruption kind: " + s);
}

std::string kind_name(InterruptionKind k) {
  switch (k) {
    case InterruptionKind::occlusion: return "occlusion";
    case InterruptionKind::camera_jump: return "camera_jump";
    case InterruptionKind::light_change: return "light_change";
  }
  return "occlusion";
}

ordered_json vec_json(const Embedding& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Embedding vec_from(const json& a) {
  Embedding v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

Frames parse_detections_text(const std::string& text) {
  Frames frames;
  for_each_line(text, [&](const std::string& line, int n) {
    const MotRow r = parse_mot_row(line, n);
    if (static_cast<int>(frames.size()) <= r.frame) frames.resize(r.frame + 1);
    Detection d;
    d.frame = r.frame;
    d.box = r.box;
    d.score = r.score;
    d.source_index = static_cast<int>(frames[r.frame].size());
    frames[r.frame].push_back(std::move(d));
  });
  return frames;
}

Frames parse_detections(const std::filesystem::path& path) {
  return parse_detections_text(read_file(path));
}

TrackSet parse_tracks_text(const std::string& text) {
  TrackSet out;
  std::set<std::pair<int, int>> seen;
  for_each_line(text, [&](const std::string& line, int n) {
    const MotRow r = parse_mot_row(line, n);
    if (!seen.emplace(r.id, r.frame).second) {
      throw line_error(n, "track " + std::to_string(r.id) + " repeats frame " +
                              std::to_string(r.frame + 1));
    }
    out[r.id].push_back(TrackBox{r.frame, r.box, r.score});
  });
  for (auto& [id, boxes] : out) {
    std::sort(boxes.begin(), boxes.end(),
              [](const TrackBox& a, const TrackBox& b) { return a.frame < b.frame; });
  }
  return out;
}

TrackSet parse_tracks(const std::filesystem::path& path) { return parse_tracks_text(read_file(path)); }

void attach_embeddings_text(const std::string& text, int dim, Frames& frames) {
  if (dim < 1) throw DataError("embedding dimension must be positive");
  std::vector<std::vector<char>> have(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) have[f].assign(frames[f].size(), 0);
  for_each_line(text, [&](const std::string& line, int n) {
    const auto f = split(line, ',');
    if (static_cast<int>(f.size()) != dim + 2) {
      throw line_error(n, "expected " + std::to_string(dim) + " embedding values, got " +
                              std::to_string(static_cast<long>(f.size()) - 2));
    }
    int frame, idx;
    if (!to_int(f[0], frame) || !to_int(f[1], idx)) throw line_error(n, "frame and det_index must be integers");
    const int fr = frame - 1;
    if (fr < 0 || fr >= static_cast<int>(frames.size()) || idx < 0 ||
        idx >= static_cast<int>(frames[fr].size())) {
      throw line_error(n, "no detection (" + std::to_string(frame) + ", " + std::to_string(idx) + ")");
    }
    if (have[fr][idx]) {
      throw line_error(n, "duplicate embedding for (" + std::to_string(frame) + ", " +
                              std::to_string(idx) + ")");
    }
    Embedding v(dim);
    for (int k = 0; k < dim; ++k) {
      if (!to_double(f[k + 2], v[k])) throw line_error(n, "embedding value is not a number");
    }
    frames[fr][idx].embedding = std::move(v);
    have[fr][idx] = 1;
  });
  for (std::size_t fr = 0; fr < frames.size(); ++fr)
    for (std::size_t i = 0; i < frames[fr].size(); ++i)
      if (!have[fr][i]) {
        throw DataError("missing embedding for frame " + std::to_string(fr + 1) + ", det_index " + std::to_string(i));
      }
}

void attach_embeddings(const std::filesystem::path& path, int dim, Frames& frames) {
  attach_embeddings_text(read_file(path), dim, frames);
}

std::string tracks_text(const TrackSet& tracks) {
  struct Row {
    int frame, id;
    const TrackBox* b;
  };
  std::vector<Row> rows;
  for (const auto& [id, boxes] : tracks)
    for (const auto& b : boxes) rows.push_back({b.frame, id, &b});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::string out;
  for (const auto& r : rows) {
    out += std::to_string(r.frame + 1) + ',' + std::to_string(r.id) + ',' + str(r.b->box.x) + ',' +
           str(r.b->box.y) + ',' + str(r.b->box.w) + ',' + str(r.b->box.h) + ',' + str(r.b->score) +
           ",-1,-1,-1\n";
  }
  return out;
}

void write_tracks(const TrackSet& tracks, const std::filesystem::path& path) {
  write_file(path, tracks_text(tracks));
}

std::string detections_text(const Frames& frames) {
  std::string out;
  for (const auto& dets : frames)
    for (const auto& d : dets) {
      out += std::to_string(d.frame + 1) + ",-1," + str(d.box.x) + ',' + str(d.box.y) + ',' +
             str(d.box.w) + ',' + str(d.box.h) + ',' + str(d.score) + ",-1,-1,-1\n";
    }
  return out;
}

std::string embeddings_text(const Frames& frames) {
  std::string out;
  for (const auto& dets : frames)
    for (std::size_t i = 0; i < dets.size(); ++i) {
      out += std::to_string(dets[i].frame + 1) + ',' + std::to_string(i);
      for (Eigen::Index k = 0; k < dets[i].embedding.size(); ++k) out += ',' + str(dets[i].embedding[k]);
      out += '\n';
    }
  return out;
}

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile f;
  std::istringstream is(text);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw line_error(n, "expected key = value");
    Entry e;
    e.key = trim(t.substr(0, eq));
    e.value = trim(t.substr(eq + 1));
    e.line = n;
    if (e.key.empty()) throw line_error(n, "empty key");
    f.entries_.push_back(std::move(e));
  }
  return f;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const KeyValueFile::Entry* KeyValueFile::get(const std::string& key) {
  Entry* last = nullptr;
  for (auto& e : entries_)
    if (e.key == key) {
      e.used = true;
      last = &e;
    }
  return last;
}

std::vector<const KeyValueFile::Entry*> KeyValueFile::all(const std::string& key) {
  std::vector<const Entry*> out;
  for (auto& e : entries_)
    if (e.key == key) {
      e.used = true;
      out.push_back(&e);
    }
  return out;
}

void KeyValueFile::require_all_used() const {
  for (const auto& e : entries_)
    if (!e.used) throw line_error(e.line, "unknown key '" + e.key + "'");
}

std::string key_values_text(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + '\n';
  return out;
}

void apply(KeyValueFile& file, PipelineConfig& c) {
  set_from(file, "clip_size", c.clip_size);
  set_from(file, "clip_interval", c.clip_interval);
  set_enum(file, "intra", c.intra, parse_intra);
  set_enum(file, "inter", c.inter, parse_matcher);
  set_enum(file, "management", c.management, parse_management);
  set_from(file, "buffer_size", c.buffer_size);
  set_from(file, "init_score", c.init_score);
  set_from(file, "intra_match_threshold", c.intra_match_threshold);
  set_from(file, "inter_match_threshold", c.inter_match_threshold);
  set_from(file, "merge_threshold", c.merge_threshold);
  set_from(file, "iou_gate", c.iou_gate);
  set_from(file, "patience", c.patience);
  set_from(file, "temperature", c.temperature);
  set_from(file, "min_cosine", c.min_cosine);
  set_from(file, "momentum", c.momentum);
  set_from(file, "weights", c.weights_path);
}

KeyValues to_key_values(const PipelineConfig& c) {
  KeyValues kv{{"clip_size", str(c.clip_size)},
               {"clip_interval", str(c.clip_interval)},
               {"intra", to_string(c.intra)},
               {"inter", to_string(c.inter)},
               {"management", to_string(c.management)},
               {"buffer_size", str(c.buffer_size)},
               {"init_score", str(c.init_score)},
               {"intra_match_threshold", str(c.intra_match_threshold)},
               {"inter_match_threshold", str(c.inter_match_threshold)},
               {"merge_threshold", str(c.merge_threshold)},
               {"iou_gate", str(c.iou_gate)},
               {"patience", str(c.patience)},
               {"temperature", str(c.temperature)},
               {"min_cosine", str(c.min_cosine)},
               {"momentum", str(c.momentum)}};
  if (!c.weights_path.empty()) kv.emplace_back("weights", c.weights_path);
  return kv;
}

void apply(KeyValueFile& file, ScenarioConfig& c) {
  set_from(file, "frames", c.frames);
  set_from(file, "identities", c.identities);
  set_from(file, "arena_width", c.arena_width);
  set_from(file, "arena_height", c.arena_height);
  set_from(file, "speed", c.speed);
  set_from(file, "turn_sigma", c.turn_sigma);
  set_from(file, "box_min", c.box_min);
  set_from(file, "box_max", c.box_max);
  set_from(file, "embedding_dim", c.embedding_dim);
  set_from(file, "min_separation", c.min_separation);
  set_from(file, "box_sigma", c.box_sigma);
  set_from(file, "embedding_sigma", c.embedding_sigma);
  set_from(file, "drift_rate", c.drift_rate);
  set_from(file, "light_strength", c.light_strength);
  set_from(file, "camera_jump", c.camera_jump);
  set_from(file, "loc_error_rate", c.loc_error_rate);
  set_from(file, "nuisance_rank", c.nuisance_rank);
  set_from(file, "fp_rate", c.fp_rate);
  set_from(file, "fn_rate", c.fn_rate);
  set_from(file, "seed", c.seed);
  const auto ints = file.all("interruption");
  if (!ints.empty()) c.interruptions.clear();
  for (const auto* e : ints) {
    const auto t = tokens(e->value);
    if (t.size() < 3) throw line_error(e->line, "interruption: expected kind first last [identities]");
    Interruption in;
    try {
      in.kind = parse_kind(t[0]);
    } catch (const std::invalid_argument& ex) {
      throw line_error(e->line, ex.what());
    }
    if (!to_int(t[1], in.first_frame) || !to_int(t[2], in.last_frame)) {
      throw line_error(e->line, "interruption: frames must be integers");
    }
    for (std::size_t k = 3; k < t.size(); ++k) {
      int id;
      if (!to_int(t[k], id)) throw line_error(e->line, "interruption: identity must be an integer");
      in.identities.push_back(id);
    }
    c.interruptions.push_back(std::move(in));
  }
}

KeyValues to_key_values(const ScenarioConfig& c) {
  KeyValues kv{{"frames", str(c.frames)},
               {"identities", str(c.identities)},
               {"arena_width", str(c.arena_width)},
               {"arena_height", str(c.arena_height)},
               {"speed", str(c.speed)},
               {"turn_sigma", str(c.turn_sigma)},
               {"box_min", str(c.box_min)},
               {"box_max", str(c.box_max)},
               {"embedding_dim", str(c.embedding_dim)},
               {"min_separation", str(c.min_separation)},
               {"box_sigma", str(c.box_sigma)},
               {"embedding_sigma", str(c.embedding_sigma)},
               {"drift_rate", str(c.drift_rate)},
               {"light_strength", str(c.light_strength)},
               {"camera_jump", str(c.camera_jump)},
               {"loc_error_rate", str(c.loc_error_rate)},
               {"nuisance_rank", str(c.nuisance_rank)},
               {"fp_rate", str(c.fp_rate)},
               {"fn_rate", str(c.fn_rate)},
               {"seed", str(c.seed)}};
  for (const auto& in : c.interruptions) {
    std::string v = kind_name(in.kind) + ' ' + str(in.first_frame) + ' ' + str(in.last_frame);
    for (std::size_t k = 0; k < in.identities.size(); ++k) {
      v += (k == 0 ? ' ' : ',') + str(in.identities[k]);
    }
    kv.emplace_back("interruption", v);
  }
  return kv;
}

void apply(KeyValueFile& file, TrainConfig& c) {
  set_from(file, "learning_rate", c.learning_rate);
  set_from(file, "momentum", c.momentum);
  set_from(file, "epochs", c.epochs);
  set_from(file, "batches_per_epoch", c.batches_per_epoch);
  set_from(file, "videos_per_batch", c.videos_per_batch);
  set_from(file, "tracks_per_video", c.tracks_per_video);
  set_from(file, "samples_per_identity", c.samples_per_identity);
  set_from(file, "video_window", c.video_window);
  set_from(file, "grad_clip", c.grad_clip);
  set_from(file, "seed", c.seed);
  set_from(file, "deterministic", c.deterministic);
}

KeyValues to_key_values(const TrainConfig& c) {
  return {{"learning_rate", str(c.learning_rate)},
          {"momentum", str(c.momentum)},
          {"epochs", str(c.epochs)},
          {"batches_per_epoch", str(c.batches_per_epoch)},
          {"videos_per_batch", str(c.videos_per_batch)},
          {"tracks_per_video", str(c.tracks_per_video)},
          {"samples_per_identity", str(c.samples_per_identity)},
          {"video_window", str(c.video_window)},
          {"grad_clip", str(c.grad_clip)},
          {"seed", str(c.seed)},
          {"deterministic", str(c.deterministic)}};
}

void apply(KeyValueFile& file, AugmentConfig& c) {
  if (const auto* e = file.get("augment")) {
    if (e->value == "none") c = AugmentConfig::none();
    else if (e->value == "negatives") c = AugmentConfig::negatives();
    else if (e->value == "negatives_mixup") c = AugmentConfig::negatives_mixup();
    else throw line_error(e->line, "augment: expected none, negatives or negatives_mixup");
  }
  set_from(file, "positive_iou", c.positive_iou);
  set_from(file, "negative_iou_lo", c.negative_band.lo);
  set_from(file, "negative_iou_hi", c.negative_band.hi);
  if (const auto* e = file.get("type_probs")) {
    const auto t = tokens(e->value);
    if (t.size() != 3) throw line_error(e->line, "type_probs: expected three numbers");
    for (int k = 0; k < 3; ++k)
      if (!to_double(t[k], c.type_probs[k])) throw line_error(e->line, "type_probs: expected three numbers");
  }
  set_from(file, "mixup_bound", c.mixup_bound);
  set_from(file, "mixup_prob", c.mixup_prob);
  set_from(file, "scattered_mixup", c.scattered_mixup);
  set_from(file, "min_length", c.min_length);
  set_from(file, "max_length", c.max_length);
  set_from(file, "frame_range", c.frame_range);
}

KeyValues to_key_values(const AugmentConfig& c) {
  return {{"positive_iou", str(c.positive_iou)},
          {"negative_iou_lo", str(c.negative_band.lo)},
          {"negative_iou_hi", str(c.negative_band.hi)},
          {"type_probs", str(c.type_probs[0]) + ',' + str(c.type_probs[1]) + ',' + str(c.type_probs[2])},
          {"mixup_bound", str(c.mixup_bound)},
          {"mixup_prob", str(c.mixup_prob)},
          {"scattered_mixup", str(c.scattered_mixup)},
          {"min_length", str(c.min_length)},
          {"max_length", str(c.max_length)},
          {"frame_range", str(c.frame_range)}};
}

void apply(KeyValueFile& file, ModelDims& d) {
  set_from(file, "model_dim", d.model_dim);
  set_from(file, "layers", d.layers);
  set_from(file, "heads", d.heads);
  set_from(file, "ff_dim", d.ff_dim);
}

KeyValues to_key_values(const ModelDims& d) {
  return {{"model_dim", str(d.model_dim)},
          {"layers", str(d.layers)},
          {"heads", str(d.heads)},
          {"ff_dim", str(d.ff_dim)}};
}

void apply(KeyValueFile& file, TrainDataConfig& c) {
  set_from(file, "train_videos", c.videos);
  set_from(file, "proposals_per_frame", c.proposals_per_frame);
}

KeyValues to_key_values(const TrainDataConfig& c) {
  return {{"train_videos", str(c.videos)}, {"proposals_per_frame", str(c.proposals_per_frame)}};
}

SweepGrid parse_grid(KeyValueFile& file, const PipelineConfig& base) {
  SweepGrid g;
  if (const auto* e = file.get("clips")) {
    for (const auto& t : tokens(e->value)) {
      const auto x = t.find('x');
      int cs, ci;
      if (x == std::string::npos || !to_int(t.substr(0, x), cs) || !to_int(t.substr(x + 1), ci)) {
        throw line_error(e->line, "clips: expected entries like 10x5");
      }
      g.clips.emplace_back(cs, ci);
    }
  } else {
    g.clips.emplace_back(base.clip_size, base.clip_interval);
  }
  auto axis = [&](const std::string& key, auto& out, auto parse, auto fallback) {
    if (const auto* e = file.get(key)) {
      for (const auto& t : tokens(e->value)) {
        try {
          out.push_back(parse(t));
        } catch (const std::invalid_argument& ex) {
          throw line_error(e->line, ex.what());
        }
      }
    } else {
      out.push_back(fallback);
    }
  };
  axis("intra", g.intra, parse_intra, base.intra);
  axis("inter", g.inter, parse_matcher, base.inter);
  axis("management", g.management, parse_management, base.management);
  file.require_all_used();
  if (g.cells().empty()) throw DataError("sweep grid is empty");
  return g;
}

std::string scenario_json(const Scenario& s) {
  ordered_json cfg;
  for (const auto& [k, v] : to_key_values(s.config)) {
    if (k == "interruption") cfg["interruptions"].push_back(v);
    else cfg[k] = v;
  }
  ordered_json j;
  j["config"] = cfg;
  j["light_bias"] = vec_json(s.light_bias);
  ordered_json truth;
  truth["frames"] = s.truth.frames;
  truth["identities"] = ordered_json::array();
  for (const auto& id : s.truth.identities) {
    ordered_json t;
    t["id"] = id.id;
    t["latent"] = vec_json(id.latent);
    t["drift_axis"] = vec_json(id.drift_axis);
    ordered_json boxes = ordered_json::array();
    for (const auto& [f, b] : id.boxes) boxes.push_back({f, b.x, b.y, b.w, b.h});
    t["boxes"] = boxes;
    truth["identities"].push_back(t);
  }
  j["truth"] = truth;
  ordered_json dets = ordered_json::array();
  for (std::size_t f = 0; f < s.detections.size(); ++f) {
    ordered_json frame = ordered_json::array();
    for (std::size_t i = 0; i < s.detections[f].size(); ++i) {
      const auto& d = s.detections[f][i];
      ordered_json o;
      o["frame"] = d.frame;
      o["box"] = {d.box.x, d.box.y, d.box.w, d.box.h};
      o["score"] = d.score;
      o["label"] = s.labels[f][i];
      o["embedding"] = vec_json(d.embedding);
      frame.push_back(o);
    }
    dets.push_back(frame);
  }
  j["detections"] = dets;
  return j.dump(1) + '\n';
}

Scenario scenario_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    Scenario s;
    KeyValueFile kv;
    std::string cfg_text;
    for (const auto& [k, v] : j.at("config").items()) {
      if (k == "interruptions") {
        for (const auto& in : v) cfg_text += "interruption = " + in.get<std::string>() + '\n';
      } else {
        cfg_text += k + " = " + v.get<std::string>() + '\n';
      }
    }
    kv = KeyValueFile::parse(cfg_text);
    apply(kv, s.config);
    kv.require_all_used();
    s.light_bias = vec_from(j.at("light_bias"));
    s.truth.frames = j.at("truth").at("frames").get<int>();
    for (const auto& t : j.at("truth").at("identities")) {
      IdentityTruth id;
      id.id = t.at("id").get<int>();
      id.latent = vec_from(t.at("latent"));
      id.drift_axis = vec_from(t.at("drift_axis"));
      for (const auto& b : t.at("boxes")) {
        id.boxes[b.at(0).get<int>()] = BoundingBox::make(b.at(1).get<double>(), b.at(2).get<double>(),
                                                         b.at(3).get<double>(), b.at(4).get<double>());
      }
      s.truth.identities.push_back(std::move(id));
    }
    for (const auto& frame : j.at("detections")) {
      std::vector<Detection> dets;
      std::vector<int> labels;
      for (const auto& o : frame) {
        Detection d;
        d.frame = o.at("frame").get<int>();
        const auto& b = o.at("box");
        d.box = BoundingBox::make(b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                                  b.at(3).get<double>());
        d.score = o.at("score").get<double>();
        d.embedding = vec_from(o.at("embedding"));
        d.source_index = static_cast<int>(dets.size());
        labels.push_back(o.at("label").get<int>());
        dets.push_back(std::move(d));
      }
      s.detections.push_back(std::move(dets));
      s.labels.push_back(std::move(labels));
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("scenario json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("scenario json: ") + e.what());
  }
}

std::string loss_csv(const std::vector<double>& history) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) out += std::to_string(i + 1) + ',' + str(history[i]) + '\n';
  return out;
}

std::string manifest_json(const RunManifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["seed"] = m.seed;
  ordered_json cfgs = ordered_json::object();
  for (const auto& [name, kv] : m.configs) {
    ordered_json c = ordered_json::object();
    for (const auto& [k, v] : kv) {
      if (c.contains(k)) {
        if (!c[k].is_array()) c[k] = ordered_json::array({c[k]});
        c[k].push_back(v);
      } else {
        c[k] = v;
      }
    }
    cfgs[name] = c;
  }
  j["configs"] = cfgs;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  return j.dump(2) + '\n';
}

}  // namespace clipmot::io
