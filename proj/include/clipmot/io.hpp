#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clipmot/clip_training.hpp"
#include "clipmot/core.hpp"
#include "clipmot/pipeline.hpp"
#include "clipmot/scenario_sim.hpp"

namespace clipmot::io {

using Frames = std::vector<std::vector<Detection>>;

/// MOT detection lines `frame,id,left,top,width,height,conf[,x,y,z]`, frames
/// 1-based in the file and 0-based in the result. Source indices follow file
/// order within a frame. Errors name the line.
Frames parse_detections_text(const std::string& text);
Frames parse_detections(const std::filesystem::path& path);

/// Same layout with the id column kept. A repeated (id, frame) is an error.
TrackSet parse_tracks_text(const std::string& text);
TrackSet parse_tracks(const std::filesystem::path& path);

/// Sidecar lines `frame,det_index,v1,...,vD` (frame 1-based, det_index the
/// 0-based position of the detection within its frame in the detection
/// file). Fills every detection's embedding or throws DataError.
void attach_embeddings_text(const std::string& text, int dim, Frames& frames);
void attach_embeddings(const std::filesystem::path& path, int dim, Frames& frames);

std::string tracks_text(const TrackSet& tracks);
void write_tracks(const TrackSet& tracks, const std::filesystem::path& path);
std::string detections_text(const Frames& frames);
std::string embeddings_text(const Frames& frames);

/// Shortest round-tripping decimal form.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
/// Throws DataError when the file cannot be written.
void write_file(const std::filesystem::path& path, const std::string& text);

/// `key = value` lines; `#` starts a comment; keys may repeat.
class KeyValueFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
    bool used = false;
  };

  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::filesystem::path& path);

  /// Last value of a key, marking every occurrence used.
  const Entry* get(const std::string& key);
  std::vector<const Entry*> all(const std::string& key);
  /// Throws DataError naming the first key nobody consumed.
  void require_all_used() const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;
std::string key_values_text(const KeyValues& kv);

/// Overwrite fields named in the file. Values that do not parse or violate
/// the type are DataErrors naming the line.
void apply(KeyValueFile& file, PipelineConfig& cfg);
void apply(KeyValueFile& file, ScenarioConfig& cfg);
void apply(KeyValueFile& file, TrainConfig& cfg);
void apply(KeyValueFile& file, AugmentConfig& cfg);
void apply(KeyValueFile& file, ModelDims& dims);

KeyValues to_key_values(const PipelineConfig& cfg);
KeyValues to_key_values(const ScenarioConfig& cfg);
KeyValues to_key_values(const TrainConfig& cfg);
KeyValues to_key_values(const AugmentConfig& cfg);
KeyValues to_key_values(const ModelDims& dims);

/// Training-data keys of a train config file.
struct TrainDataConfig {
  int videos = 8;
  int proposals_per_frame = 2;
};
void apply(KeyValueFile& file, TrainDataConfig& cfg);
KeyValues to_key_values(const TrainDataConfig& cfg);

/// `clips = 10x5 6x3`, `intra = ...`, `inter = ...`, `management = ...`,
/// lists separated by spaces or commas. Missing axes default to the base
/// configuration's single value.
SweepGrid parse_grid(KeyValueFile& file, const PipelineConfig& base);

/// JSON layout: {"config": {...}, "light_bias": [...], "truth": {"frames",
/// "identities": [{"id", "latent", "drift_axis", "boxes": [[frame, x, y, w, h]]}]},
/// "detections": [[{"frame", "box", "score", "label", "embedding"}]]}.
std::string scenario_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

/// `epoch,loss` with a header line; epochs counted from 1.
std::string loss_csv(const std::vector<double>& history);

struct RunManifest {
  std::string command;
  std::map<std::string, KeyValues> configs;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  std::uint64_t seed = 0;
  std::string version;
};
std::string manifest_json(const RunManifest& m);

}  // namespace clipmot::io
