#include "clipmot/cli.hpp"

#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "clipmot/io.hpp"
#include "clipmot/metrics.hpp"
#include "clipmot/pipeline.hpp"
#include "clipmot/scenario_sim.hpp"

namespace clipmot {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int embedding_dim_of(const std::string& path) {
  const std::string text = io::read_file(path);
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return static_cast<int>(std::count(line.begin(), line.end(), ',')) - 1;
  }
  return 0;
}

Video load_video(const std::string& dets, const std::string& embs, int dim) {
  io::Frames frames = io::parse_detections(dets);
  if (dim <= 0) dim = embedding_dim_of(embs);
  if (!frames.empty() || dim > 0) io::attach_embeddings(embs, dim, frames);
  Video v;
  v.frames = static_cast<int>(frames.size());
  v.detections = std::move(frames);
  return v;
}

Video video_of(const Scenario& s) {
  Video v;
  v.frames = s.truth.frames;
  v.detections = s.detections;
  return v;
}

PipelineConfig load_pipeline(const std::string& path) {
  PipelineConfig cfg;
  if (path.empty()) return cfg;
  auto kv = io::KeyValueFile::load(path);
  apply(kv, cfg);
  kv.require_all_used();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg;
  auto kv = io::KeyValueFile::load(path);
  apply(kv, cfg);
  kv.require_all_used();
  if (seed) cfg.seed = *seed;
  return cfg;
}

std::optional<SummarizerWeights> load_weights(const PipelineConfig& cfg) {
  if (cfg.weights_path.empty()) {
    if (cfg.inter == Matcher::clip_tracker) {
      throw UsageError("clip_tracker matching needs --weights or a 'weights' config key");
    }
    return std::nullopt;
  }
  return SummarizerWeights::load(cfg.weights_path);
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clip-wise multi-object tracking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::optional<std::uint64_t> seed;
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "Random seed"); };

  std::string dets, embs, config, out_path, weights, gt, pred, report, grid, table, scenario_cfg,
      train_cfg, loss_path, out_dir;
  int dim = 0;

  auto* track = app.add_subcommand("track", "Track detections with precomputed embeddings");
  track->add_option("--dets", dets, "MOT detection file")->required();
  track->add_option("--embs", embs, "Embedding sidecar CSV")->required();
  track->add_option("--config", config, "Pipeline config file")->required();
  track->add_option("--out", out_path, "Output track file")->required();
  track->add_option("--weights", weights, "Summarizer weights");
  track->add_option("--dim", dim, "Embedding dimension (default: from the sidecar)");
  add_seed(track);

  auto* trn = app.add_subcommand("train", "Train the track-history summarizer");
  trn->add_option("--scenario-config", scenario_cfg, "Scenario config for training videos")->required();
  trn->add_option("--train-config", train_cfg, "Training config file")->required();
  trn->add_option("--out-weights", out_path, "Output weights file")->required();
  trn->add_option("--loss-csv", loss_path, "Per-epoch loss CSV");
  add_seed(trn);

  auto* ev = app.add_subcommand("eval", "Evaluate predicted tracks against ground truth");
  ev->add_option("--gt", gt, "Ground-truth track file")->required();
  ev->add_option("--pred", pred, "Predicted track file")->required();
  ev->add_option("--report", report, "Output JSON report")->required();
  add_seed(ev);

  auto* sw = app.add_subcommand("sweep", "Run a grid of pipeline variants");
  sw->add_option("--grid", grid, "Grid file")->required();
  sw->add_option("--out-table", table, "Output CSV table")->required();
  sw->add_option("--scenario-config", scenario_cfg, "Scenario config to generate data");
  sw->add_option("--gt", gt, "Ground-truth track file");
  sw->add_option("--dets", dets, "MOT detection file");
  sw->add_option("--embs", embs, "Embedding sidecar CSV");
  sw->add_option("--config", config, "Base pipeline config file");
  sw->add_option("--weights", weights, "Summarizer weights");
  add_seed(sw);

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic scenario");
  sim->add_option("--config", scenario_cfg, "Scenario config file")->required();
  sim->add_option("--out-dir", out_dir, "Output directory")->required();
  add_seed(sim);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  try {
    io::RunManifest m;
    m.version = kVersion;
    m.seed = seed.value_or(0);

    if (*track) {
      PipelineConfig cfg = load_pipeline(config);
      if (!weights.empty()) cfg.weights_path = weights;
      cfg.validate();
      const auto w = load_weights(cfg);
      const Video video = load_video(dets, embs, dim);
      const PipelineResult res = run(video, cfg, w ? &*w : nullptr);
      io::write_tracks(to_track_set(res.tracks), out_path);
      m.command = "track";
      m.configs["pipeline"] = io::to_key_values(cfg);
      m.inputs = {{"dets", dets}, {"embs", embs}, {"config", config}};
      if (!cfg.weights_path.empty()) m.inputs["weights"] = cfg.weights_path;
      m.outputs = {{"tracks", out_path}};
      io::write_file(manifest_path(out_path), io::manifest_json(m));
      out << "wrote " << res.tracks.size() << " tracks over " << video.frames << " frames to "
          << out_path << '\n';
    } else if (*trn) {
      const ScenarioConfig scfg = load_scenario(scenario_cfg, seed);
      auto kv = io::KeyValueFile::load(train_cfg);
      TrainConfig tcfg;
      AugmentConfig aug;
      ModelDims dims;
      io::TrainDataConfig data_cfg;
      apply(kv, tcfg);
      apply(kv, aug);
      apply(kv, dims);
      apply(kv, data_cfg);
      kv.require_all_used();
      if (seed) tcfg.seed = *seed;
      dims.input_dim = scfg.embedding_dim;
      tcfg.validate();
      aug.validate();
      const TrainingData data = TrainingData::synthesize(scfg, data_cfg.videos, aug,
                                                         data_cfg.proposals_per_frame, tcfg.seed);
      const TrainResult res = train(data, dims, tcfg.seed, tcfg);
      res.weights.save(out_path);
      m.command = "train";
      m.seed = tcfg.seed;
      m.configs["scenario"] = io::to_key_values(scfg);
      m.configs["train"] = io::to_key_values(tcfg);
      m.configs["augment"] = io::to_key_values(aug);
      m.configs["model"] = io::to_key_values(dims);
      m.configs["data"] = io::to_key_values(data_cfg);
      m.inputs = {{"scenario_config", scenario_cfg}, {"train_config", train_cfg}};
      m.outputs = {{"weights", out_path}};
      if (!loss_path.empty()) {
        io::write_file(loss_path, io::loss_csv(res.loss_history));
        m.outputs["loss_csv"] = loss_path;
      }
      io::write_file(manifest_path(out_path), io::manifest_json(m));
      out << "final loss " << io::format_double(res.loss_history.empty() ? 0.0 : res.loss_history.back())
          << " after " << res.loss_history.size() << " epochs; weights written to " << out_path << '\n';
    } else if (*ev) {
      const TrackSet g = io::parse_tracks(gt);
      const TrackSet p = io::parse_tracks(pred);
      const EvalReport r = evaluate(g, p);
      io::write_file(report, report_json(r));
      m.command = "eval";
      m.inputs = {{"gt", gt}, {"pred", pred}};
      m.outputs = {{"report", report}};
      io::write_file(manifest_path(report), io::manifest_json(m));
      out << report_text(r);
    } else if (*sw) {
      PipelineConfig base = load_pipeline(config);
      if (!weights.empty()) base.weights_path = weights;
      auto gkv = io::KeyValueFile::load(grid);
      const SweepGrid g = io::parse_grid(gkv, base);
      Video video;
      TrackSet truth;
      m.inputs = {{"grid", grid}};
      if (!config.empty()) m.inputs["config"] = config;
      if (!scenario_cfg.empty()) {
        if (!gt.empty() || !dets.empty() || !embs.empty()) {
          throw UsageError("use either --scenario-config or --gt/--dets/--embs");
        }
        const ScenarioConfig scfg = load_scenario(scenario_cfg, seed);
        const Scenario s = generate(scfg);
        video = video_of(s);
        truth = truth_tracks(s.truth);
        m.seed = scfg.seed;
        m.configs["scenario"] = io::to_key_values(scfg);
        m.inputs["scenario_config"] = scenario_cfg;
      } else {
        if (gt.empty() || dets.empty() || embs.empty()) {
          throw UsageError("sweep needs --scenario-config or all of --gt, --dets, --embs");
        }
        video = load_video(dets, embs, 0);
        truth = io::parse_tracks(gt);
        m.inputs["gt"] = gt;
        m.inputs["dets"] = dets;
        m.inputs["embs"] = embs;
      }
      std::optional<SummarizerWeights> w;
      if (!base.weights_path.empty()) {
        w = SummarizerWeights::load(base.weights_path);
        m.inputs["weights"] = base.weights_path;
      }
      const auto rows = sweep(video, truth, g, base, w ? &*w : nullptr);
      io::write_file(table, sweep_csv(rows));
      m.command = "sweep";
      m.configs["pipeline"] = io::to_key_values(base);
      m.outputs = {{"table", table}};
      io::write_file(manifest_path(table), io::manifest_json(m));
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.report ? 0 : 1;
      out << rows.size() << " cells, " << failed << " failed; table written to " << table << '\n';
    } else if (*sim) {
      const ScenarioConfig scfg = load_scenario(scenario_cfg, seed);
      const Scenario s = generate(scfg);
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      io::write_file(dir / "scenario.json", io::scenario_json(s));
      io::write_file(dir / "det.txt", io::detections_text(s.detections));
      io::write_file(dir / "emb.txt", io::embeddings_text(s.detections));
      io::write_tracks(truth_tracks(s.truth), dir / "gt.txt");
      m.command = "simulate";
      m.seed = scfg.seed;
      m.configs["scenario"] = io::to_key_values(scfg);
      m.inputs = {{"config", scenario_cfg}};
      m.outputs = {{"scenario", (dir / "scenario.json").string()},
                   {"dets", (dir / "det.txt").string()},
                   {"embs", (dir / "emb.txt").string()},
                   {"gt", (dir / "gt.txt").string()}};
      io::write_file(dir / "manifest.json", io::manifest_json(m));
      out << "simulated " << scfg.frames << " frames, " << s.detection_count() << " detections into "
          << out_dir << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace clipmot
