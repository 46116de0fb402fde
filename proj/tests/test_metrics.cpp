#include <gtest/gtest.h>

#include <algorithm>

#include "clipmot/metrics.hpp"
#include "clipmot/rng.hpp"
#include "oracles.hpp"

using namespace clipmot;

namespace {

TrackSet straight_tracks(int ids, int frames) {
  TrackSet ts;
  for (int id = 1; id <= ids; ++id)
    for (int f = 0; f < frames; ++f)
      ts[id].push_back({f, BoundingBox{200.0 * id + f, 100.0, 50.0, 80.0}, 1.0});
  return ts;
}

}  // namespace

TEST(Metrics, PerfectPrediction) {
  const TrackSet gt = straight_tracks(3, 20);
  const EvalReport r = evaluate(gt, gt);
  EXPECT_EQ(r.idf1, 1.0);
  EXPECT_EQ(r.mota, 1.0);
  EXPECT_EQ(r.id_switches, 0);
  EXPECT_EQ(r.fragmentations, 0);
  EXPECT_EQ(r.idtp, 60);
}

TEST(Metrics, EmptyPrediction) {
  const TrackSet gt = straight_tracks(2, 10);
  const EvalReport r = evaluate(gt, {});
  EXPECT_EQ(r.idf1, 0.0);
  EXPECT_EQ(r.fn, 20);
  EXPECT_EQ(r.mota, 0.0);
  EXPECT_THROW(evaluate({}, gt), std::invalid_argument);
}

TEST(Metrics, SplitTrackHalvesIdf1) {
  const TrackSet gt = straight_tracks(1, 10);
  TrackSet pred;
  for (const auto& b : gt.at(1)) pred[b.frame < 5 ? 1 : 2].push_back(b);
  const EvalReport r = evaluate(gt, pred);
  EXPECT_DOUBLE_EQ(r.idf1, 0.5);
  EXPECT_EQ(r.id_switches, 1);
  EXPECT_EQ(r.idtp, 5);
  EXPECT_EQ(r.mota, 0.9);
}

TEST(Metrics, GapCountsFragmentation) {
  const TrackSet gt = straight_tracks(1, 10);
  TrackSet pred;
  for (const auto& b : gt.at(1))
    if (b.frame != 4) pred[7].push_back(b);
  const EvalReport r = evaluate(gt, pred);
  EXPECT_EQ(r.fragmentations, 1);
  EXPECT_EQ(r.id_switches, 0);
  EXPECT_EQ(r.fn, 1);
}

TEST(Metrics, FalsePositivesCanDriveRawMotaNegative) {
  const TrackSet gt = straight_tracks(1, 4);
  TrackSet pred;
  for (int k = 0; k < 3; ++k)
    for (int f = 0; f < 4; ++f) pred[10 + k].push_back({f, BoundingBox{5000.0 + 100 * k, 0, 10, 10}, 1});
  const EvalReport r = evaluate(gt, pred);
  EXPECT_LT(r.mota_raw, 0.0);
  EXPECT_EQ(r.mota, 0.0);
}

TEST(Metrics, InvariantToRelabeling) {
  Rng rng(3);
  const TrackSet gt = straight_tracks(4, 15);
  TrackSet pred;
  for (const auto& [id, boxes] : gt)
    for (const auto& b : boxes) pred[static_cast<int>(rng.below(5)) + 1].push_back(b);
  TrackSet relabeled;
  for (auto& [id, boxes] : pred) relabeled[1000 - 7 * id] = boxes;
  const EvalReport a = evaluate(gt, pred), b = evaluate(gt, relabeled);
  EXPECT_EQ(a.idf1, b.idf1);
  EXPECT_EQ(a.idtp, b.idtp);
  EXPECT_EQ(a.mota_raw, b.mota_raw);
}

TEST(Metrics, Idf1MatchesExhaustiveSearch) {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int ids = 1 + static_cast<int>(rng.below(4));
    TrackSet gt = straight_tracks(ids, 12);
    TrackSet pred;
    for (const auto& [id, boxes] : gt)
      for (const auto& b : boxes) {
        if (rng.bernoulli(0.1)) continue;
        TrackBox p = b;
        if (rng.bernoulli(0.1)) p.box.x += 40.0;  // pushes IoU below the gate
        pred[static_cast<int>(rng.below(ids + 2)) + 1].push_back(p);
      }
    for (auto& [id, boxes] : pred) {
      std::sort(boxes.begin(), boxes.end(), [](auto& a, auto& b) { return a.frame < b.frame; });
      boxes.erase(std::unique(boxes.begin(), boxes.end(),
                              [](auto& a, auto& b) { return a.frame == b.frame; }),
                  boxes.end());
    }
    EXPECT_NEAR(evaluate(gt, pred).idf1, oracle::brute_idf1(gt, pred), 1e-12) << trial;
  }
}

TEST(Metrics, ReportFormats) {
  const TrackSet gt = straight_tracks(1, 3);
  const EvalReport r = evaluate(gt, gt);
  EXPECT_NE(report_json(r).find("\"idf1\""), std::string::npos);
  EXPECT_NE(report_text(r).find("idf1"), std::string::npos);
}
