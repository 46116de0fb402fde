#include <gtest/gtest.h>

#include "clipmot/inter_clip.hpp"
#include "test_util.hpp"

using namespace clipmot;
using tu::make_det;
using tu::unit;

namespace {

Tracklet tracklet(int id, std::vector<Detection> dets) {
  Tracklet t;
  t.local_id = id;
  t.entries = std::move(dets);
  t.start_frame = t.entries.front().frame;
  t.end_frame = t.entries.back().frame;
  return t;
}

Assignment unmatched(int rows, int cols) {
  Assignment a;
  for (int r = 0; r < rows; ++r) a.unmatched_rows.push_back(r);
  for (int c = 0; c < cols; ++c) a.unmatched_cols.push_back(c);
  return a;
}

BoundingBox box_at(double x) { return BoundingBox::make(x, 0, 10, 10); }

}  // namespace

TEST(Management, ParseAndPrint) {
  for (auto m : {Management::two_clip, Management::moving_average, Management::feature_bank})
    EXPECT_EQ(parse_management(to_string(m)), m);
  for (auto m : {Matcher::iou_chain, Matcher::temporal_average, Matcher::clip_tracker})
    EXPECT_EQ(parse_matcher(to_string(m)), m);
  EXPECT_THROW(parse_matcher("kalman"), std::invalid_argument);
}

TEST(Store, UnmatchedTrackletsOpenTracksFromOne) {
  GlobalTrackStore store(30, Management::feature_bank);
  std::vector<Tracklet> ts{tracklet(0, {make_det(0, 0, unit(2, 0))}),
                           tracklet(1, {make_det(0, 1, unit(2, 1))})};
  store.merge(unmatched(0, 2), ts);
  ASSERT_EQ(store.tracks().size(), 2u);
  EXPECT_EQ(store.tracks().begin()->first, 1);
  EXPECT_EQ(store.next_id(), 3);
  EXPECT_TRUE(store.claimed(0, 1));
}

TEST(Store, FirstWriteWinsOnOverlap) {
  GlobalTrackStore store(30, Management::feature_bank);
  store.merge(unmatched(0, 1), {tracklet(0, {make_det(0, 0, unit(2, 0)), make_det(1, 0, unit(2, 0))})});
  // The next clip revisits frame 1 with a different detection.
  Assignment a;
  a.pairs = {{0, 0}};
  store.merge(a, {tracklet(0, {make_det(1, 1, unit(2, 0)), make_det(2, 0, unit(2, 0))})});
  const GlobalTrack& t = store.tracks().at(1);
  ASSERT_EQ(t.entries.size(), 3u);
  EXPECT_EQ(t.entries[1].source_index, 0);
  EXPECT_EQ(t.entries[2].frame, 2);
  EXPECT_EQ(t.last_frame, 2);
}

TEST(Store, FeatureBankNeverExceedsBuffer) {
  for (int b : {10, 30}) {
    GlobalTrackStore store(b, Management::feature_bank);
    std::vector<Detection> dets;
    for (int f = 0; f < 25; ++f) dets.push_back(make_det(f, 0, unit(2, 0)));
    store.merge(unmatched(0, 1), {tracklet(0, dets)});
    for (int k = 1; k < 5; ++k) {
      std::vector<Detection> more;
      for (int f = 25 * k; f < 25 * (k + 1); ++f) more.push_back(make_det(f, 0, unit(2, 0)));
      Assignment a;
      a.pairs = {{0, 0}};
      store.merge(a, {tracklet(0, more)});
      const auto& t = store.tracks().at(1);
      EXPECT_LE(static_cast<int>(t.embedding_buffer.size()), b);
      EXPECT_EQ(t.embedding_buffer.back().frame, 25 * (k + 1) - 1);
    }
    EXPECT_EQ(history_representation(store.tracks().at(1), Management::feature_bank, 0.8).size(),
              static_cast<std::size_t>(b));
  }
}

TEST(History, MovingAverageTwoEmbeddings) {
  GlobalTrack t;
  Embedding x1(2), x2(2);
  x1 << 1, 0;
  x2 << 0, 1;
  t.entries = {make_det(0, 0, x1), make_det(1, 0, x2)};
  const auto m = history_representation(t, Management::moving_average, 0.8);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NEAR(m[0][0], 0.8, 1e-15);
  EXPECT_NEAR(m[0][1], 0.2, 1e-15);
}

TEST(History, TwoClipUsesLatestMerge) {
  GlobalTrackStore store(30, Management::two_clip);
  store.merge(unmatched(0, 1), {tracklet(0, {make_det(0, 0, unit(3, 0)), make_det(1, 0, unit(3, 0))})});
  Assignment a;
  a.pairs = {{0, 0}};
  store.merge(a, {tracklet(0, {make_det(1, 0, unit(3, 0)), make_det(2, 0, unit(3, 1))})});
  const auto rep = history_representation(store.tracks().at(1), Management::two_clip, 0.8);
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0], unit(3, 1));
}

TEST(Conflict, DifferentDetectionInSharedFrame) {
  GlobalTrack g;
  g.entries = {make_det(3, 0, unit(2, 0)), make_det(4, 0, unit(2, 0))};
  g.last_frame = 4;
  EXPECT_TRUE(conflicting(g, tracklet(0, {make_det(4, 1, unit(2, 0))})));
  EXPECT_FALSE(conflicting(g, tracklet(0, {make_det(4, 0, unit(2, 0)), make_det(5, 2, unit(2, 0))})));
  EXPECT_FALSE(conflicting(g, tracklet(0, {make_det(5, 1, unit(2, 0))})));
}

TEST(TemporalAverage, MatchesByMeanDirection) {
  GlobalTrackStore store(30, Management::feature_bank);
  store.merge(unmatched(0, 2), {tracklet(0, {make_det(0, 0, unit(2, 0))}),
                                tracklet(1, {make_det(0, 1, unit(2, 1))})});
  const std::vector<Tracklet> next{tracklet(0, {make_det(5, 0, unit(2, 1))}),
                                   tracklet(1, {make_det(5, 1, unit(2, 0))})};
  const auto a = match_temporal_average(store, next, 0.5);
  EXPECT_EQ(a.pairs, (std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}));
}

TEST(TemporalAverage, ThresholdRejectsDissimilar) {
  GlobalTrackStore store(30, Management::feature_bank);
  store.merge(unmatched(0, 1), {tracklet(0, {make_det(0, 0, unit(2, 0))})});
  Embedding e(2);
  e << 1, 1.1;  // cosine ~ 0.67
  EXPECT_EQ(match_temporal_average(store, {tracklet(0, {make_det(3, 0, e)})}, 0.5).pairs.size(), 1u);
  EXPECT_TRUE(match_temporal_average(store, {tracklet(0, {make_det(3, 0, e)})}, 0.7).pairs.empty());
}

TEST(IouChain, LinksThroughOverlapFrame) {
  GlobalTrackStore store(30, Management::feature_bank);
  store.merge(unmatched(0, 2),
              {tracklet(0, {make_det(0, 0, unit(2, 0), 0.9, box_at(0)), make_det(1, 0, unit(2, 0), 0.9, box_at(0))}),
               tracklet(1, {make_det(0, 1, unit(2, 0), 0.9, box_at(100)), make_det(1, 1, unit(2, 0), 0.9, box_at(100))})});
  const std::vector<Tracklet> next{
      tracklet(0, {make_det(1, 1, unit(2, 0), 0.9, box_at(100)), make_det(2, 0, unit(2, 0), 0.9, box_at(101))}),
      tracklet(1, {make_det(2, 1, unit(2, 0), 0.9, box_at(1))})};
  const auto a = match_iou_chain(store, next, {1}, 0.5);
  // The second tracklet is absent from the overlap frame and stays unmatched.
  EXPECT_EQ(a.pairs, (std::vector<std::pair<int, int>>{{1, 0}}));
  EXPECT_EQ(a.unmatched_cols, std::vector<int>{1});
  EXPECT_THROW(match_iou_chain(store, next, {}, 0.5), std::invalid_argument);
}

TEST(ClipTracker, RejectsDimensionMismatch) {
  GlobalTrackStore store(30, Management::feature_bank);
  store.merge(unmatched(0, 1), {tracklet(0, {make_det(0, 0, unit(3, 0))})});
  const auto w = SummarizerWeights::random(ModelDims{4, 8, 1, 2, 16}, 1);
  EXPECT_THROW(match_clip_tracker(store, {tracklet(0, {make_det(1, 0, unit(3, 0))})}, w, 0.5),
               std::invalid_argument);
}

TEST(ClipTracker, IdenticalHistoriesAreMatched) {
  GlobalTrackStore store(30, Management::feature_bank);
  store.merge(unmatched(0, 1), {tracklet(0, {make_det(0, 0, unit(4, 0)), make_det(1, 0, unit(4, 0))})});
  const auto w = SummarizerWeights::random(ModelDims{4, 8, 1, 2, 16}, 1);
  const auto a = match_clip_tracker(
      store, {tracklet(0, {make_det(5, 0, unit(4, 0)), make_det(6, 0, unit(4, 0))})}, w, 0.99);
  EXPECT_EQ(a.pairs.size(), 1u);
}
