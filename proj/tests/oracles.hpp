#pragma once

// Slow reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "clipmot/core.hpp"
#include "clipmot/intra_clip.hpp"

namespace clipmot::oracle {

/// Exhaustive search over all partial matchings of allowed pairs. Returns the
/// column of each row (-1 unmatched) with the solver's objective and
/// lexicographic tie-break.
inline std::vector<int> brute_assignment(const Matrix& cost, double max_cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  const bool cardinality_first = std::isinf(max_cost);
  auto allowed = [&](int r, int c) { return std::isfinite(cost(r, c)) && cost(r, c) <= max_cost; };

  std::vector<std::pair<std::vector<int>, std::pair<int, double>>> all;
  std::vector<int> cur(rows, -1);
  std::vector<char> used(cols, 0);
  std::function<void(int, int, double)> rec = [&](int r, int card, double sum) {
    if (r == rows) {
      all.push_back({cur, {card, sum}});
      return;
    }
    for (int c = 0; c < cols; ++c) {
      if (used[c] || !allowed(r, c)) continue;
      used[c] = 1;
      cur[r] = c;
      rec(r + 1, card + 1, sum + (cardinality_first ? cost(r, c) : cost(r, c) - max_cost));
      used[c] = 0;
    }
    cur[r] = -1;
    rec(r + 1, card, sum);
  };
  rec(0, 0, 0.0);

  int best_card = 0;
  if (cardinality_first)
    for (const auto& a : all) best_card = std::max(best_card, a.second.first);
  double best = kInf;
  for (const auto& a : all)
    if (a.second.first == best_card || !cardinality_first) best = std::min(best, a.second.second);
  const double tol = 1e-9 * std::max(1.0, std::abs(best));

  std::vector<int> pick;
  auto key = [&](const std::vector<int>& v) {
    std::vector<int> k(v);
    for (int& x : k)
      if (x < 0) x = cols;
    return k;
  };
  for (const auto& a : all) {
    if (cardinality_first && a.second.first != best_card) continue;
    if (a.second.second > best + tol) continue;
    if (pick.empty() || key(a.first) < key(pick)) pick = a.first;
  }
  return pick;
}

/// Naive agglomerative single linkage; every step recomputes all cluster
/// distances from scratch. Returns clusters as sorted (frame, source_index)
/// sets ordered by their first element.
inline std::vector<std::vector<std::pair<int, int>>> naive_single_linkage(const Clip& clip,
                                                                          double threshold) {
  std::vector<const Detection*> dets;
  for (const auto& f : clip.detections_per_frame)
    for (const auto& d : f) dets.push_back(&d);
  const int n = static_cast<int>(dets.size());
  auto dist = [&](int i, int j) {
    if (dets[i]->frame == dets[j]->frame) return kInf;
    const Embedding& a = dets[i]->embedding;
    const Embedding& b = dets[j]->embedding;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      dot += a[k] * b[k];
      na += a[k] * a[k];
      nb += b[k] * b[k];
    }
    return 1.0 - dot / std::sqrt(na * nb);
  };
  std::vector<std::vector<int>> clusters(n);
  for (int i = 0; i < n; ++i) clusters[i] = {i};
  std::vector<char> alive(n, 1);
  for (;;) {
    double best = kInf;
    int ba = -1, bb = -1;
    for (int a = 0; a < n; ++a) {
      if (!alive[a]) continue;
      for (int b = a + 1; b < n; ++b) {
        if (!alive[b]) continue;
        bool overlap = false;
        double d = kInf;
        for (int i : clusters[a])
          for (int j : clusters[b]) {
            if (dets[i]->frame == dets[j]->frame) overlap = true;
            d = std::min(d, dist(i, j));
          }
        if (overlap || d > threshold) continue;
        if (d < best) {
          best = d;
          ba = a;
          bb = b;
        }
      }
    }
    if (ba < 0) break;
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    alive[bb] = 0;
  }
  std::vector<std::vector<std::pair<int, int>>> out;
  for (int a = 0; a < n; ++a) {
    if (!alive[a]) continue;
    std::vector<std::pair<int, int>> c;
    for (int i : clusters[a]) c.emplace_back(dets[i]->frame, dets[i]->source_index);
    std::sort(c.begin(), c.end());
    out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::vector<std::pair<int, int>>> as_sets(const std::vector<Tracklet>& ts) {
  std::vector<std::vector<std::pair<int, int>>> out;
  for (const auto& t : ts) {
    std::vector<std::pair<int, int>> c;
    for (const auto& d : t.entries) c.emplace_back(d.frame, d.source_index);
    std::sort(c.begin(), c.end());
    out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// IDF1 by trying every injective gt -> pred map. Box overlap of a pair of
/// identities counts frames where both exist with IoU >= gate.
inline double brute_idf1(const TrackSet& gt, const TrackSet& pred, double gate = 0.5) {
  std::vector<std::map<int, BoundingBox>> g, p;
  long ng = 0, np = 0;
  for (const auto& [id, boxes] : gt) {
    std::map<int, BoundingBox> m;
    for (const auto& b : boxes) m[b.frame] = b.box;
    ng += static_cast<long>(boxes.size());
    g.push_back(m);
  }
  for (const auto& [id, boxes] : pred) {
    std::map<int, BoundingBox> m;
    for (const auto& b : boxes) m[b.frame] = b.box;
    np += static_cast<long>(boxes.size());
    p.push_back(m);
  }
  std::vector<std::vector<long>> count(g.size(), std::vector<long>(p.size(), 0));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j)
      for (const auto& [f, b] : g[i]) {
        auto it = p[j].find(f);
        if (it != p[j].end() && iou(b, it->second) >= gate) ++count[i][j];
      }
  long best = 0;
  std::vector<char> used(p.size(), 0);
  std::function<void(std::size_t, long)> rec = [&](std::size_t i, long acc) {
    if (i == g.size()) {
      best = std::max(best, acc);
      return;
    }
    rec(i + 1, acc);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      rec(i + 1, acc + count[i][j]);
      used[j] = 0;
    }
  };
  rec(0, 0);
  if (ng + np == 0) return 0.0;
  return 2.0 * static_cast<double>(best) / static_cast<double>(ng + np);
}

}  // namespace clipmot::oracle
