#include "clipmot/core.hpp"

#include <algorithm>
#include <cmath>

#include "clipmot/kernels.hpp"

namespace clipmot {

BoundingBox BoundingBox::make(double x, double y, double w, double h) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) ||
      !std::isfinite(h)) {
    throw std::invalid_argument("bounding box coordinates must be finite");
  }
  if (w <= 0.0 || h <= 0.0) {
    throw std::invalid_argument("bounding box width and height must be positive");
  }
  return BoundingBox{x, y, w, h};
}

namespace {
template <typename Entries>
const Detection* find_frame(const Entries& entries, int frame) {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), frame,
      [](const Detection& d, int f) { return d.frame < f; });
  if (it == entries.end() || it->frame != frame) return nullptr;
  return &*it;
}
}  // namespace

const Detection* Tracklet::at_frame(int frame) const {
  return find_frame(entries, frame);
}

const Detection* GlobalTrack::at_frame(int frame) const {
  return find_frame(entries, frame);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("embedding dimension mismatch");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("zero-norm embedding");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Embedding l2_normalized(const Embedding& v) {
  const double n = v.norm();
  if (n == 0.0 || !std::isfinite(n)) {
    throw std::invalid_argument("cannot normalize zero-norm embedding");
  }
  return v / n;
}

Matrix bisoftmax_affinity(const std::vector<Embedding>& queries,
                          const std::vector<Embedding>& refs,
                          double temperature) {
  if (queries.empty() || refs.empty()) {
    throw std::invalid_argument("bisoftmax_affinity needs nonempty queries and refs");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  Matrix logits = kernels::dot_matrix(queries, refs) / temperature;
  const Eigen::Index rows = logits.rows();
  const Eigen::Index cols = logits.cols();

  Matrix row_soft(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double m = logits.row(i).maxCoeff();
    double s = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      row_soft(i, j) = std::exp(logits(i, j) - m);
      s += row_soft(i, j);
    }
    row_soft.row(i) /= s;
  }
  Matrix col_soft(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double m = logits.col(j).maxCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      col_soft(i, j) = std::exp(logits(i, j) - m);
      s += col_soft(i, j);
    }
    col_soft.col(j) /= s;
  }
  return 0.5 * (row_soft + col_soft);
}

}  // namespace clipmot
