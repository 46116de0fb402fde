#pragma once

#include <cmath>
#include <vector>

#include "clipmot/core.hpp"
#include "clipmot/rng.hpp"

namespace clipmot::tu {

inline Embedding random_vector(Rng& rng, int dim) {
  Embedding v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v;
}

inline Embedding unit(int dim, int axis) {
  Embedding v = Embedding::Zero(dim);
  v[axis] = 1.0;
  return v;
}

inline Detection make_det(int frame, int source, const Embedding& e, double score = 0.9,
                          BoundingBox box = {0.0, 0.0, 10.0, 10.0}) {
  Detection d;
  d.frame = frame;
  d.box = box;
  d.score = score;
  d.embedding = e;
  d.source_index = source;
  return d;
}

}  // namespace clipmot::tu
