#pragma once

#include <vector>

#include "clipmot/core.hpp"

// Data-parallel matrix kernels. Every kernel has a serial reference and an
// OpenMP version; each output entry is computed independently by the same
// arithmetic, so both produce bit-identical results.
namespace clipmot::kernels {

Matrix dot_matrix_serial(const std::vector<Embedding>& a,
                         const std::vector<Embedding>& b);
Matrix dot_matrix_parallel(const std::vector<Embedding>& a,
                           const std::vector<Embedding>& b);

/// 1 - cosine similarity for every pair.
Matrix cosine_distance_matrix_serial(const std::vector<Embedding>& a,
                                     const std::vector<Embedding>& b);
Matrix cosine_distance_matrix_parallel(const std::vector<Embedding>& a,
                                       const std::vector<Embedding>& b);

/// Entry counts below this stay serial in the dispatching wrappers.
inline constexpr long kParallelMinEntries = 4096;

Matrix dot_matrix(const std::vector<Embedding>& a, const std::vector<Embedding>& b);
Matrix cosine_distance_matrix(const std::vector<Embedding>& a,
                              const std::vector<Embedding>& b);

}  // namespace clipmot::kernels
