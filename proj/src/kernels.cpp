#include "clipmot/kernels.hpp"

#include <stdexcept>

namespace clipmot::kernels {

namespace {

void check_dims(const std::vector<Embedding>& a, const std::vector<Embedding>& b) {
  if (a.empty() || b.empty()) return;
  const auto d = a.front().size();
  for (const auto& v : a) {
    if (v.size() != d) throw std::invalid_argument("embedding dimension mismatch");
  }
  for (const auto& v : b) {
    if (v.size() != d) throw std::invalid_argument("embedding dimension mismatch");
  }
}

double cosine_distance(const Embedding& x, const Embedding& y) {
  return 1.0 - cosine_similarity(x, y);
}

}  // namespace

Matrix dot_matrix_serial(const std::vector<Embedding>& a,
                         const std::vector<Embedding>& b) {
  check_dims(a, b);
  const long n = static_cast<long>(a.size());
  const long m = static_cast<long>(b.size());
  Matrix out(n, m);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) out(i, j) = a[i].dot(b[j]);
  return out;
}

Matrix dot_matrix_parallel(const std::vector<Embedding>& a,
                           const std::vector<Embedding>& b) {
  check_dims(a, b);
  const long n = static_cast<long>(a.size());
  const long m = static_cast<long>(b.size());
  Matrix out(n, m);
#pragma omp parallel for collapse(2) schedule(static)
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) out(i, j) = a[i].dot(b[j]);
  return out;
}

Matrix cosine_distance_matrix_serial(const std::vector<Embedding>& a,
                                     const std::vector<Embedding>& b) {
  check_dims(a, b);
  const long n = static_cast<long>(a.size());
  const long m = static_cast<long>(b.size());
  Matrix out(n, m);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) out(i, j) = cosine_distance(a[i], b[j]);
  return out;
}

Matrix cosine_distance_matrix_parallel(const std::vector<Embedding>& a,
                                       const std::vector<Embedding>& b) {
  check_dims(a, b);
  for (const auto& v : a)
    if (v.norm() == 0.0) throw std::invalid_argument("zero-norm embedding");
  for (const auto& v : b)
    if (v.norm() == 0.0) throw std::invalid_argument("zero-norm embedding");
  const long n = static_cast<long>(a.size());
  const long m = static_cast<long>(b.size());
  Matrix out(n, m);
#pragma omp parallel for collapse(2) schedule(static)
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) out(i, j) = cosine_distance(a[i], b[j]);
  return out;
}

Matrix dot_matrix(const std::vector<Embedding>& a, const std::vector<Embedding>& b) {
  const long entries = static_cast<long>(a.size() * b.size());
  return entries >= kParallelMinEntries ? dot_matrix_parallel(a, b)
                                        : dot_matrix_serial(a, b);
}

Matrix cosine_distance_matrix(const std::vector<Embedding>& a,
                              const std::vector<Embedding>& b) {
  const long entries = static_cast<long>(a.size() * b.size());
  return entries >= kParallelMinEntries ? cosine_distance_matrix_parallel(a, b)
                                        : cosine_distance_matrix_serial(a, b);
}

}  // namespace clipmot::kernels
