#include "clipmot/clip_transformer.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <numbers>

#include "clipmot/rng.hpp"

namespace clipmot {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using CMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;

ParamLayout::ParamLayout(const ModelDims& d) {
  if (d.input_dim <= 0 || d.model_dim <= 0 || d.layers < 0 || d.heads <= 0 ||
      d.ff_dim <= 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (d.model_dim % d.heads != 0) {
    throw std::invalid_argument("model_dim must be divisible by heads");
  }
  const std::size_t m = d.model_dim, in = d.input_dim, ff = d.ff_dim;
  std::size_t off = 0;
  auto take = [&off](std::size_t n) {
    const std::size_t at = off;
    off += n;
    return at;
  };
  input_w = take(m * in);
  input_b = take(m);
  token = take(m);
  for (int l = 0; l < d.layers; ++l) {
    Layer L{};
    L.ln1_g = take(m);
    L.ln1_b = take(m);
    L.wq = take(m * m);
    L.bq = take(m);
    L.wk = take(m * m);
    L.bk = take(m);
    L.wv = take(m * m);
    L.bv = take(m);
    L.wo = take(m * m);
    L.bo = take(m);
    L.ln2_g = take(m);
    L.ln2_b = take(m);
    L.ff1_w = take(ff * m);
    L.ff1_b = take(ff);
    L.ff2_w = take(m * ff);
    L.ff2_b = take(m);
    layers.push_back(L);
  }
  head1_w = take(m * m);
  head1_b = take(m);
  head2_w = take(m * m);
  head2_b = take(m);
  total = off;
}

SummarizerWeights::SummarizerWeights(const ModelDims& dims)
    : dims_(dims), layout_(dims), params_(layout_.total, 0.0) {
  for (const auto& L : layout_.layers) {
    std::fill_n(params_.begin() + L.ln1_g, dims.model_dim, 1.0);
    std::fill_n(params_.begin() + L.ln2_g, dims.model_dim, 1.0);
  }
}

SummarizerWeights SummarizerWeights::random(const ModelDims& dims, std::uint64_t seed) {
  SummarizerWeights w(dims);
  Rng rng(seed, 0x5EED);
  auto& p = w.params_;
  auto fill = [&](std::size_t at, int out, int in) {
    const double a = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < out * in; ++i) p[at + i] = rng.uniform(-a, a);
  };
  const int m = dims.model_dim;
  fill(w.layout_.input_w, m, dims.input_dim);
  for (int i = 0; i < m; ++i) p[w.layout_.token + i] = 0.1 * rng.normal();
  for (const auto& L : w.layout_.layers) {
    fill(L.wq, m, m);
    fill(L.wk, m, m);
    fill(L.wv, m, m);
    fill(L.wo, m, m);
    fill(L.ff1_w, dims.ff_dim, m);
    fill(L.ff2_w, m, dims.ff_dim);
  }
  fill(w.layout_.head1_w, m, m);
  fill(w.layout_.head2_w, m, m);
  return w;
}

namespace {

constexpr char kMagic[8] = {'C', 'L', 'I', 'P', 'T', 'R', 'K', 'W'};

template <typename T>
void put_le(std::ostream& os, T v) {
  std::array<unsigned char, sizeof(T)> b{};
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    static_assert(sizeof(T) == 8);
    std::memcpy(&bits, &v, 8);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), sizeof(T))) {
    throw DataError("weights file truncated");
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  if constexpr (std::is_floating_point_v<T>) {
    T v;
    std::memcpy(&v, &bits, 8);
    return v;
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void SummarizerWeights::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open weights file for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, kFormatVersion);
  put_le<std::uint32_t>(os, dims_.input_dim);
  put_le<std::uint32_t>(os, dims_.model_dim);
  put_le<std::uint32_t>(os, dims_.layers);
  put_le<std::uint32_t>(os, dims_.heads);
  put_le<std::uint32_t>(os, dims_.ff_dim);
  put_le<std::uint64_t>(os, params_.size());
  for (double v : params_) put_le<double>(os, v);
  if (!os) throw DataError("failed writing weights file: " + path.string());
}

SummarizerWeights SummarizerWeights::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open weights file: " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError("not a summarizer weights file: " + path.string());
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kFormatVersion) {
    throw DataError("unsupported weights format version " + std::to_string(version));
  }
  ModelDims d;
  d.input_dim = static_cast<int>(get_le<std::uint32_t>(is));
  d.model_dim = static_cast<int>(get_le<std::uint32_t>(is));
  d.layers = static_cast<int>(get_le<std::uint32_t>(is));
  d.heads = static_cast<int>(get_le<std::uint32_t>(is));
  d.ff_dim = static_cast<int>(get_le<std::uint32_t>(is));
  SummarizerWeights w(d);
  const auto count = get_le<std::uint64_t>(is);
  if (count != w.params_.size()) throw DataError("weights parameter count mismatch");
  for (auto& v : w.params_) {
    v = get_le<double>(is);
    if (!std::isfinite(v)) throw DataError("non-finite parameter in weights file");
  }
  return w;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

constexpr double kLnEps = 1e-5;
const double kGeluK = std::sqrt(2.0 / std::numbers::pi);

double gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluK * (x + 0.044715 * x * x * x)));
}
double gelu_grad(double x) {
  const double t = std::tanh(kGeluK * (x + 0.044715 * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluK * (1.0 + 3.0 * 0.044715 * x * x);
}

struct NormCache {
  Matrix xhat;
  Eigen::VectorXd rstd;
};

Matrix layer_norm(const Matrix& x, const CVecMap& g, const CVecMap& b, NormCache& c) {
  const Eigen::Index n = x.rows(), d = x.cols();
  c.xhat.resize(n, d);
  c.rstd.resize(n);
  Matrix y(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().mean();
    const double r = 1.0 / std::sqrt(var + kLnEps);
    c.rstd(i) = r;
    c.xhat.row(i) = (x.row(i).array() - mu) * r;
    y.row(i) = (c.xhat.row(i).array() * g.transpose().array() + b.transpose().array()).matrix();
  }
  return y;
}

// Returns dx; accumulates gain/bias gradients.
Matrix layer_norm_back(const Matrix& dy, const NormCache& c, const CVecMap& g, VecMap dg,
                       VecMap db) {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  Matrix dx(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    dg += (dy.row(i).array() * c.xhat.row(i).array()).matrix().transpose();
    db += dy.row(i).transpose();
    const Eigen::RowVectorXd dxhat = (dy.row(i).array() * g.transpose().array()).matrix();
    const double m1 = dxhat.mean();
    const double m2 = (dxhat.array() * c.xhat.row(i).array()).mean();
    dx.row(i) = c.rstd(i) * (dxhat.array() - m1 - c.xhat.row(i).array() * m2).matrix();
  }
  return dx;
}

struct LayerCache {
  Matrix x_in, n1, q, k, v, o, x_mid, n2, pre, act;
  NormCache ln1, ln2;
  std::vector<Matrix> attn;  // per head, n x n
};

struct ForwardCache {
  Matrix inputs;  // L x input_dim (canonical order)
  std::vector<LayerCache> layers;
  Eigen::VectorXd token_out, head_pre, head_act, y;
};

struct ParamView {
  const std::vector<double>& p;
  CMatMap mat(std::size_t at, int r, int c) const { return CMatMap(p.data() + at, r, c); }
  CVecMap vec(std::size_t at, int n) const { return CVecMap(p.data() + at, n); }
};

struct GradView {
  std::vector<double>& p;
  MatMap mat(std::size_t at, int r, int c) const { return MatMap(p.data() + at, r, c); }
  VecMap vec(std::size_t at, int n) const { return VecMap(p.data() + at, n); }
};

Matrix linear(const Matrix& x, const CMatMap& w, const CVecMap& b) {
  Matrix y = x * w.transpose();
  y.rowwise() += b.transpose();
  return y;
}

Matrix stack_inputs(const std::vector<Embedding>& track, int dim, bool canonical) {
  if (track.empty()) throw std::invalid_argument("track must have at least one element");
  std::vector<const Embedding*> order;
  order.reserve(track.size());
  for (const auto& e : track) {
    if (e.size() != dim) throw std::invalid_argument("track element dimension mismatch");
    order.push_back(&e);
  }
  if (canonical) {
    std::stable_sort(order.begin(), order.end(), [](const Embedding* a, const Embedding* b) {
      return std::lexicographical_compare(a->data(), a->data() + a->size(), b->data(),
                                          b->data() + b->size());
    });
  }
  Matrix u(static_cast<Eigen::Index>(track.size()), dim);
  for (std::size_t i = 0; i < order.size(); ++i) u.row(i) = order[i]->transpose();
  return u;
}

void forward(const SummarizerWeights& w, const std::vector<Embedding>& track, bool canonical,
             ForwardCache& c) {
  const ModelDims& d = w.dims();
  const ParamLayout& lay = w.layout();
  const ParamView pv{w.params()};
  const int m = d.model_dim, heads = d.heads, dh = m / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  c.inputs = stack_inputs(track, d.input_dim, canonical);
  const Eigen::Index n = c.inputs.rows() + 1;
  Matrix x(n, m);
  x.row(0) = pv.vec(lay.token, m).transpose();
  x.bottomRows(n - 1) = linear(c.inputs, pv.mat(lay.input_w, m, d.input_dim), pv.vec(lay.input_b, m));

  c.layers.resize(lay.layers.size());
  for (std::size_t l = 0; l < lay.layers.size(); ++l) {
    const auto& L = lay.layers[l];
    LayerCache& lc = c.layers[l];
    lc.x_in = x;
    lc.n1 = layer_norm(x, pv.vec(L.ln1_g, m), pv.vec(L.ln1_b, m), lc.ln1);
    lc.q = linear(lc.n1, pv.mat(L.wq, m, m), pv.vec(L.bq, m));
    lc.k = linear(lc.n1, pv.mat(L.wk, m, m), pv.vec(L.bk, m));
    lc.v = linear(lc.n1, pv.mat(L.wv, m, m), pv.vec(L.bv, m));
    lc.o.resize(n, m);
    lc.attn.resize(heads);
    for (int h = 0; h < heads; ++h) {
      Matrix s = lc.q.middleCols(h * dh, dh) * lc.k.middleCols(h * dh, dh).transpose() * scale;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - mx).exp().matrix();
        s.row(i) /= s.row(i).sum();
      }
      lc.o.middleCols(h * dh, dh) = s * lc.v.middleCols(h * dh, dh);
      lc.attn[h] = std::move(s);
    }
    lc.x_mid = x + linear(lc.o, pv.mat(L.wo, m, m), pv.vec(L.bo, m));
    lc.n2 = layer_norm(lc.x_mid, pv.vec(L.ln2_g, m), pv.vec(L.ln2_b, m), lc.ln2);
    lc.pre = linear(lc.n2, pv.mat(L.ff1_w, d.ff_dim, m), pv.vec(L.ff1_b, d.ff_dim));
    lc.act = lc.pre.unaryExpr([](double v) { return gelu(v); });
    x = lc.x_mid + linear(lc.act, pv.mat(L.ff2_w, m, d.ff_dim), pv.vec(L.ff2_b, m));
  }
  c.token_out = x.row(0).transpose();
  c.head_pre = pv.mat(lay.head1_w, m, m) * c.token_out + pv.vec(lay.head1_b, m);
  c.head_act = c.head_pre.unaryExpr([](double v) { return gelu(v); });
  c.y = pv.mat(lay.head2_w, m, m) * c.head_act + pv.vec(lay.head2_b, m);
}

// Accumulates d(loss)/d(params) into grad given d(loss)/d(y).
void backward(const SummarizerWeights& w, const ForwardCache& c, const Eigen::VectorXd& dy,
              std::vector<double>& grad) {
  const ModelDims& d = w.dims();
  const ParamLayout& lay = w.layout();
  const ParamView pv{w.params()};
  const GradView gv{grad};
  const int m = d.model_dim, heads = d.heads, dh = m / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  gv.mat(lay.head2_w, m, m) += dy * c.head_act.transpose();
  gv.vec(lay.head2_b, m) += dy;
  Eigen::VectorXd dh_act = pv.mat(lay.head2_w, m, m).transpose() * dy;
  Eigen::VectorXd dh_pre =
      dh_act.array() * c.head_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
  gv.mat(lay.head1_w, m, m) += dh_pre * c.token_out.transpose();
  gv.vec(lay.head1_b, m) += dh_pre;

  const Eigen::Index n = c.inputs.rows() + 1;
  Matrix dx = Matrix::Zero(n, m);
  dx.row(0) = (pv.mat(lay.head1_w, m, m).transpose() * dh_pre).transpose();

  for (std::size_t li = lay.layers.size(); li-- > 0;) {
    const auto& L = lay.layers[li];
    const LayerCache& lc = c.layers[li];
    // x_out = x_mid + ff(ln2(x_mid))
    const Matrix& dff = dx;
    gv.mat(L.ff2_w, m, d.ff_dim) += dff.transpose() * lc.act;
    gv.vec(L.ff2_b, m) += dff.colwise().sum().transpose();
    Matrix dact = dff * pv.mat(L.ff2_w, m, d.ff_dim);
    Matrix dpre = dact.array() * lc.pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
    gv.mat(L.ff1_w, d.ff_dim, m) += dpre.transpose() * lc.n2;
    gv.vec(L.ff1_b, d.ff_dim) += dpre.colwise().sum().transpose();
    Matrix dn2 = dpre * pv.mat(L.ff1_w, d.ff_dim, m);
    Matrix dx_mid = dx + layer_norm_back(dn2, lc.ln2, pv.vec(L.ln2_g, m), gv.vec(L.ln2_g, m),
                                         gv.vec(L.ln2_b, m));
    // x_mid = x_in + attn(ln1(x_in))
    gv.mat(L.wo, m, m) += dx_mid.transpose() * lc.o;
    gv.vec(L.bo, m) += dx_mid.colwise().sum().transpose();
    Matrix d_o = dx_mid * pv.mat(L.wo, m, m);
    Matrix dq(n, m), dk(n, m), dv(n, m);
    for (int h = 0; h < heads; ++h) {
      const Matrix& a = lc.attn[h];
      const auto doh = d_o.middleCols(h * dh, dh);
      Matrix da = doh * lc.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh) = a.transpose() * doh;
      Matrix ds(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double dot = (da.row(i).array() * a.row(i).array()).sum();
        ds.row(i) = (a.row(i).array() * (da.row(i).array() - dot)).matrix();
      }
      dq.middleCols(h * dh, dh) = ds * lc.k.middleCols(h * dh, dh) * scale;
      dk.middleCols(h * dh, dh) = ds.transpose() * lc.q.middleCols(h * dh, dh) * scale;
    }
    gv.mat(L.wq, m, m) += dq.transpose() * lc.n1;
    gv.vec(L.bq, m) += dq.colwise().sum().transpose();
    gv.mat(L.wk, m, m) += dk.transpose() * lc.n1;
    gv.vec(L.bk, m) += dk.colwise().sum().transpose();
    gv.mat(L.wv, m, m) += dv.transpose() * lc.n1;
    gv.vec(L.bv, m) += dv.colwise().sum().transpose();
    Matrix dn1 = dq * pv.mat(L.wq, m, m) + dk * pv.mat(L.wk, m, m) + dv * pv.mat(L.wv, m, m);
    dx = dx_mid + layer_norm_back(dn1, lc.ln1, pv.vec(L.ln1_g, m), gv.vec(L.ln1_g, m),
                                  gv.vec(L.ln1_b, m));
  }

  gv.vec(lay.token, m) += dx.row(0).transpose();
  const auto dp = dx.bottomRows(n - 1);
  gv.mat(lay.input_w, m, d.input_dim) += dp.transpose() * c.inputs;
  gv.vec(lay.input_b, m) += dp.colwise().sum().transpose();
}

struct AnchorSets {
  std::vector<std::vector<int>> positives;
  std::vector<std::vector<int>> negatives;
};

AnchorSets anchor_sets(const std::vector<TrainSample>& batch) {
  AnchorSets s;
  const std::size_t n = batch.size();
  s.positives.resize(n);
  s.negatives.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool same = batch[i].video == batch[j].video && batch[i].identity == batch[j].identity;
      (same ? s.positives[i] : s.negatives[i]).push_back(static_cast<int>(j));
    }
  }
  return s;
}

// Loss and d loss / d z for the normalized summaries z.
double summaries_loss(const std::vector<Embedding>& z, const AnchorSets& sets,
                      std::vector<Embedding>* dz, int& anchors) {
  const std::size_t n = z.size();
  if (dz) {
    dz->assign(n, Embedding::Zero(z.front().size()));
  }
  double total = 0.0;
  anchors = 0;
  std::vector<Embedding> pos, neg;
  for (std::size_t i = 0; i < n; ++i) {
    if (sets.positives[i].empty()) continue;
    ++anchors;
    pos.clear();
    neg.clear();
    for (int j : sets.positives[i]) pos.push_back(z[j]);
    for (int j : sets.negatives[i]) neg.push_back(z[j]);
    if (dz) {
      ContrastiveGrad g = contrastive_loss_grad(z[i], pos, neg);
      total += g.loss;
      (*dz)[i] += g.d_anchor;
      for (std::size_t k = 0; k < pos.size(); ++k) (*dz)[sets.positives[i][k]] += g.d_positives[k];
      for (std::size_t k = 0; k < neg.size(); ++k) (*dz)[sets.negatives[i][k]] += g.d_negatives[k];
    } else {
      total += contrastive_loss(z[i], pos, neg);
    }
  }
  if (anchors == 0) throw std::invalid_argument("no anchor in the batch has a positive");
  if (dz) {
    for (auto& v : *dz) v /= anchors;
  }
  return total / anchors;
}

Embedding normalize_or_throw(const Embedding& y) {
  const double nrm = y.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw std::runtime_error("degenerate summary norm");
  return y / nrm;
}

// Shared body of the gradient kernels; `parallel` selects OpenMP.
GradientResult gradient_impl(const SummarizerWeights& w, const std::vector<TrainSample>& batch,
                             bool parallel, bool deterministic) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  for (const auto& s : batch) {
    if (s.elements.empty()) throw std::invalid_argument("training sample has no elements");
    for (const auto& e : s.elements)
      if (e.size() != w.dims().input_dim)
        throw std::invalid_argument("training sample dimension mismatch");
  }
  const long n = static_cast<long>(batch.size());
  std::vector<ForwardCache> caches(n);
  std::vector<Embedding> z(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      forward(w, batch[i].elements, true, caches[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (long i = 0; i < n; ++i) z[i] = normalize_or_throw(caches[i].y);

  const AnchorSets sets = anchor_sets(batch);
  GradientResult res;
  std::vector<Embedding> dz;
  res.loss = summaries_loss(z, sets, &dz, res.anchors);
  res.grad.assign(w.params().size(), 0.0);

  auto dy_of = [&](long i) -> Eigen::VectorXd {
    const double nrm = caches[i].y.norm();
    return (dz[i] - z[i] * z[i].dot(dz[i])) / nrm;
  };

  if (!parallel) {
    for (long i = 0; i < n; ++i) backward(w, caches[i], dy_of(i), res.grad);
    return res;
  }
  if (deterministic) {
    // Per-sample gradients, then a reduction in sample order.
    std::vector<std::vector<double>> per(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
      per[i].assign(w.params().size(), 0.0);
      backward(w, caches[i], dy_of(i), per[i]);
    }
    for (long i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < res.grad.size(); ++k) res.grad[k] += per[i][k];
    }
    return res;
  }
#pragma omp parallel
  {
    std::vector<double> local(w.params().size(), 0.0);
#pragma omp for schedule(dynamic) nowait
    for (long i = 0; i < n; ++i) backward(w, caches[i], dy_of(i), local);
#pragma omp critical
    for (std::size_t k = 0; k < res.grad.size(); ++k) res.grad[k] += local[k];
  }
  return res;
}

}  // namespace

Embedding forward_summarize(const SummarizerWeights& weights, const std::vector<Embedding>& track,
                            bool canonical) {
  ForwardCache c;
  forward(weights, track, canonical, c);
  return c.y;
}

double contrastive_loss(const Embedding& anchor, const std::vector<Embedding>& positives,
                        const std::vector<Embedding>& negatives) {
  if (positives.empty()) throw std::invalid_argument("contrastive loss needs a positive");
  if (negatives.empty()) return 0.0;
  std::vector<double> sp, sn;
  for (const auto& p : positives) {
    if (p.size() != anchor.size()) throw std::invalid_argument("embedding dimension mismatch");
    sp.push_back(anchor.dot(p));
  }
  for (const auto& q : negatives) {
    if (q.size() != anchor.size()) throw std::invalid_argument("embedding dimension mismatch");
    sn.push_back(anchor.dot(q));
  }
  double mx = 0.0;  // the "1" inside the log is exp(0)
  for (double a : sp)
    for (double b : sn) mx = std::max(mx, b - a);
  double s = std::exp(-mx);
  for (double a : sp)
    for (double b : sn) s += std::exp(b - a - mx);
  return mx + std::log(s);
}

ContrastiveGrad contrastive_loss_grad(const Embedding& anchor,
                                      const std::vector<Embedding>& positives,
                                      const std::vector<Embedding>& negatives) {
  ContrastiveGrad g;
  g.loss = contrastive_loss(anchor, positives, negatives);
  g.d_anchor = Embedding::Zero(anchor.size());
  g.d_positives.assign(positives.size(), Embedding::Zero(anchor.size()));
  g.d_negatives.assign(negatives.size(), Embedding::Zero(anchor.size()));
  if (negatives.empty()) return g;
  // d loss / d a_pn = exp(a_pn - loss)
  for (std::size_t p = 0; p < positives.size(); ++p) {
    const double zp = anchor.dot(positives[p]);
    for (std::size_t q = 0; q < negatives.size(); ++q) {
      const double wgt = std::exp(anchor.dot(negatives[q]) - zp - g.loss);
      g.d_anchor += wgt * (negatives[q] - positives[p]);
      g.d_negatives[q] += wgt * anchor;
      g.d_positives[p] -= wgt * anchor;
    }
  }
  return g;
}

GradientResult gradient(const SummarizerWeights& weights, const std::vector<TrainSample>& batch,
                        bool deterministic) {
  return kernels::gradient_parallel(weights, batch, deterministic);
}

double batch_loss(const SummarizerWeights& weights, const std::vector<TrainSample>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  std::vector<Embedding> z;
  for (const auto& s : batch) z.push_back(normalize_or_throw(forward_summarize(weights, s.elements)));
  int anchors = 0;
  return summaries_loss(z, anchor_sets(batch), nullptr, anchors);
}

namespace kernels {

std::vector<Embedding> summarize_batch_serial(const SummarizerWeights& weights,
                                              const std::vector<std::vector<Embedding>>& tracks) {
  std::vector<Embedding> out;
  out.reserve(tracks.size());
  for (const auto& t : tracks) out.push_back(forward_summarize(weights, t));
  return out;
}

std::vector<Embedding> summarize_batch_parallel(const SummarizerWeights& weights,
                                                const std::vector<std::vector<Embedding>>& tracks) {
  const long n = static_cast<long>(tracks.size());
  std::vector<Embedding> out(n);
  // Exceptions must not cross the OpenMP region boundary.
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = forward_summarize(weights, tracks[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

GradientResult gradient_serial(const SummarizerWeights& weights,
                               const std::vector<TrainSample>& batch) {
  return gradient_impl(weights, batch, false, true);
}

GradientResult gradient_parallel(const SummarizerWeights& weights,
                                 const std::vector<TrainSample>& batch, bool deterministic) {
  return gradient_impl(weights, batch, true, deterministic);
}

}  // namespace kernels

}  // namespace clipmot
