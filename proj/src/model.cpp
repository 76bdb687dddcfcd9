#include "memlab/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "memlab/parallel.hpp"

namespace memlab::model {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMatrix>;
using ConstMap = Eigen::Map<const RowMatrix>;
using StridedMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

constexpr int kGradSlots = 8;  // fixed so results never depend on thread count

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluCubic = 0.044715;

double gelu(double x) {
  const double u = kGeluScale * (x + kGeluCubic * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad(double x) {
  const double u = kGeluScale * (x + kGeluCubic * x * x * x);
  const double th = std::tanh(u);
  const double du = kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
  return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
}

std::string layer_prefix(int layer) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "h%02d.", layer % 100);
  return buf;
}

// Raw views into one ParameterStore, resolved by name once per use.
struct ParamRefs {
  double* wte = nullptr;
  double* wpe = nullptr;
  double* lnf_w = nullptr;
  double* lnf_b = nullptr;
  double* lm = nullptr;
  struct Layer {
    double* ln1_w;
    double* ln1_b;
    double* wqkv;
    double* bqkv;
    double* wo;
    double* bo;
    double* ln2_w;
    double* ln2_b;
    double* w1;
    double* b1;
    double* w2;
    double* b2;
  };
  std::vector<Layer> layers;
};

ParamRefs resolve(numerics::ParameterStore& store, int n_layers) {
  auto at = [&store](const std::string& name) -> double* {
    return store.at(name).values.data();
  };
  ParamRefs refs;
  refs.wte = at("wte");
  refs.wpe = at("wpe");
  refs.lnf_w = at("lnf.w");
  refs.lnf_b = at("lnf.b");
  refs.lm = at("lm_head.w");
  refs.layers.resize(n_layers);
  for (int l = 0; l < n_layers; ++l) {
    const std::string p = layer_prefix(l);
    auto& lr = refs.layers[l];
    lr.ln1_w = at(p + "ln1.w");
    lr.ln1_b = at(p + "ln1.b");
    lr.wqkv = at(p + "attn.wqkv");
    lr.bqkv = at(p + "attn.bqkv");
    lr.wo = at(p + "attn.wo");
    lr.bo = at(p + "attn.bo");
    lr.ln2_w = at(p + "ln2.w");
    lr.ln2_b = at(p + "ln2.b");
    lr.w1 = at(p + "mlp.w1");
    lr.b1 = at(p + "mlp.b1");
    lr.w2 = at(p + "mlp.w2");
    lr.b2 = at(p + "mlp.b2");
  }
  return refs;
}

ParamRefs resolve(const numerics::ParameterStore& store, int n_layers) {
  return resolve(const_cast<numerics::ParameterStore&>(store), n_layers);
}

constexpr double kLnEps = 1e-5;

void ln_forward(const double* x, const double* w, const double* b, double* y,
                double* mean, double* rstd, std::int64_t rows, std::int64_t cols) {
  for (std::int64_t t = 0; t < rows; ++t) {
    const double* xr = x + t * cols;
    double* yr = y + t * cols;
    double mu = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) mu += xr[c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) {
      const double d = xr[c] - mu;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double r = 1.0 / std::sqrt(var + kLnEps);
    mean[t] = mu;
    rstd[t] = r;
    for (std::int64_t c = 0; c < cols; ++c) {
      yr[c] = (xr[c] - mu) * r * w[c] + b[c];
    }
  }
}

// dx is written (not accumulated); dw/db are accumulated.
void ln_backward(const double* dy, const double* x, const double* w,
                 const double* mean, const double* rstd, double* dx, double* dw,
                 double* db, std::int64_t rows, std::int64_t cols) {
  for (std::int64_t t = 0; t < rows; ++t) {
    const double* dyr = dy + t * cols;
    const double* xr = x + t * cols;
    double* dxr = dx + t * cols;
    const double mu = mean[t];
    const double r = rstd[t];
    double sum_dxhat = 0.0;
    double sum_dxhat_xhat = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) {
      const double xhat = (xr[c] - mu) * r;
      const double dxhat = dyr[c] * w[c];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat;
      dw[c] += dyr[c] * xhat;
      db[c] += dyr[c];
    }
    const double inv_cols = 1.0 / static_cast<double>(cols);
    const double m1 = sum_dxhat * inv_cols;
    const double m2 = sum_dxhat_xhat * inv_cols;
    for (std::int64_t c = 0; c < cols; ++c) {
      const double xhat = (xr[c] - mu) * r;
      const double dxhat = dyr[c] * w[c];
      dxr[c] = r * (dxhat - m1 - xhat * m2);
    }
  }
}

void add_colsum(const double* dy, double* db, std::int64_t rows, std::int64_t cols) {
  for (std::int64_t t = 0; t < rows; ++t) {
    const double* r = dy + t * cols;
    for (std::int64_t c = 0; c < cols; ++c) db[c] += r[c];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// tokenizer
// ---------------------------------------------------------------------------

void TransformerConfig::validate() const {
  if (n_layers < 1) throw numerics::ShapeError("n_layers must be >= 1");
  if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0) {
    throw numerics::ShapeError("d_model must be a positive multiple of n_heads");
  }
  if (context_len < 2) throw numerics::ShapeError("context_len must be >= 2");
  if (vocab_size != Vocabulary::kSize) {
    throw numerics::ShapeError("vocab_size must be 259 (byte vocabulary)");
  }
}

TokenSequence tokenize(std::string_view text, int context_len) {
  TokenSequence seq;
  seq.ids.reserve(text.size() + 2);
  seq.ids.push_back(Vocabulary::kBos);
  for (unsigned char c : text) seq.ids.push_back(static_cast<std::int32_t>(c));
  seq.ids.push_back(Vocabulary::kEos);
  if (context_len > 0 && seq.size() > context_len) {
    seq.ids.resize(static_cast<std::size_t>(context_len));
    seq.truncated = true;
  }
  return seq;
}

std::string detokenize(const TokenSequence& seq) {
  std::string out;
  out.reserve(seq.ids.size());
  for (std::int32_t id : seq.ids) {
    if (id >= 0 && id < 256) out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// forward / backward workspace
// ---------------------------------------------------------------------------

namespace {

struct LayerActs {
  std::vector<double> ln1_out, ln1_mean, ln1_rstd;
  std::vector<double> qkv;
  std::vector<double> att_probs;  // [H, T, T]
  std::vector<double> att_out;    // [T, C]
  std::vector<double> x_mid;      // after attention residual
  std::vector<double> ln2_out, ln2_mean, ln2_rstd;
  std::vector<double> m1, gelu_out;  // [T, 4C]
};

struct Workspace {
  int t_cap = 0;
  std::vector<std::vector<double>> stream;  // n_layers+1 buffers of [T, C]
  std::vector<LayerActs> acts;
  std::vector<double> lnf_out, lnf_mean, lnf_rstd;
  std::vector<double> logits;  // holds softmax probs after the loss pass

  // backward scratch
  std::vector<double> d_stream, d_tmp, d_mid, d_att, d_qkv, d_m1, d_g, d_head;

  void init(const TransformerConfig& cfg) {
    const auto T = static_cast<std::size_t>(cfg.context_len);
    const auto C = static_cast<std::size_t>(cfg.d_model);
    const auto V = static_cast<std::size_t>(cfg.vocab_size);
    t_cap = cfg.context_len;
    stream.assign(cfg.n_layers + 1, std::vector<double>(T * C));
    acts.resize(cfg.n_layers);
    for (auto& a : acts) {
      a.ln1_out.resize(T * C);
      a.ln1_mean.resize(T);
      a.ln1_rstd.resize(T);
      a.qkv.resize(T * 3 * C);
      a.att_probs.resize(static_cast<std::size_t>(cfg.n_heads) * T * T);
      a.att_out.resize(T * C);
      a.x_mid.resize(T * C);
      a.ln2_out.resize(T * C);
      a.ln2_mean.resize(T);
      a.ln2_rstd.resize(T);
      a.m1.resize(T * 4 * C);
      a.gelu_out.resize(T * 4 * C);
    }
    lnf_out.resize(T * C);
    lnf_mean.resize(T);
    lnf_rstd.resize(T);
    logits.resize(T * V);
    d_stream.resize(T * C);
    d_tmp.resize(T * C);
    d_mid.resize(T * C);
    d_att.resize(T * C);
    d_qkv.resize(T * 3 * C);
    d_m1.resize(T * 4 * C);
    d_g.resize(T * 4 * C);
    d_head.resize(T * T);
  }
};

// Runs the transformer over inputs ids[0..T-1]; logits land in ws.logits.
void forward_seq(const std::int32_t* ids, std::int64_t T, const TransformerConfig& cfg,
                 const ParamRefs& p, Workspace& ws) {
  const std::int64_t C = cfg.d_model;
  const std::int64_t H = cfg.n_heads;
  const std::int64_t hd = C / H;
  const std::int64_t V = cfg.vocab_size;
  const double alpha = 1.0 / std::sqrt(static_cast<double>(hd));

  double* x0 = ws.stream[0].data();
  for (std::int64_t t = 0; t < T; ++t) {
    const double* te = p.wte + static_cast<std::int64_t>(ids[t]) * C;
    const double* pe = p.wpe + t * C;
    double* row = x0 + t * C;
    for (std::int64_t c = 0; c < C; ++c) row[c] = te[c] + pe[c];
  }

  for (int l = 0; l < cfg.n_layers; ++l) {
    auto& a = ws.acts[l];
    const auto& lp = p.layers[l];
    const double* x_in = ws.stream[l].data();

    ln_forward(x_in, lp.ln1_w, lp.ln1_b, a.ln1_out.data(), a.ln1_mean.data(),
               a.ln1_rstd.data(), T, C);

    ConstMap ln1(a.ln1_out.data(), T, C);
    ConstMap wqkv(lp.wqkv, C, 3 * C);
    Map qkv(a.qkv.data(), T, 3 * C);
    qkv.noalias() = ln1 * wqkv;
    for (std::int64_t t = 0; t < T; ++t) {
      double* r = a.qkv.data() + t * 3 * C;
      for (std::int64_t c = 0; c < 3 * C; ++c) r[c] += lp.bqkv[c];
    }

    for (std::int64_t h = 0; h < H; ++h) {
      ConstStridedMap qh(a.qkv.data() + h * hd, T, hd, Eigen::OuterStride<>(3 * C));
      ConstStridedMap kh(a.qkv.data() + C + h * hd, T, hd, Eigen::OuterStride<>(3 * C));
      ConstStridedMap vh(a.qkv.data() + 2 * C + h * hd, T, hd, Eigen::OuterStride<>(3 * C));
      double* probs = a.att_probs.data() + h * T * T;
      Map scores(probs, T, T);
      scores.noalias() = (qh * kh.transpose()) * alpha;

      for (std::int64_t i = 0; i < T; ++i) {
        double* row = probs + i * T;
        double mx = row[0];
        for (std::int64_t j = 1; j <= i; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::int64_t j = 0; j <= i; ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += row[j];
        }
        const double inv = 1.0 / sum;
        for (std::int64_t j = 0; j <= i; ++j) row[j] *= inv;
        for (std::int64_t j = i + 1; j < T; ++j) row[j] = 0.0;
      }

      ConstMap pm(probs, T, T);
      StridedMap oh(a.att_out.data() + h * hd, T, hd, Eigen::OuterStride<>(C));
      oh.noalias() = pm * vh;
    }

    ConstMap att(a.att_out.data(), T, C);
    ConstMap wo(lp.wo, C, C);
    Map mid(a.x_mid.data(), T, C);
    mid.noalias() = att * wo;
    for (std::int64_t t = 0; t < T; ++t) {
      double* r = a.x_mid.data() + t * C;
      const double* xr = x_in + t * C;
      for (std::int64_t c = 0; c < C; ++c) r[c] += lp.bo[c] + xr[c];
    }

    ln_forward(a.x_mid.data(), lp.ln2_w, lp.ln2_b, a.ln2_out.data(), a.ln2_mean.data(),
               a.ln2_rstd.data(), T, C);

    ConstMap ln2(a.ln2_out.data(), T, C);
    ConstMap w1(lp.w1, C, 4 * C);
    Map m1(a.m1.data(), T, 4 * C);
    m1.noalias() = ln2 * w1;
    for (std::int64_t t = 0; t < T; ++t) {
      double* r = a.m1.data() + t * 4 * C;
      double* g = a.gelu_out.data() + t * 4 * C;
      for (std::int64_t c = 0; c < 4 * C; ++c) {
        r[c] += lp.b1[c];
        g[c] = gelu(r[c]);
      }
    }

    ConstMap gm(a.gelu_out.data(), T, 4 * C);
    ConstMap w2(lp.w2, 4 * C, C);
    Map out(ws.stream[l + 1].data(), T, C);
    out.noalias() = gm * w2;
    for (std::int64_t t = 0; t < T; ++t) {
      double* r = ws.stream[l + 1].data() + t * C;
      const double* m = a.x_mid.data() + t * C;
      for (std::int64_t c = 0; c < C; ++c) r[c] += lp.b2[c] + m[c];
    }
  }

  ln_forward(ws.stream[cfg.n_layers].data(), p.lnf_w, p.lnf_b, ws.lnf_out.data(),
             ws.lnf_mean.data(), ws.lnf_rstd.data(), T, C);

  ConstMap lnf(ws.lnf_out.data(), T, C);
  ConstMap lm(p.lm, C, V);
  Map logits(ws.logits.data(), T, V);
  logits.noalias() = lnf * lm;
}

// Converts ws.logits to softmax probabilities in place and returns summed NLL
// over the targets.
double loss_from_logits(const std::int32_t* targets, std::int64_t T, std::int64_t V,
                        Workspace& ws) {
  double loss_sum = 0.0;
  for (std::int64_t t = 0; t < T; ++t) {
    double* row = ws.logits.data() + t * V;
    double mx = row[0];
    for (std::int64_t v = 1; v < V; ++v) mx = std::max(mx, row[v]);
    double sum = 0.0;
    for (std::int64_t v = 0; v < V; ++v) {
      row[v] = std::exp(row[v] - mx);
      sum += row[v];
    }
    const double inv = 1.0 / sum;
    for (std::int64_t v = 0; v < V; ++v) row[v] *= inv;
    loss_sum += -std::log(row[targets[t]]);
  }
  return loss_sum;
}

// Assumes forward_seq + loss_from_logits ran with this workspace; accumulates
// parameter gradients scaled by `scale` (per-sequence weight over the
// per-token mean).
void backward_seq(const std::int32_t* ids, const std::int32_t* targets, std::int64_t T,
                  const TransformerConfig& cfg, const ParamRefs& p, ParamRefs& g,
                  Workspace& ws, double scale) {
  const std::int64_t C = cfg.d_model;
  const std::int64_t H = cfg.n_heads;
  const std::int64_t hd = C / H;
  const std::int64_t V = cfg.vocab_size;
  const double alpha = 1.0 / std::sqrt(static_cast<double>(hd));
  const double row_scale = scale / static_cast<double>(T);

  // d(logits): (softmax - onehot) * row_scale, written over the prob buffer
  for (std::int64_t t = 0; t < T; ++t) {
    double* row = ws.logits.data() + t * V;
    for (std::int64_t v = 0; v < V; ++v) row[v] *= row_scale;
    row[targets[t]] -= row_scale;
  }

  ConstMap dlogits(ws.logits.data(), T, V);
  ConstMap lnf(ws.lnf_out.data(), T, C);
  Map dlm(g.lm, C, V);
  dlm.noalias() += lnf.transpose() * dlogits;
  ConstMap lm(p.lm, C, V);
  Map dlnf(ws.d_tmp.data(), T, C);
  dlnf.noalias() = dlogits * lm.transpose();

  ln_backward(ws.d_tmp.data(), ws.stream[cfg.n_layers].data(), p.lnf_w,
              ws.lnf_mean.data(), ws.lnf_rstd.data(), ws.d_stream.data(), g.lnf_w,
              g.lnf_b, T, C);

  for (int l = cfg.n_layers - 1; l >= 0; --l) {
    auto& a = ws.acts[l];
    const auto& lp = p.layers[l];
    auto& lg = g.layers[l];

    // MLP: out = x_mid + gelu(ln2(x_mid) W1 + b1) W2 + b2
    ConstMap dout(ws.d_stream.data(), T, C);
    ConstMap gm(a.gelu_out.data(), T, 4 * C);
    Map dw2(lg.w2, 4 * C, C);
    dw2.noalias() += gm.transpose() * dout;
    add_colsum(ws.d_stream.data(), lg.b2, T, C);

    ConstMap w2(lp.w2, 4 * C, C);
    Map dg(ws.d_g.data(), T, 4 * C);
    dg.noalias() = dout * w2.transpose();
    for (std::int64_t i = 0; i < T * 4 * C; ++i) {
      ws.d_m1[i] = ws.d_g[i] * gelu_grad(a.m1[i]);
    }

    ConstMap dm1(ws.d_m1.data(), T, 4 * C);
    ConstMap ln2(a.ln2_out.data(), T, C);
    Map dw1(lg.w1, C, 4 * C);
    dw1.noalias() += ln2.transpose() * dm1;
    add_colsum(ws.d_m1.data(), lg.b1, T, 4 * C);

    ConstMap w1(lp.w1, C, 4 * C);
    Map dln2(ws.d_tmp.data(), T, C);
    dln2.noalias() = dm1 * w1.transpose();

    ln_backward(ws.d_tmp.data(), a.x_mid.data(), lp.ln2_w, a.ln2_mean.data(),
                a.ln2_rstd.data(), ws.d_mid.data(), lg.ln2_w, lg.ln2_b, T, C);
    // residual passthrough
    for (std::int64_t i = 0; i < T * C; ++i) ws.d_mid[i] += ws.d_stream[i];

    // attention: x_mid = x_in + (heads(ln1(x_in))) Wo + bo
    ConstMap dmid(ws.d_mid.data(), T, C);
    ConstMap att(a.att_out.data(), T, C);
    Map dwo(lg.wo, C, C);
    dwo.noalias() += att.transpose() * dmid;
    add_colsum(ws.d_mid.data(), lg.bo, T, C);

    ConstMap wo(lp.wo, C, C);
    Map datt(ws.d_att.data(), T, C);
    datt.noalias() = dmid * wo.transpose();

    std::fill(ws.d_qkv.begin(), ws.d_qkv.begin() + T * 3 * C, 0.0);
    for (std::int64_t h = 0; h < H; ++h) {
      const double* probs = a.att_probs.data() + h * T * T;
      ConstMap pm(probs, T, T);
      ConstStridedMap doh(ws.d_att.data() + h * hd, T, hd, Eigen::OuterStride<>(C));
      ConstStridedMap vh(a.qkv.data() + 2 * C + h * hd, T, hd, Eigen::OuterStride<>(3 * C));
      ConstStridedMap qh(a.qkv.data() + h * hd, T, hd, Eigen::OuterStride<>(3 * C));
      ConstStridedMap kh(a.qkv.data() + C + h * hd, T, hd, Eigen::OuterStride<>(3 * C));
      StridedMap dvh(ws.d_qkv.data() + 2 * C + h * hd, T, hd, Eigen::OuterStride<>(3 * C));
      StridedMap dqh(ws.d_qkv.data() + h * hd, T, hd, Eigen::OuterStride<>(3 * C));
      StridedMap dkh(ws.d_qkv.data() + C + h * hd, T, hd, Eigen::OuterStride<>(3 * C));

      dvh.noalias() += pm.transpose() * doh;

      Map dp(ws.d_head.data(), T, T);
      dp.noalias() = doh * vh.transpose();
      // softmax rows; masked entries have prob 0 and drop out
      for (std::int64_t i = 0; i < T; ++i) {
        double* dpr = ws.d_head.data() + i * T;
        const double* pr = probs + i * T;
        double dot = 0.0;
        for (std::int64_t j = 0; j <= i; ++j) dot += dpr[j] * pr[j];
        for (std::int64_t j = 0; j <= i; ++j) dpr[j] = pr[j] * (dpr[j] - dot);
        for (std::int64_t j = i + 1; j < T; ++j) dpr[j] = 0.0;
      }
      ConstMap ds(ws.d_head.data(), T, T);
      dqh.noalias() += (ds * kh) * alpha;
      dkh.noalias() += (ds.transpose() * qh) * alpha;
    }

    ConstMap dqkv(ws.d_qkv.data(), T, 3 * C);
    ConstMap ln1(a.ln1_out.data(), T, C);
    Map dwqkv(lg.wqkv, C, 3 * C);
    dwqkv.noalias() += ln1.transpose() * dqkv;
    add_colsum(ws.d_qkv.data(), lg.bqkv, T, 3 * C);

    ConstMap wqkv(lp.wqkv, C, 3 * C);
    Map dln1(ws.d_tmp.data(), T, C);
    dln1.noalias() = dqkv * wqkv.transpose();

    ln_backward(ws.d_tmp.data(), ws.stream[l].data(), lp.ln1_w, a.ln1_mean.data(),
                a.ln1_rstd.data(), ws.d_stream.data(), lg.ln1_w, lg.ln1_b, T, C);
    for (std::int64_t i = 0; i < T * C; ++i) ws.d_stream[i] += ws.d_mid[i];
  }

  for (std::int64_t t = 0; t < T; ++t) {
    const double* dr = ws.d_stream.data() + t * C;
    double* dte = g.wte + static_cast<std::int64_t>(ids[t]) * C;
    double* dpe = g.wpe + t * C;
    for (std::int64_t c = 0; c < C; ++c) {
      dte[c] += dr[c];
      dpe[c] += dr[c];
    }
  }
}

bool same_dims(const TransformerConfig& a, const TransformerConfig& b) {
  return a.n_layers == b.n_layers && a.d_model == b.d_model &&
         a.n_heads == b.n_heads && a.context_len == b.context_len &&
         a.vocab_size == b.vocab_size;
}

thread_local std::unique_ptr<Workspace> tls_probe_ws;
thread_local TransformerConfig tls_probe_cfg;

Workspace& probe_workspace(const TransformerConfig& cfg) {
  if (!tls_probe_ws || !same_dims(tls_probe_cfg, cfg)) {
    tls_probe_ws = std::make_unique<Workspace>();
    tls_probe_ws->init(cfg);
    tls_probe_cfg = cfg;
  }
  return *tls_probe_ws;
}

}  // namespace

// ---------------------------------------------------------------------------
// Transformer
// ---------------------------------------------------------------------------

struct Transformer::TrainBuffers {
  std::vector<numerics::ParameterStore> slot_grads;
  numerics::ParameterStore total_grads;
  std::vector<Workspace> slot_ws;
};

Transformer::Transformer(const TransformerConfig& cfg)
    : cfg_(cfg), rng_(derive_seed(cfg.seed, "model-rng")) {
  cfg_.validate();
  init_parameters();
  adam_ = numerics::AdamState::init(params_);
  threads_ = default_threads();
}

Transformer::~Transformer() = default;
Transformer::Transformer(Transformer&&) noexcept = default;
Transformer& Transformer::operator=(Transformer&&) noexcept = default;

Transformer::Transformer(const Transformer& other)
    : cfg_(other.cfg_),
      params_(other.params_),
      adam_(other.adam_),
      step_count_(other.step_count_),
      rng_(other.rng_),
      pretrain_fingerprints_(other.pretrain_fingerprints_),
      threads_(other.threads_) {}

Transformer& Transformer::operator=(const Transformer& other) {
  if (this == &other) return *this;
  cfg_ = other.cfg_;
  params_ = other.params_;
  adam_ = other.adam_;
  step_count_ = other.step_count_;
  rng_ = other.rng_;
  pretrain_fingerprints_ = other.pretrain_fingerprints_;
  threads_ = other.threads_;
  buffers_.reset();
  return *this;
}

void Transformer::init_parameters() {
  const std::int64_t C = cfg_.d_model;
  const std::int64_t V = cfg_.vocab_size;
  const std::int64_t ctx = cfg_.context_len;
  const double base_std = 0.02;
  // GPT-2 style: residual-facing projections shrunk by sqrt(2 * n_layers)
  const double resid_std = base_std / std::sqrt(2.0 * cfg_.n_layers);

  auto add = [this](const std::string& name, std::vector<std::int64_t> shape,
                    double std_dev) {
    auto t = numerics::Tensor::zeros(std::move(shape));
    if (std_dev > 0.0) {
      Rng rng(derive_seed(cfg_.seed, name));
      for (auto& v : t.values) v = rng.normal(0.0, std_dev);
    }
    params_.emplace(name, std::move(t));
  };
  auto add_ones = [this](const std::string& name, std::int64_t n) {
    auto t = numerics::Tensor::zeros({n});
    std::fill(t.values.begin(), t.values.end(), 1.0);
    params_.emplace(name, std::move(t));
  };

  add("wte", {V, C}, base_std);
  add("wpe", {ctx, C}, base_std);
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const std::string p = layer_prefix(l);
    add_ones(p + "ln1.w", C);
    add(p + "ln1.b", {C}, 0.0);
    add(p + "attn.wqkv", {C, 3 * C}, base_std);
    add(p + "attn.bqkv", {3 * C}, 0.0);
    add(p + "attn.wo", {C, C}, resid_std);
    add(p + "attn.bo", {C}, 0.0);
    add_ones(p + "ln2.w", C);
    add(p + "ln2.b", {C}, 0.0);
    add(p + "mlp.w1", {C, 4 * C}, base_std);
    add(p + "mlp.b1", {4 * C}, 0.0);
    add(p + "mlp.w2", {4 * C, C}, resid_std);
    add(p + "mlp.b2", {C}, 0.0);
  }
  add_ones("lnf.w", C);
  add("lnf.b", {C}, 0.0);
  add("lm_head.w", {C, V}, base_std);
}

Transformer::TrainBuffers& Transformer::train_buffers() {
  if (!buffers_) {
    buffers_ = std::make_unique<TrainBuffers>();
    buffers_->slot_grads.resize(kGradSlots);
    for (auto& store : buffers_->slot_grads) {
      for (const auto& [name, t] : params_) {
        store.emplace(name, numerics::Tensor::zeros(t.shape));
      }
    }
    for (const auto& [name, t] : params_) {
      buffers_->total_grads.emplace(name, numerics::Tensor::zeros(t.shape));
    }
    buffers_->slot_ws.resize(kGradSlots);
    for (auto& ws : buffers_->slot_ws) ws.init(cfg_);
  }
  return *buffers_;
}

LossDetail Transformer::sequence_loss_detail(const TokenSequence& seq) const {
  if (seq.size() < 2) {
    throw numerics::ShapeError("sequence_loss requires length >= 2, got " +
                               std::to_string(seq.size()));
  }
  if (seq.size() > cfg_.context_len) {
    throw numerics::ShapeError("sequence length " + std::to_string(seq.size()) +
                               " exceeds context_len " + std::to_string(cfg_.context_len));
  }
  Workspace& ws = probe_workspace(cfg_);
  const ParamRefs p = resolve(params_, cfg_.n_layers);
  const std::int64_t T = seq.size() - 1;
  forward_seq(seq.ids.data(), T, cfg_, p, ws);
  const double sum = loss_from_logits(seq.ids.data() + 1, T, cfg_.vocab_size, ws);
  LossDetail d;
  d.sum = sum;
  d.predicted_tokens = T;
  d.mean = sum / static_cast<double>(T);
  return d;
}

double Transformer::sequence_loss(const TokenSequence& seq) const {
  return sequence_loss_detail(seq).mean;
}

std::vector<double> Transformer::forward_logits(const TokenSequence& seq) const {
  if (seq.size() < 2) throw numerics::ShapeError("need at least 2 tokens");
  Workspace& ws = probe_workspace(cfg_);
  const ParamRefs p = resolve(params_, cfg_.n_layers);
  const std::int64_t T = seq.size() - 1;
  forward_seq(seq.ids.data(), T, cfg_, p, ws);
  return std::vector<double>(ws.logits.begin(),
                             ws.logits.begin() + T * cfg_.vocab_size);
}

numerics::ParameterStore Transformer::loss_gradients(const TokenSequence& seq) const {
  if (seq.size() < 2) throw numerics::ShapeError("need at least 2 tokens");
  numerics::ParameterStore grads;
  for (const auto& [name, t] : params_) {
    grads.emplace(name, numerics::Tensor::zeros(t.shape));
  }
  Workspace ws;
  ws.init(cfg_);
  const ParamRefs p = resolve(params_, cfg_.n_layers);
  ParamRefs g = resolve(grads, cfg_.n_layers);
  const std::int64_t T = seq.size() - 1;
  forward_seq(seq.ids.data(), T, cfg_, p, ws);
  loss_from_logits(seq.ids.data() + 1, T, cfg_.vocab_size, ws);
  backward_seq(seq.ids.data(), seq.ids.data() + 1, T, cfg_, p, g, ws, 1.0);
  return grads;
}

std::vector<double> Transformer::train_steps(
    const std::vector<std::vector<TokenSequence>>& batches, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw numerics::NumericError("learning rate must be finite and >= 0");
  }
  for (const auto& batch : batches) {
    for (const auto& seq : batch) {
      if (seq.size() < 2) {
        throw numerics::ShapeError("training sequences must have length >= 2");
      }
      if (seq.size() > cfg_.context_len) {
        throw numerics::ShapeError("training sequence exceeds context_len");
      }
    }
  }

  auto& tb = train_buffers();
  std::vector<double> batch_losses;
  batch_losses.reserve(batches.size());

  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const auto& batch = batches[bi];
    if (batch.empty()) {
      throw numerics::ShapeError("empty batch at index " + std::to_string(bi));
    }
    const double seq_weight = 1.0 / static_cast<double>(batch.size());
    std::vector<double> seq_losses(batch.size(), 0.0);

    const ParamRefs pref = resolve(params_, cfg_.n_layers);
    run_parallel(kGradSlots, threads_, [&](std::size_t slot) {
      auto& store = tb.slot_grads[slot];
      for (auto& [name, t] : store) {
        std::fill(t.values.begin(), t.values.end(), 0.0);
      }
      ParamRefs gref = resolve(store, cfg_.n_layers);
      Workspace& ws = tb.slot_ws[slot];
      for (std::size_t i = slot; i < batch.size(); i += kGradSlots) {
        const auto& seq = batch[i];
        const std::int64_t T = seq.size() - 1;
        forward_seq(seq.ids.data(), T, cfg_, pref, ws);
        const double sum = loss_from_logits(seq.ids.data() + 1, T, cfg_.vocab_size, ws);
        seq_losses[i] = sum / static_cast<double>(T);
        backward_seq(seq.ids.data(), seq.ids.data() + 1, T, cfg_, pref, gref, ws,
                     seq_weight);
      }
    });

    double batch_loss = 0.0;
    for (double v : seq_losses) batch_loss += v;
    batch_loss *= seq_weight;
    if (!std::isfinite(batch_loss)) {
      throw numerics::NumericError("non-finite loss in batch " + std::to_string(bi));
    }
    batch_losses.push_back(batch_loss);

    // slot reduction in fixed order, then one Adam update
    for (auto& [name, total] : tb.total_grads) {
      std::fill(total.values.begin(), total.values.end(), 0.0);
      for (int s = 0; s < kGradSlots; ++s) {
        const auto& part = tb.slot_grads[s].at(name).values;
        for (std::size_t i = 0; i < part.size(); ++i) total.values[i] += part[i];
      }
    }
    numerics::adam_step(params_, tb.total_grads, adam_, lr);
    step_count_ += 1;
  }
  return batch_losses;
}

// ---------------------------------------------------------------------------
// greedy decoding with a per-layer KV cache
// ---------------------------------------------------------------------------

namespace {

struct DecodeState {
  std::vector<std::vector<double>> k_cache;  // per layer [T, C]
  std::vector<std::vector<double>> v_cache;
  std::vector<double> x, a, qkv, att, scores, scratch, m1, logits;

  void init(const TransformerConfig& cfg) {
    const auto T = static_cast<std::size_t>(cfg.context_len);
    const auto C = static_cast<std::size_t>(cfg.d_model);
    k_cache.assign(cfg.n_layers, std::vector<double>(T * C));
    v_cache.assign(cfg.n_layers, std::vector<double>(T * C));
    x.resize(C);
    a.resize(C);
    qkv.resize(3 * C);
    att.resize(C);
    scores.resize(T);
    scratch.resize(C);
    m1.resize(4 * C);
    logits.resize(static_cast<std::size_t>(cfg.vocab_size));
  }
};

// One token through the stack; pos is the 0-based position, cache holds
// pos rows already.
void decode_step(std::int32_t token, std::int64_t pos, const TransformerConfig& cfg,
                 const ParamRefs& p, DecodeState& st) {
  const std::int64_t C = cfg.d_model;
  const std::int64_t H = cfg.n_heads;
  const std::int64_t hd = C / H;
  const std::int64_t V = cfg.vocab_size;
  const double alpha = 1.0 / std::sqrt(static_cast<double>(hd));

  const double* te = p.wte + static_cast<std::int64_t>(token) * C;
  const double* pe = p.wpe + pos * C;
  for (std::int64_t c = 0; c < C; ++c) st.x[c] = te[c] + pe[c];

  double mean_scratch, rstd_scratch;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const auto& lp = p.layers[l];
    ln_forward(st.x.data(), lp.ln1_w, lp.ln1_b, st.a.data(), &mean_scratch,
               &rstd_scratch, 1, C);

    ConstMap am(st.a.data(), 1, C);
    ConstMap wqkv(lp.wqkv, C, 3 * C);
    Map qkv(st.qkv.data(), 1, 3 * C);
    qkv.noalias() = am * wqkv;
    for (std::int64_t c = 0; c < 3 * C; ++c) st.qkv[c] += lp.bqkv[c];

    double* krow = st.k_cache[l].data() + pos * C;
    double* vrow = st.v_cache[l].data() + pos * C;
    std::memcpy(krow, st.qkv.data() + C, sizeof(double) * C);
    std::memcpy(vrow, st.qkv.data() + 2 * C, sizeof(double) * C);

    const std::int64_t n_ctx = pos + 1;
    for (std::int64_t h = 0; h < H; ++h) {
      const double* q = st.qkv.data() + h * hd;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::int64_t j = 0; j < n_ctx; ++j) {
        const double* kj = st.k_cache[l].data() + j * C + h * hd;
        double dot = 0.0;
        for (std::int64_t c = 0; c < hd; ++c) dot += q[c] * kj[c];
        st.scores[j] = dot * alpha;
        mx = std::max(mx, st.scores[j]);
      }
      double sum = 0.0;
      for (std::int64_t j = 0; j < n_ctx; ++j) {
        st.scores[j] = std::exp(st.scores[j] - mx);
        sum += st.scores[j];
      }
      const double inv = 1.0 / sum;
      double* out = st.att.data() + h * hd;
      for (std::int64_t c = 0; c < hd; ++c) out[c] = 0.0;
      for (std::int64_t j = 0; j < n_ctx; ++j) {
        const double w = st.scores[j] * inv;
        const double* vj = st.v_cache[l].data() + j * C + h * hd;
        for (std::int64_t c = 0; c < hd; ++c) out[c] += w * vj[c];
      }
    }

    ConstMap attm(st.att.data(), 1, C);
    ConstMap wo(lp.wo, C, C);
    Map proj(st.scratch.data(), 1, C);
    proj.noalias() = attm * wo;
    for (std::int64_t c = 0; c < C; ++c) st.x[c] += st.scratch[c] + lp.bo[c];

    ln_forward(st.x.data(), lp.ln2_w, lp.ln2_b, st.a.data(), &mean_scratch,
               &rstd_scratch, 1, C);
    ConstMap ln2(st.a.data(), 1, C);
    ConstMap w1(lp.w1, C, 4 * C);
    Map m1(st.m1.data(), 1, 4 * C);
    m1.noalias() = ln2 * w1;
    for (std::int64_t c = 0; c < 4 * C; ++c) st.m1[c] = gelu(st.m1[c] + lp.b1[c]);
    ConstMap gm(st.m1.data(), 1, 4 * C);
    ConstMap w2(lp.w2, 4 * C, C);
    Map mlp(st.scratch.data(), 1, C);
    mlp.noalias() = gm * w2;
    for (std::int64_t c = 0; c < C; ++c) st.x[c] += st.scratch[c] + lp.b2[c];
  }

  ln_forward(st.x.data(), p.lnf_w, p.lnf_b, st.a.data(), &mean_scratch, &rstd_scratch,
             1, C);
  ConstMap lnf(st.a.data(), 1, C);
  ConstMap lm(p.lm, C, V);
  Map logits(st.logits.data(), 1, V);
  logits.noalias() = lnf * lm;
}

}  // namespace

TokenSequence Transformer::greedy_decode(const TokenSequence& prompt, int n_new) const {
  if (n_new < 0) throw numerics::ShapeError("n_new must be >= 0");
  if (prompt.size() + n_new > cfg_.context_len) {
    throw numerics::ShapeError(
        "decode would overflow context: prompt " + std::to_string(prompt.size()) +
        " + " + std::to_string(n_new) + " > " + std::to_string(cfg_.context_len));
  }
  if (prompt.ids.empty()) throw numerics::ShapeError("prompt must be non-empty");

  TokenSequence out = prompt;
  if (n_new == 0) return out;

  DecodeState st;
  st.init(cfg_);
  const ParamRefs p = resolve(params_, cfg_.n_layers);

  const std::int64_t V = cfg_.vocab_size;
  std::int64_t pos = 0;
  for (; pos < prompt.size(); ++pos) decode_step(prompt.ids[pos], pos, cfg_, p, st);
  for (int i = 0; i < n_new; ++i) {
    std::int32_t best = 0;
    double best_val = st.logits[0];
    for (std::int64_t v = 1; v < V; ++v) {
      if (st.logits[v] > best_val) {  // strict: ties keep the lowest id
        best_val = st.logits[v];
        best = static_cast<std::int32_t>(v);
      }
    }
    out.ids.push_back(best);
    if (i + 1 < n_new) decode_step(best, pos, cfg_, p, st), ++pos;
  }
  return out;
}

// ---------------------------------------------------------------------------
// pretraining
// ---------------------------------------------------------------------------

void Transformer::pretrain(const std::vector<std::string>& sentences,
                           const PretrainOptions& opts) {
  if (opts.token_budget <= 0) {
    throw numerics::ShapeError("token_budget must be positive");
  }
  if (opts.batch_size < 1) throw numerics::ShapeError("batch_size must be >= 1");

  // pack: BOS sentence EOS BOS sentence EOS ... cut into context_len chunks
  Rng order_rng(derive_seed(opts.seed, "pretrain-order"));
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  order_rng.shuffle(order);

  std::vector<std::int32_t> stream;
  for (std::size_t idx : order) {
    const auto& s = sentences[idx];
    stream.push_back(Vocabulary::kBos);
    for (unsigned char c : s) stream.push_back(static_cast<std::int32_t>(c));
    stream.push_back(Vocabulary::kEos);
  }

  const std::int64_t ctx = cfg_.context_len;
  std::vector<TokenSequence> chunks;
  for (std::size_t start = 0; start + 2 <= stream.size(); start += ctx) {
    TokenSequence chunk;
    const std::size_t end = std::min(stream.size(), start + static_cast<std::size_t>(ctx));
    chunk.ids.assign(stream.begin() + start, stream.begin() + end);
    if (chunk.size() >= 2) chunks.push_back(std::move(chunk));
  }
  if (static_cast<int>(chunks.size()) < opts.batch_size) {
    throw numerics::ShapeError("corpus too small: " + std::to_string(chunks.size()) +
                               " chunks < one batch of " +
                               std::to_string(opts.batch_size));
  }

  for (const auto& s : sentences) {
    pretrain_fingerprints_.push_back(fnv1a64(s));
  }
  std::sort(pretrain_fingerprints_.begin(), pretrain_fingerprints_.end());
  pretrain_fingerprints_.erase(
      std::unique(pretrain_fingerprints_.begin(), pretrain_fingerprints_.end()),
      pretrain_fingerprints_.end());

  std::vector<std::size_t> chunk_order(chunks.size());
  for (std::size_t i = 0; i < chunk_order.size(); ++i) chunk_order[i] = i;
  Rng epoch_rng(derive_seed(opts.seed, "pretrain-epochs"));
  epoch_rng.shuffle(chunk_order);

  std::int64_t consumed = 0;
  std::size_t cursor = 0;
  std::int64_t step = 0;
  while (consumed < opts.token_budget) {
    std::vector<std::vector<TokenSequence>> one_batch(1);
    auto& batch = one_batch[0];
    batch.reserve(opts.batch_size);
    for (int i = 0; i < opts.batch_size; ++i) {
      if (cursor >= chunk_order.size()) {
        cursor = 0;
        epoch_rng.shuffle(chunk_order);
      }
      const auto& chunk = chunks[chunk_order[cursor++]];
      consumed += chunk.size();
      batch.push_back(chunk);
    }
    const auto losses = train_steps(one_batch, opts.lr);
    step += 1;
    if (opts.log && (step % std::max(1, opts.log_interval) == 0 ||
                     consumed >= opts.token_budget)) {
      char line[64];
      std::snprintf(line, sizeof(line), "%lld\t%.6f\n",
                    static_cast<long long>(step), losses[0]);
      (*opts.log) << line;
      opts.log->flush();
    }
  }
}

// ---------------------------------------------------------------------------
// checkpoint io
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'L', 'A', 'B'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <class T>
  void pod(T v) {
    bytes(&v, sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void doubles(const std::vector<double>& v) {
    pod<std::uint64_t>(v.size());
    bytes(v.data(), v.size() * sizeof(double));
  }
};

struct Reader {
  std::ifstream in;
  std::string path;
  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw std::runtime_error("cannot open checkpoint: " + p);
  }
  void bytes(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  }
  template <class T>
  T pod() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  std::vector<double> doubles() {
    const auto n = pod<std::uint64_t>();
    std::vector<double> v(n);
    bytes(v.data(), n * sizeof(double));
    return v;
  }
};

}  // namespace

void Transformer::save_checkpoint(const std::string& path) const {
  Writer w(path);
  w.bytes(kMagic, 4);
  w.pod<std::uint32_t>(kVersion);
  w.pod<std::int32_t>(cfg_.n_layers);
  w.pod<std::int32_t>(cfg_.d_model);
  w.pod<std::int32_t>(cfg_.n_heads);
  w.pod<std::int32_t>(cfg_.context_len);
  w.pod<std::int32_t>(cfg_.vocab_size);
  w.pod<std::uint64_t>(cfg_.seed);
  w.pod<std::int64_t>(step_count_);

  const auto rst = rng_.state();
  for (auto s : rst.s) w.pod<std::uint64_t>(s);
  w.pod<std::uint8_t>(rst.have_spare ? 1 : 0);
  w.pod<double>(rst.spare);

  w.pod<std::uint32_t>(static_cast<std::uint32_t>(params_.size()));
  for (const auto& [name, t] : params_) {
    w.str(name);
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.pod<std::int64_t>(d);
    w.doubles(t.values);
  }

  w.pod<std::int64_t>(adam_.step_count);
  w.pod<double>(adam_.beta1);
  w.pod<double>(adam_.beta2);
  w.pod<double>(adam_.epsilon);
  for (const auto& [name, t] : params_) {
    const auto& mom = adam_.moments.at(name);
    w.doubles(mom.m);
    w.doubles(mom.v);
  }

  w.pod<std::uint64_t>(pretrain_fingerprints_.size());
  for (auto h : pretrain_fingerprints_) w.pod<std::uint64_t>(h);
  if (!w.out) throw std::runtime_error("write failure on checkpoint: " + path);
}

Transformer Transformer::load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a checkpoint file (bad magic): " + path);
  }
  const auto version = r.pod<std::uint32_t>();
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + " in " + path);
  }
  TransformerConfig cfg;
  cfg.n_layers = r.pod<std::int32_t>();
  cfg.d_model = r.pod<std::int32_t>();
  cfg.n_heads = r.pod<std::int32_t>();
  cfg.context_len = r.pod<std::int32_t>();
  cfg.vocab_size = r.pod<std::int32_t>();
  cfg.seed = r.pod<std::uint64_t>();

  Transformer model(cfg);
  model.step_count_ = r.pod<std::int64_t>();

  Rng::State rst;
  for (auto& s : rst.s) s = r.pod<std::uint64_t>();
  rst.have_spare = r.pod<std::uint8_t>() != 0;
  rst.spare = r.pod<double>();
  model.rng_.set_state(rst);

  const auto n_params = r.pod<std::uint32_t>();
  numerics::ParameterStore params;
  for (std::uint32_t i = 0; i < n_params; ++i) {
    const std::string name = r.str();
    const auto ndim = r.pod<std::uint32_t>();
    std::vector<std::int64_t> shape(ndim);
    for (auto& d : shape) d = r.pod<std::int64_t>();
    auto values = r.doubles();
    params.emplace(name, numerics::Tensor(std::move(shape), std::move(values)));
  }
  if (params.size() != model.params_.size()) {
    throw std::runtime_error("checkpoint parameter set does not match config: " + path);
  }
  model.params_ = std::move(params);

  model.adam_.step_count = r.pod<std::int64_t>();
  model.adam_.beta1 = r.pod<double>();
  model.adam_.beta2 = r.pod<double>();
  model.adam_.epsilon = r.pod<double>();
  for (const auto& [name, t] : model.params_) {
    auto& mom = model.adam_.moments.at(name);
    mom.m = r.doubles();
    mom.v = r.doubles();
    if (mom.m.size() != t.values.size() || mom.v.size() != t.values.size()) {
      throw std::runtime_error("checkpoint moment shape mismatch for " + name);
    }
  }

  const auto n_fp = r.pod<std::uint64_t>();
  model.pretrain_fingerprints_.resize(n_fp);
  for (auto& h : model.pretrain_fingerprints_) h = r.pod<std::uint64_t>();
  return model;
}

std::uint64_t Transformer::parameter_checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, t] : params_) {
    h = fnv1a64(name, h);
    h = fnv1a64(t.values.data(), t.values.size() * sizeof(double), h);
  }
  return h;
}

}  // namespace memlab::model
