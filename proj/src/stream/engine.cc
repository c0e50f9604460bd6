// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "stream/engine.h"

#include <algorithm>
#include <deque>
#include <string>

#include "core/errors.h"

namespace past {

// ---------------------------------------------------------------------------
// Weight extraction

namespace {

std::vector<float> Floats(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kCPU, torch::kFloat32).contiguous();
  return {c.data_ptr<float>(), c.data_ptr<float>() + c.numel()};
}

ConvWeights PackConv(const SConv1d& m) {
  ConvWeights w;
  const auto& weight = m->conv->weight;  // [out, in, k]
  w.out_ch = static_cast<int>(weight.size(0));
  w.in_ch = static_cast<int>(weight.size(1));
  w.kernel = m->kernel;
  w.stride = m->stride;
  w.dilation = m->dilation;
  const std::vector<float> raw = Floats(weight);
  w.packed.resize(raw.size());
  for (int o = 0; o < w.out_ch; ++o)
    for (int c = 0; c < w.in_ch; ++c)
      for (int i = 0; i < w.kernel; ++i)
        w.packed[(static_cast<size_t>(i) * w.out_ch + o) * w.in_ch + c] =
            raw[(static_cast<size_t>(o) * w.in_ch + c) * w.kernel + i];
  w.bias = Floats(m->conv->bias);
  return w;
}

ConvTransposeWeights PackConvTranspose(const SConvTranspose1d& m) {
  ConvTransposeWeights w;
  const auto& weight = m->conv->weight;  // [in, out, k]
  w.in_ch = static_cast<int>(weight.size(0));
  w.out_ch = static_cast<int>(weight.size(1));
  w.kernel = m->kernel;
  w.stride = m->stride;
  const std::vector<float> raw = Floats(weight);
  w.packed.resize(raw.size());
  for (int c = 0; c < w.in_ch; ++c)
    for (int o = 0; o < w.out_ch; ++o)
      for (int i = 0; i < w.kernel; ++i)
        w.packed[(static_cast<size_t>(i) * w.out_ch + o) * w.in_ch + c] =
            raw[(static_cast<size_t>(c) * w.out_ch + o) * w.kernel + i];
  w.bias = Floats(m->conv->bias);
  return w;
}

LinearWeights PackLinear(const torch::nn::Linear& m) {
  LinearWeights w;
  w.out = static_cast<int>(m->weight.size(0));
  w.in = static_cast<int>(m->weight.size(1));
  w.weight = Floats(m->weight);
  w.bias = Floats(m->bias);
  return w;
}

LayerNormWeights PackLayerNorm(const torch::nn::LayerNorm& m) {
  LayerNormWeights w;
  w.dim = static_cast<int>(m->weight.numel());
  w.eps = m->options.eps();
  w.gamma = Floats(m->weight);
  w.beta = Floats(m->bias);
  return w;
}

std::vector<LstmLayerWeights> PackLstm(const SLstm& m) {
  auto params = m->lstm->named_parameters();
  const auto& opts = m->lstm->options;
  PAST_REQUIRE(!opts.bidirectional(), kConfig, "streaming needs a unidirectional LSTM");
  std::vector<LstmLayerWeights> out;
  for (int64_t l = 0; l < opts.num_layers(); ++l) {
    const std::string s = std::to_string(l);
    LstmLayerWeights w;
    w.hidden = static_cast<int>(opts.hidden_size());
    w.w_ih = Floats(params["weight_ih_l" + s]);
    w.w_hh = Floats(params["weight_hh_l" + s]);
    w.b_ih = Floats(params["bias_ih_l" + s]);
    w.b_hh = Floats(params["bias_hh_l" + s]);
    w.in = static_cast<int>(w.w_ih.size() / (4 * static_cast<size_t>(w.hidden)));
    out.push_back(std::move(w));
  }
  return out;
}

CausalCodecWeights::Res PackRes(const ResBlock& m) {
  return {PackConv(m->conv1), PackConv(m->conv2)};
}

}  // namespace

std::shared_ptr<const CausalCodecWeights> CausalCodecWeights::FromModel(PastModel& model) {
  PAST_REQUIRE(model->cfg.causal, kConfig,
               "streaming requires a causal checkpoint (model.causal = true)");
  auto w = std::make_shared<CausalCodecWeights>();
  w->cfg = model->cfg;
  w->hop = model->cfg.Hop();

  const auto& enc = model->encoder;
  w->enc_in = PackConv(enc->conv_in);
  for (auto& s : *enc->stages) {
    auto stage = s->as<EncoderStageImpl>();
    EncoderStage st;
    for (auto& r : *stage->res)
      st.res.push_back(PackRes(ResBlock(std::dynamic_pointer_cast<ResBlockImpl>(r))));
    st.down = PackConv(stage->down);
    w->enc_stages.push_back(std::move(st));
  }
  w->enc_lstm = PackLstm(enc->lstm);
  w->enc_out = PackConv(enc->conv_out);

  w->use_transformer = static_cast<bool>(model->transformer);
  if (w->use_transformer) {
    const auto& t = model->transformer;
    w->window = t->cfg.window;
    w->trns_in = PackLinear(t->in_proj);
    w->trns_out = PackLinear(t->out_proj);
    w->trns_ln = PackLayerNorm(t->ln_out);
    for (auto& l : *t->layers) {
      auto layer = l->as<TransformerLayerImpl>();
      AttentionLayerWeights a;
      a.hidden = t->cfg.hidden;
      a.heads = layer->heads;
      a.ln1 = PackLayerNorm(layer->ln1);
      a.ln2 = PackLayerNorm(layer->ln2);
      a.qkv = PackLinear(layer->qkv);
      a.proj = PackLinear(layer->proj);
      a.ff1 = PackLinear(layer->ff1);
      a.ff2 = PackLinear(layer->ff2);
      w->trns_layers.push_back(std::move(a));
    }
  }

  for (int i = 0; i < model->cfg.rvq.n_q; ++i)
    w->codebooks.push_back(Floats(model->quantizer->layer(i)->embed));

  const auto& dec = model->decoder;
  w->dec_in = PackConv(dec->conv_in);
  w->dec_lstm = PackLstm(dec->lstm);
  for (auto& s : *dec->stages) {
    auto stage = s->as<DecoderStageImpl>();
    DecoderStage st;
    st.up = PackConvTranspose(stage->up);
    for (auto& r : *stage->res)
      st.res.push_back(PackRes(ResBlock(std::dynamic_pointer_cast<ResBlockImpl>(r))));
    w->dec_stages.push_back(std::move(st));
  }
  w->dec_out = PackConv(dec->conv_out);
  return w;
}

// ---------------------------------------------------------------------------
// Shared per-frame pieces

namespace {

void CheckNq(const CausalCodecWeights& w, int n_q) {
  PAST_REQUIRE(n_q >= 1 && n_q <= static_cast<int>(w.codebooks.size()), kArgument,
               "n_q must be in [1, " + std::to_string(w.codebooks.size()) + "]");
}

void Quantize(const CausalCodecWeights& w, const float* z, int n_q, int32_t* codes) {
  const int D = w.cfg.dim, K = w.cfg.rvq.codebook_size;
  std::vector<float> r(z, z + D);
  for (int i = 0; i < n_q; ++i) {
    const float* book = w.codebooks[i].data();
    const int idx = NearestCode(book, K, D, r.data());
    codes[i] = idx;
    const float* e = book + static_cast<size_t>(idx) * D;
    for (int c = 0; c < D; ++c) r[c] = r[c] - e[c];
  }
}

// Sum of the selected codebook rows, in stream order.
void Dequantize(const CausalCodecWeights& w, const TokenMatrix& tokens, int t, float* z) {
  const int D = w.cfg.dim;
  for (int i = 0; i < tokens.n_q; ++i) {
    const float* e = w.codebooks[i].data() + static_cast<size_t>(tokens.at(i, t)) * D;
    if (i == 0) {
      std::copy(e, e + D, z);
    } else {
      for (int c = 0; c < D; ++c) z[c] = z[c] + e[c];
    }
  }
}

void CheckTokens(const CausalCodecWeights& w, const TokenMatrix& tokens) {
  PAST_REQUIRE(tokens.n_q >= 1 && tokens.n_q <= static_cast<int>(w.codebooks.size()), kData,
               "token matrix has " + std::to_string(tokens.n_q) + " streams, model has " +
                   std::to_string(w.codebooks.size()));
  PAST_REQUIRE(tokens.indices.size() == static_cast<size_t>(tokens.n_q) * tokens.frames, kData,
               "token matrix size mismatch");
  for (int32_t v : tokens.indices) {
    PAST_REQUIRE(v >= 0 && v < w.cfg.rvq.codebook_size, kData,
                 "token index " + std::to_string(v) + " outside the codebook");
  }
}

// Transformer layer from its input frame to its output frame, given the
// rotated keys/values visible to this position (including its own).
struct LayerProjections {
  std::vector<float> q, k, v;
};

LayerProjections Project(const AttentionLayerWeights& a, const float* x, int64_t pos) {
  const int H = a.hidden, dh = H / a.heads;
  std::vector<float> n(H), qkv(3 * static_cast<size_t>(H));
  LayerNorm(a.ln1, x, n.data());
  Linear(a.qkv, n.data(), qkv.data());
  LayerProjections p{{qkv.begin(), qkv.begin() + H},
                     {qkv.begin() + H, qkv.begin() + 2 * H},
                     {qkv.begin() + 2 * H, qkv.end()}};
  RotateInPlace(p.q.data(), a.heads, dh, pos);
  RotateInPlace(p.k.data(), a.heads, dh, pos);
  return p;
}

void FinishLayer(const AttentionLayerWeights& a, const float* x, const float* q,
                 const float* const* keys, const float* const* values, int n_keys,
                 float* out) {
  const int H = a.hidden;
  std::vector<float> attn(H), proj(H), n(H), ff(a.ff1.out), back(H);
  AttendOne(q, keys, values, n_keys, a.heads, H / a.heads, attn.data());
  Linear(a.proj, attn.data(), proj.data());
  std::vector<float> h(H);
  for (int c = 0; c < H; ++c) h[c] = x[c] + proj[c];
  LayerNorm(a.ln2, h.data(), n.data());
  Linear(a.ff1, n.data(), ff.data());
  GeluInPlace(ff.data(), a.ff1.out);
  Linear(a.ff2, ff.data(), back.data());
  for (int c = 0; c < H; ++c) out[c] = h[c] + back[c];
}

void TransformerOutput(const CausalCodecWeights& w, const float* h, float* out) {
  std::vector<float> n(w.trns_ln.dim);
  LayerNorm(w.trns_ln, h, n.data());
  Linear(w.trns_out, n.data(), out);
}

void Mix(const float* z_conv, const float* z_trns, int D, float* out) {
  for (int c = 0; c < D; ++c) out[c] = (z_conv[c] + z_trns[c]) / 2.0f;
}

// ---------------------------------------------------------------------------
// Layer-wise reference

struct Seq {
  int ch = 0;
  int64_t T = 0;
  std::vector<float> data;  // time-major

  Seq() = default;
  Seq(int c, int64_t t) : ch(c), T(t), data(static_cast<size_t>(c) * t, 0.0f) {}
  float* col(int64_t t) { return data.data() + static_cast<size_t>(t) * ch; }
  const float* col(int64_t t) const { return data.data() + static_cast<size_t>(t) * ch; }
  ColumnFn Reader() const {
    return [this](int64_t t) -> const float* { return t < 0 || t >= T ? nullptr : col(t); };
  }
};

Seq Elu(Seq x) {
  EluInPlace(x.data.data(), static_cast<int>(x.data.size()));
  return x;
}

Seq RefConv(const ConvWeights& w, const Seq& in) {
  Seq out(w.out_ch, in.T / w.stride);
  const ColumnFn read = in.Reader();
  for (int64_t j = 0; j < out.T; ++j) ConvPoint(w, j, read, out.col(j));
  return out;
}

Seq RefConvTranspose(const ConvTransposeWeights& w, const Seq& in) {
  Seq out(w.out_ch, in.T * w.stride);
  const ColumnFn read = in.Reader();
  for (int64_t m = 0; m < out.T; ++m) ConvTransposePoint(w, m, read, out.col(m));
  return out;
}

Seq RefRes(const CausalCodecWeights::Res& r, const Seq& x) {
  const Seq y = RefConv(r.conv2, Elu(RefConv(r.conv1, Elu(x))));
  Seq out = x;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = x.data[i] + y.data[i];
  return out;
}

Seq RefLstm(const std::vector<LstmLayerWeights>& layers, const Seq& x) {
  Seq cur = x;
  for (const auto& l : layers) {
    Seq next(l.hidden, x.T);
    std::vector<float> h(l.hidden, 0.0f), c(l.hidden, 0.0f);
    for (int64_t t = 0; t < x.T; ++t) {
      LstmStep(l, cur.col(t), h.data(), c.data());
      std::copy(h.begin(), h.end(), next.col(t));
    }
    cur = std::move(next);
  }
  Seq out = cur;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = cur.data[i] + x.data[i];
  return out;
}

Seq RefTransformer(const CausalCodecWeights& w, const Seq& z) {
  const int H = w.trns_in.out;
  Seq h(H, z.T);
  for (int64_t t = 0; t < z.T; ++t) Linear(w.trns_in, z.col(t), h.col(t));
  for (const auto& a : w.trns_layers) {
    std::vector<LayerProjections> proj;
    proj.reserve(z.T);
    for (int64_t t = 0; t < z.T; ++t) proj.push_back(Project(a, h.col(t), t));
    Seq next(H, z.T);
    std::vector<const float*> keys, values;
    for (int64_t t = 0; t < z.T; ++t) {
      keys.clear();
      values.clear();
      for (int64_t j = std::max<int64_t>(0, t - w.window + 1); j <= t; ++j) {
        keys.push_back(proj[j].k.data());
        values.push_back(proj[j].v.data());
      }
      FinishLayer(a, h.col(t), proj[t].q.data(), keys.data(), values.data(),
                  static_cast<int>(keys.size()), next.col(t));
    }
    h = std::move(next);
  }
  Seq out(w.trns_out.out, z.T);
  for (int64_t t = 0; t < z.T; ++t) TransformerOutput(w, h.col(t), out.col(t));
  return out;
}

}  // namespace

ReferenceEncoding ReferenceEncode(const CausalCodecWeights& w, std::span<const float> samples,
                                  int n_q) {
  CheckNq(w, n_q);
  const int64_t frames = (static_cast<int64_t>(samples.size()) + w.hop - 1) / w.hop;
  Seq x(1, frames * w.hop);
  std::copy(samples.begin(), samples.end(), x.data.begin());
  Seq h = RefConv(w.enc_in, x);
  for (const auto& stage : w.enc_stages) {
    for (const auto& r : stage.res) h = RefRes(r, h);
    h = RefConv(stage.down, Elu(h));
  }
  h = RefLstm(w.enc_lstm, h);
  const Seq z_conv = RefConv(w.enc_out, Elu(h));
  Seq z = z_conv;
  if (w.use_transformer) {
    const Seq z_trns = RefTransformer(w, z_conv);
    for (int64_t t = 0; t < z.T; ++t) Mix(z_conv.col(t), z_trns.col(t), z.ch, z.col(t));
  }
  const int D = w.cfg.dim;
  ReferenceEncoding out;
  out.latent = LatentSequence(D, static_cast<int>(frames), w.cfg.FrameRate());
  out.tokens = TokenMatrix(n_q, static_cast<int>(frames), w.cfg.rvq.codebook_size,
                           w.cfg.FrameRate());
  std::vector<int32_t> codes(n_q);
  for (int64_t t = 0; t < frames; ++t) {
    for (int c = 0; c < D; ++c) out.latent.at(c, static_cast<int>(t)) = z.col(t)[c];
    Quantize(w, z.col(t), n_q, codes.data());
    for (int i = 0; i < n_q; ++i) out.tokens.at(i, static_cast<int>(t)) = codes[i];
  }
  return out;
}

std::vector<float> ReferenceDecode(const CausalCodecWeights& w, const TokenMatrix& tokens) {
  CheckTokens(w, tokens);
  Seq z(w.cfg.dim, tokens.frames);
  for (int t = 0; t < tokens.frames; ++t) Dequantize(w, tokens, t, z.col(t));
  Seq h = RefLstm(w.dec_lstm, RefConv(w.dec_in, z));
  for (const auto& stage : w.dec_stages) {
    h = RefConvTranspose(stage.up, Elu(h));
    for (const auto& r : stage.res) h = RefRes(r, h);
  }
  return RefConv(w.dec_out, Elu(h)).data;
}

// ---------------------------------------------------------------------------
// Incremental nodes

namespace {

// Last `capacity` columns of an append-only stream, addressed by absolute
// time. Negative times read as zero columns.
class ColumnRing {
 public:
  ColumnRing(int ch, int capacity)
      : ch_(ch), cap_(std::max(1, capacity)), data_(static_cast<size_t>(ch_) * cap_, 0.0f) {}

  float* Append() {
    float* slot = data_.data() + static_cast<size_t>(count_ % cap_) * ch_;
    ++count_;
    return slot;
  }
  const float* Get(int64_t t) const {
    if (t < 0) return nullptr;
    PAST_REQUIRE(t < count_ && t >= count_ - cap_, kState, "stream buffer underrun");
    return data_.data() + static_cast<size_t>(t % cap_) * ch_;
  }
  ColumnFn Reader() const {
    return [this](int64_t t) { return Get(t); };
  }
  int64_t count() const { return count_; }
  size_t floats() const { return data_.size(); }

 private:
  int ch_;
  int cap_;
  std::vector<float> data_;
  int64_t count_ = 0;
};

class ConvNode {
 public:
  ConvNode(const ConvWeights& w, bool elu_in)
      : w_(&w), elu_(elu_in), ring_(w.in_ch, w.Span()) {}

  // At most one output column per input column.
  bool Push(const float* in, float* out) {
    float* slot = ring_.Append();
    std::copy(in, in + w_->in_ch, slot);
    if (elu_) EluInPlace(slot, w_->in_ch);
    if ((next_ + 1) * w_->stride > ring_.count()) return false;
    ConvPoint(*w_, next_++, ring_.Reader(), out);
    return true;
  }
  size_t floats() const { return ring_.floats(); }

 private:
  const ConvWeights* w_;
  bool elu_;
  ColumnRing ring_;
  int64_t next_ = 0;
};

class ConvTransposeNode {
 public:
  explicit ConvTransposeNode(const ConvTransposeWeights& w)
      : w_(&w), ring_(w.in_ch, w.History()) {}

  // Exactly `stride` output columns per input column, written contiguously.
  void Push(const float* in, float* out) {
    float* slot = ring_.Append();
    std::copy(in, in + w_->in_ch, slot);
    EluInPlace(slot, w_->in_ch);
    const int64_t j = ring_.count() - 1;
    for (int r = 0; r < w_->stride; ++r)
      ConvTransposePoint(*w_, j * w_->stride + r, ring_.Reader(),
                         out + static_cast<size_t>(r) * w_->out_ch);
  }
  size_t floats() const { return ring_.floats(); }

 private:
  const ConvTransposeWeights* w_;
  ColumnRing ring_;
};

class ResNode {
 public:
  explicit ResNode(const CausalCodecWeights::Res& r)
      : conv1_(r.conv1, true), conv2_(r.conv2, true),
        mid_(r.conv1.out_ch), y_(r.conv2.out_ch) {}

  void Push(const float* in, float* out) {
    conv1_.Push(in, mid_.data());
    conv2_.Push(mid_.data(), y_.data());
    for (size_t c = 0; c < y_.size(); ++c) out[c] = in[c] + y_[c];
  }
  size_t floats() const { return conv1_.floats() + conv2_.floats() + mid_.size() + y_.size(); }

 private:
  ConvNode conv1_, conv2_;
  std::vector<float> mid_, y_;
};

class LstmNode {
 public:
  explicit LstmNode(const std::vector<LstmLayerWeights>& layers) : layers_(&layers) {
    for (const auto& l : layers) {
      h_.emplace_back(l.hidden, 0.0f);
      c_.emplace_back(l.hidden, 0.0f);
    }
  }

  void Push(const float* in, float* out) {
    const float* cur = in;
    for (size_t l = 0; l < layers_->size(); ++l) {
      LstmStep((*layers_)[l], cur, h_[l].data(), c_[l].data());
      cur = h_[l].data();
    }
    for (size_t c = 0; c < h_.back().size(); ++c) out[c] = cur[c] + in[c];
  }
  size_t floats() const { return 2 * h_.size() * h_.front().size(); }

 private:
  const std::vector<LstmLayerWeights>* layers_;
  std::vector<std::vector<float>> h_, c_;
};

// Causal transformer with a rolling key/value window per layer.
class TransformerNode {
 public:
  explicit TransformerNode(const CausalCodecWeights& w) : w_(&w), caches_(w.trns_layers.size()) {}

  void Push(const float* z, float* out) {
    const int H = w_->trns_in.out;
    std::vector<float> h(H), next(H);
    Linear(w_->trns_in, z, h.data());
    std::vector<const float*> keys, values;
    for (size_t l = 0; l < w_->trns_layers.size(); ++l) {
      const auto& a = w_->trns_layers[l];
      auto& cache = caches_[l];
      LayerProjections p = Project(a, h.data(), pos_);
      cache.push_back(std::move(p));
      if (static_cast<int>(cache.size()) > w_->window) cache.pop_front();
      keys.clear();
      values.clear();
      for (const auto& e : cache) {
        keys.push_back(e.k.data());
        values.push_back(e.v.data());
      }
      FinishLayer(a, h.data(), cache.back().q.data(), keys.data(), values.data(),
                  static_cast<int>(keys.size()), next.data());
      std::swap(h, next);
    }
    TransformerOutput(*w_, h.data(), out);
    ++pos_;
  }
  size_t floats() const {
    size_t n = 0;
    for (const auto& c : caches_) n += c.size() * 3 * w_->trns_in.out;
    return n;
  }

 private:
  const CausalCodecWeights* w_;
  std::vector<std::deque<LayerProjections>> caches_;
  int64_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// StreamEncoder

struct StreamEncoder::State {
  explicit State(const CausalCodecWeights& w)
      : conv_in(w.enc_in, false), lstm(w.enc_lstm), conv_out(w.enc_out, true) {
    for (const auto& stage : w.enc_stages) {
      std::vector<ResNode> r;
      for (const auto& res : stage.res) r.emplace_back(res);
      res.push_back(std::move(r));
      down.emplace_back(stage.down, true);
    }
    if (w.use_transformer) transformer.emplace_back(w);
  }

  ConvNode conv_in;
  std::vector<std::vector<ResNode>> res;
  std::vector<ConvNode> down;
  LstmNode lstm;
  ConvNode conv_out;
  std::vector<TransformerNode> transformer;  // empty or one node
  std::deque<std::vector<int32_t>> pending;  // computed, not yet released
  int64_t consumed = 0;
  int64_t emitted = 0;
  bool closed = false;
};

StreamEncoder::StreamEncoder(std::shared_ptr<const CausalCodecWeights> weights, int n_q)
    : weights_(std::move(weights)), n_q_(n_q) {
  PAST_REQUIRE(weights_ != nullptr, kArgument, "stream encoder needs weights");
  CheckNq(*weights_, n_q_);
  Reset();
}

StreamEncoder::~StreamEncoder() = default;
StreamEncoder::StreamEncoder(StreamEncoder&&) noexcept = default;
StreamEncoder& StreamEncoder::operator=(StreamEncoder&&) noexcept = default;

void StreamEncoder::Reset() { state_ = std::make_unique<State>(*weights_); }

namespace {

// Runs one sample through the encoder graph; returns true with the frame's
// codes once a whole hop has been consumed.
template <typename S>
bool PushSample(const CausalCodecWeights& w, S& s, float sample, int n_q,
                std::vector<int32_t>& codes) {
  std::vector<float> a(static_cast<size_t>(w.enc_in.out_ch)), b;
  s.conv_in.Push(&sample, a.data());
  for (size_t k = 0; k < s.down.size(); ++k) {
    for (auto& r : s.res[k]) {
      b.resize(a.size());
      r.Push(a.data(), b.data());
      std::swap(a, b);
    }
    b.resize(w.enc_stages[k].down.out_ch);
    if (!s.down[k].Push(a.data(), b.data())) return false;
    std::swap(a, b);
  }
  b.resize(a.size());
  s.lstm.Push(a.data(), b.data());
  std::vector<float> z_conv(w.cfg.dim);
  s.conv_out.Push(b.data(), z_conv.data());
  std::vector<float> z = z_conv;
  if (!s.transformer.empty()) {
    std::vector<float> z_trns(w.cfg.dim);
    s.transformer.front().Push(z_conv.data(), z_trns.data());
    Mix(z_conv.data(), z_trns.data(), w.cfg.dim, z.data());
  }
  codes.resize(n_q);
  Quantize(w, z.data(), n_q, codes.data());
  return true;
}

TokenMatrix Release(std::deque<std::vector<int32_t>>& pending, int64_t count, int n_q,
                    const CausalCodecWeights& w) {
  TokenMatrix out(n_q, static_cast<int>(count), w.cfg.rvq.codebook_size, w.cfg.FrameRate());
  for (int t = 0; t < count; ++t) {
    for (int i = 0; i < n_q; ++i) out.at(i, t) = pending.front()[i];
    pending.pop_front();
  }
  return out;
}

}  // namespace

TokenMatrix StreamEncoder::Feed(std::span<const float> samples) {
  State& s = *state_;
  PAST_REQUIRE(!s.closed, kState, "feed on a closed stream");
  const CausalCodecWeights& w = *weights_;
  std::vector<int32_t> codes;
  for (float v : samples) {
    ++s.consumed;
    if (PushSample(w, s, v, n_q_, codes)) s.pending.push_back(codes);
  }
  // Frame k needs (k + 2) * hop samples: its own hop plus the look-ahead.
  const int64_t releasable = std::max<int64_t>(0, s.consumed / w.hop - 1);
  const int64_t count = std::min<int64_t>(releasable - s.emitted,
                                          static_cast<int64_t>(s.pending.size()));
  s.emitted += count;
  return Release(s.pending, count, n_q_, w);
}

TokenMatrix StreamEncoder::Flush() {
  State& s = *state_;
  PAST_REQUIRE(!s.closed, kState, "flush on a closed stream");
  const CausalCodecWeights& w = *weights_;
  std::vector<int32_t> codes;
  const int64_t partial = s.consumed % w.hop;
  if (partial != 0) {
    for (int64_t i = partial; i < w.hop; ++i) {
      if (PushSample(w, s, 0.0f, n_q_, codes)) s.pending.push_back(codes);
    }
  }
  const int64_t count = static_cast<int64_t>(s.pending.size());
  s.emitted += count;
  s.closed = true;
  return Release(s.pending, count, n_q_, w);
}

int64_t StreamEncoder::frames_emitted() const { return state_->emitted; }
int64_t StreamEncoder::samples_consumed() const { return state_->consumed; }
bool StreamEncoder::closed() const { return state_->closed; }

size_t StreamEncoder::StateFloats() const {
  const State& s = *state_;
  size_t n = s.conv_in.floats() + s.lstm.floats() + s.conv_out.floats();
  for (const auto& stage : s.res)
    for (const auto& r : stage) n += r.floats();
  for (const auto& d : s.down) n += d.floats();
  for (const auto& t : s.transformer) n += t.floats();
  return n + s.pending.size() * n_q_;
}

// ---------------------------------------------------------------------------
// StreamDecoder

struct StreamDecoder::State {
  explicit State(const CausalCodecWeights& w)
      : conv_in(w.dec_in, false), lstm(w.dec_lstm), conv_out(w.dec_out, true) {
    for (const auto& stage : w.dec_stages) {
      up.emplace_back(stage.up);
      std::vector<ResNode> r;
      for (const auto& res : stage.res) r.emplace_back(res);
      res.push_back(std::move(r));
    }
  }

  ConvNode conv_in;
  LstmNode lstm;
  std::vector<ConvTransposeNode> up;
  std::vector<std::vector<ResNode>> res;
  ConvNode conv_out;
  int64_t frames = 0;
  bool closed = false;
};

StreamDecoder::StreamDecoder(std::shared_ptr<const CausalCodecWeights> weights)
    : weights_(std::move(weights)) {
  PAST_REQUIRE(weights_ != nullptr, kArgument, "stream decoder needs weights");
  Reset();
}

StreamDecoder::~StreamDecoder() = default;
StreamDecoder::StreamDecoder(StreamDecoder&&) noexcept = default;
StreamDecoder& StreamDecoder::operator=(StreamDecoder&&) noexcept = default;

void StreamDecoder::Reset() { state_ = std::make_unique<State>(*weights_); }

std::vector<float> StreamDecoder::Feed(const TokenMatrix& tokens) {
  State& s = *state_;
  PAST_REQUIRE(!s.closed, kState, "feed on a closed decode stream");
  const CausalCodecWeights& w = *weights_;
  CheckTokens(w, tokens);
  std::vector<float> out;
  out.reserve(static_cast<size_t>(tokens.frames) * w.hop);
  std::vector<float> z(w.cfg.dim), a(w.dec_in.out_ch), b(w.dec_in.out_ch);
  for (int t = 0; t < tokens.frames; ++t) {
    Dequantize(w, tokens, t, z.data());
    s.conv_in.Push(z.data(), a.data());
    s.lstm.Push(a.data(), b.data());
    // Columns at the current rate, time-major.
    std::vector<float> cols = b;
    int ch = w.dec_in.out_ch;
    for (size_t k = 0; k < s.up.size(); ++k) {
      const auto& up = w.dec_stages[k].up;
      const int64_t n_in = static_cast<int64_t>(cols.size()) / ch;
      std::vector<float> next(static_cast<size_t>(n_in) * up.stride * up.out_ch);
      for (int64_t j = 0; j < n_in; ++j)
        s.up[k].Push(cols.data() + j * ch, next.data() + j * up.stride * up.out_ch);
      ch = up.out_ch;
      std::vector<float> tmp(ch);
      for (auto& r : s.res[k]) {
        for (size_t j = 0; j < next.size() / ch; ++j) {
          r.Push(next.data() + j * ch, tmp.data());
          std::copy(tmp.begin(), tmp.end(), next.data() + j * ch);
        }
      }
      cols = std::move(next);
    }
    float sample;
    for (size_t j = 0; j < cols.size() / ch; ++j) {
      s.conv_out.Push(cols.data() + j * ch, &sample);
      out.push_back(sample);
    }
    ++s.frames;
  }
  return out;
}

void StreamDecoder::Close() {
  PAST_REQUIRE(!state_->closed, kState, "decode stream already closed");
  state_->closed = true;
}

int64_t StreamDecoder::frames_consumed() const { return state_->frames; }
bool StreamDecoder::closed() const { return state_->closed; }

size_t StreamDecoder::StateFloats() const {
  const State& s = *state_;
  size_t n = s.conv_in.floats() + s.lstm.floats() + s.conv_out.floats();
  for (const auto& u : s.up) n += u.floats();
  for (const auto& stage : s.res)
    for (const auto& r : stage) n += r.floats();
  return n;
}

}  // namespace past
