// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "codec/model.h"

#include "core/errors.h"

namespace F = torch::nn::functional;

namespace past {

torch::Tensor MixLatents(const torch::Tensor& z_conv, const torch::Tensor& z_trns,
                         MixMode mode) {
  PAST_REQUIRE(z_conv.sizes() == z_trns.sizes(), kArgument,
               "mix_latents: latent shapes differ");
  switch (mode) {
    case MixMode::kTransformerOnly: return z_trns;
    case MixMode::kSkipOnly: return z_conv;
    case MixMode::kAverage: return (z_conv + z_trns) / 2.0;
  }
  return z_trns;
}

MixMode SampleMixMode(std::mt19937_64& rng, double p_trns_only, double p_skip_only) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < p_trns_only) return MixMode::kTransformerOnly;
  if (u < p_trns_only + p_skip_only) return MixMode::kSkipOnly;
  return MixMode::kAverage;
}

torch::Tensor PadToHop(const torch::Tensor& x, int hop) {
  const int64_t n = x.size(-1);
  const int64_t padded = (n + hop - 1) / hop * hop;
  if (padded == n) return x;
  return F::pad(x, F::PadFuncOptions({0, padded - n}));
}

PastModelImpl::PastModelImpl(const ModelConfig& cfg_) : cfg(cfg_) {
  encoder = register_module("encoder", SeanetEncoder(cfg));
  if (cfg.use_transformer) {
    transformer = register_module(
        "transformer", TransformerStack(cfg.dim, cfg.dim, cfg.transformer, cfg.causal));
  }
  quantizer = register_module("quantizer", ResidualVq(cfg.dim, cfg.rvq));
  decoder = register_module("decoder", SeanetDecoder(cfg));
  ctc_head = register_module("ctc_head", CtcHead(cfg.dim, cfg.ctc_hidden));
  phone_head = register_module("phone_head", PhoneHead(cfg.dim, cfg.n_phones));
}

torch::Tensor PastModelImpl::ConvEncode(const torch::Tensor& x) {
  PAST_REQUIRE(x.dim() == 3 && x.size(1) == 1, kArgument, "expected [B, 1, N] audio");
  PAST_REQUIRE(x.size(2) > 0, kArgument, "empty audio input");
  return encoder(PadToHop(x, cfg.Hop()));
}

torch::Tensor PastModelImpl::TransformerEncode(const torch::Tensor& z_conv) {
  PAST_REQUIRE(z_conv.size(1) == cfg.dim, kArgument, "latent channel mismatch");
  if (!transformer) return z_conv;
  return transformer->Encode(z_conv);
}

torch::Tensor PastModelImpl::Decode(const torch::Tensor& z_hat) {
  PAST_REQUIRE(z_hat.dim() == 3 && z_hat.size(1) == cfg.dim, kConfig,
               "decoder expects " + std::to_string(cfg.dim) + " latent channels");
  return decoder(z_hat);
}

ForwardOutputs PastModelImpl::forward(const torch::Tensor& x, MixMode mode, int n_q,
                                      const ForwardOptions& opts) {
  ForwardOutputs out;
  const int64_t n = x.size(-1);
  out.z_conv = ConvEncode(x);
  out.z_trns = TransformerEncode(out.z_conv);
  out.z_mixed = transformer ? MixLatents(out.z_conv, out.z_trns, mode) : out.z_conv;
  out.rvq = quantizer->forward(out.z_mixed, n_q, opts.update, opts.frozen);
  // Training (straight-through) and frozen runs need gradient through the
  // quantizer; plain inference decodes the exact code sum.
  const bool surrogate = torch::GradMode::is_enabled() || opts.frozen != nullptr;
  torch::Tensor z_hat = surrogate ? out.rvq.quantized : out.rvq.sum;
  out.x_hat = Decode(z_hat).narrow(-1, 0, n);
  if (opts.run_ctc_head) out.ctc_logits = ctc_head(out.rvq.first);
  if (opts.run_phone_head) out.phone_logits = phone_head(out.rvq.first);
  return out;
}

torch::Tensor AudioToTensor(const AudioSegment& audio) {
  PAST_REQUIRE(!audio.samples.empty(), kArgument, "empty audio input");
  return torch::from_blob(const_cast<float*>(audio.samples.data()),
                          {1, 1, static_cast<int64_t>(audio.samples.size())},
                          torch::kFloat32)
      .clone();
}

LatentSequence TensorToLatent(const torch::Tensor& z_bdt, int64_t item, int frame_rate) {
  auto z = z_bdt[item].detach().to(torch::kFloat32).contiguous();
  LatentSequence out(static_cast<int>(z.size(0)), static_cast<int>(z.size(1)), frame_rate);
  std::copy(z.data_ptr<float>(), z.data_ptr<float>() + z.numel(), out.values.begin());
  return out;
}

torch::Tensor LatentToTensor(const LatentSequence& z) {
  return torch::from_blob(const_cast<float*>(z.values.data()), {1, z.channels, z.frames},
                          torch::kFloat32)
      .clone();
}

TokenMatrix PastModelImpl::Encode(const AudioSegment& audio, int n_q) {
  PAST_REQUIRE(audio.sample_rate == cfg.sample_rate, kConfig,
               "sample rate " + std::to_string(audio.sample_rate) +
                   " does not match the model (" + std::to_string(cfg.sample_rate) + ")");
  torch::NoGradGuard guard;
  auto x = AudioToTensor(audio).to(encoder->conv_in->conv->weight.dtype());
  auto z_conv = ConvEncode(x);
  auto z = transformer ? MixLatents(z_conv, TransformerEncode(z_conv), MixMode::kAverage)
                       : z_conv;
  auto codes = quantizer->forward(z, n_q).codes[0].contiguous();  // [n_q, T]
  TokenMatrix tokens(n_q, static_cast<int>(codes.size(1)), cfg.rvq.codebook_size,
                     cfg.FrameRate());
  auto acc = codes.accessor<int64_t, 2>();
  for (int q = 0; q < n_q; ++q)
    for (int t = 0; t < tokens.frames; ++t) tokens.at(q, t) = static_cast<int32_t>(acc[q][t]);
  return tokens;
}

AudioSegment PastModelImpl::DecodeTokens(const TokenMatrix& tokens, int n_q) {
  if (n_q < 0) n_q = tokens.n_q;
  PAST_REQUIRE(n_q >= 1 && n_q <= tokens.n_q, kArgument, "decode n_q out of range");
  PAST_REQUIRE(tokens.codebook_size == cfg.rvq.codebook_size, kData,
               "token codebook size does not match the model");
  tokens.Validate();
  torch::NoGradGuard guard;
  std::vector<int64_t> flat(tokens.indices.begin(), tokens.indices.end());
  auto codes = torch::tensor(flat, torch::kInt64).view({1, tokens.n_q, tokens.frames});
  auto z = quantizer->Decode(codes, n_q);
  auto y = Decode(z.to(encoder->conv_in->conv->weight.dtype()))
               .to(torch::kFloat32)
               .contiguous();
  AudioSegment out;
  out.sample_rate = cfg.sample_rate;
  out.samples.assign(y.data_ptr<float>(), y.data_ptr<float>() + y.numel());
  return out;
}

std::vector<torch::Tensor> PastModelImpl::GeneratorParameters() { return parameters(); }

std::vector<torch::Tensor> PastModelImpl::TransformerParameters() {
  if (!transformer) return {};
  return transformer->parameters();
}

void ExportModule(const torch::nn::Module& module, const std::string& prefix, TensorArchive& ar) {
  auto put = [&](const std::string& name, const torch::Tensor& t) {
    auto c = t.detach().to(torch::kFloat32).contiguous();
    std::vector<int64_t> shape(c.sizes().begin(), c.sizes().end());
    ar.Put(prefix + name, shape,
           std::vector<float>(c.data_ptr<float>(), c.data_ptr<float>() + c.numel()));
  };
  for (const auto& p : module.named_parameters(true)) put(p.key(), p.value());
  for (const auto& b : module.named_buffers(true)) put(b.key(), b.value());
}

void ImportModule(torch::nn::Module& module, const std::string& prefix,
                  const TensorArchive& ar) {
  torch::NoGradGuard guard;
  auto load = [&](const std::string& name, torch::Tensor t) {
    const ArchiveTensor& src = ar.Get(prefix + name);
    PAST_REQUIRE(src.numel() == t.numel(), kCheckpoint,
                 "tensor '" + prefix + name + "' has the wrong size");
    auto v = torch::from_blob(const_cast<float*>(src.values.data()), t.sizes(), torch::kFloat32);
    t.copy_(v.to(t.dtype()));
  };
  for (auto& p : module.named_parameters(true)) load(p.key(), p.value());
  for (auto& b : module.named_buffers(true)) load(b.key(), b.value());
}

void SaveModel(PastModel& model, const std::string& path) {
  TensorArchive ar;
  ar.meta["model"] = ModelConfigToJson(model->cfg);
  ar.meta["kind"] = "past-model";
  ExportModule(*model, "model.", ar);
  ar.Save(path);
}

PastModel LoadModel(const TensorArchive& ar) {
  PAST_REQUIRE(ar.meta.contains("model"), kCheckpoint, "checkpoint has no model config");
  PastModel model(ModelConfigFromJson(ar.meta["model"]));
  ImportModule(*model, "model.", ar);
  return model;
}

PastModel LoadModel(const std::string& path) { return LoadModel(TensorArchive::Load(path)); }

}  // namespace past
