// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace past {

// Per-output-point kernels shared by the incremental engine and the layer-wise
// reference pass. Both routes call exactly these functions with the same
// inputs, so their results agree bit for bit; only the bookkeeping of which
// columns are available differs.

// Returns the input column at absolute time t, or nullptr for a zero column
// (left padding).
using ColumnFn = std::function<const float*(int64_t)>;

// Conv1d with left-only padding of (kernel - 1) * dilation + 1 - stride.
// Weights are repacked tap-major: packed[(i * out + o) * in + c].
struct ConvWeights {
  int in_ch = 0, out_ch = 0, kernel = 1, stride = 1, dilation = 1;
  std::vector<float> packed;
  std::vector<float> bias;

  int LeftPad() const { return (kernel - 1) * dilation + 1 - stride; }
  int Span() const { return (kernel - 1) * dilation + 1; }
};

// ConvTranspose1d whose kernel - stride trailing samples are trimmed.
// packed[(i * out + o) * in + c] as above.
struct ConvTransposeWeights {
  int in_ch = 0, out_ch = 0, kernel = 1, stride = 1;
  std::vector<float> packed;
  std::vector<float> bias;

  int History() const { return (kernel + stride - 1) / stride; }
};

struct LinearWeights {
  int in = 0, out = 0;
  std::vector<float> weight;  // [out][in]
  std::vector<float> bias;
};

struct LayerNormWeights {
  int dim = 0;
  double eps = 1e-5;
  std::vector<float> gamma, beta;
};

// Unidirectional LSTM layer in the gate order i, f, g, o.
struct LstmLayerWeights {
  int in = 0, hidden = 0;
  std::vector<float> w_ih, w_hh, b_ih, b_hh;  // [4H][in], [4H][H], [4H], [4H]
};

struct AttentionLayerWeights {
  int hidden = 0, heads = 1;
  LayerNormWeights ln1, ln2;
  LinearWeights qkv, proj, ff1, ff2;
};

// Output frame j of a causal conv.
void ConvPoint(const ConvWeights& w, int64_t j, const ColumnFn& column, float* out);

// Output sample m of a right-trimmed transposed conv; reads inputs
// floor(m / stride) - History() + 1 .. floor(m / stride).
void ConvTransposePoint(const ConvTransposeWeights& w, int64_t m, const ColumnFn& column,
                        float* out);

void EluInPlace(float* x, int n);
void Linear(const LinearWeights& w, const float* x, float* out);
void LayerNorm(const LayerNormWeights& w, const float* x, float* out);
void GeluInPlace(float* x, int n);

// One time step; h and c are updated in place, h is also the output.
void LstmStep(const LstmLayerWeights& w, const float* x, float* h, float* c);

// Rotates each head of x ([heads][head_dim]) to absolute position `pos`.
void RotateInPlace(float* x, int heads, int head_dim, int64_t pos);

// Causal self-attention output for one query against `n_keys` cached frames
// (rotated keys and values, [hidden] each, oldest first, the last being the
// query's own frame). Writes the concatenated head outputs.
void AttendOne(const float* q, const float* const* keys, const float* const* values,
               int n_keys, int heads, int head_dim, float* out);

// Index of the nearest codebook row (squared Euclidean, first minimum wins).
int NearestCode(const float* codebook, int size, int dim, const float* x);

}  // namespace past
