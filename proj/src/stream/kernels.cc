// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "stream/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace past {

void ConvPoint(const ConvWeights& w, int64_t j, const ColumnFn& column, float* out) {
  std::copy(w.bias.begin(), w.bias.end(), out);
  const int64_t first = j * w.stride - w.LeftPad();
  for (int i = 0; i < w.kernel; ++i) {
    const float* x = column(first + static_cast<int64_t>(i) * w.dilation);
    if (x == nullptr) continue;
    const float* wi = w.packed.data() + static_cast<size_t>(i) * w.out_ch * w.in_ch;
    for (int o = 0; o < w.out_ch; ++o) {
      const float* row = wi + static_cast<size_t>(o) * w.in_ch;
      float acc = 0.0f;
      for (int c = 0; c < w.in_ch; ++c) acc += row[c] * x[c];
      out[o] += acc;
    }
  }
}

void ConvTransposePoint(const ConvTransposeWeights& w, int64_t m, const ColumnFn& column,
                        float* out) {
  std::copy(w.bias.begin(), w.bias.end(), out);
  const int64_t last = m / w.stride;
  for (int64_t j = last; j >= 0 && j > last - w.History(); --j) {
    const int64_t i = m - j * w.stride;
    if (i >= w.kernel) break;
    const float* x = column(j);
    if (x == nullptr) continue;
    const float* wi = w.packed.data() + static_cast<size_t>(i) * w.out_ch * w.in_ch;
    for (int o = 0; o < w.out_ch; ++o) {
      const float* row = wi + static_cast<size_t>(o) * w.in_ch;
      float acc = 0.0f;
      for (int c = 0; c < w.in_ch; ++c) acc += row[c] * x[c];
      out[o] += acc;
    }
  }
}

void EluInPlace(float* x, int n) {
  for (int i = 0; i < n; ++i) {
    if (x[i] <= 0.0f) x[i] = std::expm1(x[i]);
  }
}

void Linear(const LinearWeights& w, const float* x, float* out) {
  for (int o = 0; o < w.out; ++o) {
    const float* row = w.weight.data() + static_cast<size_t>(o) * w.in;
    float acc = 0.0f;
    for (int c = 0; c < w.in; ++c) acc += row[c] * x[c];
    out[o] = acc + w.bias[o];
  }
}

void LayerNorm(const LayerNormWeights& w, const float* x, float* out) {
  double mean = 0.0;
  for (int i = 0; i < w.dim; ++i) mean += x[i];
  mean /= w.dim;
  double var = 0.0;
  for (int i = 0; i < w.dim; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= w.dim;
  const double inv = 1.0 / std::sqrt(var + w.eps);
  for (int i = 0; i < w.dim; ++i) {
    out[i] = static_cast<float>((x[i] - mean) * inv) * w.gamma[i] + w.beta[i];
  }
}

void GeluInPlace(float* x, int n) {
  for (int i = 0; i < n; ++i) {
    const double v = x[i];
    x[i] = static_cast<float>(0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))));
  }
}

namespace {

float Sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

}  // namespace

void LstmStep(const LstmLayerWeights& w, const float* x, float* h, float* c) {
  const int H = w.hidden;
  std::vector<float> gates(4 * static_cast<size_t>(H));
  for (int g = 0; g < 4 * H; ++g) {
    const float* ri = w.w_ih.data() + static_cast<size_t>(g) * w.in;
    const float* rh = w.w_hh.data() + static_cast<size_t>(g) * H;
    float a = 0.0f, b = 0.0f;
    for (int k = 0; k < w.in; ++k) a += ri[k] * x[k];
    for (int k = 0; k < H; ++k) b += rh[k] * h[k];
    gates[g] = (a + w.b_ih[g]) + (b + w.b_hh[g]);
  }
  for (int k = 0; k < H; ++k) {
    const float i = Sigmoid(gates[k]);
    const float f = Sigmoid(gates[H + k]);
    const float g = std::tanh(gates[2 * H + k]);
    const float o = Sigmoid(gates[3 * H + k]);
    c[k] = f * c[k] + i * g;
    h[k] = o * std::tanh(c[k]);
  }
}

void RotateInPlace(float* x, int heads, int head_dim, int64_t pos) {
  const int half = head_dim / 2;
  for (int k = 0; k < half; ++k) {
    const double freq = std::pow(10000.0, -2.0 * k / head_dim);
    const double angle = static_cast<double>(pos) * freq;
    const float cs = static_cast<float>(std::cos(angle));
    const float sn = static_cast<float>(std::sin(angle));
    for (int h = 0; h < heads; ++h) {
      float* v = x + static_cast<size_t>(h) * head_dim;
      const float a = v[k], b = v[k + half];
      v[k] = a * cs - b * sn;
      v[k + half] = a * sn + b * cs;
    }
  }
}

void AttendOne(const float* q, const float* const* keys, const float* const* values,
               int n_keys, int heads, int head_dim, float* out) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<double> score(n_keys);
  for (int h = 0; h < heads; ++h) {
    const size_t off = static_cast<size_t>(h) * head_dim;
    double top = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_keys; ++j) {
      double s = 0.0;
      for (int d = 0; d < head_dim; ++d) s += static_cast<double>(q[off + d]) * keys[j][off + d];
      score[j] = s * scale;
      top = std::max(top, score[j]);
    }
    double total = 0.0;
    for (int j = 0; j < n_keys; ++j) {
      score[j] = std::exp(score[j] - top);
      total += score[j];
    }
    for (int d = 0; d < head_dim; ++d) {
      double acc = 0.0;
      for (int j = 0; j < n_keys; ++j) acc += score[j] * values[j][off + d];
      out[off + d] = static_cast<float>(acc / total);
    }
  }
}

int NearestCode(const float* codebook, int size, int dim, const float* x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size; ++k) {
    const float* e = codebook + static_cast<size_t>(k) * dim;
    double d = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double diff = static_cast<double>(x[c]) - e[c];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace past
