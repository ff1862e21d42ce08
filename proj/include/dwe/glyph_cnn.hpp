/*
 * Copyright 2026 The DWE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dwe/error.hpp"
#include "dwe/morphology.hpp"
#include "dwe/random.hpp"

namespace dwe {

/// LeNet-style glyph encoder:
///   28x28 -> conv5x5(6) -> ReLU -> maxpool2 -> conv5x5(16) -> ReLU -> maxpool2
///   -> fc 256->120 -> ReLU -> fc 120->84 -> ReLU -> fc 84->d.
/// Convolutions are valid cross-correlations with stride 1. One instance is
/// shared by every character.
template <typename Real>
struct CnnParams {
  static constexpr int kInputSide = GlyphBitmap::kSide;
  static constexpr int kKernel = 5;
  static constexpr int kConv1Maps = 6;
  static constexpr int kConv1Side = kInputSide - kKernel + 1;  // 24
  static constexpr int kPool1Side = kConv1Side / 2;            // 12
  static constexpr int kConv2Maps = 16;
  static constexpr int kConv2Side = kPool1Side - kKernel + 1;  // 8
  static constexpr int kPool2Side = kConv2Side / 2;            // 4
  static constexpr int kFlat = kConv2Maps * kPool2Side * kPool2Side;  // 256
  static constexpr int kFc1 = 120;
  static constexpr int kFc2 = 84;
  static constexpr std::size_t kTensorCount = 10;

  int out_dim = 0;
  // Layouts: conv1_w [map][row][col]; conv2_w [map][in_map][row][col];
  // fc*_w [out][in].
  std::vector<Real> conv1_w, conv1_b;
  std::vector<Real> conv2_w, conv2_b;
  std::vector<Real> fc1_w, fc1_b;
  std::vector<Real> fc2_w, fc2_b;
  std::vector<Real> fc3_w, fc3_b;
  /// Bumped by optimizers after every update; tapes record it.
  std::uint64_t revision = 0;

  static CnnParams zeros(int out_dim) {
    if (out_dim < 1) throw ConfigError("CNN output dimension must be >= 1");
    CnnParams p;
    p.out_dim = out_dim;
    const auto sizes = tensor_sizes(out_dim);
    std::size_t i = 0;
    for (auto* t : {&p.conv1_w, &p.conv1_b, &p.conv2_w, &p.conv2_b, &p.fc1_w, &p.fc1_b,
                    &p.fc2_w, &p.fc2_b, &p.fc3_w, &p.fc3_b}) {
      t->assign(sizes[i++], Real(0));
    }
    return p;
  }

  std::array<std::span<Real>, kTensorCount> tensors() {
    return {conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b, fc3_w, fc3_b};
  }
  std::array<std::span<const Real>, kTensorCount> tensors() const {
    return {conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b, fc3_w, fc3_b};
  }
  static constexpr std::array<const char*, kTensorCount> tensor_names() {
    return {"conv1_w", "conv1_b", "conv2_w", "conv2_b", "fc1_w",
            "fc1_b",   "fc2_w",   "fc2_b",   "fc3_w",   "fc3_b"};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (auto t : tensors()) n += t.size();
    return n;
  }

  static std::array<std::size_t, kTensorCount> tensor_sizes(int out_dim) {
    const auto d = static_cast<std::size_t>(out_dim);
    return {kConv1Maps * kKernel * kKernel, kConv1Maps,
            kConv2Maps * kConv1Maps * kKernel * kKernel, kConv2Maps,
            kFc1 * kFlat, kFc1,
            kFc2 * kFc1, kFc2,
            d * kFc2, d};
  }

  bool shapes_valid() const {
    if (out_dim < 1) return false;
    const auto want = tensor_sizes(out_dim);
    const auto mine = tensors();
    for (std::size_t i = 0; i < kTensorCount; ++i) {
      if (mine[i].size() != want[i]) return false;
    }
    return true;
  }

  void set_zero() {
    for (auto t : tensors()) std::fill(t.begin(), t.end(), Real(0));
  }

  bool all_finite() const {
    for (auto t : tensors()) {
      for (Real v : t) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

  template <typename Other>
  CnnParams<Other> cast() const {
    CnnParams<Other> out = CnnParams<Other>::zeros(out_dim);
    auto dst = out.tensors();
    const auto src = tensors();
    for (std::size_t i = 0; i < kTensorCount; ++i) {
      std::transform(src[i].begin(), src[i].end(), dst[i].begin(),
                     [](Real v) { return static_cast<Other>(v); });
    }
    return out;
  }

  bool operator==(const CnnParams& other) const {
    return out_dim == other.out_dim && conv1_w == other.conv1_w && conv1_b == other.conv1_b &&
           conv2_w == other.conv2_w && conv2_b == other.conv2_b && fc1_w == other.fc1_w &&
           fc1_b == other.fc1_b && fc2_w == other.fc2_w && fc2_b == other.fc2_b &&
           fc3_w == other.fc3_w && fc3_b == other.fc3_b;
  }
};

/// Activations cached by one forward pass for the matching backward pass.
template <typename Real>
struct CnnTape {
  using P = CnnParams<Real>;

  const P* source = nullptr;
  std::uint64_t revision = 0;
  std::vector<Real> input;      // 28*28
  std::vector<Real> conv1_pre;  // 6*24*24
  std::vector<Real> pool1;      // 6*12*12
  std::vector<int> pool1_arg;   // flat index into conv1_pre
  std::vector<Real> conv2_pre;  // 16*8*8
  std::vector<Real> pool2;      // 256, also the flattened fc1 input
  std::vector<int> pool2_arg;
  std::vector<Real> fc1_pre, fc1_out;
  std::vector<Real> fc2_pre, fc2_out;
};

namespace cnn_detail {

/// 2x2 stride-2 max pooling over [channels][side][side]; ties go to the first
/// position in row-major order. arg receives flat input indices.
template <typename Real>
void max_pool_forward(std::span<const Real> in, int channels, int side, std::span<Real> out,
                      std::span<int> arg) {
  const int half = side / 2;
  for (int ch = 0; ch < channels; ++ch) {
    for (int r = 0; r < half; ++r) {
      for (int c = 0; c < half; ++c) {
        int best = ch * side * side + (2 * r) * side + 2 * c;
        for (int dr = 0; dr < 2; ++dr) {
          for (int dc = 0; dc < 2; ++dc) {
            const int idx = ch * side * side + (2 * r + dr) * side + (2 * c + dc);
            if (in[idx] > in[best]) best = idx;
          }
        }
        const int o = ch * half * half + r * half + c;
        out[o] = in[best];
        arg[o] = best;
      }
    }
  }
}

template <typename Real>
void max_pool_backward(std::span<const Real> grad_out, std::span<const int> arg,
                       std::span<Real> grad_in) {
  for (std::size_t o = 0; o < grad_out.size(); ++o) grad_in[arg[o]] += grad_out[o];
}

template <typename Real>
void dense_forward(std::span<const Real> w, std::span<const Real> b, std::span<const Real> x,
                   std::span<Real> y) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < y.size(); ++o) {
    const Real* row = w.data() + o * in;
    Real acc = b[o];
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

/// Accumulates dW += dy x^T, db += dy; writes dx = W^T dy when dx is non-empty.
template <typename Real>
void dense_backward(std::span<const Real> w, std::span<const Real> x, std::span<const Real> dy,
                    std::span<Real> dw, std::span<Real> db, std::span<Real> dx) {
  const std::size_t in = x.size();
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), Real(0));
  for (std::size_t o = 0; o < dy.size(); ++o) {
    const Real g = dy[o];
    db[o] += g;
    if (g == Real(0)) continue;
    Real* drow = dw.data() + o * in;
    const Real* row = w.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) drow[i] += g * x[i];
    if (!dx.empty()) {
      for (std::size_t i = 0; i < in; ++i) dx[i] += g * row[i];
    }
  }
}

template <typename Real>
void relu(std::span<const Real> pre, std::span<Real> out) {
  for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > Real(0) ? pre[i] : Real(0);
}

template <typename Real>
void relu_backward(std::span<const Real> pre, std::span<Real> grad) {
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (!(pre[i] > Real(0))) grad[i] = Real(0);
  }
}

}  // namespace cnn_detail

/// Runs the encoder and records a tape for cnn_backward.
template <typename Real>
std::vector<Real> cnn_forward(const CnnParams<Real>& p, const GlyphBitmap& bitmap,
                              CnnTape<Real>& tape) {
  using P = CnnParams<Real>;
  using namespace cnn_detail;
  if (!p.shapes_valid()) throw ConfigError("CNN parameter shapes do not match LeNet layout");
  constexpr int kIn = P::kInputSide, kK = P::kKernel;
  constexpr int kS1 = P::kConv1Side, kP1 = P::kPool1Side;
  constexpr int kS2 = P::kConv2Side, kP2 = P::kPool2Side;

  tape.source = &p;
  tape.revision = p.revision;
  tape.input.resize(kIn * kIn);
  for (int i = 0; i < kIn * kIn; ++i) tape.input[i] = bitmap.pixels[i] ? Real(1) : Real(0);

  // conv1
  tape.conv1_pre.resize(P::kConv1Maps * kS1 * kS1);
  for (int m = 0; m < P::kConv1Maps; ++m) {
    const Real* k = p.conv1_w.data() + m * kK * kK;
    for (int r = 0; r < kS1; ++r) {
      for (int c = 0; c < kS1; ++c) {
        Real acc = p.conv1_b[m];
        for (int u = 0; u < kK; ++u) {
          const Real* x = tape.input.data() + (r + u) * kIn + c;
          for (int v = 0; v < kK; ++v) acc += k[u * kK + v] * x[v];
        }
        tape.conv1_pre[(m * kS1 + r) * kS1 + c] = acc;
      }
    }
  }
  std::vector<Real> act1(tape.conv1_pre.size());
  relu<Real>(tape.conv1_pre, act1);
  tape.pool1.resize(P::kConv1Maps * kP1 * kP1);
  tape.pool1_arg.resize(tape.pool1.size());
  max_pool_forward<Real>(act1, P::kConv1Maps, kS1, tape.pool1, tape.pool1_arg);

  // conv2
  tape.conv2_pre.resize(P::kConv2Maps * kS2 * kS2);
  for (int m = 0; m < P::kConv2Maps; ++m) {
    for (int r = 0; r < kS2; ++r) {
      for (int c = 0; c < kS2; ++c) {
        Real acc = p.conv2_b[m];
        for (int in = 0; in < P::kConv1Maps; ++in) {
          const Real* k = p.conv2_w.data() + (m * P::kConv1Maps + in) * kK * kK;
          for (int u = 0; u < kK; ++u) {
            const Real* x = tape.pool1.data() + (in * kP1 + r + u) * kP1 + c;
            for (int v = 0; v < kK; ++v) acc += k[u * kK + v] * x[v];
          }
        }
        tape.conv2_pre[(m * kS2 + r) * kS2 + c] = acc;
      }
    }
  }
  std::vector<Real> act2(tape.conv2_pre.size());
  relu<Real>(tape.conv2_pre, act2);
  tape.pool2.resize(P::kFlat);
  tape.pool2_arg.resize(P::kFlat);
  max_pool_forward<Real>(act2, P::kConv2Maps, kS2, tape.pool2, tape.pool2_arg);
  static_assert(P::kConv2Maps * kP2 * kP2 == P::kFlat);

  tape.fc1_pre.resize(P::kFc1);
  tape.fc1_out.resize(P::kFc1);
  dense_forward<Real>(p.fc1_w, p.fc1_b, tape.pool2, tape.fc1_pre);
  relu<Real>(tape.fc1_pre, tape.fc1_out);

  tape.fc2_pre.resize(P::kFc2);
  tape.fc2_out.resize(P::kFc2);
  dense_forward<Real>(p.fc2_w, p.fc2_b, tape.fc1_out, tape.fc2_pre);
  relu<Real>(tape.fc2_pre, tape.fc2_out);

  std::vector<Real> out(static_cast<std::size_t>(p.out_dim));
  dense_forward<Real>(p.fc3_w, p.fc3_b, tape.fc2_out, out);
  return out;
}

template <typename Real>
std::pair<std::vector<Real>, CnnTape<Real>> cnn_forward(const CnnParams<Real>& p,
                                                        const GlyphBitmap& bitmap) {
  CnnTape<Real> tape;
  auto feature = cnn_forward(p, bitmap, tape);
  return {std::move(feature), std::move(tape)};
}

/// Accumulates d(grad_output . feature)/d(params) into grads. The tape must
/// come from a forward pass over these exact params (same object, same
/// revision); anything else throws ConfigError.
template <typename Real>
void cnn_backward(const CnnParams<Real>& p, const CnnTape<Real>& tape,
                  std::span<const Real> grad_output, CnnParams<Real>& grads) {
  using P = CnnParams<Real>;
  using namespace cnn_detail;
  if (tape.source != &p || tape.revision != p.revision) {
    throw ConfigError("CNN tape does not belong to the current parameters");
  }
  if (grad_output.size() != static_cast<std::size_t>(p.out_dim) || grads.out_dim != p.out_dim ||
      !grads.shapes_valid()) {
    throw ConfigError("CNN backward: dimension mismatch");
  }
  constexpr int kIn = P::kInputSide, kK = P::kKernel;
  constexpr int kS1 = P::kConv1Side, kP1 = P::kPool1Side, kS2 = P::kConv2Side;

  std::vector<Real> d_fc2(P::kFc2);
  dense_backward<Real>(p.fc3_w, tape.fc2_out, grad_output, grads.fc3_w, grads.fc3_b, d_fc2);
  relu_backward<Real>(tape.fc2_pre, d_fc2);

  std::vector<Real> d_fc1(P::kFc1);
  dense_backward<Real>(p.fc2_w, tape.fc1_out, d_fc2, grads.fc2_w, grads.fc2_b, d_fc1);
  relu_backward<Real>(tape.fc1_pre, d_fc1);

  std::vector<Real> d_pool2(P::kFlat);
  dense_backward<Real>(p.fc1_w, tape.pool2, d_fc1, grads.fc1_w, grads.fc1_b, d_pool2);

  std::vector<Real> d_conv2(tape.conv2_pre.size(), Real(0));
  max_pool_backward<Real>(d_pool2, tape.pool2_arg, d_conv2);
  relu_backward<Real>(tape.conv2_pre, d_conv2);

  std::vector<Real> d_pool1(tape.pool1.size(), Real(0));
  for (int m = 0; m < P::kConv2Maps; ++m) {
    for (int r = 0; r < kS2; ++r) {
      for (int c = 0; c < kS2; ++c) {
        const Real g = d_conv2[(m * kS2 + r) * kS2 + c];
        if (g == Real(0)) continue;
        grads.conv2_b[m] += g;
        for (int in = 0; in < P::kConv1Maps; ++in) {
          const std::size_t k_off = static_cast<std::size_t>((m * P::kConv1Maps + in) * kK * kK);
          const Real* k = p.conv2_w.data() + k_off;
          Real* dk = grads.conv2_w.data() + k_off;
          for (int u = 0; u < kK; ++u) {
            const int row = (in * kP1 + r + u) * kP1 + c;
            for (int v = 0; v < kK; ++v) {
              dk[u * kK + v] += g * tape.pool1[row + v];
              d_pool1[row + v] += g * k[u * kK + v];
            }
          }
        }
      }
    }
  }

  std::vector<Real> d_conv1(tape.conv1_pre.size(), Real(0));
  max_pool_backward<Real>(d_pool1, tape.pool1_arg, d_conv1);
  relu_backward<Real>(tape.conv1_pre, d_conv1);

  for (int m = 0; m < P::kConv1Maps; ++m) {
    Real* dk = grads.conv1_w.data() + m * kK * kK;
    for (int r = 0; r < kS1; ++r) {
      for (int c = 0; c < kS1; ++c) {
        const Real g = d_conv1[(m * kS1 + r) * kS1 + c];
        if (g == Real(0)) continue;
        grads.conv1_b[m] += g;
        for (int u = 0; u < kK; ++u) {
          const Real* x = tape.input.data() + (r + u) * kIn + c;
          for (int v = 0; v < kK; ++v) dk[u * kK + v] += g * x[v];
        }
      }
    }
  }
}

template <typename Real>
CnnParams<Real> cnn_backward(const CnnParams<Real>& p, const CnnTape<Real>& tape,
                             std::span<const Real> grad_output) {
  auto grads = CnnParams<Real>::zeros(p.out_dim);
  cnn_backward(p, tape, grad_output, grads);
  return grads;
}

/// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)); for convolutions the
/// fans are channels * kernel area.
template <typename Real>
std::array<double, CnnParams<Real>::kTensorCount> cnn_init_bounds(int out_dim) {
  using P = CnnParams<Real>;
  constexpr double kArea = P::kKernel * P::kKernel;
  auto glorot = [](double fan_in, double fan_out) { return std::sqrt(6.0 / (fan_in + fan_out)); };
  return {glorot(kArea, P::kConv1Maps * kArea),
          0.0,
          glorot(P::kConv1Maps * kArea, P::kConv2Maps * kArea),
          0.0,
          glorot(P::kFlat, P::kFc1),
          0.0,
          glorot(P::kFc1, P::kFc2),
          0.0,
          glorot(P::kFc2, out_dim),
          0.0};
}

/// Weights uniform within the Glorot bound, biases zero.
template <typename Real>
CnnParams<Real> cnn_init(std::uint64_t seed, int out_dim) {
  auto p = CnnParams<Real>::zeros(out_dim);
  const auto bounds = cnn_init_bounds<Real>(out_dim);
  Rng rng(seed);
  auto tensors = p.tensors();
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    if (bounds[t] == 0.0) continue;
    for (Real& w : tensors[t]) w = static_cast<Real>(rng.uniform(-bounds[t], bounds[t]));
  }
  return p;
}

extern template struct CnnParams<float>;
extern template struct CnnParams<double>;

}  // namespace dwe
