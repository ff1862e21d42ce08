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

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dwe/corpus.hpp"
#include "dwe/error.hpp"
#include "dwe/glyph_cnn.hpp"
#include "dwe/lexicon.hpp"
#include "dwe/random.hpp"

namespace dwe {

/// Dense row-major matrix.
template <typename Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<Real> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<Real> data() { return data_; }
  std::span<const Real> data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

template <typename Real>
struct EmbeddingTables {
  Matrix<Real> word_id;  // V x d
  Matrix<Real> context;  // V x d
  Matrix<Real> ngram;    // |G| x d
  bool operator==(const EmbeddingTables&) const = default;
};

/// All trainable state: embedding tables plus the shared glyph CNN. The
/// adagrad accumulators use the same shape.
template <typename Real>
struct ModelParams {
  EmbeddingTables<Real> tables;
  CnnParams<Real> cnn;

  static ModelParams zeros(std::size_t vocab, std::size_t ngrams, int dim) {
    if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
    const auto d = static_cast<std::size_t>(dim);
    ModelParams p;
    p.tables.word_id = Matrix<Real>(vocab, d);
    p.tables.context = Matrix<Real>(vocab, d);
    p.tables.ngram = Matrix<Real>(ngrams, d);
    p.cnn = CnnParams<Real>::zeros(dim);
    return p;
  }

  int dim() const { return cnn.out_dim; }
  std::size_t vocab_size() const { return tables.word_id.rows(); }
  std::size_t ngram_count() const { return tables.ngram.rows(); }

  /// Embedding tables followed by the CNN tensors, in serialization order.
  std::vector<std::span<Real>> tensors() {
    std::vector<std::span<Real>> out{tables.word_id.data(), tables.context.data(),
                                     tables.ngram.data()};
    for (auto t : cnn.tensors()) out.push_back(t);
    return out;
  }
  std::vector<std::span<const Real>> tensors() const {
    std::vector<std::span<const Real>> out{tables.word_id.data(), tables.context.data(),
                                           tables.ngram.data()};
    for (auto t : cnn.tensors()) out.push_back(t);
    return out;
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
  ModelParams<Other> cast() const {
    auto out = ModelParams<Other>::zeros(vocab_size(), ngram_count(), dim());
    auto dst = out.tensors();
    const auto src = tensors();
    for (std::size_t i = 0; i < src.size(); ++i) {
      for (std::size_t k = 0; k < src[i].size(); ++k) dst[i][k] = static_cast<Other>(src[i][k]);
    }
    return out;
  }

  bool operator==(const ModelParams& other) const {
    return tables == other.tables && cnn == other.cnn;
  }
};

/// word_id and n-gram rows uniform in +-0.5/d, context rows zero, CNN per
/// cnn_init. Deterministic in seed.
template <typename Real>
ModelParams<Real> init_model(std::size_t vocab, std::size_t ngrams, int dim, std::uint64_t seed) {
  auto p = ModelParams<Real>::zeros(vocab, ngrams, dim);
  const double bound = 0.5 / dim;
  Rng word_rng(mix_seed(seed, 1));
  for (Real& v : p.tables.word_id.data()) v = static_cast<Real>(word_rng.uniform(-bound, bound));
  Rng ngram_rng(mix_seed(seed, 2));
  for (Real& v : p.tables.ngram.data()) v = static_cast<Real>(ngram_rng.uniform(-bound, bound));
  p.cnn = cnn_init<Real>(mix_seed(seed, 3), dim);
  return p;
}

/// Which character channels take part in composition. With both off the
/// model is plain skip-gram over word-ID vectors.
struct ChannelOptions {
  bool strokes = true;
  bool glyphs = true;
  bool any() const { return strokes || glyphs; }
};

struct ObjectiveOptions {
  ChannelOptions channels;
  /// Multiplier on the summed negative terms (1 = plain sum over draws).
  double negative_weight = 1.0;
  bool ngram_grads = true;
  bool cnn_grads = true;
};

template <typename Real>
Real score(std::span<const Real> a, std::span<const Real> b) {
  if (a.size() != b.size()) throw ConfigError("score: dimension mismatch");
  Real acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

/// log(sigmoid(x)) without overflow for large |x|.
template <typename Real>
Real log_sigmoid(Real x) {
  return x >= Real(0) ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <typename Real>
Real sigmoid(Real x) {
  if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

/// Per-character activations for one set of parameters.
template <typename Real>
struct CharActivation {
  const CharEntry* entry = nullptr;
  std::vector<Real> ngram_sum;  // sum of G(c) rows; ones when strokes are off
  std::vector<Real> glyph;      // CNN(I_c); ones when glyphs are off
  std::vector<Real> feature;    // ngram_sum * glyph, item-wise
  CnnTape<Real> tape;
};

template <typename Real>
CharActivation<Real> activate_char(const CharEntry& entry, const ModelParams<Real>& params,
                                   const ChannelOptions& channels) {
  const auto d = static_cast<std::size_t>(params.dim());
  CharActivation<Real> act;
  act.entry = &entry;
  act.ngram_sum.assign(d, channels.strokes ? Real(0) : Real(1));
  if (channels.strokes) {
    for (auto id : entry.ngrams) {
      const auto g = params.tables.ngram.row(static_cast<std::size_t>(id));
      for (std::size_t k = 0; k < d; ++k) act.ngram_sum[k] += g[k];
    }
  }
  if (channels.glyphs) {
    act.glyph = cnn_forward(params.cnn, entry.glyph, act.tape);
  } else {
    act.glyph.assign(d, Real(1));
  }
  act.feature.resize(d);
  for (std::size_t k = 0; k < d; ++k) act.feature[k] = act.ngram_sum[k] * act.glyph[k];
  return act;
}

/// (sum_{g in G(c)} g) * CNN(I_c); the zero vector when G(c) is empty.
template <typename Real>
std::vector<Real> char_feature(const CharEntry& entry, const ModelParams<Real>& params,
                               const ChannelOptions& channels = {}) {
  return activate_char(entry, params, channels).feature;
}

template <typename Real>
using CharActivationPtr = std::shared_ptr<const CharActivation<Real>>;

/// A composed word vector together with the parts it was built from.
template <typename Real>
struct WordComposition {
  WordId word = -1;  // -1 for character-only (OOV) compositions
  std::vector<CharActivationPtr<Real>> chars;
  std::vector<Real> vec;
};

/// base + (1/N) * sum of char features; base may be empty (treated as zero).
/// Characters are summed in list order.
template <typename Real>
std::vector<Real> compose_vector(std::span<const Real> base,
                                 std::span<const CharActivationPtr<Real>> chars, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  std::vector<Real> out(d, Real(0));
  if (!base.empty()) std::copy(base.begin(), base.end(), out.begin());
  if (chars.empty()) return out;
  std::vector<Real> acc(d, Real(0));
  for (const auto& c : chars) {
    for (std::size_t k = 0; k < d; ++k) acc[k] += c->feature[k];
  }
  const Real inv_n = Real(1) / static_cast<Real>(chars.size());
  for (std::size_t k = 0; k < d; ++k) out[k] += inv_n * acc[k];
  return out;
}

/// w = w_ID + (1/N_c) sum_c char_feature(c). N_c counts the CJK characters
/// of the word; with none, or with both channels off, w = w_ID.
template <typename Real>
WordComposition<Real> compose_word(WordId word, const Lexicon& lexicon,
                                   const ModelParams<Real>& params,
                                   const ChannelOptions& channels = {}) {
  if (word < 0 || static_cast<std::size_t>(word) >= params.vocab_size() ||
      static_cast<std::size_t>(word) >= lexicon.word_count()) {
    throw ConfigError("compose_word: word id out of vocabulary");
  }
  WordComposition<Real> comp;
  comp.word = word;
  if (channels.any()) {
    for (auto idx : lexicon.word_chars(word)) {
      comp.chars.push_back(std::make_shared<const CharActivation<Real>>(
          activate_char(lexicon.entry(idx), params, channels)));
    }
  }
  comp.vec = compose_vector<Real>(params.tables.word_id.row(static_cast<std::size_t>(word)),
                                  comp.chars, params.dim());
  return comp;
}

/// Sparse per-row gradient storage, iterated in first-touch order.
template <typename Real>
class SparseRows {
 public:
  explicit SparseRows(int dim = 0) : dim_(static_cast<std::size_t>(dim)) {}

  /// Zero-initialized on first touch. The span is invalidated by the next
  /// call that creates a row.
  std::span<Real> row(std::int32_t id) {
    auto [it, inserted] = slot_.try_emplace(id, ids_.size());
    if (inserted) {
      ids_.push_back(id);
      values_.resize(values_.size() + dim_, Real(0));
    }
    return {values_.data() + it->second * dim_, dim_};
  }

  std::span<const Real> find(std::int32_t id) const {
    const auto it = slot_.find(id);
    if (it == slot_.end()) return {};
    return {values_.data() + it->second * dim_, dim_};
  }

  std::span<const std::int32_t> ids() const { return ids_; }
  std::span<const Real> row_at(std::size_t slot) const { return {values_.data() + slot * dim_, dim_}; }
  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }

  void clear() {
    slot_.clear();
    ids_.clear();
    values_.clear();
  }

 private:
  std::size_t dim_;
  std::unordered_map<std::int32_t, std::size_t> slot_;
  std::vector<std::int32_t> ids_;
  std::vector<Real> values_;
};

template <typename Real>
struct Gradients {
  explicit Gradients(int dim)
      : word_id(dim), context(dim), ngram(dim), cnn(CnnParams<Real>::zeros(dim)) {}

  SparseRows<Real> word_id;
  SparseRows<Real> context;
  SparseRows<Real> ngram;
  CnnParams<Real> cnn;

  void clear() {
    word_id.clear();
    context.clear();
    ngram.clear();
    cnn.set_zero();
  }
};

/// log s(w.e) + weight * sum_{e'} log s(-w.e') for one (center, context)
/// pair, where s is the logistic sigmoid. When ctx_grads is non-null the
/// gradients w.r.t. the context rows are accumulated there and the gradient
/// w.r.t. w is added into upstream.
template <typename Real>
double context_objective(std::span<const Real> w, WordId context,
                         std::span<const WordId> negatives, const Matrix<Real>& ctx_table,
                         Real negative_weight, SparseRows<Real>* ctx_grads,
                         std::span<Real> upstream) {
  const std::size_t d = w.size();
  if (ctx_table.cols() != d) throw ConfigError("context_objective: dimension mismatch");
  auto term = [&](WordId id, Real sign, Real weight) {
    const auto e = ctx_table.row(static_cast<std::size_t>(id));
    const Real s = score<Real>(w, e);
    if (ctx_grads != nullptr) {
      // d/ds log s(sign * s) = sign * s(-sign * s)
      const Real g = weight * sign * sigmoid<Real>(-sign * s);
      for (std::size_t k = 0; k < d; ++k) upstream[k] += g * e[k];
      auto row = ctx_grads->row(id);
      for (std::size_t k = 0; k < d; ++k) row[k] += g * w[k];
    }
    return static_cast<double>(weight * log_sigmoid<Real>(sign * s));
  };
  double loss = term(context, Real(1), Real(1));
  for (WordId neg : negatives) loss += term(neg, Real(-1), negative_weight);
  return loss;
}

/// Collects d(loss)/d(CNN output) per character activation so each character
/// is backpropagated through the CNN once per batch.
template <typename Real>
class GlyphGradAccumulator {
 public:
  std::span<Real> slot(const CharActivation<Real>* act) {
    auto [it, inserted] = index_.try_emplace(act, entries_.size());
    if (inserted) entries_.push_back({act, std::vector<Real>(act->glyph.size(), Real(0))});
    return entries_[it->second].second;
  }

  void flush(const CnnParams<Real>& cnn, CnnParams<Real>& grads) {
    for (auto& [act, grad] : entries_) cnn_backward<Real>(cnn, act->tape, grad, grads);
    entries_.clear();
    index_.clear();
  }

 private:
  std::vector<std::pair<const CharActivation<Real>*, std::vector<Real>>> entries_;
  std::unordered_map<const CharActivation<Real>*, std::size_t> index_;
};

/// Chains d(loss)/dw back through the composition: word-ID row, every n-gram
/// row of every character, and (immediately, or via deferred) the CNN.
template <typename Real>
void backprop_composition(const WordComposition<Real>& comp, std::span<const Real> upstream,
                          const ModelParams<Real>& params, const ObjectiveOptions& opt,
                          Gradients<Real>& grads, GlyphGradAccumulator<Real>* deferred = nullptr) {
  const std::size_t d = upstream.size();
  if (comp.word >= 0) {
    auto row = grads.word_id.row(comp.word);
    for (std::size_t k = 0; k < d; ++k) row[k] += upstream[k];
  }
  if (comp.chars.empty()) return;
  const Real inv_n = Real(1) / static_cast<Real>(comp.chars.size());
  std::vector<Real> scaled(d);
  for (std::size_t k = 0; k < d; ++k) scaled[k] = inv_n * upstream[k];

  for (const auto& act : comp.chars) {
    if (opt.channels.strokes && opt.ngram_grads) {
      for (auto id : act->entry->ngrams) {
        auto row = grads.ngram.row(id);
        for (std::size_t k = 0; k < d; ++k) row[k] += scaled[k] * act->glyph[k];
      }
    }
    if (opt.channels.glyphs && opt.cnn_grads) {
      std::vector<Real> local;
      std::span<Real> target;
      if (deferred != nullptr) {
        target = deferred->slot(act.get());
      } else {
        local.assign(d, Real(0));
        target = local;
      }
      for (std::size_t k = 0; k < d; ++k) target[k] += scaled[k] * act->ngram_sum[k];
      if (deferred == nullptr) cnn_backward<Real>(params.cnn, act->tape, local, grads.cnn);
    }
  }
}

template <typename Real>
struct PairResult {
  double loss = 0;
  Gradients<Real> grads;
};

template <typename Real>
PairResult<Real> pair_loss_and_grads(const WordComposition<Real>& center, WordId context,
                                     std::span<const WordId> negatives,
                                     const ModelParams<Real>& params,
                                     const ObjectiveOptions& opt = {}) {
  if (center.vec.size() != static_cast<std::size_t>(params.dim())) {
    throw ConfigError("pair_loss_and_grads: dimension mismatch");
  }
  PairResult<Real> out{0, Gradients<Real>(params.dim())};
  std::vector<Real> upstream(center.vec.size(), Real(0));
  out.loss = context_objective<Real>(center.vec, context, negatives, params.tables.context,
                                     static_cast<Real>(opt.negative_weight), &out.grads.context,
                                     upstream);
  backprop_composition<Real>(center, upstream, params, opt, out.grads);
  return out;
}

/// A batch of (center, context) pairs with their sampled negatives.
struct TrainingBatch {
  int negatives_per_pair = 0;
  std::vector<WordId> centers;
  std::vector<WordId> contexts;
  std::vector<WordId> negatives;

  std::size_t size() const { return centers.size(); }
  bool empty() const { return centers.empty(); }
  std::span<const WordId> negatives_of(std::size_t i) const {
    const auto k = static_cast<std::size_t>(negatives_per_pair);
    return {negatives.data() + i * k, k};
  }
  void add(WordId center, WordId context, std::span<const WordId> negs) {
    centers.push_back(center);
    contexts.push_back(context);
    negatives.insert(negatives.end(), negs.begin(), negs.end());
  }
  void clear() {
    centers.clear();
    contexts.clear();
    negatives.clear();
  }
};

/// Summed objective over every pair of the batch, recomposing each
/// center from scratch. Forward only.
template <typename Real>
double batch_objective(const TrainingBatch& batch, const Lexicon& lexicon,
                       const ModelParams<Real>& params, const ObjectiveOptions& opt = {}) {
  double loss = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto comp = compose_word<Real>(batch.centers[i], lexicon, params, opt.channels);
    loss += context_objective<Real>(comp.vec, batch.contexts[i], batch.negatives_of(i),
                                    params.tables.context,
                                    static_cast<Real>(opt.negative_weight), nullptr, {});
  }
  return loss;
}

/// Summed objective and accumulated gradients over pairs [begin, end).
/// Parameters are fixed for the whole batch, so each distinct character is
/// run through the CNN once forward and once backward.
template <typename Real>
double batch_gradients(const TrainingBatch& batch, const Lexicon& lexicon,
                       const ModelParams<Real>& params, const ObjectiveOptions& opt,
                       Gradients<Real>& grads, std::size_t begin = 0,
                       std::size_t end = static_cast<std::size_t>(-1)) {
  end = std::min(end, batch.size());
  const auto d = static_cast<std::size_t>(params.dim());
  std::unordered_map<std::int32_t, CharActivationPtr<Real>> char_cache;
  struct Center {
    WordComposition<Real> comp;
    std::vector<Real> upstream;
  };
  std::vector<Center> centers;
  std::unordered_map<WordId, std::size_t> center_slot;

  auto composed = [&](WordId word) -> Center& {
    auto [it, inserted] = center_slot.try_emplace(word, centers.size());
    if (inserted) {
      if (word < 0 || static_cast<std::size_t>(word) >= params.vocab_size()) {
        throw ConfigError("batch_gradients: word id out of vocabulary");
      }
      Center c;
      c.comp.word = word;
      if (opt.channels.any()) {
        for (auto idx : lexicon.word_chars(word)) {
          auto& cached = char_cache[idx];
          if (!cached) {
            cached = std::make_shared<const CharActivation<Real>>(
                activate_char(lexicon.entry(idx), params, opt.channels));
          }
          c.comp.chars.push_back(cached);
        }
      }
      c.comp.vec = compose_vector<Real>(params.tables.word_id.row(static_cast<std::size_t>(word)),
                                        c.comp.chars, params.dim());
      c.upstream.assign(d, Real(0));
      centers.push_back(std::move(c));
    }
    return centers[it->second];
  };

  double loss = 0;
  const auto weight = static_cast<Real>(opt.negative_weight);
  for (std::size_t i = begin; i < end; ++i) {
    Center& c = composed(batch.centers[i]);
    loss += context_objective<Real>(c.comp.vec, batch.contexts[i], batch.negatives_of(i),
                                    params.tables.context, weight, &grads.context, c.upstream);
  }
  GlyphGradAccumulator<Real> deferred;
  for (const auto& c : centers) {
    backprop_composition<Real>(c.comp, c.upstream, params, opt, grads, &deferred);
  }
  deferred.flush(params.cnn, grads.cnn);
  return loss;
}

/// Adagrad ascent: acc += g^2; param += lr * g / (sqrt(acc) + eps).
template <typename Real>
void adagrad_step(std::span<Real> param, std::span<const Real> grad, std::span<Real> acc,
                  Real lr, Real eps) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    acc[i] += grad[i] * grad[i];
    param[i] += lr * grad[i] / (std::sqrt(acc[i]) + eps);
  }
}

struct UpdateOptions {
  double lr = 0.05;
  double eps = 1e-8;
  bool freeze_ngrams = false;
  bool freeze_cnn = false;
};

template <typename Real>
void apply_sparse_adagrad(Matrix<Real>& table, Matrix<Real>& accum, const SparseRows<Real>& grads,
                          Real lr, Real eps) {
  const auto ids = grads.ids();
  for (std::size_t slot = 0; slot < ids.size(); ++slot) {
    const auto r = static_cast<std::size_t>(ids[slot]);
    adagrad_step<Real>(table.row(r), grads.row_at(slot), accum.row(r), lr, eps);
  }
}

/// Applies one adagrad update from accumulated batch gradients.
template <typename Real>
void apply_adagrad(ModelParams<Real>& params, ModelParams<Real>& accum,
                   const Gradients<Real>& grads, const UpdateOptions& opt,
                   bool include_embeddings = true) {
  const auto lr = static_cast<Real>(opt.lr);
  const auto eps = static_cast<Real>(opt.eps);
  if (include_embeddings) {
    apply_sparse_adagrad<Real>(params.tables.word_id, accum.tables.word_id, grads.word_id, lr, eps);
    apply_sparse_adagrad<Real>(params.tables.context, accum.tables.context, grads.context, lr, eps);
    if (!opt.freeze_ngrams) {
      apply_sparse_adagrad<Real>(params.tables.ngram, accum.tables.ngram, grads.ngram, lr, eps);
    }
  }
  if (!opt.freeze_cnn) {
    auto p = params.cnn.tensors();
    auto a = accum.cnn.tensors();
    const auto g = grads.cnn.tensors();
    for (std::size_t t = 0; t < p.size(); ++t) adagrad_step<Real>(p[t], g[t], a[t], lr, eps);
    ++params.cnn.revision;
  }
}

extern template class Matrix<float>;
extern template class Matrix<double>;
extern template struct ModelParams<float>;
extern template struct ModelParams<double>;

}  // namespace dwe
