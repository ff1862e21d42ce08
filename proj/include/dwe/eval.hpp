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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dwe/frozen_model.hpp"
#include "dwe/text_vectors.hpp"

namespace dwe {

/// A candidate vocabulary with vectors, plus token lookup that may go beyond
/// it (character composition for unseen words).
class VectorSource {
 public:
  virtual ~VectorSource() = default;

  virtual int dim() const = 0;
  virtual std::size_t size() const = 0;
  virtual const std::string& word(std::size_t id) const = 0;
  /// -1 when the token is not a candidate.
  virtual std::int64_t id_of(std::string_view token) const = 0;
  virtual std::span<const float> row(std::size_t id) const = 0;
  /// nullopt when the token cannot be represented.
  virtual std::optional<std::vector<float>> lookup(std::string_view token) const;
};

/// Vectors of a checkpoint. In-vocabulary words get the composed (or
/// word-ID) vector; with composed vectors, unseen words fall back to the
/// average feature of their known characters.
class CheckpointVectors : public VectorSource {
 public:
  CheckpointVectors(const Checkpoint& ckpt, VectorKind kind);

  int dim() const override { return model_.dim(); }
  std::size_t size() const override { return model_.vocab().size(); }
  const std::string& word(std::size_t id) const override {
    return model_.vocab().word(static_cast<WordId>(id));
  }
  std::int64_t id_of(std::string_view token) const override { return model_.vocab().id_of(token); }
  std::span<const float> row(std::size_t id) const override { return rows_.row(id); }
  std::optional<std::vector<float>> lookup(std::string_view token) const override;

  const FrozenModel& model() const { return model_; }

 private:
  FrozenModel model_;
  VectorKind kind_;
  Matrix<float> rows_;
};

/// Vectors read from a word2vec text file; no out-of-vocabulary fallback.
class TextVectorSource : public VectorSource {
 public:
  explicit TextVectorSource(TextVectors vectors);

  int dim() const override { return vectors_.dim; }
  std::size_t size() const override { return vectors_.words.size(); }
  const std::string& word(std::size_t id) const override { return vectors_.words.at(id); }
  std::int64_t id_of(std::string_view token) const override;
  std::span<const float> row(std::size_t id) const override { return vectors_.row(id); }

 private:
  TextVectors vectors_;
  std::unordered_map<std::string, std::int64_t> index_;
};

/// Throws DataError for empty or unrepresentable tokens.
std::vector<float> eval_vector(const VectorSource& source, std::string_view token);

/// nullopt when either vector has zero norm. Accumulates in double.
std::optional<double> cosine(std::span<const float> a, std::span<const float> b);

/// Fractional (average) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks. Throws DataError on length mismatch,
/// fewer than two values, or zero rank variance.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

struct SimilarityRecord {
  std::string a;
  std::string b;
  double score = 0;
};
using SimilarityDataset = std::vector<SimilarityRecord>;

/// "word_a<TAB>word_b<TAB>score" lines.
SimilarityDataset parse_similarity_dataset(std::istream& in);
SimilarityDataset load_similarity_dataset(const std::string& path);

struct SimilarityResult {
  double rho = 0;
  double coverage = 0;
  std::size_t scored = 0;
  std::size_t total = 0;
};

/// Scores pairs by cosine; pairs with an unrepresentable side are skipped and
/// reported through coverage. Throws DataError with fewer than two scored pairs.
SimilarityResult eval_similarity(const SimilarityDataset& dataset, const VectorSource& source);

struct AnalogyQuestion {
  std::string a, b, h, t;  // a : b = h : t
};

struct AnalogyGroup {
  std::string name;
  std::vector<AnalogyQuestion> questions;
};
using AnalogyDataset = std::vector<AnalogyGroup>;

/// ": group" headers followed by "a b h t" lines.
AnalogyDataset parse_analogy_dataset(std::istream& in);
AnalogyDataset load_analogy_dataset(const std::string& path);

enum class AnalogyMethod { cos_add, cos_mul };

const char* to_string(AnalogyMethod method);
AnalogyMethod parse_analogy_method(std::string_view text);

inline constexpr double kCosMulEpsilon = 0.001;

/// Precomputes candidate norms once so that many queries share them.
class AnalogySolver {
 public:
  explicit AnalogySolver(const VectorSource& source);

  /// argmax over candidates outside exclude; ties go to the lowest id.
  /// 3CosAdd: cos(t, b^ - a^ + h^). 3CosMul: cos'(t,b) cos'(t,h) /
  /// (cos'(t,a) + eps) with cos' = (1 + cos) / 2. nullopt when a query
  /// vector has zero norm or no candidate remains.
  std::optional<std::size_t> solve(AnalogyMethod method, std::span<const float> a,
                                   std::span<const float> b, std::span<const float> h,
                                   std::span<const std::int64_t> exclude,
                                   double epsilon = kCosMulEpsilon) const;

  /// Resolves the three query words through the source, excluding them from
  /// the candidates. nullopt when any is unrepresentable.
  std::optional<std::string> answer(AnalogyMethod method, std::string_view a, std::string_view b,
                                    std::string_view h) const;

 private:
  double candidate_cosine(std::size_t id, std::span<const double> unit_query) const;

  const VectorSource& source_;
  std::vector<double> inv_norms_;  // 0 for zero-norm candidates
};

std::optional<std::string> analogy_3cosadd(const VectorSource& source, std::string_view a,
                                           std::string_view b, std::string_view h);
std::optional<std::string> analogy_3cosmul(const VectorSource& source, std::string_view a,
                                           std::string_view b, std::string_view h);

struct GroupAccuracy {
  std::string group;
  std::size_t correct = 0;
  std::size_t answered = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
  double coverage() const { return total ? static_cast<double>(answered) / total : 0.0; }
};

struct AnalogyResult {
  std::vector<GroupAccuracy> groups;
  GroupAccuracy overall;
};

/// Exact-match accuracy per group; unanswerable questions count as wrong.
/// Throws DataError for an empty dataset.
AnalogyResult eval_analogy(const AnalogyDataset& dataset, const VectorSource& source,
                           AnalogyMethod method);

/// Top-k candidates by cosine, descending, ties by id, excluding the query.
std::vector<std::pair<std::string, double>> nearest_neighbors(const VectorSource& source,
                                                              std::string_view token, int k);

}  // namespace dwe
