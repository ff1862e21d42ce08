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

// Shared fixtures and independent oracles for the unit tests and the
// acceptance binary. Nothing here depends on a test framework.

#include <cstdint>
#include <string>
#include <vector>

#include "dwe/checkpoint.hpp"
#include "dwe/eval.hpp"
#include "dwe/model.hpp"
#include "dwe/synthetic.hpp"
#include "dwe/trainer.hpp"

namespace dwe::testing {

/// Four words over three characters (one of them with a Latin prefix), tiny
/// stroke sequences so |G| stays around six, noisy random glyphs, and every
/// parameter (context rows and CNN biases included) drawn at O(1) scale so
/// that no gradient is trivially zero.
struct MicroModel {
  Vocab vocab;
  StrokeTable strokes;
  GlyphTable glyphs;
  StrokeNgramDict dict;
  Lexicon lexicon;
  ModelParams<double> params;
};

MicroModel make_micro_model(std::uint64_t seed, int dim = 6);

/// The micro-model frozen into a float checkpoint.
Checkpoint micro_checkpoint(const MicroModel& m);

GlyphBitmap random_glyph(Rng& rng, double density = 0.35);

/// pairs_per_center pairs for every word, random contexts, negatives drawn
/// uniformly from the other words.
TrainingBatch micro_batch(std::size_t vocab_size, std::uint64_t seed, int negatives = 2,
                          int pairs_per_center = 2);

/// Composition and objective written out directly in long double: char
/// features from the n-gram table and cnn_forward, words decoded into their
/// characters, plain log-sigmoid sums. Used as the finite-difference target.
long double oracle_objective(const MicroModel& m, const ModelParams<double>& p,
                             const TrainingBatch& batch, const ObjectiveOptions& opt = {});

struct GradCheckOptions {
  double h = 1e-5;
  /// Tensors with at most this many entries are checked entry by entry.
  std::size_t full_limit = 600;
  /// Entries checked in larger tensors: half uniformly random, half the
  /// largest analytic magnitudes.
  std::size_t sampled = 120;
  /// Random +-1 directions over whole tensors.
  int directions = 1;
  /// Magnitudes below this count as absolute rather than relative error.
  double floor = 1e-6;
};

struct GradCheckReport {
  double max_rel_error = 0;
  std::size_t entries = 0;
  std::size_t directions = 0;
  std::string worst;  // tensor[index] of the worst entry
};

/// Compares batch_gradients against central differences of oracle_objective
/// for every tensor of the model.
GradCheckReport check_model_gradients(MicroModel& m, const TrainingBatch& batch,
                                      const ObjectiveOptions& opt, std::uint64_t seed,
                                      const GradCheckOptions& check = {});

double relative_error(double analytic, double numeric, double floor);

/// Dense skip-gram with negative sampling over (word, context) tables, one
/// summed-gradient adagrad step per batch. Returns the batch objective.
struct SgnsReference {
  Matrix<double> word;
  Matrix<double> context;
  Matrix<double> word_acc;
  Matrix<double> context_acc;
  double step(const TrainingBatch& batch, double lr, double eps);
};

/// Average ranks by counting, Pearson by two passes in long double.
double oracle_spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Full scan with separately normalized vectors; -1 when nothing qualifies.
std::int64_t oracle_analogy(const std::vector<std::vector<float>>& vocab, bool multiplicative,
                            std::size_t a, std::size_t b, std::size_t h);

/// A VectorSource over an in-memory matrix with words "w0", "w1", ...
class MatrixSource : public VectorSource {
 public:
  explicit MatrixSource(std::vector<std::vector<float>> rows);
  int dim() const override { return static_cast<int>(rows_.front().size()); }
  std::size_t size() const override { return rows_.size(); }
  const std::string& word(std::size_t id) const override { return words_.at(id); }
  std::int64_t id_of(std::string_view token) const override;
  std::span<const float> row(std::size_t id) const override { return rows_.at(id); }

 private:
  std::vector<std::vector<float>> rows_;
  std::vector<std::string> words_;
};

/// Settings for the synthetic morphology experiment.
TrainingConfig synthetic_config(std::uint64_t seed);

struct SyntheticRun {
  SyntheticWorld world;
  Checkpoint ckpt;
  std::vector<EpochReport> reports;
};

SyntheticRun run_synthetic(const TrainingConfig& config, std::uint64_t world_seed);

/// Mean cosine (composed vectors) of word pairs that share a character and
/// of pairs that do not.
std::pair<double, double> sharing_cosines(const SyntheticRun& run);

/// Cosine of the two twin characters' features.
double twin_cosine(const SyntheticRun& run);

/// Fresh directory under the system temp dir.
std::string temp_dir(const std::string& tag);

}  // namespace dwe::testing
