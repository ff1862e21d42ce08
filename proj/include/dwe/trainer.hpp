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
#include <span>
#include <string>
#include <vector>

#include "dwe/checkpoint.hpp"
#include "dwe/config.hpp"
#include "dwe/corpus.hpp"
#include "dwe/frozen_model.hpp"
#include "dwe/morphology.hpp"

namespace dwe {

struct TrainingData {
  Vocab vocab;
  std::vector<Sentence> sentences;
  StrokeNgramDict dict;
  GlyphTable glyphs;  // restricted to observed characters
};

/// Counts the corpus, applies min_count, encodes sentences and builds the
/// n-gram dictionary over the characters of the surviving vocabulary. The
/// stream is read twice, so it must be seekable.
TrainingData prepare_training_data(std::istream& corpus, const StrokeTable& strokes,
                                   const GlyphTable& glyphs, const TrainingConfig& config);

/// Fresh parameters and zero accumulators for the given data.
Checkpoint initialize_checkpoint(const TrainingData& data, const TrainingConfig& config);

struct EpochReport {
  std::uint64_t epoch = 0;
  double mean_loss = 0;
  std::uint64_t pairs = 0;
  double seconds = 0;
};

/// Runs config.epochs more epochs over sentences, updating ckpt in place.
/// Each epoch shuffles sentence order with the run seed, cuts the pair
/// stream into batches of config.batch_size pairs and applies one adagrad
/// step per batch. Throws NumericError on a non-finite loss. One status line
/// per epoch goes to log when it is non-null.
std::vector<EpochReport> run_epochs(Checkpoint& ckpt, std::span<const Sentence> sentences,
                                    const TrainingConfig& config, std::ostream* log = nullptr);

struct TrainPaths {
  std::string corpus;
  std::string strokes;
  std::string glyphs;
  /// Optional checkpoint to continue from.
  std::string resume;
};

Checkpoint train(const TrainPaths& paths, const TrainingConfig& config, std::ostream* log = nullptr,
                 std::vector<EpochReport>* reports = nullptr);

/// Writes "V d" then one "token v1 ... vd" line per vocabulary word.
void export_vectors(const Checkpoint& ckpt, std::ostream& out, VectorKind which);
void export_vectors(const Checkpoint& ckpt, const std::string& path, VectorKind which);

}  // namespace dwe
