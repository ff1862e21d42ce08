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
#include <string>

#include "dwe/model.hpp"

namespace dwe {

enum class TrainingMode { deterministic, hogwild };

/// Defaults follow the published setup where it exists (d = 300, lr = 0.05,
/// batch 4096, 3 <= n <= 6); the rest are word2vec conventions.
struct TrainingConfig {
  int dim = 300;
  double lr = 0.05;
  int batch_size = 4096;
  int n_min = 3;
  int n_max = 6;
  int window = 5;
  int negatives = 5;
  double alpha = 1.0;
  int epochs = 5;
  std::uint64_t min_count = 5;
  std::uint64_t seed = 1;
  TrainingMode mode = TrainingMode::deterministic;
  int threads = 1;
  double eps = 1e-8;
  /// Frequent-word subsampling threshold; 0 disables it.
  double subsample = 0.0;
  double negative_weight = 1.0;
  bool stroke_channel = true;
  bool glyph_channel = true;
  bool freeze_ngrams = false;
  bool freeze_cnn = false;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;

  ChannelOptions channels() const { return {stroke_channel, glyph_channel}; }
  ObjectiveOptions objective() const {
    return {channels(), negative_weight, !freeze_ngrams, !freeze_cnn};
  }
  UpdateOptions update() const { return {lr, eps, freeze_ngrams, freeze_cnn}; }

  /// "key=value" lines in a fixed order; doubles round-trip exactly.
  std::string to_text() const;
  static TrainingConfig from_text(const std::string& text);

  bool operator==(const TrainingConfig&) const = default;
};

const char* to_string(TrainingMode mode);

/// Throws ConfigError when a checkpoint trained with stored cannot continue
/// under requested (different shapes or channel layout).
void check_resume_compatible(const TrainingConfig& stored, const TrainingConfig& requested);

}  // namespace dwe
