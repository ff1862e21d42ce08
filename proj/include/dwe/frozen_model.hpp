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

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dwe/checkpoint.hpp"

namespace dwe {

enum class VectorKind { composed, word_id };

const char* to_string(VectorKind kind);
/// Accepts "composed" or "word_id"; throws ConfigError otherwise.
VectorKind parse_vector_kind(std::string_view text);

/// Read-only view of a checkpoint for inference: parameters are frozen, so
/// every character feature is computed once and cached.
class FrozenModel {
 public:
  explicit FrozenModel(const Checkpoint& ckpt);

  const Checkpoint& checkpoint() const { return ckpt_; }
  int dim() const { return ckpt_.params.dim(); }
  const Vocab& vocab() const { return ckpt_.vocab; }
  const Lexicon& lexicon() const { return ckpt_.lexicon; }

  std::span<const float> char_feature(std::int32_t char_index) const;
  std::span<const float> word_id_vector(WordId id) const;
  /// Same arithmetic (and summation order) as compose_word.
  std::vector<float> composed_vector(WordId id) const;
  std::vector<float> vector(WordId id, VectorKind kind) const;

  /// Average feature of the token's known CJK characters, without any word-ID
  /// term; nullopt when no character is known or both channels are off.
  std::optional<std::vector<float>> oov_vector(std::string_view token) const;

 private:
  const Checkpoint& ckpt_;
  ChannelOptions channels_;
  std::vector<CharActivationPtr<float>> features_;
};

}  // namespace dwe
