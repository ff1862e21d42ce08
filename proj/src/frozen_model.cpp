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
#include "dwe/frozen_model.hpp"

#include "dwe/error.hpp"

namespace dwe {

const char* to_string(VectorKind kind) {
  return kind == VectorKind::composed ? "composed" : "word_id";
}

VectorKind parse_vector_kind(std::string_view text) {
  if (text == "composed") return VectorKind::composed;
  if (text == "word_id") return VectorKind::word_id;
  throw ConfigError("unknown vector kind '" + std::string(text) + "' (composed|word_id)");
}

FrozenModel::FrozenModel(const Checkpoint& ckpt)
    : ckpt_(ckpt), channels_(ckpt.config.channels()) {
  if (channels_.any()) {
    features_.reserve(ckpt.lexicon.char_count());
    for (const auto& entry : ckpt.lexicon.entries()) {
      auto act = activate_char(entry, ckpt.params, channels_);
      act.tape = {};
      features_.push_back(std::make_shared<const CharActivation<float>>(std::move(act)));
    }
  }
}

std::span<const float> FrozenModel::char_feature(std::int32_t char_index) const {
  if (!channels_.any()) throw ConfigError("character channels are disabled in this model");
  return features_.at(static_cast<std::size_t>(char_index))->feature;
}

std::span<const float> FrozenModel::word_id_vector(WordId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab().size()) {
    throw ConfigError("word id out of vocabulary");
  }
  return ckpt_.params.tables.word_id.row(static_cast<std::size_t>(id));
}

std::vector<float> FrozenModel::composed_vector(WordId id) const {
  const auto base = word_id_vector(id);
  std::vector<CharActivationPtr<float>> chars;
  if (channels_.any()) {
    for (auto idx : ckpt_.lexicon.word_chars(id)) chars.push_back(features_[static_cast<std::size_t>(idx)]);
  }
  return compose_vector<float>(base, chars, dim());
}

std::vector<float> FrozenModel::vector(WordId id, VectorKind kind) const {
  if (kind == VectorKind::composed) return composed_vector(id);
  const auto row = word_id_vector(id);
  return {row.begin(), row.end()};
}

std::optional<std::vector<float>> FrozenModel::oov_vector(std::string_view token) const {
  if (!channels_.any()) return std::nullopt;
  std::vector<std::int32_t> known;
  try {
    known = ckpt_.lexicon.known_chars(token);
  } catch (const DataError&) {
    return std::nullopt;
  }
  if (known.empty()) return std::nullopt;
  std::vector<CharActivationPtr<float>> chars;
  for (auto idx : known) chars.push_back(features_[static_cast<std::size_t>(idx)]);
  return compose_vector<float>({}, chars, dim());
}

}  // namespace dwe
