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
#include <string_view>

#include "dwe/config.hpp"
#include "dwe/corpus.hpp"
#include "dwe/lexicon.hpp"
#include "dwe/model.hpp"
#include "dwe/morphology.hpp"

namespace dwe {

/// Complete training state. The lexicon is derived from vocab, dict and
/// glyphs and is not serialized.
struct Checkpoint {
  TrainingConfig config;
  Vocab vocab;
  StrokeNgramDict dict;
  GlyphTable glyphs;  // glyphs of lexicon characters only
  Lexicon lexicon;
  ModelParams<float> params;
  ModelParams<float> accum;
  std::uint64_t epoch = 0;
  std::uint64_t step = 0;

  void rebuild_lexicon() { lexicon = Lexicon::build(vocab, dict, glyphs); }
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Binary layout: "DWE1", u16 LE version, then tagged sections
/// (4-byte tag, u64 LE length, payload) in the order CONF, VOCB, DICT, GLYF,
/// PARM, ACCU, PROG. Floats are 32-bit little-endian, tables row-major, CNN
/// tensors in CnnParams declaration order; ACCU mirrors PARM.
std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on bad magic, unknown version, truncation or
/// inconsistent section contents.
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dwe
