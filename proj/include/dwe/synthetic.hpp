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
#include <string>
#include <vector>

#include "dwe/morphology.hpp"

namespace dwe {

/// A toy morphology world: words are two-character compounds whose first
/// character is the root of a topic, and each sentence draws its words from
/// a single topic. The roots of topics 0 and 1 share one stroke sequence but
/// have unrelated glyphs (horizontal versus vertical bars).
struct SyntheticOptions {
  int topics = 8;
  int words_per_topic = 5;
  int sentences = 200;
  int sentence_length = 8;
  /// Every character takes one of this many random stroke sequences, so the
  /// glyph is what tells most characters apart (0 = a fresh sequence per
  /// character). The twins share a sequence in any case.
  int stroke_pool = 4;
  std::uint64_t seed = 1;
};

struct SyntheticWorld {
  std::vector<std::string> sentences;  // space-separated tokens
  std::vector<std::string> words;
  std::vector<int> topic_of_word;
  std::vector<char32_t> roots;
  char32_t twin_a = 0;
  char32_t twin_b = 0;
  StrokeTable strokes;
  GlyphTable glyphs;

  std::string corpus_text() const;
};

SyntheticWorld make_synthetic_world(const SyntheticOptions& options);

/// Writes corpus.txt, strokes.tsv and glyphs.bin into an existing directory.
void write_synthetic_world(const SyntheticWorld& world, const std::string& dir);

}  // namespace dwe
