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
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "dwe/corpus.hpp"
#include "dwe/morphology.hpp"

namespace dwe {

/// Everything the character channels know about one character.
struct CharEntry {
  char32_t codepoint = 0;
  std::vector<std::int32_t> ngrams;  // G(c), empty without stroke data
  GlyphBitmap glyph;                 // all zero without glyph data
  bool has_strokes = false;
  bool has_glyph = false;
};

/// CJK characters of a token, in order (repeats kept).
std::vector<char32_t> cjk_chars(std::string_view token);

/// Every CJK character occurring in some vocabulary word.
std::set<char32_t> observed_chars(const Vocab& vocab);

/// Per-word character lists resolved against the n-gram dictionary and the
/// glyph table. Immutable once built.
class Lexicon {
 public:
  Lexicon() = default;
  static Lexicon build(const Vocab& vocab, const StrokeNgramDict& dict, const GlyphTable& glyphs);

  std::size_t char_count() const { return chars_.size(); }
  const CharEntry& entry(std::int32_t index) const { return chars_.at(static_cast<std::size_t>(index)); }
  const std::vector<CharEntry>& entries() const { return chars_; }
  /// -1 for characters the lexicon does not know.
  std::int32_t char_index(char32_t c) const;

  std::size_t word_count() const { return word_chars_.size(); }
  std::span<const std::int32_t> word_chars(WordId id) const {
    return word_chars_.at(static_cast<std::size_t>(id));
  }

  /// Known characters of an arbitrary token; unknown CJK characters are dropped.
  std::vector<std::int32_t> known_chars(std::string_view token) const;

  std::size_t missing_strokes() const;
  std::size_t missing_glyphs() const;

 private:
  std::vector<CharEntry> chars_;  // sorted by codepoint
  std::vector<std::vector<std::int32_t>> word_chars_;
};

}  // namespace dwe
