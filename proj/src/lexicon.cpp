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
#include "dwe/lexicon.hpp"

#include <algorithm>

#include "dwe/error.hpp"
#include "dwe/utf8.hpp"

namespace dwe {

std::vector<char32_t> cjk_chars(std::string_view token) {
  std::vector<char32_t> out;
  for (char32_t c : decode_utf8(token)) {
    if (is_cjk(c)) out.push_back(c);
  }
  return out;
}

std::set<char32_t> observed_chars(const Vocab& vocab) {
  std::set<char32_t> out;
  for (const auto& w : vocab.words()) {
    for (char32_t c : cjk_chars(w)) out.insert(c);
  }
  return out;
}

Lexicon Lexicon::build(const Vocab& vocab, const StrokeNgramDict& dict, const GlyphTable& glyphs) {
  Lexicon lex;
  for (char32_t c : observed_chars(vocab)) {
    CharEntry e;
    e.codepoint = c;
    const auto ngrams = dict.char_ngrams(c);
    e.ngrams.assign(ngrams.begin(), ngrams.end());
    e.has_strokes = dict.has_char(c);
    if (const auto it = glyphs.find(c); it != glyphs.end()) {
      e.glyph = it->second;
      e.has_glyph = true;
    }
    lex.chars_.push_back(std::move(e));
  }
  lex.word_chars_.reserve(vocab.size());
  for (const auto& w : vocab.words()) {
    std::vector<std::int32_t> ids;
    for (char32_t c : cjk_chars(w)) ids.push_back(lex.char_index(c));
    lex.word_chars_.push_back(std::move(ids));
  }
  return lex;
}

std::int32_t Lexicon::char_index(char32_t c) const {
  const auto it = std::lower_bound(chars_.begin(), chars_.end(), c,
                                   [](const CharEntry& e, char32_t v) { return e.codepoint < v; });
  if (it == chars_.end() || it->codepoint != c) return -1;
  return static_cast<std::int32_t>(it - chars_.begin());
}

std::vector<std::int32_t> Lexicon::known_chars(std::string_view token) const {
  std::vector<std::int32_t> out;
  for (char32_t c : cjk_chars(token)) {
    const auto idx = char_index(c);
    if (idx >= 0) out.push_back(idx);
  }
  return out;
}

std::size_t Lexicon::missing_strokes() const {
  return static_cast<std::size_t>(
      std::count_if(chars_.begin(), chars_.end(), [](const CharEntry& e) { return !e.has_strokes; }));
}

std::size_t Lexicon::missing_glyphs() const {
  return static_cast<std::size_t>(
      std::count_if(chars_.begin(), chars_.end(), [](const CharEntry& e) { return !e.has_glyph; }));
}

}  // namespace dwe
