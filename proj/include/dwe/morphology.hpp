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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dwe {

inline constexpr char32_t kCjkFirst = 0x4E00;
inline constexpr char32_t kCjkLast = 0x9FA5;

/// CJK Unified Ideographs as used for the character channels.
constexpr bool is_cjk(char32_t codepoint) {
  return codepoint >= kCjkFirst && codepoint <= kCjkLast;
}

/// Stroke categories are opaque codes 1..32 defined by the stroke table.
inline constexpr int kStrokeKinds = 32;
inline constexpr std::uint8_t kBosSymbol = 0;
inline constexpr std::uint8_t kEosSymbol = kStrokeKinds + 1;

struct StrokeSequence {
  std::vector<std::uint8_t> codes;

  /// Throws DataError if empty or a code is outside 1..32.
  void validate() const;
  bool operator==(const StrokeSequence&) const = default;
};

/// A window over the boundary-marked sequence <BOS, codes..., EOS>.
struct StrokeNgram {
  std::vector<std::uint8_t> symbols;

  /// Compact text form, e.g. "<5,2,3" or "4,1>".
  std::string to_string() const;
  auto operator<=>(const StrokeNgram&) const = default;
};

/// Every contiguous window of length n_min..n_max over the marked sequence,
/// ordered by n then position. Duplicates are kept.
std::vector<StrokeNgram> extract_ngrams(const StrokeSequence& seq, int n_min, int n_max);

using StrokeTable = std::map<char32_t, StrokeSequence>;

/// Parses "CHAR<TAB>c1,c2,...". Blank lines and '#' comments are skipped.
/// Errors carry the 1-based line number.
StrokeTable parse_stroke_table(std::istream& in);
StrokeTable load_stroke_table(const std::string& path);
void write_stroke_table(std::ostream& out, const StrokeTable& table);

/// The stroke n-gram dictionary: exact ids (no hashing), one deduplicated id
/// list per character.
class StrokeNgramDict {
 public:
  StrokeNgramDict() = default;
  StrokeNgramDict(int n_min, int n_max) : n_min_(n_min), n_max_(n_max) {}

  int n_min() const { return n_min_; }
  int n_max() const { return n_max_; }
  std::size_t size() const { return ngrams_.size(); }

  const StrokeNgram& ngram(std::int32_t id) const { return ngrams_.at(static_cast<std::size_t>(id)); }
  /// -1 when absent.
  std::int32_t id_of(const StrokeNgram& ngram) const;

  bool has_char(char32_t c) const { return per_char_.contains(c); }
  /// Empty for characters without stroke data.
  std::span<const std::int32_t> char_ngrams(char32_t c) const;
  const std::map<char32_t, std::vector<std::int32_t>>& per_char() const { return per_char_; }

  /// Observed characters that had no stroke data.
  const std::vector<char32_t>& skipped() const { return skipped_; }

  std::int32_t intern(const StrokeNgram& ngram);
  void set_char(char32_t c, std::vector<std::int32_t> ids);
  void add_skipped(char32_t c) { skipped_.push_back(c); }

  bool operator==(const StrokeNgramDict& other) const {
    return n_min_ == other.n_min_ && n_max_ == other.n_max_ && ngrams_ == other.ngrams_ &&
           per_char_ == other.per_char_ && skipped_ == other.skipped_;
  }

 private:
  static std::string key(const StrokeNgram& ngram);

  int n_min_ = 3;
  int n_max_ = 6;
  std::vector<StrokeNgram> ngrams_;
  std::unordered_map<std::string, std::int32_t> ids_;
  std::map<char32_t, std::vector<std::int32_t>> per_char_;
  std::vector<char32_t> skipped_;
};

/// Builds G over the observed characters, iterated in codepoint order; ids
/// are assigned first-seen. Characters missing from the table are skipped.
StrokeNgramDict build_ngram_dict(const StrokeTable& strokes,
                                 const std::set<char32_t>& observed, int n_min, int n_max);

/// 28x28 one-bit glyph, row-major, 1 = ink.
struct GlyphBitmap {
  static constexpr int kSide = 28;
  static constexpr int kPixels = kSide * kSide;
  static constexpr int kPackedBytes = kPixels / 8;

  std::array<std::uint8_t, kPixels> pixels{};

  std::uint8_t at(int row, int col) const { return pixels[row * kSide + col]; }
  void set(int row, int col, bool ink = true) { pixels[row * kSide + col] = ink ? 1 : 0; }
  int ink_count() const;
  bool operator==(const GlyphBitmap&) const = default;

  /// Most-significant-bit-first, 784 bits packed into 98 bytes.
  std::array<std::uint8_t, kPackedBytes> pack() const;
  static GlyphBitmap unpack(std::span<const std::uint8_t, kPackedBytes> bytes);
};

using GlyphTable = std::map<char32_t, GlyphBitmap>;

/// Glyph pack: "DWEG", version 0x01, u32 LE record count, then records of
/// u32 LE codepoint + 98 packed bytes.
GlyphTable read_glyph_pack(std::istream& in);
GlyphTable load_glyph_pack(const std::string& path);
void write_glyph_pack(std::ostream& out, const GlyphTable& glyphs);
void save_glyph_pack(const std::string& path, const GlyphTable& glyphs);

/// '#' for ink, '.' for background, one row per line.
std::string render_ascii(const GlyphBitmap& glyph);

}  // namespace dwe
