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
#include "dwe/morphology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "dwe/error.hpp"
#include "dwe/utf8.hpp"

namespace dwe {

void StrokeSequence::validate() const {
  if (codes.empty()) throw DataError("empty stroke sequence");
  for (auto c : codes) {
    if (c < 1 || c > kStrokeKinds) {
      throw DataError("stroke code " + std::to_string(c) + " outside 1.." +
                      std::to_string(kStrokeKinds));
    }
  }
}

std::string StrokeNgram::to_string() const {
  std::string out;
  bool need_comma = false;
  for (auto s : symbols) {
    if (s == kBosSymbol) {
      out += '<';
    } else if (s == kEosSymbol) {
      out += '>';
    } else {
      if (need_comma) out += ',';
      out += std::to_string(s);
      need_comma = true;
    }
  }
  return out;
}

std::vector<StrokeNgram> extract_ngrams(const StrokeSequence& seq, int n_min, int n_max) {
  if (n_min < 1 || n_min > n_max) throw DataError("invalid n-gram range");
  std::vector<std::uint8_t> marked;
  marked.reserve(seq.codes.size() + 2);
  marked.push_back(kBosSymbol);
  marked.insert(marked.end(), seq.codes.begin(), seq.codes.end());
  marked.push_back(kEosSymbol);
  const auto len = static_cast<int>(marked.size());
  std::vector<StrokeNgram> out;
  for (int n = n_min; n <= n_max; ++n) {
    for (int pos = 0; pos + n <= len; ++pos) {
      out.push_back({{marked.begin() + pos, marked.begin() + pos + n}});
    }
  }
  return out;
}

namespace {

[[noreturn]] void table_error(std::size_t line_no, const std::string& what) {
  throw DataError("stroke table line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

StrokeTable parse_stroke_table(std::istream& in) {
  StrokeTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) table_error(line_no, "missing tab separator");
    std::vector<char32_t> chars;
    try {
      chars = decode_utf8(std::string_view(line).substr(0, tab));
    } catch (const DataError& e) {
      table_error(line_no, e.what());
    }
    if (chars.size() != 1) table_error(line_no, "expected exactly one character");

    StrokeSequence seq;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    while (true) {
      const auto comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      int code = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), code);
      if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        table_error(line_no, "malformed stroke code '" + std::string(field) + "'");
      }
      if (code < 1 || code > kStrokeKinds) {
        table_error(line_no, "stroke code " + std::to_string(code) + " outside 1.." +
                                 std::to_string(kStrokeKinds));
      }
      seq.codes.push_back(static_cast<std::uint8_t>(code));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!table.emplace(chars.front(), std::move(seq)).second) {
      table_error(line_no, "duplicate character " + encode_utf8(chars.front()));
    }
  }
  return table;
}

StrokeTable load_stroke_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stroke table " + path);
  return parse_stroke_table(in);
}

void write_stroke_table(std::ostream& out, const StrokeTable& table) {
  for (const auto& [c, seq] : table) {
    out << encode_utf8(c) << '\t';
    for (std::size_t i = 0; i < seq.codes.size(); ++i) {
      if (i) out << ',';
      out << static_cast<int>(seq.codes[i]);
    }
    out << '\n';
  }
}

std::string StrokeNgramDict::key(const StrokeNgram& ngram) {
  return std::string(ngram.symbols.begin(), ngram.symbols.end());
}

std::int32_t StrokeNgramDict::id_of(const StrokeNgram& ngram) const {
  const auto it = ids_.find(key(ngram));
  return it == ids_.end() ? -1 : it->second;
}

std::span<const std::int32_t> StrokeNgramDict::char_ngrams(char32_t c) const {
  const auto it = per_char_.find(c);
  if (it == per_char_.end()) return {};
  return it->second;
}

std::int32_t StrokeNgramDict::intern(const StrokeNgram& ngram) {
  const auto [it, inserted] = ids_.try_emplace(key(ngram), static_cast<std::int32_t>(ngrams_.size()));
  if (inserted) ngrams_.push_back(ngram);
  return it->second;
}

void StrokeNgramDict::set_char(char32_t c, std::vector<std::int32_t> ids) {
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= ngrams_.size()) {
      throw DataError("n-gram id out of range for character " + encode_utf8(c));
    }
  }
  per_char_[c] = std::move(ids);
}

StrokeNgramDict build_ngram_dict(const StrokeTable& strokes,
                                 const std::set<char32_t>& observed, int n_min, int n_max) {
  if (n_min < 1 || n_min > n_max) throw DataError("invalid n-gram range");
  StrokeNgramDict dict(n_min, n_max);
  for (char32_t c : observed) {
    const auto it = strokes.find(c);
    if (it == strokes.end()) {
      dict.add_skipped(c);
      continue;
    }
    std::vector<std::int32_t> ids;
    for (const auto& ngram : extract_ngrams(it->second, n_min, n_max)) {
      const auto id = dict.intern(ngram);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    dict.set_char(c, std::move(ids));
  }
  return dict;
}

int GlyphBitmap::ink_count() const {
  return static_cast<int>(std::count(pixels.begin(), pixels.end(), std::uint8_t{1}));
}

std::array<std::uint8_t, GlyphBitmap::kPackedBytes> GlyphBitmap::pack() const {
  std::array<std::uint8_t, kPackedBytes> out{};
  for (int i = 0; i < kPixels; ++i) {
    if (pixels[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

GlyphBitmap GlyphBitmap::unpack(std::span<const std::uint8_t, kPackedBytes> bytes) {
  GlyphBitmap g;
  for (int i = 0; i < kPixels; ++i) {
    g.pixels[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  }
  return g;
}

namespace {

constexpr char kGlyphMagic[4] = {'D', 'W', 'E', 'G'};
constexpr std::uint8_t kGlyphVersion = 0x01;

std::uint32_t read_u32le(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError(std::string("glyph pack truncated while reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

}  // namespace

GlyphTable read_glyph_pack(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kGlyphMagic)) {
    throw FormatError("glyph pack: bad magic (expected DWEG)");
  }
  char version = 0;
  if (!in.get(version)) throw FormatError("glyph pack truncated while reading version");
  if (static_cast<std::uint8_t>(version) != kGlyphVersion) {
    throw FormatError("glyph pack: unsupported version " +
                      std::to_string(static_cast<std::uint8_t>(version)));
  }
  const std::uint32_t count = read_u32le(in, "record count");
  GlyphTable table;
  for (std::uint32_t r = 0; r < count; ++r) {
    const char32_t cp = read_u32le(in, "record codepoint");
    std::array<std::uint8_t, GlyphBitmap::kPackedBytes> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
      throw FormatError("glyph pack truncated: header declares " + std::to_string(count) +
                        " records, record " + std::to_string(r) + " incomplete");
    }
    if (!table.emplace(cp, GlyphBitmap::unpack(bytes)).second) {
      throw FormatError("glyph pack: duplicate codepoint U+" + std::to_string(cp));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("glyph pack: trailing bytes after " + std::to_string(count) + " records");
  }
  return table;
}

GlyphTable load_glyph_pack(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open glyph pack " + path);
  return read_glyph_pack(in);
}

void write_glyph_pack(std::ostream& out, const GlyphTable& glyphs) {
  out.write(kGlyphMagic, 4);
  out.put(static_cast<char>(kGlyphVersion));
  write_u32le(out, static_cast<std::uint32_t>(glyphs.size()));
  for (const auto& [cp, glyph] : glyphs) {
    write_u32le(out, static_cast<std::uint32_t>(cp));
    const auto bytes = glyph.pack();
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
}

void save_glyph_pack(const std::string& path, const GlyphTable& glyphs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write glyph pack " + path);
  write_glyph_pack(out, glyphs);
}

std::string render_ascii(const GlyphBitmap& glyph) {
  std::string out;
  out.reserve((GlyphBitmap::kSide + 1) * GlyphBitmap::kSide);
  for (int r = 0; r < GlyphBitmap::kSide; ++r) {
    for (int c = 0; c < GlyphBitmap::kSide; ++c) out += glyph.at(r, c) ? '#' : '.';
    out += '\n';
  }
  return out;
}

}  // namespace dwe
