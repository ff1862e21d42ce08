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
#include "dwe/checkpoint.hpp"

#include <cstring>

#include "dwe/binary_io.hpp"
#include "dwe/error.hpp"

namespace dwe {

namespace {

constexpr char kMagic[4] = {'D', 'W', 'E', '1'};

void put_section(ByteWriter& out, const char (&tag)[5], const ByteWriter& payload) {
  out.bytes(std::string_view(tag, 4));
  out.u64(payload.buffer().size());
  out.bytes(payload.buffer());
}

ByteReader get_section(ByteReader& in, const char (&tag)[5]) {
  const auto got = in.bytes(4);
  if (got != std::string_view(tag, 4)) {
    throw FormatError("checkpoint: expected section " + std::string(tag) + ", found '" +
                      std::string(got) + "'");
  }
  const auto len = in.u64();
  if (len > in.remaining()) {
    throw FormatError("checkpoint: section " + std::string(tag) + " truncated");
  }
  return ByteReader(in.bytes(static_cast<std::size_t>(len)));
}

void expect_done(const ByteReader& r, const char* tag) {
  if (!r.done()) throw FormatError(std::string("checkpoint: trailing bytes in section ") + tag);
}

void write_params(ByteWriter& out, const ModelParams<float>& p) {
  out.u32(static_cast<std::uint32_t>(p.vocab_size()));
  out.u32(static_cast<std::uint32_t>(p.ngram_count()));
  out.u32(static_cast<std::uint32_t>(p.dim()));
  for (auto t : p.tensors()) out.f32_array(t);
}

ModelParams<float> read_params(ByteReader& in, std::size_t vocab, std::size_t ngrams, int dim,
                               const char* tag) {
  const auto v = in.u32();
  const auto g = in.u32();
  const auto d = in.u32();
  if (v != vocab || g != ngrams || static_cast<int>(d) != dim) {
    throw FormatError(std::string("checkpoint: section ") + tag +
                      " shape does not match vocabulary, dictionary or dim");
  }
  auto p = ModelParams<float>::zeros(vocab, ngrams, dim);
  for (auto t : p.tensors()) in.f32_array(t);
  return p;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ByteWriter out;
  out.bytes(std::string_view(kMagic, 4));
  out.u16(kCheckpointVersion);

  ByteWriter conf;
  conf.bytes(ckpt.config.to_text());
  put_section(out, "CONF", conf);

  ByteWriter vocab;
  vocab.u64(ckpt.vocab.total_tokens());
  vocab.u32(static_cast<std::uint32_t>(ckpt.vocab.size()));
  for (std::size_t i = 0; i < ckpt.vocab.size(); ++i) {
    vocab.str(ckpt.vocab.words()[i]);
    vocab.u64(ckpt.vocab.counts()[i]);
  }
  put_section(out, "VOCB", vocab);

  ByteWriter dict;
  dict.u32(static_cast<std::uint32_t>(ckpt.dict.n_min()));
  dict.u32(static_cast<std::uint32_t>(ckpt.dict.n_max()));
  dict.u32(static_cast<std::uint32_t>(ckpt.dict.size()));
  for (std::size_t i = 0; i < ckpt.dict.size(); ++i) {
    const auto& symbols = ckpt.dict.ngram(static_cast<std::int32_t>(i)).symbols;
    dict.u8(static_cast<std::uint8_t>(symbols.size()));
    for (auto s : symbols) dict.u8(s);
  }
  dict.u32(static_cast<std::uint32_t>(ckpt.dict.per_char().size()));
  for (const auto& [c, ids] : ckpt.dict.per_char()) {
    dict.u32(static_cast<std::uint32_t>(c));
    dict.u32(static_cast<std::uint32_t>(ids.size()));
    for (auto id : ids) dict.u32(static_cast<std::uint32_t>(id));
  }
  dict.u32(static_cast<std::uint32_t>(ckpt.dict.skipped().size()));
  for (char32_t c : ckpt.dict.skipped()) dict.u32(static_cast<std::uint32_t>(c));
  put_section(out, "DICT", dict);

  ByteWriter glyphs;
  glyphs.u32(static_cast<std::uint32_t>(ckpt.glyphs.size()));
  for (const auto& [c, g] : ckpt.glyphs) {
    glyphs.u32(static_cast<std::uint32_t>(c));
    const auto packed = g.pack();
    glyphs.bytes(std::string_view(reinterpret_cast<const char*>(packed.data()), packed.size()));
  }
  put_section(out, "GLYF", glyphs);

  ByteWriter params;
  write_params(params, ckpt.params);
  put_section(out, "PARM", params);

  ByteWriter accum;
  write_params(accum, ckpt.accum);
  put_section(out, "ACCU", accum);

  ByteWriter progress;
  progress.u64(ckpt.epoch);
  progress.u64(ckpt.step);
  put_section(out, "PROG", progress);

  return out.take();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.remaining() < 4 || in.bytes(4) != std::string_view(kMagic, 4)) {
    throw FormatError("checkpoint: bad magic (expected DWE1)");
  }
  const auto version = in.u16();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;

  {
    auto r = get_section(in, "CONF");
    ckpt.config = TrainingConfig::from_text(std::string(r.bytes(r.remaining())));
    try {
      ckpt.config.validate();
    } catch (const ConfigError& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
  }
  {
    auto r = get_section(in, "VOCB");
    const auto total = r.u64();
    const auto n = r.u32();
    std::vector<std::string> words;
    std::vector<std::uint64_t> counts;
    words.reserve(n);
    counts.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      words.push_back(r.str());
      counts.push_back(r.u64());
    }
    expect_done(r, "VOCB");
    try {
      ckpt.vocab = Vocab(std::move(words), std::move(counts), total);
    } catch (const DataError& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
  }
  {
    auto r = get_section(in, "DICT");
    const auto n_min = static_cast<int>(r.u32());
    const auto n_max = static_cast<int>(r.u32());
    StrokeNgramDict dict(n_min, n_max);
    const auto count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      StrokeNgram ngram;
      ngram.symbols.resize(r.u8());
      for (auto& s : ngram.symbols) s = r.u8();
      if (dict.intern(ngram) != static_cast<std::int32_t>(i)) {
        throw FormatError("checkpoint: duplicate n-gram in dictionary");
      }
    }
    const auto chars = r.u32();
    for (std::uint32_t i = 0; i < chars; ++i) {
      const auto c = static_cast<char32_t>(r.u32());
      std::vector<std::int32_t> ids(r.u32());
      for (auto& id : ids) id = static_cast<std::int32_t>(r.u32());
      try {
        dict.set_char(c, std::move(ids));
      } catch (const DataError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
      }
    }
    const auto skipped = r.u32();
    for (std::uint32_t i = 0; i < skipped; ++i) dict.add_skipped(static_cast<char32_t>(r.u32()));
    expect_done(r, "DICT");
    ckpt.dict = std::move(dict);
  }
  {
    auto r = get_section(in, "GLYF");
    const auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto c = static_cast<char32_t>(r.u32());
      const auto raw = r.bytes(GlyphBitmap::kPackedBytes);
      std::array<std::uint8_t, GlyphBitmap::kPackedBytes> packed{};
      std::memcpy(packed.data(), raw.data(), packed.size());
      if (!ckpt.glyphs.emplace(c, GlyphBitmap::unpack(packed)).second) {
        throw FormatError("checkpoint: duplicate glyph");
      }
    }
    expect_done(r, "GLYF");
  }
  {
    auto r = get_section(in, "PARM");
    ckpt.params = read_params(r, ckpt.vocab.size(), ckpt.dict.size(), ckpt.config.dim, "PARM");
    expect_done(r, "PARM");
  }
  {
    auto r = get_section(in, "ACCU");
    ckpt.accum = read_params(r, ckpt.vocab.size(), ckpt.dict.size(), ckpt.config.dim, "ACCU");
    expect_done(r, "ACCU");
  }
  {
    auto r = get_section(in, "PROG");
    ckpt.epoch = r.u64();
    ckpt.step = r.u64();
    expect_done(r, "PROG");
  }
  if (!in.done()) throw FormatError("checkpoint: trailing bytes after last section");
  ckpt.rebuild_lexicon();
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file_bytes(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file_bytes(path));
}

}  // namespace dwe
