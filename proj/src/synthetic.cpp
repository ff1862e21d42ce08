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
#include "dwe/synthetic.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "dwe/error.hpp"
#include "dwe/random.hpp"
#include "dwe/utf8.hpp"

namespace dwe {
namespace {

StrokeSequence random_strokes(Rng& rng) {
  StrokeSequence seq;
  const auto len = 4 + rng.below(6);
  for (std::uint64_t i = 0; i < len; ++i) {
    seq.codes.push_back(static_cast<std::uint8_t>(1 + rng.below(kStrokeKinds)));
  }
  return seq;
}

void draw_segment(GlyphBitmap& g, int r0, int c0, int r1, int c1) {
  const int steps = std::max(std::abs(r1 - r0), std::abs(c1 - c0));
  for (int s = 0; s <= steps; ++s) {
    const int r = steps ? r0 + (r1 - r0) * s / steps : r0;
    const int c = steps ? c0 + (c1 - c0) * s / steps : c0;
    g.set(r, c);
    if (c + 1 < GlyphBitmap::kSide) g.set(r, c + 1);
  }
}

GlyphBitmap random_glyph(Rng& rng) {
  GlyphBitmap g;
  const auto segments = 3 + rng.below(4);
  for (std::uint64_t i = 0; i < segments; ++i) {
    auto pt = [&] { return 2 + static_cast<int>(rng.below(24)); };
    draw_segment(g, pt(), pt(), pt(), pt());
  }
  return g;
}

// Horizontal bars in the top half or vertical bars in the bottom half: the
// two twin glyphs share no ink and no region.
GlyphBitmap bars(bool horizontal) {
  GlyphBitmap g;
  const int top = horizontal ? 2 : 15;
  for (int r = 0; r < 11; ++r) {
    for (int c = 2; c < 26; ++c) {
      const bool ink = horizontal ? (r % 4) < 2 : ((c - 2) % 4) < 2;
      if (ink) g.set(top + r, c);
    }
  }
  return g;
}

}  // namespace

std::string SyntheticWorld::corpus_text() const {
  std::string out;
  for (const auto& s : sentences) {
    out += s;
    out += '\n';
  }
  return out;
}

SyntheticWorld make_synthetic_world(const SyntheticOptions& options) {
  if (options.topics < 2 || options.words_per_topic < 2 || options.sentences < 1 ||
      options.sentence_length < 2 || options.stroke_pool < 0) {
    throw ConfigError("synthetic world needs >= 2 topics, >= 2 words per topic, "
                      "sentences >= 1, sentence_length >= 2 and stroke_pool >= 0");
  }
  SyntheticWorld world;
  Rng rng(mix_seed(options.seed, 0x5e));
  std::vector<StrokeSequence> pool;
  for (int i = 0; i < options.stroke_pool; ++i) pool.push_back(random_strokes(rng));
  char32_t next = kCjkFirst + 0x100;
  auto fresh_char = [&] {
    const char32_t c = next++;
    world.strokes[c] = pool.empty() ? random_strokes(rng) : pool[rng.below(pool.size())];
    world.glyphs[c] = random_glyph(rng);
    return c;
  };

  for (int t = 0; t < options.topics; ++t) {
    const char32_t root = fresh_char();
    world.roots.push_back(root);
    for (int j = 0; j < options.words_per_topic; ++j) {
      world.words.push_back(encode_utf8(root) + encode_utf8(fresh_char()));
      world.topic_of_word.push_back(t);
    }
  }
  world.twin_a = world.roots[0];
  world.twin_b = world.roots[1];
  world.strokes[world.twin_b] = world.strokes[world.twin_a];
  world.glyphs[world.twin_a] = bars(true);
  world.glyphs[world.twin_b] = bars(false);

  const auto per_topic = static_cast<std::uint64_t>(options.words_per_topic);
  for (int s = 0; s < options.sentences; ++s) {
    const auto topic = static_cast<std::size_t>(s % options.topics);
    std::string line;
    for (int k = 0; k < options.sentence_length; ++k) {
      if (k) line += ' ';
      line += world.words[topic * per_topic + rng.below(per_topic)];
    }
    world.sentences.push_back(std::move(line));
  }
  return world;
}

void write_synthetic_world(const SyntheticWorld& world, const std::string& dir) {
  {
    std::ofstream out(dir + "/corpus.txt", std::ios::binary);
    if (!out) throw DataError("cannot write " + dir + "/corpus.txt");
    out << world.corpus_text();
  }
  {
    std::ofstream out(dir + "/strokes.tsv", std::ios::binary);
    if (!out) throw DataError("cannot write " + dir + "/strokes.tsv");
    write_stroke_table(out, world.strokes);
  }
  save_glyph_pack(dir + "/glyphs.bin", world.glyphs);
}

}  // namespace dwe
