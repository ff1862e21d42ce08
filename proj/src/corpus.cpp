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
#include "dwe/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include "dwe/error.hpp"

namespace dwe {

Vocab::Vocab(std::vector<std::string> words, std::vector<std::uint64_t> counts,
             std::uint64_t total_tokens)
    : words_(std::move(words)), counts_(std::move(counts)), total_tokens_(total_tokens) {
  if (words_.size() != counts_.size()) throw DataError("vocab words/counts size mismatch");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw DataError("duplicate vocabulary entry: " + words_[i]);
    }
  }
}

WordId Vocab::id_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

void VocabCounter::add(std::string_view token) {
  auto [it, inserted] = entries_.try_emplace(std::string(token));
  if (inserted) it->second.first_seen = total_;
  ++it->second.count;
  ++total_;
}

Vocab VocabCounter::finish(std::uint64_t min_count) const {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  struct Kept {
    const std::string* word;
    Entry entry;
  };
  std::vector<Kept> kept;
  for (const auto& [word, entry] : entries_) {
    if (entry.count >= min_count) kept.push_back({&word, entry});
  }
  if (kept.empty()) {
    throw DataError("empty vocabulary: no token occurs at least " +
                    std::to_string(min_count) + " times");
  }
  std::sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) {
    if (a.entry.count != b.entry.count) return a.entry.count > b.entry.count;
    return a.entry.first_seen < b.entry.first_seen;
  });
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(kept.size());
  counts.reserve(kept.size());
  for (const auto& k : kept) {
    words.push_back(*k.word);
    counts.push_back(k.entry.count);
  }
  return Vocab(std::move(words), std::move(counts), total_);
}

Vocab build_vocab(std::span<const std::string> tokens, std::uint64_t min_count) {
  VocabCounter counter;
  for (const auto& t : tokens) counter.add(t);
  return counter.finish(min_count);
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const auto end = std::min(line.find(' ', start), line.size());
    if (end > start) out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

Vocab count_corpus(std::istream& in, std::uint64_t min_count) {
  VocabCounter counter;
  std::string line;
  while (std::getline(in, line)) {
    for (auto token : split_tokens(line)) counter.add(token);
  }
  return counter.finish(min_count);
}

namespace {

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path);
  return in;
}

}  // namespace

Vocab count_corpus_file(const std::string& path, std::uint64_t min_count) {
  auto in = open_text(path);
  return count_corpus(in, min_count);
}

std::vector<Sentence> encode_corpus(std::istream& in, const Vocab& vocab) {
  std::vector<Sentence> sentences;
  std::string line;
  while (std::getline(in, line)) {
    Sentence s;
    for (auto token : split_tokens(line)) {
      const WordId id = vocab.id_of(token);
      if (id >= 0) s.push_back(id);
    }
    if (!s.empty()) sentences.push_back(std::move(s));
  }
  return sentences;
}

std::vector<Sentence> encode_corpus_file(const std::string& path, const Vocab& vocab) {
  auto in = open_text(path);
  return encode_corpus(in, vocab);
}

std::vector<std::pair<WordId, WordId>> context_pairs(std::span<const WordId> sentence,
                                                     int window) {
  if (window < 1) throw ConfigError("window must be >= 1");
  std::vector<std::pair<WordId, WordId>> pairs;
  for_each_context_pair(sentence, window,
                        [&](WordId c, WordId o) { pairs.emplace_back(c, o); });
  return pairs;
}

NegativeSampler::NegativeSampler(std::span<const std::uint64_t> counts, double alpha,
                                 std::uint64_t seed)
    : alpha_(alpha), rng_(seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (counts.empty()) throw ConfigError("negative sampler needs a non-empty vocabulary");
  probs_.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    probs_[i] = std::pow(static_cast<double>(counts[i]), alpha);
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  for (double& p : probs_) p /= total;
  cumulative_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

WordId NegativeSampler::draw() {
  const double u = rng_.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                            static_cast<std::ptrdiff_t>(probs_.size()) - 1);
  return static_cast<WordId>(idx);
}

void NegativeSampler::draw_negatives(WordId exclude, std::span<WordId> out) {
  if (probs_.size() < 2) {
    throw ConfigError("negative sampling needs at least two vocabulary words");
  }
  for (WordId& slot : out) {
    WordId id = draw();
    while (id == exclude) id = draw();
    slot = id;
  }
}

std::vector<WordId> NegativeSampler::draw_negatives(int count, WordId exclude) {
  if (count < 1) throw ConfigError("negative count must be >= 1");
  std::vector<WordId> out(static_cast<std::size_t>(count));
  draw_negatives(exclude, out);
  return out;
}

Subsampler::Subsampler(const Vocab& vocab, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("subsampling threshold must be positive");
  keep_.resize(vocab.size());
  const auto total = static_cast<double>(vocab.total_tokens());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double f = static_cast<double>(vocab.counts()[i]) / total;
    keep_[i] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
  }
}

Sentence Subsampler::apply(std::span<const WordId> sentence, Rng& rng) const {
  Sentence out;
  out.reserve(sentence.size());
  for (WordId id : sentence) {
    if (rng.uniform() < keep_probability(id)) out.push_back(id);
  }
  return out;
}

}  // namespace dwe
