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

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dwe/random.hpp"

namespace dwe {

using WordId = std::int32_t;
using Sentence = std::vector<WordId>;

/// Word <-> id mapping over the training corpus. Ids are dense, assigned by
/// descending frequency with ties broken by first occurrence.
class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> words, std::vector<std::uint64_t> counts,
        std::uint64_t total_tokens);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  /// -1 when the token is not in the vocabulary.
  WordId id_of(std::string_view token) const;
  bool contains(std::string_view token) const { return id_of(token) >= 0; }

  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::uint64_t count(WordId id) const { return counts_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total_tokens() const { return total_tokens_; }

  bool operator==(const Vocab& other) const {
    return words_ == other.words_ && counts_ == other.counts_ &&
           total_tokens_ == other.total_tokens_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_tokens_ = 0;
  std::unordered_map<std::string, WordId> index_;
};

/// Streaming frequency counter behind build_vocab.
class VocabCounter {
 public:
  void add(std::string_view token);
  /// Throws DataError when no token reaches min_count.
  Vocab finish(std::uint64_t min_count) const;

 private:
  struct Entry {
    std::uint64_t count = 0;
    std::uint64_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> entries_;
  std::uint64_t total_ = 0;
};

Vocab build_vocab(std::span<const std::string> tokens, std::uint64_t min_count);

/// Splits a corpus line on spaces; empty fields and a trailing CR are dropped.
std::vector<std::string_view> split_tokens(std::string_view line);

/// Counts every token of a one-sentence-per-line corpus.
Vocab count_corpus(std::istream& in, std::uint64_t min_count);
Vocab count_corpus_file(const std::string& path, std::uint64_t min_count);

/// Maps corpus lines to id sentences; out-of-vocabulary tokens are dropped,
/// and so are lines left without any token.
std::vector<Sentence> encode_corpus(std::istream& in, const Vocab& vocab);
std::vector<Sentence> encode_corpus_file(const std::string& path, const Vocab& vocab);

/// Calls fn(center, context) for every skip-gram pair of the sentence:
/// centers left to right, then contexts left to right, |i - j| <= window.
template <typename Fn>
void for_each_context_pair(std::span<const WordId> sentence, int window, Fn&& fn) {
  const auto n = static_cast<std::ptrdiff_t>(sentence.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + window);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j != i) fn(sentence[i], sentence[j]);
    }
  }
}

std::vector<std::pair<WordId, WordId>> context_pairs(std::span<const WordId> sentence,
                                                     int window);

/// Draws negatives from count^alpha / sum(count^alpha). alpha = 1 gives the
/// unigram distribution. Not thread-safe; one instance per worker.
class NegativeSampler {
 public:
  NegativeSampler(std::span<const std::uint64_t> counts, double alpha, std::uint64_t seed);

  double probability(WordId id) const { return probs_.at(static_cast<std::size_t>(id)); }
  std::span<const double> probabilities() const { return probs_; }
  double alpha() const { return alpha_; }
  std::size_t size() const { return probs_.size(); }

  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

  WordId draw();

  /// Fills out with i.i.d. draws, redrawing any that equal exclude.
  /// Throws ConfigError when the vocabulary has fewer than two words.
  void draw_negatives(WordId exclude, std::span<WordId> out);
  std::vector<WordId> draw_negatives(int count, WordId exclude);

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  double alpha_;
  Rng rng_;
};

/// Frequent-word subsampling: keeps a token with probability
/// (sqrt(f / t) + 1) * t / f where f is its relative frequency.
class Subsampler {
 public:
  Subsampler(const Vocab& vocab, double threshold);
  double keep_probability(WordId id) const {
    return keep_.at(static_cast<std::size_t>(id));
  }
  Sentence apply(std::span<const WordId> sentence, Rng& rng) const;

 private:
  std::vector<double> keep_;
};

}  // namespace dwe
