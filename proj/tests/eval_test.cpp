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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "dwe/eval.hpp"
#include "dwe/random.hpp"
#include "dwe/utf8.hpp"
#include "support.hpp"

namespace dwe {
namespace {

using testing::MatrixSource;
using Rows = std::vector<std::vector<float>>;

Rows random_rows(Rng& rng, std::size_t n, int d) {
  Rows rows(n, std::vector<float>(static_cast<std::size_t>(d)));
  for (auto& r : rows) {
    for (float& x : r) x = static_cast<float>(rng.uniform(-1, 1));
  }
  return rows;
}

std::string w(std::size_t i) { return "w" + std::to_string(i); }

std::string analogy_text(std::initializer_list<const char*> lines) {
  std::string s;
  for (const char* l : lines) s += std::string(l) + "\n";
  return s;
}

TEST(Cosine, ZeroNormIsUndefined) {
  const std::vector<float> a{1, 2}, zero{0, 0}, b{2, 4};
  EXPECT_FALSE(cosine(a, zero).has_value());
  EXPECT_NEAR(*cosine(a, b), 1.0, 1e-15);
}

TEST(Spearman, PerfectMonotone) {
  const std::vector<double> xs{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(spearman_rho(xs, std::vector<double>{2, 4, 8, 16, 32}), 1.0);
  EXPECT_DOUBLE_EQ(spearman_rho(xs, std::vector<double>{9, 7, 5, 3, 1}), -1.0);
}

TEST(Spearman, TiesMatchOracle) {
  const std::vector<double> xs{1, 2, 3, 4}, ys{1, 2, 2, 4};
  EXPECT_NEAR(spearman_rho(xs, ys), testing::oracle_spearman(xs, ys), 1e-12);
  EXPECT_EQ(average_ranks(ys), (std::vector<double>{1, 2.5, 2.5, 4}));
}

TEST(Spearman, Errors) {
  const std::vector<double> two{1, 2}, three{1, 2, 3}, one{1}, flat{5, 5, 5};
  EXPECT_THROW(spearman_rho(two, three), DataError);
  EXPECT_THROW(spearman_rho(one, one), DataError);
  EXPECT_THROW(spearman_rho(three, flat), DataError);
}

TEST(Spearman, InvariantUnderIncreasingTransforms) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(12), ys(12);
    for (auto& x : xs) x = rng.uniform(-2, 2);
    for (auto& y : ys) y = std::round(rng.uniform(0, 5));
    std::vector<double> tx(xs.size()), ty(ys.size());
    std::transform(xs.begin(), xs.end(), tx.begin(), [](double x) { return std::exp(3 * x) + 1; });
    std::transform(ys.begin(), ys.end(), ty.begin(), [](double y) { return y * y * y - 7; });
    EXPECT_NEAR(spearman_rho(xs, ys), spearman_rho(tx, ty), 1e-12);
    const double rho = spearman_rho(xs, ys);
    EXPECT_GE(rho, -1.0);
    EXPECT_LE(rho, 1.0);
  }
}

TEST(SimilarityData, ParseAndErrors) {
  std::istringstream ok("a\tb\t1.5\nc\td\t-2\n");
  const auto d = parse_similarity_dataset(ok);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[1].score, -2.0);
  for (const char* bad : {"a\tb\n", "a\tb\tx\n", "a\tb\t1x\n", "a\tb\tnan\n", "a\tb\t1\tz\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(parse_similarity_dataset(in), DataError) << bad;
  }
}

TEST(Similarity, IdenticalScoresGiveOne) {
  Rng rng(5);
  const MatrixSource src(random_rows(rng, 8, 4));
  SimilarityDataset d;
  for (std::size_t i = 0; i + 1 < 8; ++i) {
    d.push_back({w(i), w(i + 1), *cosine(src.row(i), src.row(i + 1))});
  }
  const auto r = eval_similarity(d, src);
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_EQ(r.coverage, 1.0);
}

TEST(Similarity, CoverageAndUnscorable) {
  Rng rng(6);
  auto rows = random_rows(rng, 4, 3);
  rows[3] = {0, 0, 0};
  const MatrixSource src(rows);
  SimilarityDataset d{{"w0", "w1", 1}, {"w1", "w2", 2}, {"w0", "w2", 3}, {"w0", "zz", 4}, {"w0", "w3", 5}};
  const auto r = eval_similarity(d, src);
  EXPECT_EQ(r.scored, 3u);
  EXPECT_EQ(r.total, 5u);
  EXPECT_DOUBLE_EQ(r.coverage, 0.6);
  const SimilarityDataset none{{"x", "y", 1}, {"p", "q", 2}};
  EXPECT_THROW(eval_similarity(none, src), DataError);
}

TEST(Similarity, MicroModelMatchesOracle) {
  const auto m = testing::make_micro_model(7, 6);
  const auto ckpt = testing::micro_checkpoint(m);
  const CheckpointVectors src(ckpt, VectorKind::composed);
  const auto& words = ckpt.vocab.words();
  const SimilarityDataset d{{words[0], words[1], 3.0}, {words[1], words[2], 1.0},
                            {words[2], words[3], 2.5}, {words[0], words[3], 0.5},
                            {words[0], words[2], 4.0}};
  std::vector<double> model, human;
  for (const auto& rec : d) {
    model.push_back(*cosine(eval_vector(src, rec.a), eval_vector(src, rec.b)));
    human.push_back(rec.score);
  }
  EXPECT_NEAR(eval_similarity(d, src).rho, testing::oracle_spearman(model, human), 1e-12);
}

TEST(EvalVector, InVocabularyEqualsComposition) {
  const auto m = testing::make_micro_model(8, 6);
  const auto ckpt = testing::micro_checkpoint(m);
  const CheckpointVectors src(ckpt, VectorKind::composed);
  for (WordId id = 0; id < 4; ++id) {
    const auto comp = compose_word<float>(id, ckpt.lexicon, ckpt.params);
    EXPECT_EQ(eval_vector(src, ckpt.vocab.word(id)), comp.vec);
  }
  const CheckpointVectors ids(ckpt, VectorKind::word_id);
  const auto row = ckpt.params.tables.word_id.row(1);
  EXPECT_TRUE(std::ranges::equal(eval_vector(ids, ckpt.vocab.word(1)), row));
}

TEST(EvalVector, OutOfVocabularyAveragesCharacters) {
  const auto m = testing::make_micro_model(9, 6);
  const auto ckpt = testing::micro_checkpoint(m);
  const CheckpointVectors src(ckpt, VectorKind::composed);
  const std::string oov = encode_utf8(0x4EBA) + encode_utf8(0x4E8C);
  ASSERT_EQ(ckpt.vocab.id_of(oov), -1);
  const auto a = char_feature(ckpt.lexicon.entry(ckpt.lexicon.char_index(0x4EBA)), ckpt.params);
  const auto b = char_feature(ckpt.lexicon.entry(ckpt.lexicon.char_index(0x4E8C)), ckpt.params);
  const auto v = eval_vector(src, oov);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_FLOAT_EQ(v[k], (a[k] + b[k]) / 2);
  EXPECT_THROW(eval_vector(src, "latin"), DataError);
  EXPECT_THROW(eval_vector(src, ""), DataError);
  EXPECT_THROW(eval_vector(src, encode_utf8(0x4E00)), DataError);  // CJK but unknown
  const CheckpointVectors ids(ckpt, VectorKind::word_id);
  EXPECT_THROW(eval_vector(ids, oov), DataError);
}

TEST(Analogy, ExactTargetIsFound) {
  Rng rng(10);
  auto rows = random_rows(rng, 6, 5);
  auto unit = [](std::vector<float> v) {
    double n = 0;
    for (float x : v) n += x * x;
    for (float& x : v) x = static_cast<float>(x / std::sqrt(n));
    return v;
  };
  const auto a = unit(rows[0]), b = unit(rows[1]), h = unit(rows[2]);
  std::vector<float> t(5);
  for (std::size_t k = 0; k < 5; ++k) t[k] = 3 * (b[k] - a[k] + h[k]);
  rows[4] = t;
  const MatrixSource src(rows);
  EXPECT_EQ(analogy_3cosadd(src, "w0", "w1", "w2"), "w4");
}

TEST(Analogy, RandomVocabulariesMatchOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto rows = random_rows(rng, 10, 3 + trial % 4);
    const MatrixSource src(rows);
    const auto a = rng.below(10), b = rng.below(10), h = rng.below(10);
    for (bool mul : {false, true}) {
      const auto got = mul ? analogy_3cosmul(src, w(a), w(b), w(h)) : analogy_3cosadd(src, w(a), w(b), w(h));
      const auto want = testing::oracle_analogy(rows, mul, a, b, h);
      ASSERT_TRUE(got.has_value());
      EXPECT_EQ(*got, w(static_cast<std::size_t>(want))) << "trial " << trial << " mul " << mul;
    }
  }
}

TEST(Analogy, DegenerateQueryReducesToNearestOfB) {
  Rng rng(12);
  const auto rows = random_rows(rng, 10, 4);
  const MatrixSource src(rows);
  // h = a: b - a + h = b, so the answer is b's nearest neighbour outside {a, b}.
  std::string best;
  double best_cos = -2;
  for (std::size_t i = 0; i < 10; ++i) {
    if (i == 2 || i == 5) continue;
    const double c = *cosine(rows[i], rows[5]);
    if (c > best_cos) best_cos = c, best = w(i);
  }
  EXPECT_EQ(analogy_3cosadd(src, "w2", "w5", "w2"), best);
  EXPECT_EQ(testing::oracle_analogy(rows, false, 2, 5, 2), std::stoi(best.substr(1)));
}

TEST(Analogy, MethodsAgreeOnSymmetricConstruction) {
  // t sits exactly where b and h point, away from a.
  const Rows rows{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 1, 1}, {1, 1, 0}, {1, 0, 1}};
  const MatrixSource src(rows);
  EXPECT_EQ(analogy_3cosadd(src, "w0", "w1", "w2"), "w3");
  EXPECT_EQ(analogy_3cosmul(src, "w0", "w1", "w2"), "w3");
}

TEST(Analogy, EpsilonGuardsZeroDenominator) {
  // The answer is opposite to a, so its shifted cosine with a is exactly 0.
  const Rows rows{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {1, 1}};
  const MatrixSource src(rows);
  const AnalogySolver solver(src);
  const std::vector<std::int64_t> exclude{0, 1, 2};
  const auto id = solver.solve(AnalogyMethod::cos_mul, rows[0], rows[1], rows[2], exclude);
  ASSERT_TRUE(id.has_value());
  EXPECT_EQ(*id, 3u);
}

TEST(Analogy, TiesGoToLowestId) {
  const Rows rows{{1, 0}, {0, 1}, {1, 0}, {0, 1}, {0, 1}};
  const MatrixSource src(rows);
  EXPECT_EQ(analogy_3cosadd(src, "w0", "w1", "w2"), "w3");
  EXPECT_EQ(analogy_3cosmul(src, "w0", "w1", "w2"), "w3");
}

TEST(Analogy, ScaleInvariance) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto rows = random_rows(rng, 9, 4);
    auto scaled = rows;
    for (auto& r : scaled) {
      for (float& x : r) x *= 8.0f;  // a power of two keeps every cosine bit-identical
    }
    const MatrixSource a(rows), b(scaled);
    for (bool mul : {false, true}) {
      const auto x = mul ? analogy_3cosmul(a, "w0", "w1", "w2") : analogy_3cosadd(a, "w0", "w1", "w2");
      const auto y = mul ? analogy_3cosmul(b, "w0", "w1", "w2") : analogy_3cosadd(b, "w0", "w1", "w2");
      EXPECT_EQ(x, y);
    }
    EXPECT_EQ(nearest_neighbors(a, "w3", 4), nearest_neighbors(b, "w3", 4));
  }
}

TEST(Analogy, UnrepresentableQueryFails) {
  const Rows rows{{1, 0}, {0, 1}, {0, 0}, {1, 1}};
  const MatrixSource src(rows);
  EXPECT_FALSE(analogy_3cosadd(src, "w0", "w1", "nope").has_value());
  EXPECT_FALSE(analogy_3cosadd(src, "w0", "w1", "w2").has_value());
}

TEST(AnalogyData, ParseGroupsAndErrors) {
  std::istringstream in(analogy_text({": capital", "a b c d", "e f g h", ": family", "i j k l"}));
  const auto d = parse_analogy_dataset(in);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].name, "capital");
  EXPECT_EQ(d[0].questions.size(), 2u);
  EXPECT_EQ(d[1].questions[0].t, "l");
  std::istringstream headless("a b c d\n");
  EXPECT_EQ(parse_analogy_dataset(headless).front().name, "default");
  for (const auto& bad : {analogy_text({": x", "a b c"}), analogy_text({": x", "a b c d", ": x", "e f g h"}),
                          analogy_text({":  ", "a b c d"})}) {
    std::istringstream b(bad);
    EXPECT_THROW(parse_analogy_dataset(b), DataError);
  }
}

TEST(AnalogyData, MethodNames) {
  EXPECT_EQ(parse_analogy_method("add"), AnalogyMethod::cos_add);
  EXPECT_EQ(parse_analogy_method("3cosmul"), AnalogyMethod::cos_mul);
  EXPECT_THROW(parse_analogy_method("dot"), ConfigError);
}

TEST(EvalAnalogy, ConstructedTargetsScoreOne) {
  const Rows rows{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 1, 1}, {1, 1, 0}, {1, 0, 1}};
  const MatrixSource src(rows);
  const AnalogyDataset d{{"g", {{"w0", "w1", "w2", "w3"}, {"w0", "w2", "w1", "w3"}}}};
  for (auto m : {AnalogyMethod::cos_add, AnalogyMethod::cos_mul}) {
    const auto r = eval_analogy(d, src, m);
    EXPECT_EQ(r.overall.accuracy(), 1.0);
    EXPECT_EQ(r.overall.group, "total");
  }
}

TEST(EvalAnalogy, ExcludedAnswerScoresZero) {
  Rng rng(14);
  const MatrixSource src(random_rows(rng, 7, 3));
  AnalogyDataset d{{"g", {}}};
  for (int i = 0; i < 5; ++i) {
    const std::string b = w(static_cast<std::size_t>(i + 1));
    d[0].questions.push_back({w(0), b, w(6), b});
  }
  EXPECT_EQ(eval_analogy(d, src, AnalogyMethod::cos_add).overall.accuracy(), 0.0);
}

TEST(EvalAnalogy, MixedSetMatchesHandCount) {
  Rng rng(15);
  const auto rows = random_rows(rng, 8, 4);
  const MatrixSource src(rows);
  AnalogyDataset d{{"one", {}}, {"two", {}}};
  std::size_t right[2] = {0, 0};
  for (std::size_t q = 0; q < 12; ++q) {
    const auto a = q % 8, b = (q + 3) % 8, h = (q * 5 + 1) % 8;
    const auto want = testing::oracle_analogy(rows, false, a, b, h);
    const bool correct = q % 3 != 0;
    const std::string t = correct ? w(static_cast<std::size_t>(want)) : "missing";
    d[q % 2].questions.push_back({w(a), w(b), w(h), t});
    right[q % 2] += correct;
  }
  d[1].questions.push_back({"nope", "w1", "w2", "w3"});  // unanswerable counts as wrong
  const auto r = eval_analogy(d, src, AnalogyMethod::cos_add);
  EXPECT_EQ(r.groups[0].correct, right[0]);
  EXPECT_EQ(r.groups[1].correct, right[1]);
  EXPECT_EQ(r.groups[1].total, 7u);
  EXPECT_EQ(r.groups[1].answered, 6u);
  EXPECT_EQ(r.overall.correct, right[0] + right[1]);
  EXPECT_EQ(r.overall.total, 13u);
  EXPECT_THROW(eval_analogy(AnalogyDataset{}, src, AnalogyMethod::cos_add), DataError);
}

TEST(NearestNeighbors, TwoWordVocabulary) {
  const MatrixSource src(Rows{{1, 0}, {1, 1}});
  const auto hits = nearest_neighbors(src, "w0", 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].first, "w1");
}

TEST(NearestNeighbors, MatchesSortOracleAndExcludesQuery) {
  Rng rng(16);
  const auto rows = random_rows(rng, 12, 5);
  const MatrixSource src(rows);
  for (std::size_t q = 0; q < 12; ++q) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < 12; ++i) {
      if (i != q) all.emplace_back(-*cosine(rows[q], rows[i]), i);
    }
    std::sort(all.begin(), all.end());
    const auto hits = nearest_neighbors(src, w(q), 3);
    ASSERT_EQ(hits.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(hits[k].first, w(all[k].second));
      EXPECT_NE(hits[k].first, w(q));
    }
  }
}

TEST(NearestNeighbors, Errors) {
  const MatrixSource src(Rows{{1, 0}, {1, 1}});
  EXPECT_THROW(nearest_neighbors(src, "w0", 0), ConfigError);
  EXPECT_THROW(nearest_neighbors(src, "zz", 1), DataError);
  EXPECT_EQ(nearest_neighbors(src, "w0", 10).size(), 1u);
}

}  // namespace
}  // namespace dwe
