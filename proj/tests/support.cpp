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
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <unistd.h>

#include "dwe/utf8.hpp"

namespace dwe::testing {
namespace {

double logsig(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> dense(const SparseRows<double>& rows, std::size_t n_rows, std::size_t d) {
  std::vector<double> out(n_rows * d, 0.0);
  const auto ids = rows.ids();
  for (std::size_t s = 0; s < ids.size(); ++s) {
    const auto r = rows.row_at(s);
    std::copy(r.begin(), r.end(), out.begin() + static_cast<std::ptrdiff_t>(ids[s] * d));
  }
  return out;
}

}  // namespace

GlyphBitmap random_glyph(Rng& rng, double density) {
  GlyphBitmap g;
  for (auto& px : g.pixels) px = rng.uniform() < density ? 1 : 0;
  return g;
}

MicroModel make_micro_model(std::uint64_t seed, int dim) {
  Rng rng(mix_seed(seed, 101));
  MicroModel m;
  const char32_t chars[] = {0x4E59, 0x4E8C, 0x4EBA};
  for (char32_t c : chars) {
    StrokeSequence seq;
    const auto len = 1 + rng.below(2);
    for (std::uint64_t i = 0; i < len; ++i) {
      seq.codes.push_back(static_cast<std::uint8_t>(1 + rng.below(32)));
    }
    m.strokes[c] = seq;
    m.glyphs[c] = random_glyph(rng);
  }
  std::vector<std::string> words = {encode_utf8(chars[0]), encode_utf8(chars[0]) + encode_utf8(chars[1]),
                                    encode_utf8(chars[1]) + encode_utf8(chars[2]),
                                    "z" + encode_utf8(chars[2])};
  m.vocab = Vocab(words, {4, 3, 2, 1}, 10);
  m.dict = build_ngram_dict(m.strokes, observed_chars(m.vocab), 3, 4);
  m.lexicon = Lexicon::build(m.vocab, m.dict, m.glyphs);
  m.params = init_model<double>(m.vocab.size(), m.dict.size(), dim, seed);
  for (auto* t : {&m.params.tables.word_id, &m.params.tables.context, &m.params.tables.ngram}) {
    for (double& v : t->data()) v = rng.uniform(-0.5, 0.5);
  }
  for (auto* b : {&m.params.cnn.conv1_b, &m.params.cnn.conv2_b, &m.params.cnn.fc1_b,
                  &m.params.cnn.fc2_b, &m.params.cnn.fc3_b}) {
    for (double& v : *b) v = rng.uniform(-0.1, 0.1);
  }
  return m;
}

Checkpoint micro_checkpoint(const MicroModel& m) {
  Checkpoint ckpt;
  ckpt.config.dim = m.params.dim();
  ckpt.config.n_min = m.dict.n_min();
  ckpt.config.n_max = m.dict.n_max();
  ckpt.config.min_count = 1;
  ckpt.config.epochs = 0;
  ckpt.vocab = m.vocab;
  ckpt.dict = m.dict;
  ckpt.glyphs = m.glyphs;
  ckpt.params = m.params.cast<float>();
  ckpt.accum = ModelParams<float>::zeros(m.params.vocab_size(), m.params.ngram_count(), m.params.dim());
  ckpt.rebuild_lexicon();
  return ckpt;
}

TrainingBatch micro_batch(std::size_t vocab_size, std::uint64_t seed, int negatives,
                          int pairs_per_center) {
  Rng rng(mix_seed(seed, 202));
  TrainingBatch batch;
  batch.negatives_per_pair = negatives;
  const auto v = static_cast<std::uint64_t>(vocab_size);
  for (std::uint64_t c = 0; c < v; ++c) {
    for (int p = 0; p < pairs_per_center; ++p) {
      auto other = [&] {
        auto x = rng.below(v - 1);
        return static_cast<WordId>(x >= c ? x + 1 : x);
      };
      const WordId ctx = other();
      std::vector<WordId> negs;
      for (int k = 0; k < negatives; ++k) negs.push_back(other());
      batch.add(static_cast<WordId>(c), ctx, negs);
    }
  }
  return batch;
}

long double oracle_objective(const MicroModel& m, const ModelParams<double>& p,
                             const TrainingBatch& batch, const ObjectiveOptions& opt) {
  using LD = long double;
  const auto d = static_cast<std::size_t>(p.dim());
  const auto cnn = opt.channels.glyphs ? p.cnn.cast<LD>() : CnnParams<LD>::zeros(p.dim());
  std::map<char32_t, std::vector<LD>> features;
  auto feature = [&](char32_t c) -> const std::vector<LD>& {
    auto it = features.find(c);
    if (it != features.end()) return it->second;
    std::vector<LD> strokes(d, opt.channels.strokes ? 0.0L : 1.0L);
    if (opt.channels.strokes) {
      for (auto id : m.dict.char_ngrams(c)) {
        for (std::size_t k = 0; k < d; ++k) strokes[k] += p.tables.ngram.row(static_cast<std::size_t>(id))[k];
      }
    }
    std::vector<LD> glyph(d, 1.0L);
    if (opt.channels.glyphs) {
      const auto g = m.glyphs.find(c);
      glyph = cnn_forward(cnn, g == m.glyphs.end() ? GlyphBitmap{} : g->second).first;
    }
    std::vector<LD> f(d);
    for (std::size_t k = 0; k < d; ++k) f[k] = strokes[k] * glyph[k];
    return features.emplace(c, std::move(f)).first->second;
  };

  auto compose = [&](WordId id) {
    const auto wid = p.tables.word_id.row(static_cast<std::size_t>(id));
    std::vector<LD> w(wid.begin(), wid.end());
    if (!opt.channels.any()) return w;
    std::vector<char32_t> chars;
    for (char32_t c : decode_utf8(m.vocab.word(id))) {
      if (is_cjk(c)) chars.push_back(c);
    }
    if (chars.empty()) return w;
    std::vector<LD> sum(d, 0.0L);
    for (char32_t c : chars) {
      const auto& f = feature(c);
      for (std::size_t k = 0; k < d; ++k) sum[k] += f[k];
    }
    for (std::size_t k = 0; k < d; ++k) w[k] += sum[k] / static_cast<LD>(chars.size());
    return w;
  };

  auto dot = [&](const std::vector<LD>& w, std::span<const double> e) {
    LD s = 0;
    for (std::size_t k = 0; k < d; ++k) s += w[k] * e[k];
    return s;
  };
  auto logsig = [](LD x) {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
  };

  LD total = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto w = compose(batch.centers[i]);
    total += logsig(dot(w, p.tables.context.row(static_cast<std::size_t>(batch.contexts[i]))));
    for (WordId n : batch.negatives_of(i)) {
      total += static_cast<LD>(opt.negative_weight) *
               logsig(-dot(w, p.tables.context.row(static_cast<std::size_t>(n))));
    }
  }
  return total;
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport check_model_gradients(MicroModel& m, const TrainingBatch& batch,
                                      const ObjectiveOptions& opt, std::uint64_t seed,
                                      const GradCheckOptions& check) {
  const auto d = static_cast<std::size_t>(m.params.dim());
  Gradients<double> g(m.params.dim());
  batch_gradients<double>(batch, m.lexicon, m.params, opt, g);

  std::vector<std::vector<double>> analytic;
  analytic.push_back(dense(g.word_id, m.params.vocab_size(), d));
  analytic.push_back(dense(g.context, m.params.vocab_size(), d));
  analytic.push_back(dense(g.ngram, m.params.ngram_count(), d));
  for (auto t : g.cnn.tensors()) analytic.emplace_back(t.begin(), t.end());

  static const char* const kTables[] = {"word_id", "context", "ngram"};
  const auto cnn_names = CnnParams<double>::tensor_names();
  auto name_of = [&](std::size_t t) {
    return std::string(t < 3 ? kTables[t] : cnn_names[t - 3]);
  };

  GradCheckReport report;
  auto record = [&](double rel, const std::string& where) {
    if (report.worst.empty() || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst = where;
    }
  };
  auto objective = [&] { return oracle_objective(m, m.params, batch, opt); };

  Rng rng(mix_seed(seed, 303));
  auto tensors = m.params.tensors();
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    auto param = tensors[t];
    const auto& a = analytic[t];
    std::vector<std::size_t> picks;
    if (param.size() <= check.full_limit) {
      picks.resize(param.size());
      std::iota(picks.begin(), picks.end(), std::size_t{0});
    } else {
      std::set<std::size_t> chosen;
      while (chosen.size() < check.sampled / 2) chosen.insert(rng.below(param.size()));
      std::vector<std::size_t> order(param.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(check.sampled),
                        order.end(), [&](std::size_t x, std::size_t y) {
                          return std::abs(a[x]) > std::abs(a[y]);
                        });
      for (std::size_t i = 0; chosen.size() < check.sampled && i < order.size(); ++i) {
        chosen.insert(order[i]);
      }
      picks.assign(chosen.begin(), chosen.end());
    }
    for (auto i : picks) {
      const double orig = param[i];
      param[i] = orig + check.h;
      const long double up = objective();
      const long double step_up = param[i] - orig;
      param[i] = orig - check.h;
      const long double down = objective();
      const long double step_down = orig - param[i];
      param[i] = orig;
      const auto numeric = static_cast<double>((up - down) / (step_up + step_down));
      record(relative_error(a[i], numeric, check.floor), name_of(t) + "[" + std::to_string(i) + "]");
      ++report.entries;
    }
    for (int r = 0; r < check.directions; ++r) {
      const double unit = 1.0 / std::sqrt(static_cast<double>(param.size()));
      std::vector<double> dir(param.size());
      for (double& x : dir) x = rng.below(2) ? unit : -unit;
      const std::vector<double> orig(param.begin(), param.end());
      double projected = 0;
      for (std::size_t i = 0; i < param.size(); ++i) projected += a[i] * dir[i];
      for (std::size_t i = 0; i < param.size(); ++i) param[i] = orig[i] + check.h * dir[i];
      const long double up = objective();
      for (std::size_t i = 0; i < param.size(); ++i) param[i] = orig[i] - check.h * dir[i];
      const long double down = objective();
      std::copy(orig.begin(), orig.end(), param.begin());
      const auto numeric = static_cast<double>((up - down) / (2 * static_cast<long double>(check.h)));
      record(relative_error(projected, numeric, check.floor),
             name_of(t) + "[direction " + std::to_string(r) + "]");
      ++report.directions;
    }
  }
  return report;
}

double SgnsReference::step(const TrainingBatch& batch, double lr, double eps) {
  const auto d = word.cols();
  Matrix<double> gw(word.rows(), d);
  Matrix<double> gc(context.rows(), d);
  double total = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto c = static_cast<std::size_t>(batch.centers[i]);
    auto add = [&](std::size_t o, double label) {
      const double s = dot(word.row(c), context.row(o));
      total += label > 0 ? -std::log1p(std::exp(-s)) : -std::log1p(std::exp(s));
      const double coef = label - sig(s);
      for (std::size_t k = 0; k < d; ++k) {
        gw.row(c)[k] += coef * context.row(o)[k];
        gc.row(o)[k] += coef * word.row(c)[k];
      }
    };
    add(static_cast<std::size_t>(batch.contexts[i]), 1.0);
    for (WordId n : batch.negatives_of(i)) add(static_cast<std::size_t>(n), 0.0);
  }
  auto update = [&](Matrix<double>& param, Matrix<double>& acc, const Matrix<double>& grad) {
    for (std::size_t i = 0; i < param.data().size(); ++i) {
      acc.data()[i] += grad.data()[i] * grad.data()[i];
      param.data()[i] += lr * grad.data()[i] / (std::sqrt(acc.data()[i]) + eps);
    }
  };
  update(word, word_acc, gw);
  update(context, context_acc, gc);
  return total;
}

double oracle_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<long double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::size_t less = 0, equal = 0;
      for (double x : v) {
        less += x < v[i];
        equal += x == v[i];
      }
      r[i] = 1.0L + static_cast<long double>(less) + (static_cast<long double>(equal) - 1.0L) / 2.0L;
    }
    return r;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const long double n = static_cast<long double>(rx.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

std::int64_t oracle_analogy(const std::vector<std::vector<float>>& vocab, bool multiplicative,
                            std::size_t a, std::size_t b, std::size_t h) {
  auto normalized = [](const std::vector<float>& v) {
    long double n = 0;
    for (float x : v) n += static_cast<long double>(x) * x;
    std::vector<long double> out(v.size(), 0.0L);
    if (n == 0) return out;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / std::sqrt(n);
    return out;
  };
  auto cos = [](const std::vector<long double>& x, const std::vector<long double>& y) {
    long double xy = 0, xx = 0, yy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xy += x[i] * y[i];
      xx += x[i] * x[i];
      yy += y[i] * y[i];
    }
    return xy / std::sqrt(xx * yy);
  };
  const auto ua = normalized(vocab[a]);
  const auto ub = normalized(vocab[b]);
  const auto uh = normalized(vocab[h]);
  std::vector<long double> q(ua.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = ub[i] - ua[i] + uh[i];

  std::int64_t best = -1;
  long double best_score = 0;
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    if (t == a || t == b || t == h) continue;
    const auto ut = normalized(vocab[t]);
    if (std::all_of(ut.begin(), ut.end(), [](long double x) { return x == 0; })) continue;
    long double s;
    if (multiplicative) {
      auto shifted = [&](const std::vector<long double>& x) { return (1 + cos(ut, x)) / 2; };
      s = shifted(ub) * shifted(uh) / (shifted(ua) + 0.001L);
    } else {
      s = cos(ut, q);
    }
    if (best < 0 || s > best_score) {
      best = static_cast<std::int64_t>(t);
      best_score = s;
    }
  }
  return best;
}

MatrixSource::MatrixSource(std::vector<std::vector<float>> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) words_.push_back("w" + std::to_string(i));
}

std::int64_t MatrixSource::id_of(std::string_view token) const {
  const auto it = std::find(words_.begin(), words_.end(), token);
  return it == words_.end() ? -1 : it - words_.begin();
}

TrainingConfig synthetic_config(std::uint64_t seed) {
  TrainingConfig c;
  c.dim = 32;
  c.lr = 0.004;
  c.batch_size = 768;
  c.epochs = 20;
  c.min_count = 1;
  c.seed = seed;
  return c;
}

SyntheticRun run_synthetic(const TrainingConfig& config, std::uint64_t world_seed) {
  SyntheticOptions opt;
  opt.seed = world_seed;
  SyntheticRun run{make_synthetic_world(opt), {}, {}};
  std::istringstream corpus(run.world.corpus_text());
  const auto data = prepare_training_data(corpus, run.world.strokes, run.world.glyphs, config);
  run.ckpt = initialize_checkpoint(data, config);
  run.reports = run_epochs(run.ckpt, data.sentences, config);
  return run;
}

std::pair<double, double> sharing_cosines(const SyntheticRun& run) {
  const CheckpointVectors vectors(run.ckpt, VectorKind::composed);
  double share = 0, other = 0;
  std::size_t n_share = 0, n_other = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto ci = cjk_chars(vectors.word(i));
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      const auto cj = cjk_chars(vectors.word(j));
      const bool shares = std::any_of(ci.begin(), ci.end(), [&](char32_t c) {
        return std::find(cj.begin(), cj.end(), c) != cj.end();
      });
      const double c = cosine(vectors.row(i), vectors.row(j)).value_or(0.0);
      if (shares) {
        share += c;
        ++n_share;
      } else {
        other += c;
        ++n_other;
      }
    }
  }
  return {share / static_cast<double>(n_share), other / static_cast<double>(n_other)};
}

double twin_cosine(const SyntheticRun& run) {
  const FrozenModel model(run.ckpt);
  const auto a = model.char_feature(run.ckpt.lexicon.char_index(run.world.twin_a));
  const auto b = model.char_feature(run.ckpt.lexicon.char_index(run.world.twin_b));
  return cosine(a, b).value_or(0.0);
}

std::string temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("dwe_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace dwe::testing
