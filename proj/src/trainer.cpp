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
#include "dwe/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <thread>

#include "dwe/error.hpp"
#include "dwe/text_vectors.hpp"

namespace dwe {

TrainingData prepare_training_data(std::istream& corpus, const StrokeTable& strokes,
                                   const GlyphTable& glyphs, const TrainingConfig& config) {
  config.validate();
  TrainingData data;
  data.vocab = count_corpus(corpus, config.min_count);
  corpus.clear();
  corpus.seekg(0);
  if (!corpus) throw DataError("corpus stream is not seekable");
  data.sentences = encode_corpus(corpus, data.vocab);
  const auto observed = observed_chars(data.vocab);
  data.dict = build_ngram_dict(strokes, observed, config.n_min, config.n_max);
  for (char32_t c : observed) {
    if (const auto it = glyphs.find(c); it != glyphs.end()) data.glyphs.insert(*it);
  }
  return data;
}

Checkpoint initialize_checkpoint(const TrainingData& data, const TrainingConfig& config) {
  config.validate();
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.config.epochs = 0;
  ckpt.vocab = data.vocab;
  ckpt.dict = data.dict;
  ckpt.glyphs = data.glyphs;
  ckpt.rebuild_lexicon();
  ckpt.params = init_model<float>(ckpt.vocab.size(), ckpt.dict.size(), config.dim, config.seed);
  ckpt.accum = ModelParams<float>::zeros(ckpt.vocab.size(), ckpt.dict.size(), config.dim);
  return ckpt;
}

namespace {

/// Adagrad on shared rows with relaxed atomic accesses: concurrent updates
/// of the same row may be lost, but there is no data race.
void relaxed_adagrad_rows(Matrix<float>& table, Matrix<float>& accum,
                          const SparseRows<float>& grads, float lr, float eps) {
  const auto ids = grads.ids();
  for (std::size_t slot = 0; slot < ids.size(); ++slot) {
    const auto r = static_cast<std::size_t>(ids[slot]);
    auto p = table.row(r);
    auto a = accum.row(r);
    const auto g = grads.row_at(slot);
    for (std::size_t k = 0; k < g.size(); ++k) {
      std::atomic_ref<float> acc(a[k]);
      std::atomic_ref<float> param(p[k]);
      const float next_acc = acc.load(std::memory_order_relaxed) + g[k] * g[k];
      acc.store(next_acc, std::memory_order_relaxed);
      param.store(param.load(std::memory_order_relaxed) + lr * g[k] / (std::sqrt(next_acc) + eps),
                  std::memory_order_relaxed);
    }
  }
}

class BatchRunner {
 public:
  BatchRunner(Checkpoint& ckpt, const TrainingConfig& config)
      : ckpt_(ckpt), config_(config), objective_(config.objective()), update_(config.update()) {
    const int workers = config.mode == TrainingMode::hogwild ? config.threads : 1;
    for (int w = 0; w < workers; ++w) {
      samplers_.emplace_back(ckpt.vocab.counts(), config.alpha, mix_seed(config.seed, 7 + w));
      grads_.emplace_back(config.dim);
    }
  }

  void start_epoch(std::uint64_t epoch) {
    for (std::size_t w = 0; w < samplers_.size(); ++w) {
      samplers_[w].reseed(mix_seed(config_.seed, (epoch << 8) + 16 + w));
    }
  }

  /// Draws negatives, computes gradients and applies one update. Returns
  /// the summed pair objective.
  double run(TrainingBatch& batch) {
    batch.negatives.resize(batch.size() * static_cast<std::size_t>(batch.negatives_per_pair));
    if (samplers_.size() == 1) return run_single(batch);
    return run_hogwild(batch);
  }

 private:
  void fill_negatives(TrainingBatch& batch, NegativeSampler& sampler, std::size_t begin,
                      std::size_t end) {
    const auto k = static_cast<std::size_t>(batch.negatives_per_pair);
    for (std::size_t i = begin; i < end; ++i) {
      sampler.draw_negatives(batch.centers[i],
                             std::span<WordId>(batch.negatives.data() + i * k, k));
    }
  }

  double run_single(TrainingBatch& batch) {
    fill_negatives(batch, samplers_[0], 0, batch.size());
    auto& g = grads_[0];
    g.clear();
    const double loss = batch_gradients<float>(batch, ckpt_.lexicon, ckpt_.params, objective_, g);
    if (std::isfinite(loss)) apply_adagrad<float>(ckpt_.params, ckpt_.accum, g, update_);
    return loss;
  }

  double run_hogwild(TrainingBatch& batch) {
    const std::size_t workers = samplers_.size();
    const std::size_t per = (batch.size() + workers - 1) / workers;
    std::vector<double> losses(workers, 0.0);
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            const std::size_t begin = std::min(batch.size(), w * per);
            const std::size_t end = std::min(batch.size(), begin + per);
            fill_negatives(batch, samplers_[w], begin, end);
            grads_[w].clear();
            losses[w] = batch_gradients<float>(batch, ckpt_.lexicon, ckpt_.params, objective_,
                                               grads_[w], begin, end);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    const double loss = std::accumulate(losses.begin(), losses.end(), 0.0);
    if (!std::isfinite(loss)) return loss;

    const auto lr = static_cast<float>(update_.lr);
    const auto eps = static_cast<float>(update_.eps);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          auto& t = ckpt_.params.tables;
          auto& a = ckpt_.accum.tables;
          relaxed_adagrad_rows(t.word_id, a.word_id, grads_[w].word_id, lr, eps);
          relaxed_adagrad_rows(t.context, a.context, grads_[w].context, lr, eps);
          if (!update_.freeze_ngrams) relaxed_adagrad_rows(t.ngram, a.ngram, grads_[w].ngram, lr, eps);
        });
      }
    }
    // Single reducer for the shared CNN.
    auto& total = grads_[0].cnn;
    for (std::size_t w = 1; w < workers; ++w) {
      auto dst = total.tensors();
      const auto src = grads_[w].cnn.tensors();
      for (std::size_t t = 0; t < dst.size(); ++t) {
        for (std::size_t i = 0; i < dst[t].size(); ++i) dst[t][i] += src[t][i];
      }
    }
    apply_adagrad<float>(ckpt_.params, ckpt_.accum, grads_[0], update_, /*include_embeddings=*/false);
    return loss;
  }

  Checkpoint& ckpt_;
  const TrainingConfig& config_;
  ObjectiveOptions objective_;
  UpdateOptions update_;
  std::vector<NegativeSampler> samplers_;
  std::vector<Gradients<float>> grads_;
};

}  // namespace

std::vector<EpochReport> run_epochs(Checkpoint& ckpt, std::span<const Sentence> sentences,
                                    const TrainingConfig& config, std::ostream* log) {
  config.validate();
  check_resume_compatible(ckpt.config, config);
  if (ckpt.vocab.size() < 2) {
    throw DataError("training needs at least two vocabulary words for negative sampling");
  }
  std::vector<EpochReport> reports;
  BatchRunner runner(ckpt, config);
  std::optional<Subsampler> subsampler;
  if (config.subsample > 0.0) subsampler.emplace(ckpt.vocab, config.subsample);

  std::vector<std::size_t> order(sentences.size());
  TrainingBatch batch;
  batch.negatives_per_pair = config.negatives;

  for (int e = 0; e < config.epochs; ++e) {
    const std::uint64_t epoch = ckpt.epoch + 1;
    const auto started = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng(mix_seed(config.seed, (epoch << 8) + 1));
    order_rng.shuffle(std::span<std::size_t>(order));
    Rng subsample_rng(mix_seed(config.seed, (epoch << 8) + 2));
    runner.start_epoch(epoch);

    double loss_sum = 0;
    std::uint64_t pairs = 0;
    std::uint64_t batch_in_epoch = 0;
    auto flush = [&] {
      if (batch.empty()) return;
      const double loss = runner.run(batch);
      ++batch_in_epoch;
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(ckpt.step + 1) + " (batch " +
                           std::to_string(batch_in_epoch) + " of the epoch)");
      }
      ++ckpt.step;
      loss_sum += loss;
      pairs += batch.size();
      batch.clear();
    };

    for (std::size_t idx : order) {
      Sentence kept;
      std::span<const WordId> sentence = sentences[idx];
      if (subsampler) {
        kept = subsampler->apply(sentence, subsample_rng);
        sentence = kept;
      }
      for_each_context_pair(sentence, config.window, [&](WordId center, WordId context) {
        batch.centers.push_back(center);
        batch.contexts.push_back(context);
        if (batch.size() == static_cast<std::size_t>(config.batch_size)) flush();
      });
    }
    flush();

    ckpt.epoch = epoch;
    EpochReport report;
    report.epoch = epoch;
    report.pairs = pairs;
    report.mean_loss = pairs ? loss_sum / static_cast<double>(pairs) : 0.0;
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (log != nullptr) {
      char line[160];
      std::snprintf(line, sizeof line, "epoch=%llu loss=%.6f pairs=%llu elapsed=%.2f\n",
                    static_cast<unsigned long long>(report.epoch), report.mean_loss,
                    static_cast<unsigned long long>(report.pairs), report.seconds);
      *log << line << std::flush;
    }
    reports.push_back(report);
  }

  const auto epochs_done = ckpt.epoch;
  ckpt.config = config;
  ckpt.config.epochs = static_cast<int>(epochs_done);
  return reports;
}

Checkpoint train(const TrainPaths& paths, const TrainingConfig& config, std::ostream* log,
                 std::vector<EpochReport>* reports) {
  config.validate();
  Checkpoint ckpt;
  std::vector<Sentence> sentences;
  if (!paths.resume.empty()) {
    ckpt = load_checkpoint(paths.resume);
    check_resume_compatible(ckpt.config, config);
    sentences = encode_corpus_file(paths.corpus, ckpt.vocab);
  } else {
    std::ifstream corpus(paths.corpus);
    if (!corpus) throw DataError("cannot open corpus " + paths.corpus);
    const auto strokes = load_stroke_table(paths.strokes);
    const auto glyphs = load_glyph_pack(paths.glyphs);
    auto data = prepare_training_data(corpus, strokes, glyphs, config);
    ckpt = initialize_checkpoint(data, config);
    sentences = std::move(data.sentences);
  }
  if (log != nullptr) {
    *log << "vocab=" << ckpt.vocab.size() << " chars=" << ckpt.lexicon.char_count()
         << " ngrams=" << ckpt.dict.size() << " missing_strokes=" << ckpt.lexicon.missing_strokes()
         << " missing_glyphs=" << ckpt.lexicon.missing_glyphs() << '\n';
  }
  auto r = run_epochs(ckpt, sentences, config, log);
  if (reports != nullptr) *reports = std::move(r);
  return ckpt;
}

void export_vectors(const Checkpoint& ckpt, std::ostream& out, VectorKind which) {
  const FrozenModel model(ckpt);
  TextVectors vectors;
  vectors.dim = model.dim();
  vectors.words = ckpt.vocab.words();
  vectors.values.reserve(vectors.words.size() * static_cast<std::size_t>(vectors.dim));
  for (std::size_t i = 0; i < vectors.words.size(); ++i) {
    const auto v = model.vector(static_cast<WordId>(i), which);
    vectors.values.insert(vectors.values.end(), v.begin(), v.end());
  }
  write_text_vectors(out, vectors);
}

void export_vectors(const Checkpoint& ckpt, const std::string& path, VectorKind which) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  export_vectors(ckpt, out, which);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace dwe
