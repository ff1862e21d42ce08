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
#include "dwe/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "dwe/checkpoint.hpp"
#include "dwe/error.hpp"
#include "dwe/eval.hpp"
#include "dwe/trainer.hpp"
#include "dwe/utf8.hpp"

namespace dwe::cli {
namespace {

using nlohmann::json;

// Raised for bad flag values that CLI11 cannot check on its own.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

struct SourceFlags {
  std::string model;
  std::string vectors;
  std::string which = "composed";

  void attach(CLI::App& sub) {
    auto* m = sub.add_option("--model", model, "Checkpoint file");
    auto* v = sub.add_option("--vectors", vectors, "Text vectors (\"V d\" header) instead of a checkpoint");
    m->excludes(v);
    sub.add_option("--which", which, "Vectors of a checkpoint: composed or word_id")
        ->check(CLI::IsMember({"composed", "word_id"}));
  }

  // The checkpoint must outlive the source, so both are owned together.
  struct Loaded {
    std::unique_ptr<Checkpoint> ckpt;
    std::unique_ptr<VectorSource> source;
  };

  Loaded load() const {
    Loaded l;
    if (!vectors.empty()) {
      l.source = std::make_unique<TextVectorSource>(load_text_vectors(vectors));
    } else if (!model.empty()) {
      l.ckpt = std::make_unique<Checkpoint>(load_checkpoint(model));
      l.source = std::make_unique<CheckpointVectors>(*l.ckpt, parse_vector_kind(which));
    } else {
      throw UsageError("one of --model or --vectors is required");
    }
    return l;
  }
};

struct TrainFlags {
  TrainPaths paths;
  std::string out;
  TrainingConfig config;
  bool deterministic = false;
  bool no_strokes = false;
  bool no_glyphs = false;
  bool quiet = false;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App& sub) {
    sub.add_option("--corpus", paths.corpus, "Segmented corpus, one sentence per line")->required();
    sub.add_option("--strokes", paths.strokes, "Stroke table (CHAR<TAB>c1,c2,...)")->required();
    sub.add_option("--glyphs", paths.glyphs, "Glyph pack")->required();
    sub.add_option("--out", out, "Checkpoint to write")->required();
    sub.add_option("--resume", paths.resume, "Continue training from this checkpoint");
    sub.add_option("--dim", config.dim, "Embedding dimension");
    sub.add_option("--lr", config.lr, "Adagrad learning rate");
    sub.add_option("--batch", config.batch_size, "Pairs per adagrad step");
    sub.add_option("--n-min", config.n_min, "Shortest stroke n-gram");
    sub.add_option("--n-max", config.n_max, "Longest stroke n-gram");
    sub.add_option("--window", config.window, "Context window radius");
    sub.add_option("--negatives", config.negatives, "Negative samples per pair");
    sub.add_option("--alpha", config.alpha, "Exponent of the negative-sampling distribution");
    sub.add_option("--negative-weight", config.negative_weight, "Scale of the negative-sample sum");
    sub.add_option("--epochs", config.epochs, "Epochs to run");
    sub.add_option("--min-count", config.min_count, "Minimum word frequency");
    sub.add_option("--subsample", config.subsample, "Frequent-word subsampling threshold (0 = off)");
    sub.add_option("--eps", config.eps, "Adagrad epsilon");
    sub.add_option("--seed", config.seed, "Random seed");
    threads_opt = sub.add_option("--threads", config.threads, "Hogwild mode with this many workers");
    auto* det = sub.add_flag("--deterministic", deterministic, "Single worker, bit-reproducible (the default mode)");
    threads_opt->excludes(det);
    sub.add_flag("--no-strokes", no_strokes, "Disable the stroke n-gram channel");
    sub.add_flag("--no-glyphs", no_glyphs, "Disable the glyph CNN channel");
    sub.add_flag("--freeze-ngrams", config.freeze_ngrams, "Do not update n-gram vectors");
    sub.add_flag("--freeze-cnn", config.freeze_cnn, "Do not update CNN weights");
    sub.add_flag("--quiet", quiet, "No progress lines");
  }

  int execute(std::ostream& err) {
    config.stroke_channel = !no_strokes;
    config.glyph_channel = !no_glyphs;
    config.mode = threads_opt->count() > 0 ? TrainingMode::hogwild : TrainingMode::deterministic;
    if (config.mode == TrainingMode::deterministic) config.threads = 1;
    try {
      config.validate();
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    const auto ckpt = train(paths, config, quiet ? nullptr : &err);
    save_checkpoint(ckpt, out);
    return kExitOk;
  }
};

int eval_sim(const SourceFlags& src, const std::string& data, bool as_json, std::ostream& out) {
  const auto dataset = load_similarity_dataset(data);
  const auto loaded = src.load();
  const auto r = eval_similarity(dataset, *loaded.source);
  if (as_json) {
    out << json{{"metric", "spearman_rho"}, {"rho", r.rho}, {"coverage", r.coverage},
                {"scored", r.scored}, {"total", r.total}}
               .dump(2)
        << '\n';
  } else {
    out << "metric\tgroup\tvalue\tcoverage\n"
        << "spearman_rho\tall\t" << fixed(r.rho) << '\t' << fixed(r.coverage) << '\n';
  }
  return kExitOk;
}

int eval_analogy_cmd(const SourceFlags& src, const std::string& data, const std::string& method,
                     bool as_json, std::ostream& out) {
  const auto dataset = load_analogy_dataset(data);
  const auto loaded = src.load();
  std::vector<AnalogyMethod> methods;
  if (method == "both") {
    methods = {AnalogyMethod::cos_add, AnalogyMethod::cos_mul};
  } else {
    methods = {parse_analogy_method(method)};
  }
  json doc = json::array();
  if (!as_json) out << "metric\tgroup\tvalue\tcoverage\n";
  for (const auto m : methods) {
    const auto r = eval_analogy(dataset, *loaded.source, m);
    auto rows = r.groups;
    rows.push_back(r.overall);
    for (const auto& g : rows) {
      if (as_json) {
        doc.push_back({{"metric", to_string(m)}, {"group", g.group}, {"accuracy", g.accuracy()},
                       {"coverage", g.coverage()}, {"correct", g.correct}, {"total", g.total}});
      } else {
        out << to_string(m) << '\t' << g.group << '\t' << fixed(g.accuracy()) << '\t'
            << fixed(g.coverage()) << '\n';
      }
    }
  }
  if (as_json) out << doc.dump(2) << '\n';
  return kExitOk;
}

int nn_cmd(const SourceFlags& src, const std::string& word, int k, bool as_json, std::ostream& out) {
  const auto loaded = src.load();
  const auto hits = nearest_neighbors(*loaded.source, word, k);
  if (as_json) {
    json doc = json::array();
    for (const auto& [w, c] : hits) doc.push_back({{"word", w}, {"cosine", c}});
    out << doc.dump(2) << '\n';
  } else {
    for (const auto& [w, c] : hits) out << w << '\t' << fixed(c) << '\n';
  }
  return kExitOk;
}

void print_char(std::ostream& out, char32_t c, const StrokeSequence* seq,
                const std::vector<StrokeNgram>& ngrams, const GlyphBitmap* glyph) {
  out << "char\t" << encode_utf8(c) << "\tU+" << std::hex << std::uppercase
      << static_cast<std::uint32_t>(c) << std::dec << '\n';
  out << "strokes\t";
  if (seq) {
    for (std::size_t i = 0; i < seq->codes.size(); ++i) {
      out << (i ? "," : "") << static_cast<int>(seq->codes[i]);
    }
  } else {
    out << "(none)";
  }
  out << "\nngrams\t" << ngrams.size();
  for (const auto& g : ngrams) out << ' ' << g.to_string();
  out << "\nglyph\n";
  if (glyph) {
    out << render_ascii(*glyph);
  } else {
    out << "(none)\n";
  }
}

int inspect_cmd(const std::string& model, const std::string& strokes_path,
                const std::string& glyphs_path, const std::string& text, int n_min, int n_max,
                std::ostream& out) {
  const auto cps = decode_utf8(text);
  if (cps.size() != 1) throw UsageError("--char takes exactly one character");
  const char32_t c = cps.front();

  if (!model.empty()) {
    const auto ckpt = load_checkpoint(model);
    std::vector<StrokeNgram> ngrams;
    for (const auto id : ckpt.dict.char_ngrams(c)) ngrams.push_back(ckpt.dict.ngram(id));
    const auto g = ckpt.glyphs.find(c);
    if (ngrams.empty() && g == ckpt.glyphs.end()) {
      throw DataError("character " + text + " is not part of the model");
    }
    print_char(out, c, nullptr, ngrams, g == ckpt.glyphs.end() ? nullptr : &g->second);
    return kExitOk;
  }
  if (strokes_path.empty() && glyphs_path.empty()) {
    throw UsageError("inspect needs --model or at least one of --strokes/--glyphs");
  }
  std::optional<StrokeSequence> seq;
  std::vector<StrokeNgram> ngrams;
  if (!strokes_path.empty()) {
    const auto table = load_stroke_table(strokes_path);
    if (const auto it = table.find(c); it != table.end()) {
      seq = it->second;
      ngrams = extract_ngrams(*seq, n_min, n_max);
    }
  }
  std::optional<GlyphBitmap> glyph;
  if (!glyphs_path.empty()) {
    const auto pack = load_glyph_pack(glyphs_path);
    if (const auto it = pack.find(c); it != pack.end()) glyph = it->second;
  }
  if (!seq && !glyph) throw DataError("no stroke or glyph data for " + text);
  print_char(out, c, seq ? &*seq : nullptr, ngrams, glyph ? &*glyph : nullptr);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chinese word embeddings from stroke n-grams and glyph features", "dwe"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_flags.attach(*train_cmd);

  std::string data;
  bool as_json = false;
  SourceFlags sim_src;
  auto* sim_cmd = app.add_subcommand("eval-sim", "Spearman correlation on a word-similarity set");
  sim_src.attach(*sim_cmd);
  sim_cmd->add_option("--data", data, "word_a<TAB>word_b<TAB>score file")->required();
  sim_cmd->add_flag("--json", as_json, "JSON instead of TSV");

  SourceFlags ana_src;
  std::string method = "both";
  auto* ana_cmd = app.add_subcommand("eval-analogy", "Per-group analogy accuracy");
  ana_src.attach(*ana_cmd);
  ana_cmd->add_option("--data", data, "Analogy file with ': group' headers")->required();
  ana_cmd->add_option("--method", method, "add, mul or both")
      ->check(CLI::IsMember({"add", "mul", "both", "3cosadd", "3cosmul"}));
  ana_cmd->add_flag("--json", as_json, "JSON instead of TSV");

  SourceFlags nn_src;
  std::string word;
  int k = 10;
  auto* nn = app.add_subcommand("nn", "Nearest neighbours by cosine");
  nn_src.attach(*nn);
  nn->add_option("--word", word, "Query token")->required();
  nn->add_option("--k", k, "Neighbours to list")->check(CLI::PositiveNumber);
  nn->add_flag("--json", as_json, "JSON instead of TSV");

  std::string model;
  std::string export_out;
  std::string which = "composed";
  auto* exp = app.add_subcommand("export", "Write vectors in word2vec text format");
  exp->add_option("--model", model, "Checkpoint file")->required();
  exp->add_option("--out", export_out, "Output file")->required();
  exp->add_option("--which", which, "composed or word_id")->check(CLI::IsMember({"composed", "word_id"}));

  std::string strokes_path;
  std::string glyphs_path;
  std::string ch;
  int n_min = TrainingConfig{}.n_min;
  int n_max = TrainingConfig{}.n_max;
  auto* insp = app.add_subcommand("inspect", "Show a character's strokes, n-grams and glyph");
  insp->add_option("--char", ch, "The character")->required();
  insp->add_option("--model", model, "Read n-grams and glyph from a checkpoint");
  insp->add_option("--strokes", strokes_path, "Stroke table");
  insp->add_option("--glyphs", glyphs_path, "Glyph pack");
  insp->add_option("--n-min", n_min, "Shortest stroke n-gram");
  insp->add_option("--n-max", n_max, "Longest stroke n-gram");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return train_flags.execute(err);
    if (*sim_cmd) return eval_sim(sim_src, data, as_json, out);
    if (*ana_cmd) return eval_analogy_cmd(ana_src, data, method, as_json, out);
    if (*nn) return nn_cmd(nn_src, word, k, as_json, out);
    if (*exp) {
      export_vectors(load_checkpoint(model), export_out, parse_vector_kind(which));
      return kExitOk;
    }
    if (*insp) {
      if (n_min < 1 || n_min > n_max) throw UsageError("need 1 <= --n-min <= --n-max");
      return inspect_cmd(model, strokes_path, glyphs_path, ch, n_min, n_max, out);
    }
  } catch (const UsageError& e) {
    err << "dwe: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "dwe: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace dwe::cli
