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
#include "dwe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include "dwe/error.hpp"

namespace dwe {

std::optional<std::vector<float>> VectorSource::lookup(std::string_view token) const {
  const auto id = id_of(token);
  if (id < 0) return std::nullopt;
  const auto r = row(static_cast<std::size_t>(id));
  return std::vector<float>(r.begin(), r.end());
}

CheckpointVectors::CheckpointVectors(const Checkpoint& ckpt, VectorKind kind)
    : model_(ckpt), kind_(kind), rows_(ckpt.vocab.size(), static_cast<std::size_t>(ckpt.params.dim())) {
  for (std::size_t i = 0; i < ckpt.vocab.size(); ++i) {
    const auto v = model_.vector(static_cast<WordId>(i), kind_);
    std::copy(v.begin(), v.end(), rows_.row(i).begin());
  }
}

std::optional<std::vector<float>> CheckpointVectors::lookup(std::string_view token) const {
  if (token.empty()) return std::nullopt;
  if (const auto id = id_of(token); id >= 0) {
    const auto r = rows_.row(static_cast<std::size_t>(id));
    return std::vector<float>(r.begin(), r.end());
  }
  if (kind_ == VectorKind::composed) return model_.oov_vector(token);
  return std::nullopt;
}

TextVectorSource::TextVectorSource(TextVectors vectors) : vectors_(std::move(vectors)) {
  for (std::size_t i = 0; i < vectors_.words.size(); ++i) {
    index_.emplace(vectors_.words[i], static_cast<std::int64_t>(i));
  }
}

std::int64_t TextVectorSource::id_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

std::vector<float> eval_vector(const VectorSource& source, std::string_view token) {
  if (token.empty()) throw DataError("empty token");
  auto v = source.lookup(token);
  if (!v) throw DataError("token '" + std::string(token) + "' cannot be represented");
  return std::move(*v);
}

std::optional<double> cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ConfigError("cosine: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return dot / std::sqrt(na * nb);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of positions i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("spearman: length mismatch");
  if (xs.size() < 2) throw DataError("spearman: need at least two observations");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("spearman: zero rank variance, rho undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SimilarityDataset parse_similarity_dataset(std::istream& in) {
  SimilarityDataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw DataError("similarity dataset line " + std::to_string(line_no) +
                      ": expected word_a<TAB>word_b<TAB>score");
    }
    SimilarityRecord rec{fields[0], fields[1], 0.0};
    try {
      std::size_t used = 0;
      rec.score = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument(fields[2]);
    } catch (const std::exception&) {
      throw DataError("similarity dataset line " + std::to_string(line_no) + ": bad score");
    }
    if (!std::isfinite(rec.score)) {
      throw DataError("similarity dataset line " + std::to_string(line_no) + ": non-finite score");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

SimilarityDataset load_similarity_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open similarity dataset " + path);
  return parse_similarity_dataset(in);
}

SimilarityResult eval_similarity(const SimilarityDataset& dataset, const VectorSource& source) {
  std::vector<double> human;
  std::vector<double> model;
  for (const auto& rec : dataset) {
    const auto va = source.lookup(rec.a);
    const auto vb = source.lookup(rec.b);
    if (!va || !vb) continue;
    const auto cos = cosine(*va, *vb);
    if (!cos) continue;
    human.push_back(rec.score);
    model.push_back(*cos);
  }
  if (human.size() < 2) {
    throw DataError("similarity: fewer than two scorable pairs (" + std::to_string(human.size()) +
                    " of " + std::to_string(dataset.size()) + ")");
  }
  SimilarityResult result;
  result.scored = human.size();
  result.total = dataset.size();
  result.coverage = static_cast<double>(result.scored) / static_cast<double>(result.total);
  result.rho = spearman_rho(model, human);
  return result;
}

AnalogyDataset parse_analogy_dataset(std::istream& in) {
  AnalogyDataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == ':') {
      auto name = line.substr(1);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t") + 1);
      if (name.empty()) throw DataError("analogy dataset line " + std::to_string(line_no) + ": empty group name");
      for (const auto& g : out) {
        if (g.name == name) {
          throw DataError("analogy dataset line " + std::to_string(line_no) +
                          ": duplicate group '" + name + "'");
        }
      }
      out.push_back({name, {}});
      continue;
    }
    const auto fields = split_tokens(line);
    if (fields.size() != 4) {
      throw DataError("analogy dataset line " + std::to_string(line_no) + ": expected 'a b h t'");
    }
    if (out.empty()) out.push_back({"default", {}});
    out.back().questions.push_back({std::string(fields[0]), std::string(fields[1]),
                                    std::string(fields[2]), std::string(fields[3])});
  }
  return out;
}

AnalogyDataset load_analogy_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open analogy dataset " + path);
  return parse_analogy_dataset(in);
}

const char* to_string(AnalogyMethod method) {
  return method == AnalogyMethod::cos_add ? "3cosadd" : "3cosmul";
}

AnalogyMethod parse_analogy_method(std::string_view text) {
  if (text == "add" || text == "3cosadd") return AnalogyMethod::cos_add;
  if (text == "mul" || text == "3cosmul") return AnalogyMethod::cos_mul;
  throw ConfigError("unknown analogy method '" + std::string(text) + "' (add|mul)");
}

AnalogySolver::AnalogySolver(const VectorSource& source) : source_(source) {
  inv_norms_.resize(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    double n = 0;
    for (float v : source.row(i)) n += static_cast<double>(v) * v;
    inv_norms_[i] = n > 0.0 ? 1.0 / std::sqrt(n) : 0.0;
  }
}

namespace {

std::optional<std::vector<double>> unit(std::span<const float> v) {
  double n = 0;
  for (float x : v) n += static_cast<double>(x) * x;
  if (n == 0.0) return std::nullopt;
  const double inv = 1.0 / std::sqrt(n);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * inv;
  return out;
}

}  // namespace

double AnalogySolver::candidate_cosine(std::size_t id, std::span<const double> unit_query) const {
  const auto r = source_.row(id);
  double dot = 0;
  for (std::size_t k = 0; k < r.size(); ++k) dot += r[k] * unit_query[k];
  return dot * inv_norms_[id];
}

std::optional<std::size_t> AnalogySolver::solve(AnalogyMethod method, std::span<const float> a,
                                                std::span<const float> b, std::span<const float> h,
                                                std::span<const std::int64_t> exclude,
                                                double epsilon) const {
  const auto ua = unit(a);
  const auto ub = unit(b);
  const auto uh = unit(h);
  if (!ua || !ub || !uh) return std::nullopt;

  std::vector<double> target;
  if (method == AnalogyMethod::cos_add) {
    target.resize(ua->size());
    double n = 0;
    for (std::size_t k = 0; k < target.size(); ++k) {
      target[k] = (*ub)[k] - (*ua)[k] + (*uh)[k];
      n += target[k] * target[k];
    }
    if (n > 0.0) {
      const double inv = 1.0 / std::sqrt(n);
      for (double& x : target) x *= inv;
    }
  }

  std::optional<std::size_t> best;
  double best_score = 0;
  for (std::size_t id = 0; id < source_.size(); ++id) {
    if (inv_norms_[id] == 0.0) continue;
    if (std::find(exclude.begin(), exclude.end(), static_cast<std::int64_t>(id)) != exclude.end()) {
      continue;
    }
    double s = 0;
    if (method == AnalogyMethod::cos_add) {
      s = candidate_cosine(id, target);
    } else {
      const double cb = (1.0 + candidate_cosine(id, *ub)) / 2.0;
      const double ch = (1.0 + candidate_cosine(id, *uh)) / 2.0;
      const double ca = (1.0 + candidate_cosine(id, *ua)) / 2.0;
      s = cb * ch / (ca + epsilon);
    }
    if (!best || s > best_score) {
      best = id;
      best_score = s;
    }
  }
  return best;
}

std::optional<std::string> AnalogySolver::answer(AnalogyMethod method, std::string_view a,
                                                 std::string_view b, std::string_view h) const {
  const auto va = source_.lookup(a);
  const auto vb = source_.lookup(b);
  const auto vh = source_.lookup(h);
  if (!va || !vb || !vh) return std::nullopt;
  const std::int64_t exclude[] = {source_.id_of(a), source_.id_of(b), source_.id_of(h)};
  const auto id = solve(method, *va, *vb, *vh, exclude);
  if (!id) return std::nullopt;
  return source_.word(*id);
}

std::optional<std::string> analogy_3cosadd(const VectorSource& source, std::string_view a,
                                           std::string_view b, std::string_view h) {
  return AnalogySolver(source).answer(AnalogyMethod::cos_add, a, b, h);
}

std::optional<std::string> analogy_3cosmul(const VectorSource& source, std::string_view a,
                                           std::string_view b, std::string_view h) {
  return AnalogySolver(source).answer(AnalogyMethod::cos_mul, a, b, h);
}

AnalogyResult eval_analogy(const AnalogyDataset& dataset, const VectorSource& source,
                           AnalogyMethod method) {
  std::size_t questions = 0;
  for (const auto& g : dataset) questions += g.questions.size();
  if (questions == 0) throw DataError("analogy dataset has no questions");

  const AnalogySolver solver(source);
  AnalogyResult result;
  result.overall.group = "total";
  for (const auto& group : dataset) {
    GroupAccuracy acc;
    acc.group = group.name;
    for (const auto& q : group.questions) {
      ++acc.total;
      const auto got = solver.answer(method, q.a, q.b, q.h);
      if (!got) continue;
      ++acc.answered;
      if (*got == q.t) ++acc.correct;
    }
    result.overall.correct += acc.correct;
    result.overall.answered += acc.answered;
    result.overall.total += acc.total;
    result.groups.push_back(std::move(acc));
  }
  return result;
}

std::vector<std::pair<std::string, double>> nearest_neighbors(const VectorSource& source,
                                                              std::string_view token, int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const auto query = eval_vector(source, token);
  const auto uq = unit(query);
  if (!uq) throw DataError("token '" + std::string(token) + "' has a zero vector");
  const auto self = source.id_of(token);

  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t id = 0; id < source.size(); ++id) {
    if (static_cast<std::int64_t>(id) == self) continue;
    double n = 0, dot = 0;
    const auto r = source.row(id);
    for (std::size_t i = 0; i < r.size(); ++i) {
      n += static_cast<double>(r[i]) * r[i];
      dot += r[i] * (*uq)[i];
    }
    if (n == 0.0) continue;
    scored.emplace_back(dot / std::sqrt(n), id);
  }
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    [](const auto& x, const auto& y) {
                      if (x.first != y.first) return x.first > y.first;
                      return x.second < y.second;
                    });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < take; ++i) out.emplace_back(source.word(scored[i].second), scored[i].first);
  return out;
}

}  // namespace dwe
