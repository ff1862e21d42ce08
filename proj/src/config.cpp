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
#include "dwe/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "dwe/error.hpp"

namespace dwe {

const char* to_string(TrainingMode mode) {
  return mode == TrainingMode::hogwild ? "hogwild" : "deterministic";
}

void TrainingConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  require(dim >= 1, "dim must be >= 1");
  require(lr > 0.0, "lr must be positive");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(n_min >= 1 && n_min <= n_max, "need 1 <= n_min <= n_max");
  require(window >= 1, "window must be >= 1");
  require(negatives >= 1, "negatives must be >= 1");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(epochs >= 0, "epochs must be >= 0");
  require(min_count >= 1, "min_count must be >= 1");
  require(threads >= 1, "threads must be >= 1");
  require(mode == TrainingMode::hogwild || threads == 1,
          "deterministic mode runs a single worker");
  require(eps > 0.0, "eps must be positive");
  require(subsample >= 0.0, "subsample must be >= 0");
  require(negative_weight > 0.0, "negative_weight must be positive");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string TrainingConfig::to_text() const {
  std::ostringstream out;
  out << "dim=" << dim << '\n'
      << "lr=" << fmt_double(lr) << '\n'
      << "batch_size=" << batch_size << '\n'
      << "n_min=" << n_min << '\n'
      << "n_max=" << n_max << '\n'
      << "window=" << window << '\n'
      << "negatives=" << negatives << '\n'
      << "alpha=" << fmt_double(alpha) << '\n'
      << "epochs=" << epochs << '\n'
      << "min_count=" << min_count << '\n'
      << "seed=" << seed << '\n'
      << "mode=" << to_string(mode) << '\n'
      << "threads=" << threads << '\n'
      << "eps=" << fmt_double(eps) << '\n'
      << "subsample=" << fmt_double(subsample) << '\n'
      << "negative_weight=" << fmt_double(negative_weight) << '\n'
      << "stroke_channel=" << stroke_channel << '\n'
      << "glyph_channel=" << glyph_channel << '\n'
      << "freeze_ngrams=" << freeze_ngrams << '\n'
      << "freeze_cnn=" << freeze_cnn << '\n';
  return out.str();
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw FormatError("config: bad value for " + key + ": '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw FormatError("config: bad value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1") return true;
  if (value == "0") return false;
  throw FormatError("config: bad boolean for " + key + ": '" + value + "'");
}

}  // namespace

TrainingConfig TrainingConfig::from_text(const std::string& text) {
  TrainingConfig c;
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
      setters = {
          {"dim", [&](auto& k, auto& v) { c.dim = parse_number<int>(k, v); }},
          {"lr", [&](auto& k, auto& v) { c.lr = parse_double(k, v); }},
          {"batch_size", [&](auto& k, auto& v) { c.batch_size = parse_number<int>(k, v); }},
          {"n_min", [&](auto& k, auto& v) { c.n_min = parse_number<int>(k, v); }},
          {"n_max", [&](auto& k, auto& v) { c.n_max = parse_number<int>(k, v); }},
          {"window", [&](auto& k, auto& v) { c.window = parse_number<int>(k, v); }},
          {"negatives", [&](auto& k, auto& v) { c.negatives = parse_number<int>(k, v); }},
          {"alpha", [&](auto& k, auto& v) { c.alpha = parse_double(k, v); }},
          {"epochs", [&](auto& k, auto& v) { c.epochs = parse_number<int>(k, v); }},
          {"min_count", [&](auto& k, auto& v) { c.min_count = parse_number<std::uint64_t>(k, v); }},
          {"seed", [&](auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
          {"mode",
           [&](auto& k, auto& v) {
             if (v == "deterministic") {
               c.mode = TrainingMode::deterministic;
             } else if (v == "hogwild") {
               c.mode = TrainingMode::hogwild;
             } else {
               throw FormatError("config: bad value for " + k + ": '" + v + "'");
             }
           }},
          {"threads", [&](auto& k, auto& v) { c.threads = parse_number<int>(k, v); }},
          {"eps", [&](auto& k, auto& v) { c.eps = parse_double(k, v); }},
          {"subsample", [&](auto& k, auto& v) { c.subsample = parse_double(k, v); }},
          {"negative_weight", [&](auto& k, auto& v) { c.negative_weight = parse_double(k, v); }},
          {"stroke_channel", [&](auto& k, auto& v) { c.stroke_channel = parse_bool(k, v); }},
          {"glyph_channel", [&](auto& k, auto& v) { c.glyph_channel = parse_bool(k, v); }},
          {"freeze_ngrams", [&](auto& k, auto& v) { c.freeze_ngrams = parse_bool(k, v); }},
          {"freeze_cnn", [&](auto& k, auto& v) { c.freeze_cnn = parse_bool(k, v); }},
      };
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config: malformed line '" + line + "'");
    const auto key = line.substr(0, eq);
    const auto it = setters.find(key);
    if (it == setters.end()) throw FormatError("config: unknown key '" + key + "'");
    it->second(key, line.substr(eq + 1));
  }
  return c;
}

void check_resume_compatible(const TrainingConfig& stored, const TrainingConfig& requested) {
  auto mismatch = [](const std::string& field, const std::string& have, const std::string& want) {
    throw ConfigError("config mismatch: checkpoint has " + field + "=" + have +
                      " but the run requests " + field + "=" + want);
  };
  if (stored.dim != requested.dim) {
    mismatch("dim", std::to_string(stored.dim), std::to_string(requested.dim));
  }
  if (stored.n_min != requested.n_min || stored.n_max != requested.n_max) {
    mismatch("n-gram range",
             std::to_string(stored.n_min) + ".." + std::to_string(stored.n_max),
             std::to_string(requested.n_min) + ".." + std::to_string(requested.n_max));
  }
  if (stored.min_count != requested.min_count) {
    mismatch("min_count", std::to_string(stored.min_count), std::to_string(requested.min_count));
  }
  if (stored.stroke_channel != requested.stroke_channel ||
      stored.glyph_channel != requested.glyph_channel) {
    mismatch("channels",
             std::to_string(stored.stroke_channel) + "/" + std::to_string(stored.glyph_channel),
             std::to_string(requested.stroke_channel) + "/" +
                 std::to_string(requested.glyph_channel));
  }
}

}  // namespace dwe
