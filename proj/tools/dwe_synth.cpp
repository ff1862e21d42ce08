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
// Writes the synthetic morphology world (corpus, stroke table, glyph pack)
// used by the tests, so the CLI can be exercised on the same data.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "dwe/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic corpus with strokes and glyphs", "dwe_synth"};
  app.option_defaults()->always_capture_default();
  dwe::SyntheticOptions opt;
  std::string dir;
  app.add_option("--out-dir", dir, "Directory to write into")->required();
  app.add_option("--topics", opt.topics, "Topics (one root character each)");
  app.add_option("--words-per-topic", opt.words_per_topic, "Words per topic");
  app.add_option("--sentences", opt.sentences, "Sentences");
  app.add_option("--sentence-length", opt.sentence_length, "Tokens per sentence");
  app.add_option("--stroke-pool", opt.stroke_pool, "Distinct stroke sequences shared by all characters (0 = one per character)");
  app.add_option("--seed", opt.seed, "Random seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    std::filesystem::create_directories(dir);
    dwe::write_synthetic_world(dwe::make_synthetic_world(opt), dir);
  } catch (const std::exception& e) {
    std::cerr << "dwe_synth: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
