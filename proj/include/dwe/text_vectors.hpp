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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dwe {

/// word2vec text format: header "V d", then "token v1 ... vd" per line.
struct TextVectors {
  int dim = 0;
  std::vector<std::string> words;
  std::vector<float> values;  // words.size() x dim, row-major

  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// Values are written with six decimal places.
void write_text_vectors(std::ostream& out, const TextVectors& vectors);
TextVectors read_text_vectors(std::istream& in);
TextVectors load_text_vectors(const std::string& path);

}  // namespace dwe
