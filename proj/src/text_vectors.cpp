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
#include "dwe/text_vectors.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dwe/corpus.hpp"
#include "dwe/error.hpp"

namespace dwe {

void write_text_vectors(std::ostream& out, const TextVectors& vectors) {
  out << vectors.words.size() << ' ' << vectors.dim << '\n';
  char buf[48];
  for (std::size_t i = 0; i < vectors.words.size(); ++i) {
    out << vectors.words[i];
    for (float v : vectors.row(i)) {
      std::snprintf(buf, sizeof buf, " %.6f", static_cast<double>(v));
      out << buf;
    }
    out << '\n';
  }
}

TextVectors read_text_vectors(std::istream& in) {
  TextVectors out;
  std::string line;
  if (!std::getline(in, line)) throw DataError("vectors: missing header");
  std::size_t count = 0;
  {
    std::istringstream header(line);
    if (!(header >> count >> out.dim) || out.dim < 1) {
      throw DataError("vectors: malformed header '" + line + "'");
    }
  }
  out.words.reserve(count);
  out.values.reserve(count * static_cast<std::size_t>(out.dim));
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw DataError("vectors: header declares " + std::to_string(count) + " rows, found " +
                      std::to_string(i));
    }
    const auto fields = split_tokens(line);
    if (fields.size() != static_cast<std::size_t>(out.dim) + 1) {
      throw DataError("vectors: line " + std::to_string(i + 2) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(out.dim + 1));
    }
    out.words.emplace_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      try {
        out.values.push_back(std::stof(std::string(fields[k])));
      } catch (const std::exception&) {
        throw DataError("vectors: bad number on line " + std::to_string(i + 2));
      }
    }
  }
  return out;
}

TextVectors load_text_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vectors file " + path);
  return read_text_vectors(in);
}

}  // namespace dwe
