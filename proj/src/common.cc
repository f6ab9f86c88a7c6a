// src/common.cc

// Copyright  2026  pmtl authors

// See ../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "common.h"

#include <bit>

namespace pmtl {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

void WriteU32(std::ostream &os, uint32_t v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

uint32_t ReadU32(std::istream &is) {
  uint32_t v = 0;
  if (!is.read(reinterpret_cast<char *>(&v), sizeof(v)))
    Fail(ErrorCode::kParse, "unexpected end of binary stream");
  return v;
}

void WriteF32(std::ostream &os, float v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

float ReadF32(std::istream &is) {
  float v = 0;
  if (!is.read(reinterpret_cast<char *>(&v), sizeof(v)))
    Fail(ErrorCode::kParse, "unexpected end of binary stream");
  return v;
}

std::vector<std::string> SplitCsvLine(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace pmtl
