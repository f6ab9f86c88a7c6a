// src/wav.cc

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

#include "wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include "common.h"

namespace pmtl {

namespace {

uint16_t ReadU16(std::istream &is) {
  uint16_t v = 0;
  if (!is.read(reinterpret_cast<char *>(&v), 2))
    Fail(ErrorCode::kParse, "truncated WAV header");
  return v;
}

void WriteU16(std::ostream &os, uint16_t v) {
  os.write(reinterpret_cast<const char *>(&v), 2);
}

std::string ReadTag(std::istream &is) {
  char tag[4];
  if (!is.read(tag, 4)) return {};
  return std::string(tag, 4);
}

}  // namespace

Waveform ReadWav(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kIo, "cannot open audio file " + path.string());
  if (ReadTag(is) != "RIFF") Fail(ErrorCode::kParse, "not a RIFF file: " + path.string());
  ReadU32(is);
  if (ReadTag(is) != "WAVE") Fail(ErrorCode::kParse, "not a WAVE file: " + path.string());

  bool have_fmt = false;
  Waveform wav;
  for (;;) {
    std::string tag = ReadTag(is);
    if (tag.empty()) break;
    uint32_t size = ReadU32(is);
    if (tag == "fmt ") {
      uint16_t format = ReadU16(is);
      uint16_t channels = ReadU16(is);
      uint32_t rate = ReadU32(is);
      ReadU32(is);  // byte rate
      ReadU16(is);  // block align
      uint16_t bits = ReadU16(is);
      if (format != 1 || channels != 1 || bits != 16)
        Fail(ErrorCode::kParse, "only mono PCM16 WAV is supported: " + path.string());
      if (rate != 16000)
        Fail(ErrorCode::kParse, "sample rate must be 16000 Hz: " + path.string());
      wav.sample_rate = static_cast<int>(rate);
      is.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) Fail(ErrorCode::kParse, "data chunk before fmt chunk: " + path.string());
      size_t n = size / 2;
      std::vector<int16_t> raw(n);
      if (!is.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(n * 2)))
        Fail(ErrorCode::kParse, "truncated WAV data: " + path.string());
      wav.samples.resize(n);
      for (size_t i = 0; i < n; ++i) wav.samples[i] = raw[i] / 32768.0;
      return wav;
    } else {
      is.seekg(size + (size & 1), std::ios::cur);
    }
  }
  Fail(ErrorCode::kParse, "no data chunk in " + path.string());
}

void WriteWav(const std::filesystem::path &path, const Waveform &wav) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kIo, "cannot write audio file " + path.string());
  uint32_t data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  os.write("RIFF", 4);
  WriteU32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  WriteU32(os, 16);
  WriteU16(os, 1);
  WriteU16(os, 1);
  WriteU32(os, static_cast<uint32_t>(wav.sample_rate));
  WriteU32(os, static_cast<uint32_t>(wav.sample_rate * 2));
  WriteU16(os, 2);
  WriteU16(os, 16);
  os.write("data", 4);
  WriteU32(os, data_bytes);
  for (double s : wav.samples) {
    long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    WriteU16(os, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  if (!os) Fail(ErrorCode::kIo, "short write to " + path.string());
}

}  // namespace pmtl
