// src/wav.h

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

#ifndef PMTL_WAV_H_
#define PMTL_WAV_H_

#include <filesystem>
#include <vector>

namespace pmtl {

/// Mono PCM16 little-endian RIFF at 16 kHz; samples in [-1, 1].
struct Waveform {
  int sample_rate = 16000;
  std::vector<double> samples;
};

Waveform ReadWav(const std::filesystem::path &path);

/// Samples are clipped to [-1, 1] and rounded to the nearest PCM16 step.
void WriteWav(const std::filesystem::path &path, const Waveform &wav);

}  // namespace pmtl

#endif  // PMTL_WAV_H_
