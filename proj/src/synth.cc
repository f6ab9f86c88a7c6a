// src/synth.cc

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

// Harmonic-plus-noise stand-in corpora. Every acoustic parameter is a
// deterministic function of the labels, a per-speaker offset, a per-corpus
// channel and the seed, so the labels can be recovered from the audio.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>

#include "common.h"
#include "corpus.h"
#include "wav.h"

namespace pmtl {

namespace {

struct EmotionStyle {
  double f0_scale;        // multiplies the speaker's register
  double range_semitones;  // contour excursion
  double tilt;            // harmonic k has amplitude k^-tilt
  double syllable_hz;
  double breathiness;
  double decay;           // energy decay over the utterance (0 = flat)
};

// neutral, happy, sad, angry
constexpr EmotionStyle kStyles[kNumEmotions] = {
    {1.00, 1.0, 1.5, 3.5, 0.04, 0.0},
    {1.30, 4.0, 0.9, 5.5, 0.08, 0.0},
    {0.86, 0.6, 2.2, 2.2, 0.16, 0.6},
    {1.18, 2.5, 0.5, 6.5, 0.03, 0.0},
};

double RegisterHz(Gender g) {
  switch (g) {
    case Gender::kFemaleAdult: return 205.0;
    case Gender::kMaleAdult: return 115.0;
    case Gender::kFemaleChild: return 285.0;
    case Gender::kMaleChild: return 270.0;
  }
  return 150.0;
}

struct Channel {
  double preemph;      // y[n] = x[n] + a x[n-1]
  double noise_floor;
};

Channel CorpusChannel(uint64_t seed, int corpus) {
  Rng rng(DeriveSeed(seed, "channel", static_cast<uint64_t>(corpus)));
  return {rng.Uniform(-0.3, 0.3), rng.Uniform(0.001, 0.004)};
}

std::string CorpusName(int c) { return "C" + std::to_string(c); }

std::string Padded(int v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, v);
  return buf;
}

Naturalness CorpusNaturalness(int corpus, int utterance) {
  switch (corpus % 3) {
    case 0: return Naturalness::kNatural;
    case 1: return Naturalness::kActed;
    default:  // mixed corpus, alternating blocks of four utterances
      return (utterance / 4) % 2 == 0 ? Naturalness::kNatural : Naturalness::kActed;
  }
}

Gender SpeakerGender(const SynthConfig &cfg, int corpus, int speaker) {
  bool female = speaker % 2 == 0;
  // With enough corpora the first one is a child corpus.
  if (corpus == 0 && cfg.n_corpora >= 4)
    return female ? Gender::kFemaleChild : Gender::kMaleChild;
  return female ? Gender::kFemaleAdult : Gender::kMaleAdult;
}

Emotion PickEmotion(const SynthConfig &cfg, int speaker, int utterance, uint64_t seed) {
  if (!cfg.class_balance)
    return static_cast<Emotion>((utterance + speaker) % kNumEmotions);
  const auto &w = *cfg.class_balance;
  double total = w[0] + w[1] + w[2] + w[3];
  Rng rng(DeriveSeed(seed, "emotion-draw"));
  double u = rng.Uniform() * total;
  for (int k = 0; k < kNumEmotions; ++k) {
    if (u < w[k]) return static_cast<Emotion>(k);
    u -= w[k];
  }
  return Emotion::kAngry;
}

}  // namespace

std::vector<double> SynthesizeUtterance(const UtteranceRecord &rec,
                                        const SynthConfig &cfg, uint64_t useed) {
  const int sr = kSampleRate;
  const size_t n = static_cast<size_t>(std::lround(cfg.duration_s * sr));
  const EmotionStyle &st = kStyles[static_cast<int>(rec.emotion)];
  const bool acted = rec.naturalness == Naturalness::kActed;

  // Speaker offsets come from a seed that only depends on the speaker.
  Rng spk(DeriveSeed(cfg.seed, "speaker:" + rec.speaker_id));
  const double spk_f0 = RegisterHz(rec.gender) * std::exp(0.07 * spk.Normal());
  const double spk_tilt = 0.1 * spk.Normal();
  int corpus_index = 0;
  if (rec.corpus_id.size() > 1) corpus_index = std::atoi(rec.corpus_id.c_str() + 1);
  const Channel ch = CorpusChannel(cfg.seed, corpus_index);

  Rng rng(useed);
  const double base = spk_f0 * st.f0_scale * std::exp(0.03 * rng.Normal());
  const double range = st.range_semitones * (acted ? 1.5 : 0.8);
  const double tilt = std::max(0.2, st.tilt + spk_tilt);
  const double syl_hz = st.syllable_hz * std::exp((acted ? 0.03 : 0.12) * rng.Normal());
  const double contour_phase = rng.Uniform(0, 2 * M_PI);
  const double level = rng.Uniform(0.3, 0.9);

  std::vector<double> amp(1 + static_cast<int>(7500.0 / 60.0));
  for (size_t k = 1; k < amp.size(); ++k) amp[k] = std::pow(static_cast<double>(k), -tilt);

  std::vector<double> out(n, 0.0);
  double phase = 0.0;
  double drift = 0.0;     // natural speech: slow random F0 wander (semitones)
  double syl_phase = 0.0;
  double syl_rate = syl_hz;
  double prev = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / sr;
    if (!acted && i % 160 == 0) {
      drift = 0.97 * drift + 0.25 * rng.Normal();
      syl_rate = syl_hz * std::exp(0.15 * rng.Normal());
    }
    double contour = range * std::sin(2 * M_PI * 0.9 * t + contour_phase);
    if (acted) contour += 0.5 * range * std::sin(2 * M_PI * 2.1 * t);
    double f0 = base * std::pow(2.0, (contour + drift) / 12.0);
    f0 = std::clamp(f0, 60.0, 480.0);

    phase += 2 * M_PI * f0 / sr;
    if (phase > 2 * M_PI) phase -= 2 * M_PI;
    syl_phase += syl_rate / sr;
    if (syl_phase >= 1.0) syl_phase -= 1.0;

    double env = std::sin(M_PI * syl_phase);
    env = env * env;
    env = 0.15 + 0.85 * env;
    env *= std::exp(-st.decay * t / cfg.duration_s);

    // Harmonics up to 7.5 kHz via complex rotation.
    std::complex<double> step = std::polar(1.0, phase);
    std::complex<double> h = step;
    double voiced = 0.0;
    int kmax = static_cast<int>(7500.0 / f0);
    for (int k = 1; k <= kmax; ++k) {
      voiced += amp[k] * h.imag();
      h *= step;
    }
    double noise = rng.Normal();
    double x = env * (voiced + st.breathiness * 3.0 * noise) + ch.noise_floor * rng.Normal();
    double y = x + ch.preemph * prev;
    prev = x;
    out[i] = y;
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  if (peak > 0)
    for (double &v : out) v *= level * 0.95 / peak;
  return out;
}

CorpusManifest GenerateSynthetic(const SynthConfig &cfg,
                                 const std::filesystem::path &out_dir) {
  cfg.Validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create output directory " + out_dir.string() +
                                   ": " + ec.message());

  CorpusManifest m;
  m.root = out_dir;
  uint64_t index = 0;
  for (int c = 0; c < cfg.n_corpora; ++c) {
    std::string corpus = CorpusName(c);
    std::filesystem::create_directories(out_dir / "wav" / corpus, ec);
    if (ec) Fail(ErrorCode::kIo, "cannot create " + (out_dir / "wav" / corpus).string());
    for (int s = 0; s < cfg.speakers_per_corpus; ++s) {
      std::string speaker = corpus + "S" + Padded(s, 2);
      for (int u = 0; u < cfg.utterances_per_speaker; ++u, ++index) {
        uint64_t useed = DeriveSeed(cfg.seed, "utterance", index);
        UtteranceRecord r;
        r.utterance_id = speaker + "U" + Padded(u, 3);
        r.audio_path = "wav/" + corpus + "/" + r.utterance_id + ".wav";
        r.emotion = PickEmotion(cfg, s, u, useed);
        r.gender = SpeakerGender(cfg, c, s);
        r.naturalness = CorpusNaturalness(c, u);
        r.speaker_id = speaker;
        r.corpus_id = corpus;
        Waveform wav;
        wav.samples = SynthesizeUtterance(r, cfg, useed);
        WriteWav(out_dir / r.audio_path, wav);
        m.records.push_back(std::move(r));
      }
    }
  }
  WriteManifest(m, out_dir / "manifest.csv");
  return m;
}

}  // namespace pmtl
