// src/frame_features.h

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

#ifndef PMTL_FRAME_FEATURES_H_
#define PMTL_FRAME_FEATURES_H_

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pmtl {

struct FeatureConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int n_mfcc = 12;
  int n_mel_filters = 26;
  int fft_size = 512;
  double pre_emphasis = 0.97;
  double f0_min_hz = 50.0;
  double f0_max_hz = 500.0;
  int delta_window = 2;
  // Autocorrelation peak needed to call a frame voiced.
  double voicing_threshold = 0.3;

  int WindowSamples(int sample_rate) const;
  int HopSamples(int sample_rate) const;
  void Validate(int sample_rate) const;
};

inline constexpr int kNumStatic = 16;
inline constexpr int kFeatureDim = 32;

/// Column names in storage order: the 16 frame descriptors, then their
/// deltas with a "d_" prefix.
const std::array<std::string, kFeatureDim> &FeatureColumnNames();

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n_frames x 32 frame-level features. Values are always representable as
/// float32 so that the binary file format round-trips exactly.
struct FrameFeatureMatrix {
  RowMatrix data;

  int64_t frames() const { return data.rows(); }
  bool operator==(const FrameFeatureMatrix &o) const { return data == o.data; }
};

/// Peak normalisation to 1.0; all-zero input is returned unchanged.
std::vector<double> NormalizeGain(std::span<const double> samples);

/// floor((len - window) / hop) + 1 frames, no tail padding.
std::vector<std::vector<double>> FrameSignal(std::span<const double> samples,
                                             int sample_rate,
                                             const FeatureConfig &config);

/// [F0, voice_prob, zcr, logE, mfcc1..mfcc12] for one window-length frame.
std::array<double, kNumStatic> FrameDescriptors(std::span<const double> frame,
                                                int sample_rate,
                                                const FeatureConfig &config);

/// Regression deltas with edge replication over +-delta_window frames.
RowMatrix ComputeDeltas(const RowMatrix &statics, const FeatureConfig &config);

FrameFeatureMatrix ExtractFeatures(std::span<const double> samples, int sample_rate,
                                   const FeatureConfig &config);

class Standardizer {
 public:
  static constexpr double kStdFloor = 1e-8;

  Standardizer() = default;
  Standardizer(Eigen::VectorXd mean, Eigen::VectorXd stddev)
      : mean_(std::move(mean)), stddev_(std::move(stddev)) {}

  /// Population statistics over every frame of every matrix.
  static Standardizer Fit(std::span<const FrameFeatureMatrix *const> training);
  static Standardizer Fit(std::span<const FrameFeatureMatrix> training);

  RowMatrix Apply(const RowMatrix &m) const;
  FrameFeatureMatrix Apply(const FrameFeatureMatrix &m) const { return {Apply(m.data)}; }

  bool fitted() const { return mean_.size() > 0; }
  const Eigen::VectorXd &mean() const { return mean_; }
  const Eigen::VectorXd &stddev() const { return stddev_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd stddev_;
};

// Binary feature file: "PMTL1", u32 n_frames, u32 width, row-major float32.
void WriteFeatureFile(const std::filesystem::path &path, const FrameFeatureMatrix &m);
FrameFeatureMatrix ReadFeatureFile(const std::filesystem::path &path);
void WriteFeatureCsv(const std::filesystem::path &path, const FrameFeatureMatrix &m);

}  // namespace pmtl

#endif  // PMTL_FRAME_FEATURES_H_
