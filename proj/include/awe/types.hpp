// Copyright 2026 AWE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the Apache 2 License for the specific language governing permissions
// and limitations under the License.

#ifndef AWE_TYPES_HPP_
#define AWE_TYPES_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "awe/common.hpp"

namespace awe {

inline constexpr int kMfccDim = 13;
inline constexpr int kFrameShiftMs = 10;
inline constexpr int kFrameLengthMs = 25;

// Time-major feature matrix: one row per frame.
using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Embedding = Eigen::VectorXf;

struct Waveform {
  std::vector<float> samples;  // amplitudes in [-1, 1]
  int sample_rate = 0;         // Hz
};

// A segment of T frames at 10 ms shift / 25 ms window spans T*10+15 ms.
inline double frames_to_ms(Eigen::Index num_frames) {
  return static_cast<double>(num_frames) * kFrameShiftMs +
         (kFrameLengthMs - kFrameShiftMs);
}

inline void check_features(const FeatureMatrix& m, const std::string& what) {
  require(m.rows() >= 1, what + ": feature matrix must have at least 1 frame");
  require(m.allFinite(), what + ": feature matrix has non-finite values");
}

}  // namespace awe

#endif  // AWE_TYPES_HPP_
