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

#ifndef AWE_FRONTEND_HPP_
#define AWE_FRONTEND_HPP_

#include <Eigen/Dense>

#include "awe/types.hpp"

namespace awe {

// MFCC pipeline, fixed parametrization:
//   - supported sample rates: 8000 and 16000 Hz
//   - 25 ms Hamming window every 10 ms, trailing partial frames dropped
//   - pre-emphasis 0.97 applied to the whole signal before framing
//     (first sample is scaled by 1 - 0.97)
//   - power spectrum from a zero-padded FFT of the next power-of-two size
//   - 23 triangular mel filters, triangular in the mel domain
//     (mel(f) = 2595 log10(1 + f/700)), spanning 20 Hz to
//     min(7800, rate/2 - 100) Hz
//   - natural log, floored at 1e-10 (mel energies and frame energy)
//   - orthonormal DCT-II keeping 13 coefficients
//   - cepstral liftering with Q = 22
//   - coefficient 0 replaced by the floored log energy of the windowed frame
// No dithering, no mean normalization, no deltas.

inline constexpr int kNumMelFilters = 23;
inline constexpr double kPreemphasis = 0.97;
inline constexpr double kMelLowHz = 20.0;
inline constexpr double kLifterQ = 22.0;
inline constexpr double kLogFloor = 1e-10;

bool sample_rate_supported(int rate);
int window_samples(int sample_rate);
int shift_samples(int sample_rate);

// Closed-form frame count: floor((num_samples - window)/shift) + 1.
// Fails if the signal is shorter than one window.
Eigen::Index num_frames(size_t num_samples, int sample_rate);

// Pre-emphasized, Hamming-windowed sample blocks, one row per frame.
Eigen::MatrixXd frame_signal(const Waveform& w);

// 13 MFCCs per frame at full precision. Pure: identical input gives
// identical output. Scaling the waveform by a positive constant changes
// only coefficient 0.
Eigen::MatrixXd compute_mfcc_f64(const Waveform& w);

// Same pipeline rounded to the float32 used for training and storage.
FeatureMatrix compute_mfcc(const Waveform& w);

}  // namespace awe

#endif  // AWE_FRONTEND_HPP_
