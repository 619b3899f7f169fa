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

#ifndef AWE_IO_HPP_
#define AWE_IO_HPP_

#include <string>
#include <utility>
#include <vector>

#include "awe/types.hpp"

namespace awe {

// PCM WAV, 16-bit signed little-endian, mono only.
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);

struct WavInfo {
  int sample_rate = 0;
  size_t num_samples = 0;
};
// Header-only read; does not load sample data.
WavInfo read_wav_header(const std::string& path);

// "AWEF" feature container: magic, u32 frame count, u32 dim, then
// row-major float32 data, all little-endian.
FeatureMatrix read_awef(const std::string& path);
void write_awef(const std::string& path, const FeatureMatrix& m);

struct AwefInfo {
  uint32_t frames = 0;
  uint32_t dim = 0;
};
// Reads only the header; cheap way to learn a token's frame count.
AwefInfo read_awef_header(const std::string& path);

// "AWEE" embedding container: magic, u32 count, u32 dim, float32 rows.
// Row ids go to a JSON-lines sidecar at <path>.ids.jsonl, one
// {"token_id": ...} object per row.
void write_awee(const std::string& path, const Eigen::MatrixXf& rows,
                const std::vector<std::string>& ids);
std::pair<Eigen::MatrixXf, std::vector<std::string>> read_awee(
    const std::string& path);

}  // namespace awe

#endif  // AWE_IO_HPP_
