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

#include "awe/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "file containers assume a little-endian host");

namespace awe {

namespace {

template <class T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T read_pod(std::istream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  require(bool(is), path + ": truncated file");
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "cannot open file: " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(bool(os), "cannot write file: " + path);
  return os;
}

void expect_magic(std::istream& is, const char* magic,
                  const std::string& path) {
  char buf[4];
  is.read(buf, 4);
  require(bool(is) && std::memcmp(buf, magic, 4) == 0,
          path + ": bad magic, expected " + magic);
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_magic(is, "RIFF", path);
  read_pod<uint32_t>(is, path);  // riff size
  expect_magic(is, "WAVE", path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  Waveform w;
  while (is) {
    char id[4];
    is.read(id, 4);
    if (!is) break;
    uint32_t size = read_pod<uint32_t>(is, path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_pod<uint16_t>(is, path);
      channels = read_pod<uint16_t>(is, path);
      rate = read_pod<uint32_t>(is, path);
      read_pod<uint32_t>(is, path);  // byte rate
      read_pod<uint16_t>(is, path);  // block align
      bits = read_pod<uint16_t>(is, path);
      if (size > 16) is.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      require(have_fmt, path + ": data chunk before fmt chunk");
      require(format == 1, path + ": only PCM WAV is supported");
      require(channels == 1, path + ": only mono WAV is supported");
      require(bits == 16, path + ": only 16-bit WAV is supported");
      size_t n = size / 2;
      std::vector<int16_t> raw(n);
      is.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(n * 2));
      require(bool(is), path + ": truncated data chunk");
      w.samples.resize(n);
      for (size_t i = 0; i < n; ++i)
        w.samples[i] = static_cast<float>(raw[i]) / 32768.0f;
      w.sample_rate = static_cast<int>(rate);
      return w;
    } else {
      is.seekg(size + (size & 1), std::ios::cur);
    }
  }
  fail(path + ": no data chunk found");
}

WavInfo read_wav_header(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_magic(is, "RIFF", path);
  read_pod<uint32_t>(is, path);
  expect_magic(is, "WAVE", path);
  WavInfo info;
  bool have_fmt = false;
  while (is) {
    char id[4];
    is.read(id, 4);
    if (!is) break;
    uint32_t size = read_pod<uint32_t>(is, path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      uint16_t format = read_pod<uint16_t>(is, path);
      uint16_t channels = read_pod<uint16_t>(is, path);
      uint32_t rate = read_pod<uint32_t>(is, path);
      read_pod<uint32_t>(is, path);
      read_pod<uint16_t>(is, path);
      uint16_t bits = read_pod<uint16_t>(is, path);
      require(format == 1 && channels == 1 && bits == 16,
              path + ": only 16-bit PCM mono WAV is supported");
      info.sample_rate = static_cast<int>(rate);
      if (size > 16) is.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      require(have_fmt, path + ": data chunk before fmt chunk");
      info.num_samples = size / 2;
      return info;
    } else {
      is.seekg(size + (size & 1), std::ios::cur);
    }
  }
  fail(path + ": no data chunk found");
}

void write_wav(const std::string& path, const Waveform& w) {
  require(w.sample_rate > 0, "write_wav: sample_rate must be positive");
  std::ofstream os = open_out(path);
  uint32_t data_size = static_cast<uint32_t>(w.samples.size() * 2);
  os.write("RIFF", 4);
  write_pod<uint32_t>(os, 36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_pod<uint32_t>(os, 16);
  write_pod<uint16_t>(os, 1);  // PCM
  write_pod<uint16_t>(os, 1);  // mono
  write_pod<uint32_t>(os, static_cast<uint32_t>(w.sample_rate));
  write_pod<uint32_t>(os, static_cast<uint32_t>(w.sample_rate * 2));
  write_pod<uint16_t>(os, 2);
  write_pod<uint16_t>(os, 16);
  os.write("data", 4);
  write_pod<uint32_t>(os, data_size);
  for (float s : w.samples) {
    float c = std::min(1.0f, std::max(-1.0f, s));
    auto q = static_cast<int16_t>(std::lrintf(c * 32767.0f));
    write_pod<int16_t>(os, q);
  }
  require(bool(os), "write_wav: failed writing " + path);
}

FeatureMatrix read_awef(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_magic(is, "AWEF", path);
  uint32_t frames = read_pod<uint32_t>(is, path);
  uint32_t dim = read_pod<uint32_t>(is, path);
  FeatureMatrix m(frames, dim);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(float) * frames * dim));
  require(bool(is), path + ": truncated feature data");
  return m;
}

void write_awef(const std::string& path, const FeatureMatrix& m) {
  std::ofstream os = open_out(path);
  os.write("AWEF", 4);
  write_pod<uint32_t>(os, static_cast<uint32_t>(m.rows()));
  write_pod<uint32_t>(os, static_cast<uint32_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(float) * m.size()));
  require(bool(os), "write_awef: failed writing " + path);
}

AwefInfo read_awef_header(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_magic(is, "AWEF", path);
  AwefInfo info;
  info.frames = read_pod<uint32_t>(is, path);
  info.dim = read_pod<uint32_t>(is, path);
  return info;
}

void write_awee(const std::string& path, const Eigen::MatrixXf& rows,
                const std::vector<std::string>& ids) {
  require(static_cast<size_t>(rows.rows()) == ids.size(),
          "write_awee: row/id count mismatch");
  std::ofstream os = open_out(path);
  os.write("AWEE", 4);
  write_pod<uint32_t>(os, static_cast<uint32_t>(rows.rows()));
  write_pod<uint32_t>(os, static_cast<uint32_t>(rows.cols()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < rows.cols(); ++j)
      write_pod<float>(os, rows(i, j));
  require(bool(os), "write_awee: failed writing " + path);

  std::ofstream sidecar(path + ".ids.jsonl");
  require(bool(sidecar), "write_awee: cannot write id sidecar for " + path);
  for (const auto& id : ids)
    sidecar << nlohmann::json{{"token_id", id}}.dump() << "\n";
}

std::pair<Eigen::MatrixXf, std::vector<std::string>> read_awee(
    const std::string& path) {
  std::ifstream is = open_in(path);
  expect_magic(is, "AWEE", path);
  uint32_t n = read_pod<uint32_t>(is, path);
  uint32_t dim = read_pod<uint32_t>(is, path);
  Eigen::MatrixXf rows(n, dim);
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < dim; ++j) rows(i, j) = read_pod<float>(is, path);

  std::vector<std::string> ids;
  std::ifstream sidecar(path + ".ids.jsonl");
  require(bool(sidecar), path + ": missing id sidecar " + path + ".ids.jsonl");
  std::string line;
  while (std::getline(sidecar, line)) {
    if (line.empty()) continue;
    ids.push_back(nlohmann::json::parse(line).at("token_id").get<std::string>());
  }
  require(ids.size() == n, path + ": id sidecar row count mismatch");
  return {std::move(rows), std::move(ids)};
}

}  // namespace awe
