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

#include "awe/frontend.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace awe {

namespace {

void check_rate(int rate) {
  require(sample_rate_supported(rate),
          "unsupported sample rate " + std::to_string(rate) +
              " Hz; supported rates: 8000, 16000");
}

// In-place iterative radix-2 Cooley-Tukey. Size must be a power of two.
void fft(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wn(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wn;
      }
    }
  }
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

// (num_bins x kNumMelFilters) filterbank; bin k is at k*rate/nfft Hz.
Eigen::MatrixXd mel_filterbank(int rate, size_t nfft) {
  const size_t num_bins = nfft / 2 + 1;
  const double hi_hz = std::min(7800.0, rate / 2.0 - 100.0);
  const double mel_lo = hz_to_mel(kMelLowHz);
  const double mel_hi = hz_to_mel(hi_hz);
  Eigen::VectorXd edges(kNumMelFilters + 2);
  for (int j = 0; j < kNumMelFilters + 2; ++j)
    edges[j] = mel_lo + (mel_hi - mel_lo) * j / (kNumMelFilters + 1);

  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(num_bins, kNumMelFilters);
  for (size_t k = 0; k < num_bins; ++k) {
    double mel_k = hz_to_mel(static_cast<double>(k) * rate / nfft);
    for (int j = 0; j < kNumMelFilters; ++j) {
      double left = edges[j], center = edges[j + 1], right = edges[j + 2];
      if (mel_k >= left && mel_k <= center) {
        bank(k, j) = (mel_k - left) / (center - left);
      } else if (mel_k > center && mel_k <= right) {
        bank(k, j) = (right - mel_k) / (right - center);
      }
    }
  }
  return bank;
}

// Orthonormal DCT-II, kMfccDim x kNumMelFilters.
Eigen::MatrixXd dct_matrix() {
  const int m = kNumMelFilters;
  Eigen::MatrixXd dct(kMfccDim, m);
  for (int i = 0; i < kMfccDim; ++i) {
    double scale = std::sqrt((i == 0 ? 1.0 : 2.0) / m);
    for (int j = 0; j < m; ++j)
      dct(i, j) = scale * std::cos(M_PI * i * (j + 0.5) / m);
  }
  return dct;
}

Eigen::VectorXd lifter_weights() {
  Eigen::VectorXd lift(kMfccDim);
  for (int i = 0; i < kMfccDim; ++i)
    lift[i] = 1.0 + (kLifterQ / 2.0) * std::sin(M_PI * i / kLifterQ);
  return lift;
}

}  // namespace

bool sample_rate_supported(int rate) { return rate == 8000 || rate == 16000; }

int window_samples(int sample_rate) {
  return sample_rate * kFrameLengthMs / 1000;
}

int shift_samples(int sample_rate) { return sample_rate * kFrameShiftMs / 1000; }

Eigen::Index num_frames(size_t num_samples, int sample_rate) {
  check_rate(sample_rate);
  const size_t window = static_cast<size_t>(window_samples(sample_rate));
  const size_t shift = static_cast<size_t>(shift_samples(sample_rate));
  require(num_samples >= window,
          "signal too short: " + std::to_string(num_samples) +
              " samples, need at least " + std::to_string(window) +
              " (one " + std::to_string(kFrameLengthMs) + " ms window)");
  return static_cast<Eigen::Index>((num_samples - window) / shift + 1);
}

Eigen::MatrixXd frame_signal(const Waveform& w) {
  check_rate(w.sample_rate);
  require(!w.samples.empty(), "frame_signal: empty waveform");
  const Eigen::Index nf = num_frames(w.samples.size(), w.sample_rate);
  const int window = window_samples(w.sample_rate);
  const int shift = shift_samples(w.sample_rate);

  std::vector<double> emph(w.samples.size());
  emph[0] = static_cast<double>(w.samples[0]) * (1.0 - kPreemphasis);
  for (size_t t = 1; t < w.samples.size(); ++t)
    emph[t] = static_cast<double>(w.samples[t]) -
              kPreemphasis * static_cast<double>(w.samples[t - 1]);

  Eigen::VectorXd ham(window);
  for (int n = 0; n < window; ++n)
    ham[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (window - 1));

  Eigen::MatrixXd blocks(nf, window);
  for (Eigen::Index f = 0; f < nf; ++f)
    for (int n = 0; n < window; ++n)
      blocks(f, n) = emph[static_cast<size_t>(f) * shift + n] * ham[n];
  return blocks;
}

Eigen::MatrixXd compute_mfcc_f64(const Waveform& w) {
  check_rate(w.sample_rate);
  for (float s : w.samples)
    require(std::isfinite(s), "compute_mfcc: non-finite sample in waveform");

  Eigen::MatrixXd blocks = frame_signal(w);
  const Eigen::Index nf = blocks.rows();
  const int window = static_cast<int>(blocks.cols());
  const size_t nfft = next_pow2(static_cast<size_t>(window));
  const size_t num_bins = nfft / 2 + 1;

  const Eigen::MatrixXd bank = mel_filterbank(w.sample_rate, nfft);
  const Eigen::MatrixXd dct = dct_matrix();
  const Eigen::VectorXd lift = lifter_weights();

  Eigen::MatrixXd out(nf, kMfccDim);
  std::vector<std::complex<double>> buf(nfft);
  for (Eigen::Index f = 0; f < nf; ++f) {
    double energy = blocks.row(f).squaredNorm();
    double log_energy = std::log(std::max(energy, kLogFloor));

    for (size_t i = 0; i < nfft; ++i)
      buf[i] = (i < static_cast<size_t>(window))
                   ? std::complex<double>(blocks(f, static_cast<int>(i)), 0.0)
                   : std::complex<double>(0.0, 0.0);
    fft(buf);
    Eigen::VectorXd power(num_bins);
    for (size_t k = 0; k < num_bins; ++k) power[k] = std::norm(buf[k]);

    Eigen::VectorXd mel = bank.transpose() * power;
    Eigen::VectorXd log_mel =
        mel.unaryExpr([](double e) { return std::log(std::max(e, kLogFloor)); });
    Eigen::VectorXd cep = (dct * log_mel).cwiseProduct(lift);
    cep[0] = log_energy;
    out.row(f) = cep;
  }
  return out;
}

FeatureMatrix compute_mfcc(const Waveform& w) {
  return compute_mfcc_f64(w).cast<float>();
}

}  // namespace awe
