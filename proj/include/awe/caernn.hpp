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

#ifndef AWE_CAERNN_HPP_
#define AWE_CAERNN_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "awe/corpus.hpp"
#include "awe/types.hpp"

namespace awe {

struct ModelDims {
  int feat_dim = kMfccDim;
  int enc_layers = 3;
  int enc_units = 400;
  int embed_dim = 130;
  int dec_layers = 3;
  int dec_units = 400;

  bool operator==(const ModelDims&) const = default;
};

// One named parameter matrix with its gradient and Adam moments. Vectors
// (biases, 1x1 scalars) are stored as n x 1 matrices.
template <typename S>
struct Tensor {
  using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  std::string name;
  MatS value, grad, m, v;
};

// One bias-corrected Adam update (beta1 0.9, beta2 0.999, eps 1e-8) applied
// to every tensor; step is the shared update counter, incremented here.
template <typename S>
void adam_step(std::vector<Tensor<S>>& tensors, uint64_t& step, double lr);

// Encoder-decoder recurrent net over gated recurrent units. The encoder's
// final top-layer state projects linearly to the embedding; the decoder
// receives the embedding as its input at every output step and projects
// each top-layer state linearly to a feature frame. Sequences are
// time-major (T x feat_dim).
template <typename S>
class CaeRnn {
 public:
  using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  CaeRnn(const ModelDims& dims, uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  std::vector<Tensor<S>>& tensors() { return tensors_; }
  const std::vector<Tensor<S>>& tensors() const { return tensors_; }
  Tensor<S>& tensor(const std::string& name);
  uint64_t steps_done() const { return steps_; }
  void set_steps_done(uint64_t s) { steps_ = s; }

  VecS encode(const MatS& x) const;
  MatS decode(const VecS& z, int t_out) const;

  // Sum over target frames of the squared reconstruction error.
  S pair_loss(const MatS& x, const MatS& target) const;

  // Forward and backward over a batch of (input, target) items. Adds
  // d(mean item loss)/d(params) into each tensor's grad and returns the
  // sum of the per-item losses.
  S forward_backward(
      const std::vector<std::pair<const MatS*, const MatS*>>& items);

  void zero_grads();
  double grad_norm() const;
  void clip_grads(double max_norm);
  void adam_update(double lr) { adam_step(tensors_, steps_, lr); }

 private:
  struct GruIdx {
    int gwx, gwh, gb, cwx, cwh, cb;
  };

  GruIdx add_gru(const std::string& prefix, int in_dim, int units);
  int add_tensor(const std::string& name, int rows, int cols);

  ModelDims dims_;
  std::vector<Tensor<S>> tensors_;
  std::vector<GruIdx> enc_, dec_;
  int embed_w_ = -1, embed_b_ = -1, out_w_ = -1, out_b_ = -1;
  uint64_t steps_ = 0;
};

struct TrainConfig {
  int pretrain_epochs = 15;
  int train_epochs = 3;
  double learning_rate = 0.001;
  int batch_size = 32;
  uint64_t seed = 0;
  double gradient_clip_norm = 0.0;  // 0 disables clipping
};

struct EpochStat {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
};

// Autoencoder pretraining: every token reconstructs itself for
// cfg.pretrain_epochs epochs from a fresh seed-initialized model.
CaeRnn<float> pretrain_autoencoder(const ModelDims& dims, const TrainingSet& ts,
                                   const TrainConfig& cfg,
                                   std::vector<EpochStat>* log = nullptr);

// Correspondence training on ts.pairs for cfg.train_epochs epochs. The
// optimizer restarts from zero moments; the model is updated in place.
void train_cae(CaeRnn<float>& net, const TrainingSet& ts,
               const TrainConfig& cfg, std::vector<EpochStat>* log = nullptr);

Embedding embed_token(const CaeRnn<float>& net, const FeatureMatrix& x);

// "AWEM" checkpoint: magic, u32 version, six u32 architecture dims,
// u64 update count, u32 tensor count, then per tensor a length-prefixed
// name, u32 rows, u32 cols and row-major float32 data. Little-endian.
void save_checkpoint(const std::string& path, const CaeRnn<float>& net);
CaeRnn<float> load_checkpoint(const std::string& path);

}  // namespace awe

#endif  // AWE_CAERNN_HPP_
