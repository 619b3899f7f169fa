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

#include "awe/caernn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "awe/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoints assume a little-endian host");

namespace awe {

namespace {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
MatX<S> sigmoid(const MatX<S>& x) {
  return (S(1) / (S(1) + (-x.array()).exp())).matrix();
}

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

}  // namespace

template <typename S>
int CaeRnn<S>::add_tensor(const std::string& name, int rows, int cols) {
  Tensor<S> t;
  t.name = name;
  t.value = MatS::Zero(rows, cols);
  t.grad = MatS::Zero(rows, cols);
  t.m = MatS::Zero(rows, cols);
  t.v = MatS::Zero(rows, cols);
  tensors_.push_back(std::move(t));
  return static_cast<int>(tensors_.size()) - 1;
}

template <typename S>
typename CaeRnn<S>::GruIdx CaeRnn<S>::add_gru(const std::string& prefix,
                                              int in_dim, int units) {
  GruIdx g;
  g.gwx = add_tensor(prefix + ".gates.wx", 2 * units, in_dim);
  g.gwh = add_tensor(prefix + ".gates.wh", 2 * units, units);
  g.gb = add_tensor(prefix + ".gates.b", 2 * units, 1);
  g.cwx = add_tensor(prefix + ".cand.wx", units, in_dim);
  g.cwh = add_tensor(prefix + ".cand.wh", units, units);
  g.cb = add_tensor(prefix + ".cand.b", units, 1);
  return g;
}

template <typename S>
CaeRnn<S>::CaeRnn(const ModelDims& dims, uint64_t seed) : dims_(dims) {
  require(dims.feat_dim >= 1 && dims.enc_layers >= 1 && dims.enc_units >= 1 &&
              dims.embed_dim >= 1 && dims.dec_layers >= 1 &&
              dims.dec_units >= 1,
          "model dimensions must all be positive");
  for (int l = 0; l < dims.enc_layers; ++l)
    enc_.push_back(add_gru("enc." + std::to_string(l),
                           l == 0 ? dims.feat_dim : dims.enc_units,
                           dims.enc_units));
  embed_w_ = add_tensor("embed.w", dims.embed_dim, dims.enc_units);
  embed_b_ = add_tensor("embed.b", dims.embed_dim, 1);
  for (int l = 0; l < dims.dec_layers; ++l)
    dec_.push_back(add_gru("dec." + std::to_string(l),
                           l == 0 ? dims.embed_dim : dims.dec_units,
                           dims.dec_units));
  out_w_ = add_tensor("out.w", dims.feat_dim, dims.dec_units);
  out_b_ = add_tensor("out.b", dims.feat_dim, 1);

  // Weights uniform in +-1/sqrt(fan_in), row-major draw order; biases zero.
  Rng rng(mix_seed(seed, "init"));
  for (auto& t : tensors_) {
    if (t.name.size() >= 2 && t.name.compare(t.name.size() - 2, 2, ".b") == 0)
      continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.value.cols()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r)
      for (Eigen::Index c = 0; c < t.value.cols(); ++c)
        t.value(r, c) = static_cast<S>(rng.uniform(-bound, bound));
  }
}

template <typename S>
Tensor<S>& CaeRnn<S>::tensor(const std::string& name) {
  for (auto& t : tensors_)
    if (t.name == name) return t;
  fail("no tensor named " + name);
}

namespace {

// Single-sequence cell update shared by encode and decode.
template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, 1> gru_step_one(
    const MatX<S>& gwx, const MatX<S>& gwh, const MatX<S>& gb,
    const MatX<S>& cwx, const MatX<S>& cwh, const MatX<S>& cb,
    const Eigen::Matrix<S, Eigen::Dynamic, 1>& x,
    const Eigen::Matrix<S, Eigen::Dynamic, 1>& h) {
  using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  const Eigen::Index hd = h.size();
  VecS pre = gwx * x + gwh * h + gb.col(0);
  VecS r = (S(1) / (S(1) + (-pre.head(hd).array()).exp())).matrix();
  VecS zg = (S(1) / (S(1) + (-pre.tail(hd).array()).exp())).matrix();
  VecS prec = cwx * x + cwh * r.cwiseProduct(h) + cb.col(0);
  VecS c = prec.array().tanh().matrix();
  return (zg.array() * h.array() + (S(1) - zg.array()) * c.array()).matrix();
}

}  // namespace

template <typename S>
typename CaeRnn<S>::VecS CaeRnn<S>::encode(const MatS& x) const {
  require(x.rows() >= 1, "cannot encode an empty sequence");
  require(x.cols() == dims_.feat_dim,
          "input width " + std::to_string(x.cols()) + ", expected " +
              std::to_string(dims_.feat_dim));
  require(x.allFinite(), "non-finite input frame");
  std::vector<VecS> h(enc_.size(), VecS::Zero(dims_.enc_units));
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    VecS in = x.row(t).transpose();
    for (size_t l = 0; l < enc_.size(); ++l) {
      const GruIdx& g = enc_[l];
      h[l] = gru_step_one<S>(tensors_[g.gwx].value, tensors_[g.gwh].value,
                             tensors_[g.gb].value, tensors_[g.cwx].value,
                             tensors_[g.cwh].value, tensors_[g.cb].value, in,
                             h[l]);
      in = h[l];
    }
  }
  return tensors_[embed_w_].value * h.back() + tensors_[embed_b_].value.col(0);
}

template <typename S>
typename CaeRnn<S>::MatS CaeRnn<S>::decode(const VecS& z, int t_out) const {
  require(t_out >= 1, "decoder needs at least one output frame");
  require(z.size() == dims_.embed_dim,
          "embedding size " + std::to_string(z.size()) + ", expected " +
              std::to_string(dims_.embed_dim));
  std::vector<VecS> h(dec_.size(), VecS::Zero(dims_.dec_units));
  MatS out(t_out, dims_.feat_dim);
  for (int t = 0; t < t_out; ++t) {
    VecS in = z;
    for (size_t l = 0; l < dec_.size(); ++l) {
      const GruIdx& g = dec_[l];
      h[l] = gru_step_one<S>(tensors_[g.gwx].value, tensors_[g.gwh].value,
                             tensors_[g.gb].value, tensors_[g.cwx].value,
                             tensors_[g.cwh].value, tensors_[g.cb].value, in,
                             h[l]);
      in = h[l];
    }
    out.row(t) =
        (tensors_[out_w_].value * h.back() + tensors_[out_b_].value.col(0))
            .transpose();
  }
  return out;
}

template <typename S>
S CaeRnn<S>::pair_loss(const MatS& x, const MatS& target) const {
  require(target.rows() >= 1 && target.cols() == dims_.feat_dim,
          "invalid target sequence");
  require(target.allFinite(), "non-finite target frame");
  VecS z = encode(x);
  MatS y = decode(z, static_cast<int>(target.rows()));
  return (target - y).squaredNorm();
}

template <typename S>
S CaeRnn<S>::forward_backward(
    const std::vector<std::pair<const MatS*, const MatS*>>& items) {
  using Arr = Eigen::Array<S, 1, Eigen::Dynamic>;
  const int B = static_cast<int>(items.size());
  require(B > 0, "empty batch");
  const int F = dims_.feat_dim;
  const int HE = dims_.enc_units;
  const int HD = dims_.dec_units;
  int t_max = 0, u_max = 0;
  for (const auto& [xin, tgt] : items) {
    require(xin->cols() == F && tgt->cols() == F, "feature width mismatch");
    require(xin->rows() >= 1 && tgt->rows() >= 1, "empty sequence in batch");
    t_max = std::max<int>(t_max, static_cast<int>(xin->rows()));
    u_max = std::max<int>(u_max, static_cast<int>(tgt->rows()));
  }

  // Inputs column-per-item; mask 1 on live steps, 0 on padding.
  std::vector<MatS> enc_in(t_max, MatS::Zero(F, B));
  std::vector<Arr> mask(t_max, Arr::Zero(B));
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < static_cast<int>(items[b].first->rows()); ++t) {
      enc_in[t].col(b) = items[b].first->row(t).transpose();
      mask[t](b) = S(1);
    }

  struct LayerTape {
    std::vector<MatS> r, zg, c, h;
  };
  auto run_layer = [&](const GruIdx& gi, const std::vector<MatS>& below,
                       const Arr* masks, int steps, int units) {
    LayerTape tape;
    tape.r.resize(steps);
    tape.zg.resize(steps);
    tape.c.resize(steps);
    tape.h.resize(steps);
    const MatS& gwx = tensors_[gi.gwx].value;
    const MatS& gwh = tensors_[gi.gwh].value;
    const MatS& gb = tensors_[gi.gb].value;
    const MatS& cwx = tensors_[gi.cwx].value;
    const MatS& cwh = tensors_[gi.cwh].value;
    const MatS& cb = tensors_[gi.cb].value;
    MatS h_prev = MatS::Zero(units, B);
    for (int t = 0; t < steps; ++t) {
      MatS pre = gwx * below[t] + gwh * h_prev;
      pre.colwise() += gb.col(0);
      tape.r[t] = sigmoid<S>(pre.topRows(units));
      tape.zg[t] = sigmoid<S>(pre.bottomRows(units));
      MatS prec = cwx * below[t] + cwh * tape.r[t].cwiseProduct(h_prev);
      prec.colwise() += cb.col(0);
      tape.c[t] = prec.array().tanh().matrix();
      MatS h_new = (tape.zg[t].array() * h_prev.array() +
                    (S(1) - tape.zg[t].array()) * tape.c[t].array())
                       .matrix();
      if (masks) {
        // Frozen state: padded steps carry the last live state forward.
        tape.h[t] = (h_new.array().rowwise() * masks[t] +
                     h_prev.array().rowwise() * (S(1) - masks[t]))
                        .matrix();
      } else {
        tape.h[t] = std::move(h_new);
      }
      h_prev = tape.h[t];
    }
    return tape;
  };

  std::vector<LayerTape> etape;
  {
    const std::vector<MatS>* below = &enc_in;
    for (size_t l = 0; l < enc_.size(); ++l) {
      etape.push_back(run_layer(enc_[l], *below, mask.data(), t_max, HE));
      below = &etape.back().h;
    }
  }
  const MatS& h_final = etape.back().h[t_max - 1];
  MatS z = tensors_[embed_w_].value * h_final;
  z.colwise() += tensors_[embed_b_].value.col(0);

  std::vector<MatS> dec_in(u_max, z);
  std::vector<LayerTape> dtape;
  {
    const std::vector<MatS>* below = &dec_in;
    for (size_t l = 0; l < dec_.size(); ++l) {
      dtape.push_back(run_layer(dec_[l], *below, nullptr, u_max, HD));
      below = &dtape.back().h;
    }
  }

  // Output projection, per-item loss, and dL/dy for J = (sum loss)/B.
  const MatS& ow = tensors_[out_w_].value;
  S total = S(0);
  std::vector<MatS> dy(u_max, MatS::Zero(F, B));
  for (int u = 0; u < u_max; ++u) {
    MatS y = ow * dtape.back().h[u];
    y.colwise() += tensors_[out_b_].value.col(0);
    for (int b = 0; b < B; ++b) {
      if (u >= static_cast<int>(items[b].second->rows())) continue;
      VecS diff = y.col(b) - items[b].second->row(u).transpose();
      total += diff.squaredNorm();
      dy[u].col(b) = (S(2) / S(B)) * diff;
    }
    tensors_[out_w_].grad += dy[u] * dtape.back().h[u].transpose();
    tensors_[out_b_].grad.col(0) += dy[u].rowwise().sum();
  }

  auto backward_cell = [&](const GruIdx& gi, const MatS& r, const MatS& zg,
                           const MatS& c, const MatS& h_prev, const MatS& xt,
                           const MatS& dh_new, MatS& dh_prev, MatS& dx) {
    const int units = static_cast<int>(r.rows());
    MatS dzg = dh_new.cwiseProduct(h_prev - c);
    MatS dc = (dh_new.array() * (S(1) - zg.array())).matrix();
    dh_prev += dh_new.cwiseProduct(zg);
    MatS dprec = (dc.array() * (S(1) - c.array().square())).matrix();
    tensors_[gi.cwx].grad += dprec * xt.transpose();
    tensors_[gi.cwh].grad += dprec * r.cwiseProduct(h_prev).transpose();
    tensors_[gi.cb].grad.col(0) += dprec.rowwise().sum();
    MatS drh = tensors_[gi.cwh].value.transpose() * dprec;
    MatS dr = drh.cwiseProduct(h_prev);
    dh_prev += drh.cwiseProduct(r);
    MatS dpre(2 * units, dh_new.cols());
    dpre.topRows(units) = (dr.array() * r.array() * (S(1) - r.array())).matrix();
    dpre.bottomRows(units) =
        (dzg.array() * zg.array() * (S(1) - zg.array())).matrix();
    tensors_[gi.gwx].grad += dpre * xt.transpose();
    tensors_[gi.gwh].grad += dpre * h_prev.transpose();
    tensors_[gi.gb].grad.col(0) += dpre.rowwise().sum();
    dx = tensors_[gi.cwx].value.transpose() * dprec +
         tensors_[gi.gwx].value.transpose() * dpre;
    dh_prev += tensors_[gi.gwh].value.transpose() * dpre;
  };

  // Decoder backward; layer 0's input gradient accumulates into dz.
  MatS dz = MatS::Zero(dims_.embed_dim, B);
  {
    const MatS h0 = MatS::Zero(HD, B);
    std::vector<MatS> dh_next(dec_.size(), MatS::Zero(HD, B));
    for (int u = u_max - 1; u >= 0; --u) {
      MatS from_above = ow.transpose() * dy[u];
      for (int l = static_cast<int>(dec_.size()) - 1; l >= 0; --l) {
        MatS dh_new = dh_next[l] + from_above;
        MatS dh_prev = MatS::Zero(HD, B);
        const MatS& h_prev = u > 0 ? dtape[l].h[u - 1] : h0;
        const MatS& xt = l > 0 ? dtape[l - 1].h[u] : dec_in[u];
        MatS dx;
        backward_cell(dec_[l], dtape[l].r[u], dtape[l].zg[u], dtape[l].c[u],
                      h_prev, xt, dh_new, dh_prev, dx);
        from_above = std::move(dx);
        dh_next[l] = std::move(dh_prev);
      }
      dz += from_above;
    }
  }

  tensors_[embed_w_].grad += dz * h_final.transpose();
  tensors_[embed_b_].grad.col(0) += dz.rowwise().sum();

  // Encoder backward; the embedding path feeds only the final step.
  {
    const MatS h0 = MatS::Zero(HE, B);
    std::vector<MatS> dh_next(enc_.size(), MatS::Zero(HE, B));
    for (int t = t_max - 1; t >= 0; --t) {
      MatS from_above = t == t_max - 1
                            ? (tensors_[embed_w_].value.transpose() * dz).eval()
                            : MatS::Zero(HE, B).eval();
      for (int l = static_cast<int>(enc_.size()) - 1; l >= 0; --l) {
        MatS dh = dh_next[l] + from_above;
        MatS dh_new = (dh.array().rowwise() * mask[t]).matrix();
        MatS dh_prev = (dh.array().rowwise() * (S(1) - mask[t])).matrix();
        const MatS& h_prev = t > 0 ? etape[l].h[t - 1] : h0;
        const MatS& xt = l > 0 ? etape[l - 1].h[t] : enc_in[t];
        MatS dx;
        backward_cell(enc_[l], etape[l].r[t], etape[l].zg[t], etape[l].c[t],
                      h_prev, xt, dh_new, dh_prev, dx);
        from_above = std::move(dx);
        dh_next[l] = std::move(dh_prev);
      }
    }
  }
  return total;
}

template <typename S>
void CaeRnn<S>::zero_grads() {
  for (auto& t : tensors_) t.grad.setZero();
}

template <typename S>
double CaeRnn<S>::grad_norm() const {
  double s = 0.0;
  for (const auto& t : tensors_)
    s += static_cast<double>(t.grad.template cast<double>().squaredNorm());
  return std::sqrt(s);
}

template <typename S>
void CaeRnn<S>::clip_grads(double max_norm) {
  require(max_norm > 0, "clip norm must be positive");
  const double norm = grad_norm();
  if (norm <= max_norm) return;
  const S scale = static_cast<S>(max_norm / norm);
  for (auto& t : tensors_) t.grad *= scale;
}

template <typename S>
void adam_step(std::vector<Tensor<S>>& tensors, uint64_t& step, double lr) {
  require(lr > 0, "learning rate must be positive");
  ++step;
  const S b1 = S(0.9), b2 = S(0.999), eps = S(1e-8);
  const S bc1 = S(1.0 - std::pow(0.9, static_cast<double>(step)));
  const S bc2 = S(1.0 - std::pow(0.999, static_cast<double>(step)));
  for (auto& t : tensors) {
    require(t.grad.rows() == t.value.rows() && t.grad.cols() == t.value.cols(),
            "gradient shape mismatch for tensor " + t.name);
    t.m = b1 * t.m + (S(1) - b1) * t.grad;
    t.v = (b2 * t.v.array() + (S(1) - b2) * t.grad.array().square()).matrix();
    t.value.array() -=
        S(lr) * (t.m.array() / bc1) / ((t.v.array() / bc2).sqrt() + eps);
  }
}

template void adam_step<float>(std::vector<Tensor<float>>&, uint64_t&, double);
template void adam_step<double>(std::vector<Tensor<double>>&, uint64_t&,
                                double);

namespace {

struct ItemRef {
  uint32_t in, tgt;
};

// One training phase: shuffle, bucket by target length, batch, shuffle
// batch order, update. Single-threaded, bitwise reproducible per seed.
void run_epochs(CaeRnn<float>& net, const std::vector<Eigen::MatrixXf>& feats,
                const std::vector<ItemRef>& items, int epochs,
                const TrainConfig& cfg, const char* tag,
                std::vector<EpochStat>* log) {
  require(cfg.batch_size >= 1, "batch_size must be >= 1");
  require(cfg.learning_rate > 0, "learning rate must be positive");
  const size_t n = items.size();
  for (int e = 1; e <= epochs; ++e) {
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(mix_seed(cfg.seed, tag, static_cast<uint64_t>(e)));
    rng.shuffle(order);
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
      return feats[items[a].tgt].rows() < feats[items[b].tgt].rows();
    });
    std::vector<std::vector<uint32_t>> batches;
    for (size_t i = 0; i < n; i += cfg.batch_size) {
      size_t hi = std::min(n, i + static_cast<size_t>(cfg.batch_size));
      batches.emplace_back(order.begin() + i, order.begin() + hi);
    }
    rng.shuffle(batches);

    double epoch_loss = 0.0;
    size_t step = 0;
    for (const auto& batch : batches) {
      ++step;
      net.zero_grads();
      std::vector<std::pair<const Eigen::MatrixXf*, const Eigen::MatrixXf*>>
          refs;
      refs.reserve(batch.size());
      for (uint32_t ix : batch)
        refs.push_back({&feats[items[ix].in], &feats[items[ix].tgt]});
      float sum = net.forward_backward(refs);
      require(std::isfinite(sum),
              std::string("training diverged (non-finite loss) at epoch ") +
                  std::to_string(e) + ", step " + std::to_string(step));
      epoch_loss += sum;
      if (cfg.gradient_clip_norm > 0) net.clip_grads(cfg.gradient_clip_norm);
      net.adam_update(cfg.learning_rate);
    }
    if (log) log->push_back({e, epoch_loss / static_cast<double>(n)});
  }
}

std::vector<Eigen::MatrixXf> collect_features(
    const std::vector<WordToken>& tokens) {
  std::vector<Eigen::MatrixXf> feats(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) feats[i] = tokens[i].features();
  return feats;
}

}  // namespace

CaeRnn<float> pretrain_autoencoder(const ModelDims& dims, const TrainingSet& ts,
                                   const TrainConfig& cfg,
                                   std::vector<EpochStat>* log) {
  require(!ts.tokens.empty(), "pretraining needs a non-empty token list");
  require(cfg.pretrain_epochs >= 0, "epochs must be nonnegative");
  CaeRnn<float> net(dims, cfg.seed);
  std::vector<Eigen::MatrixXf> feats = collect_features(ts.tokens);
  std::vector<ItemRef> items(ts.tokens.size());
  for (uint32_t i = 0; i < items.size(); ++i) items[i] = {i, i};
  run_epochs(net, feats, items, cfg.pretrain_epochs, cfg, "pretrain.epoch",
             log);
  return net;
}

void train_cae(CaeRnn<float>& net, const TrainingSet& ts,
               const TrainConfig& cfg, std::vector<EpochStat>* log) {
  require(!ts.pairs.empty(), "correspondence training needs a non-empty pair list");
  require(cfg.train_epochs >= 0, "epochs must be nonnegative");
  std::vector<Eigen::MatrixXf> feats = collect_features(ts.tokens);
  std::vector<ItemRef> items(ts.pairs.size());
  for (size_t i = 0; i < items.size(); ++i) {
    require(ts.pairs[i].input < ts.tokens.size() &&
                ts.pairs[i].target < ts.tokens.size(),
            "pair index out of range");
    items[i] = {ts.pairs[i].input, ts.pairs[i].target};
  }
  // Fresh optimizer for the correspondence phase.
  for (auto& t : net.tensors()) {
    t.m.setZero();
    t.v.setZero();
  }
  net.set_steps_done(0);
  run_epochs(net, feats, items, cfg.train_epochs, cfg, "train.epoch", log);
}

Embedding embed_token(const CaeRnn<float>& net, const FeatureMatrix& x) {
  return net.encode(x);
}

void save_checkpoint(const std::string& path, const CaeRnn<float>& net) {
  std::ofstream os(path, std::ios::binary);
  require(bool(os), "cannot write checkpoint: " + path);
  os.write("AWEM", 4);
  write_pod<uint32_t>(os, 1);  // version
  const ModelDims& d = net.dims();
  for (int v : {d.feat_dim, d.enc_layers, d.enc_units, d.embed_dim,
                d.dec_layers, d.dec_units})
    write_pod<uint32_t>(os, static_cast<uint32_t>(v));
  write_pod<uint64_t>(os, net.steps_done());
  write_pod<uint32_t>(os, static_cast<uint32_t>(net.tensors().size()));
  for (const auto& t : net.tensors()) {
    write_pod<uint32_t>(os, static_cast<uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    write_pod<uint32_t>(os, static_cast<uint32_t>(t.value.rows()));
    write_pod<uint32_t>(os, static_cast<uint32_t>(t.value.cols()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r)
      for (Eigen::Index c = 0; c < t.value.cols(); ++c)
        write_pod<float>(os, t.value(r, c));
  }
  require(bool(os), "failed writing checkpoint: " + path);
}

CaeRnn<float> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  require(bool(is) && std::memcmp(magic, "AWEM", 4) == 0,
          path + ": bad magic, expected AWEM");
  const uint32_t version = read_pod<uint32_t>(is, path);
  require(version == 1, path + ": unsupported checkpoint version " +
                            std::to_string(version));
  ModelDims d;
  d.feat_dim = static_cast<int>(read_pod<uint32_t>(is, path));
  d.enc_layers = static_cast<int>(read_pod<uint32_t>(is, path));
  d.enc_units = static_cast<int>(read_pod<uint32_t>(is, path));
  d.embed_dim = static_cast<int>(read_pod<uint32_t>(is, path));
  d.dec_layers = static_cast<int>(read_pod<uint32_t>(is, path));
  d.dec_units = static_cast<int>(read_pod<uint32_t>(is, path));
  const uint64_t steps = read_pod<uint64_t>(is, path);
  const uint32_t n_tensors = read_pod<uint32_t>(is, path);

  CaeRnn<float> net(d, 0);
  require(n_tensors == net.tensors().size(),
          path + ": tensor count does not match the architecture");
  for (auto& t : net.tensors()) {
    const uint32_t name_len = read_pod<uint32_t>(is, path);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    require(bool(is) && name == t.name,
            path + ": expected tensor " + t.name + ", found " + name);
    const uint32_t rows = read_pod<uint32_t>(is, path);
    const uint32_t cols = read_pod<uint32_t>(is, path);
    require(rows == static_cast<uint32_t>(t.value.rows()) &&
                cols == static_cast<uint32_t>(t.value.cols()),
            path + ": shape mismatch for tensor " + t.name);
    for (Eigen::Index r = 0; r < t.value.rows(); ++r)
      for (Eigen::Index c = 0; c < t.value.cols(); ++c)
        t.value(r, c) = read_pod<float>(is, path);
    require(t.value.allFinite(), path + ": non-finite value in " + t.name);
  }
  net.set_steps_done(steps);
  return net;
}

template class CaeRnn<float>;
template class CaeRnn<double>;

}  // namespace awe
