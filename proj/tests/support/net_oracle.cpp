#include "support/net_oracle.hpp"

#include <cmath>
#include <vector>

namespace awe_test {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

const Eigen::MatrixXd& get(const std::map<std::string, Eigen::MatrixXd>& p,
                           const std::string& name) {
  return p.at(name);
}

std::vector<double> gru_step(const Eigen::MatrixXd& gwx,
                             const Eigen::MatrixXd& gwh,
                             const Eigen::MatrixXd& gb,
                             const Eigen::MatrixXd& cwx,
                             const Eigen::MatrixXd& cwh,
                             const Eigen::MatrixXd& cb,
                             const std::vector<double>& x,
                             const std::vector<double>& h) {
  const int units = static_cast<int>(gwh.cols());
  const int in_dim = static_cast<int>(gwx.cols());
  std::vector<double> r(units), z(units), c(units), h_next(units);
  for (int i = 0; i < 2 * units; ++i) {
    double pre = gb(i, 0);
    for (int j = 0; j < in_dim; ++j) pre += gwx(i, j) * x[j];
    for (int j = 0; j < units; ++j) pre += gwh(i, j) * h[j];
    if (i < units)
      r[i] = sigmoid(pre);
    else
      z[i - units] = sigmoid(pre);
  }
  for (int i = 0; i < units; ++i) {
    double pre = cb(i, 0);
    for (int j = 0; j < in_dim; ++j) pre += cwx(i, j) * x[j];
    for (int j = 0; j < units; ++j) pre += cwh(i, j) * (r[j] * h[j]);
    c[i] = std::tanh(pre);
  }
  for (int i = 0; i < units; ++i)
    h_next[i] = z[i] * h[i] + (1.0 - z[i]) * c[i];
  return h_next;
}

std::vector<std::vector<double>> run_stack(
    const std::map<std::string, Eigen::MatrixXd>& params,
    const std::string& prefix, int layers,
    const std::vector<std::vector<double>>& inputs) {
  std::vector<std::vector<double>> states(layers);
  for (int l = 0; l < layers; ++l) {
    const int units = static_cast<int>(
        get(params, prefix + std::to_string(l) + ".gates.wh").cols());
    states[l].assign(units, 0.0);
  }
  std::vector<std::vector<double>> top;
  for (const auto& frame : inputs) {
    std::vector<double> in = frame;
    for (int l = 0; l < layers; ++l) {
      const std::string p = prefix + std::to_string(l);
      states[l] = gru_step(get(params, p + ".gates.wx"),
                           get(params, p + ".gates.wh"),
                           get(params, p + ".gates.b"),
                           get(params, p + ".cand.wx"),
                           get(params, p + ".cand.wh"),
                           get(params, p + ".cand.b"), in, states[l]);
      in = states[l];
    }
    top.push_back(in);
  }
  return top;
}

}  // namespace

Eigen::VectorXd reference_encode(
    const std::map<std::string, Eigen::MatrixXd>& params, int enc_layers,
    const Eigen::MatrixXd& x) {
  std::vector<std::vector<double>> frames;
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    std::vector<double> f(x.cols());
    for (Eigen::Index d = 0; d < x.cols(); ++d) f[d] = x(t, d);
    frames.push_back(f);
  }
  const auto top = run_stack(params, "enc.", enc_layers, frames);
  const auto& h = top.back();
  const Eigen::MatrixXd& ew = get(params, "embed.w");
  const Eigen::MatrixXd& eb = get(params, "embed.b");
  Eigen::VectorXd z(ew.rows());
  for (Eigen::Index i = 0; i < ew.rows(); ++i) {
    double v = eb(i, 0);
    for (Eigen::Index j = 0; j < ew.cols(); ++j) v += ew(i, j) * h[j];
    z(i) = v;
  }
  return z;
}

double reference_pair_loss(
    const std::map<std::string, Eigen::MatrixXd>& params, int enc_layers,
    int dec_layers, const Eigen::MatrixXd& x, const Eigen::MatrixXd& target) {
  Eigen::VectorXd z = reference_encode(params, enc_layers, x);
  std::vector<double> zv(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) zv[i] = z(i);
  std::vector<std::vector<double>> dec_inputs(
      static_cast<size_t>(target.rows()), zv);
  const auto top = run_stack(params, "dec.", dec_layers, dec_inputs);

  const Eigen::MatrixXd& ow = get(params, "out.w");
  const Eigen::MatrixXd& ob = get(params, "out.b");
  double loss = 0.0;
  for (Eigen::Index t = 0; t < target.rows(); ++t) {
    for (Eigen::Index d = 0; d < target.cols(); ++d) {
      double y = ob(d, 0);
      for (Eigen::Index j = 0; j < ow.cols(); ++j)
        y += ow(d, j) * top[static_cast<size_t>(t)][static_cast<size_t>(j)];
      const double diff = target(t, d) - y;
      loss += diff * diff;
    }
  }
  return loss;
}

}  // namespace awe_test
