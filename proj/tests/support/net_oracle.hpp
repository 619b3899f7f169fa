#ifndef AWE_TESTS_SUPPORT_NET_ORACLE_HPP_
#define AWE_TESTS_SUPPORT_NET_ORACLE_HPP_

#include <Eigen/Dense>
#include <map>
#include <string>

namespace awe_test {

// Reference forward pass for the encoder-decoder recurrent net, written as
// straight-line scalar loops over a name -> matrix dictionary. Kept fully
// separate from the library implementation so the two can be compared.
//
// Cell convention: pre = Wg x + Ug h + bg stacks [reset; update]; the
// candidate is tanh(Wc x + Uc (r .* h) + bc); the next state is
// z .* h + (1 - z) .* c; initial states are zero.
Eigen::VectorXd reference_encode(
    const std::map<std::string, Eigen::MatrixXd>& params, int enc_layers,
    const Eigen::MatrixXd& x);

double reference_pair_loss(
    const std::map<std::string, Eigen::MatrixXd>& params, int enc_layers,
    int dec_layers, const Eigen::MatrixXd& x, const Eigen::MatrixXd& target);

}  // namespace awe_test

#endif  // AWE_TESTS_SUPPORT_NET_ORACLE_HPP_
