#ifndef AWE_TESTS_SUPPORT_MFCC_ORACLE_HPP_
#define AWE_TESTS_SUPPORT_MFCC_ORACLE_HPP_

#include <Eigen/Dense>
#include <vector>

namespace awe_test {

// Reference MFCC path, coded independently of the library: naive O(N^2)
// DFT, per-bin triangle weights recomputed from the formula, direct DCT
// loops. Same documented parametrization (pre-emphasis 0.97, Hamming,
// 23 mel filters 20 Hz..min(7800, rate/2-100), orthonormal DCT-II, lifter
// 22, log floor 1e-10, C0 = log energy).
Eigen::MatrixXd reference_mfcc(const std::vector<double>& samples, int rate);

}  // namespace awe_test

#endif  // AWE_TESTS_SUPPORT_MFCC_ORACLE_HPP_
