#pragma once

#include "psrlab/core_tests.hpp"

#include <vector>

namespace psrlab {

// Future length L with (O*A)^L == n; throws when n is not such a power.
int future_length(std::size_t n, int O, int A);

// max over future policies of sum_tau pi(tau) |b(tau)|, b indexed by
// tau_{h:H} in trajectory_index order. choice[k-1][history_index] is the
// maximizing action at future step k.
struct PiNormResult {
    double value = 0.0;
    std::vector<std::vector<int>> choice;
};
PiNormResult pi_norm_argmax(const VectorXd& b, int O, int A);
double pi_norm(const VectorXd& b, int O, int A);
double pi_norm(const std::vector<double>& b, int O, int A);

// Pi-norm over an arbitrary test set: max over prefix-free subsets and
// policies. With subset given, only those tests count.
double test_set_pi_norm(const VectorXd& v, const std::vector<Test>& tests);
double test_set_pi_norm(const VectorXd& v, const std::vector<Test>& tests, const std::vector<int>& subset);

struct FusedNorm {
    double one_two = 0.0;
    double pi_prime = 0.0;
    double fused = 0.0;
};
FusedNorm fused_norm(const VectorXd& q, const CoreTestSet& core, int h);

}  // namespace psrlab
