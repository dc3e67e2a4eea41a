#pragma once

#include "psrlab/model.hpp"

#include <vector>

namespace psrlab {

// Finite-horizon MDP with Bernoulli rewards r_h ~ Bern(reward_prob[h](s,a))
// for h in 1..H-1. trans[h-1][a](s', s).
struct Mdp {
    int H = 0;
    int S = 0;
    int A = 0;
    VectorXd mu1;
    std::vector<std::vector<MatrixXd>> trans;
    std::vector<MatrixXd> reward_prob;  // S x A, h = 1..H-1
};

// Latent state (m, s, r) indexed (m*S + s)*2 + r, observation (s, r_prev)
// indexed s*2 + r. The POMDP reward at step h is r_{h-1}/(H-1), read off
// the observation, so the cumulative reward is the normalized MDP return
// over steps 1..H-1.
PomdpModel latent_mdp_to_pomdp(const std::vector<Mdp>& mdps, const VectorXd& mixing);

// Optimal normalized return of a single MDP under the same reward scaling.
double mdp_optimal_value(const Mdp& mdp);

// L_h(s): rows (a, r, s') over the l-step window, columns latent index m.
// Only l = 1 (window 2) is supported.
MatrixXd latent_block(const std::vector<Mdp>& mdps, int h, int s);

}  // namespace psrlab
