#pragma once

#include "psrlab/model.hpp"
#include "psrlab/policy.hpp"
#include "psrlab/trajectory.hpp"

#include <ostream>
#include <utility>
#include <vector>

namespace psrlab {

// Exact law of tau_{h_max}; prob = do_prob * policy_factor entrywise.
struct TrajectoryDist {
    int h_max = 0;
    int O = 0;
    int A = 0;
    std::vector<double> do_prob;
    std::vector<double> policy_factor;
    std::vector<double> prob;

    std::size_t size() const { return prob.size(); }
};

// P(tau_h) = P(o_{1:h} | do(a_{1:h})) for all (OA)^h trajectories.
std::vector<double> do_probabilities(const PomdpModel& model, int h_max);

TrajectoryDist trajectory_distribution(const PomdpModel& model, const Policy& policy, int h_max);
TrajectoryDist trajectory_distribution(const PomdpModel& model, const Policy& policy);
// Joint law from precomputed do-probabilities.
TrajectoryDist combine(const std::vector<double>& do_prob, const Policy& policy, int h_max, int O, int A);

double tv_distance(const TrajectoryDist& d1, const TrajectoryDist& d2);
double hellinger_sq(const TrajectoryDist& d1, const TrajectoryDist& d2);
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);
double hellinger_sq(const std::vector<double>& p, const std::vector<double>& q);

// Expected cumulative reward per trajectory, indexed like do_prob.
std::vector<double> trajectory_rewards(const PomdpModel& model);
double value(const PomdpModel& model, const Policy& policy);

// Exact backward DP over observable histories; ties to the smallest action.
std::pair<Policy, double> optimal_policy(const PomdpModel& model);

Trajectory sample_trajectory(const PomdpModel& model, const Policy& policy, Rng& rng);
Trajectory sample_trajectory(const PomdpModel& model, const Policy& policy, std::uint64_t seed);

void write_csv(const TrajectoryDist& d, std::ostream& out);

}  // namespace psrlab
