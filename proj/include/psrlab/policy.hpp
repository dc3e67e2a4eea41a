#pragma once

#include "psrlab/common.hpp"
#include "psrlab/trajectory.hpp"

#include <memory>
#include <string>
#include <vector>

namespace psrlab {

class CoreTestSet;

// History-dependent policy over horizon H. Tables are indexed per step h
// (1-based) by history_index(tau_{h-1}, o_h).
class Policy {
public:
    enum class Kind { DeterministicTable, StochasticTable, Mixture, Composed };

    static Policy deterministic(int H, int O, int A, std::vector<std::vector<int>> table);
    static Policy stochastic(int H, int O, int A, std::vector<std::vector<std::vector<double>>> table);
    static Policy uniform(int H, int O, int A);
    static Policy mixture(std::vector<double> weights, std::vector<Policy> components);
    // base through step h-1, uniform at step h (if h >= 1), then one of
    // the action sequences (drawn uniformly per episode) from step h+1,
    // uniform afterwards.
    static Policy composed(const Policy& base, int h, std::vector<std::vector<int>> sequences);

    Kind kind() const { return kind_; }
    int horizon() const { return H_; }
    int num_obs() const { return O_; }
    int num_actions() const { return A_; }

    // pi(tau) over the first t.length() steps.
    double factor(const Trajectory& t) const;

    // Behavioral probability of action a at step h given the history.
    // Only for table kinds and single-sequence composed policies.
    double action_prob(int h, const Trajectory& history, int a) const;
    bool is_behavioral() const;

    // Draws the per-episode randomness (mixture component, action
    // sequence) and returns a behavioral policy.
    Policy realize(Rng& rng) const;
    int sample_action(int h, const Trajectory& history, Rng& rng) const;

    const std::vector<std::vector<int>>& det_table() const { return det_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Policy>& components() const { return components_; }
    const Policy& base() const { return *base_; }
    int compose_step() const { return compose_h_; }
    const std::vector<std::vector<int>>& sequences() const { return sequences_; }

    std::string describe() const;

private:
    Kind kind_ = Kind::DeterministicTable;
    int H_ = 0;
    int O_ = 0;
    int A_ = 0;
    std::vector<std::vector<int>> det_;
    std::vector<std::vector<std::vector<double>>> stoch_;
    std::vector<double> weights_;
    std::vector<Policy> components_;
    std::shared_ptr<const Policy> base_;
    int compose_h_ = 0;
    std::vector<std::vector<int>> sequences_;
};

// pi o_h Unif(A) o_{h+1} Unif(U_{A,h+1}), h in {0..H-1}.
Policy compose_exploration(const Policy& policy, int h, const CoreTestSet& core);
// (1/H) sum_{h=0}^{H-1} compose_exploration(policy, h).
Policy exploration_mixture(const Policy& policy, const CoreTestSet& core);

}  // namespace psrlab
