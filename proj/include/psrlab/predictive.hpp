#pragma once

#include "psrlab/core_tests.hpp"
#include "psrlab/model.hpp"
#include "psrlab/trajectory.hpp"

namespace psrlab {

// alpha(s) = P(s_h = s, o_{1:h-1} | do a_{1:h-1}) for a full trajectory
// tau_{h-1} of length h-1 (h <= H).
VectorXd unnormalized_belief(const PomdpModel& model, const Trajectory& tau);

// P(tau_{h-1}, t | do) for a test t at step h, given the unnormalized
// belief at step h. Not valid for the dummy test.
double test_joint(const PomdpModel& model, int h, const VectorXd& alpha, const Test& t);

// [P(tau_{h-1}, t)]_{t in U_h} where h = tau.length() + 1 (h may be H+1).
VectorXd joint_test_vector(const PomdpModel& model, const CoreTestSet& core, const Trajectory& tau);
double history_probability(const PomdpModel& model, const Trajectory& tau);

// q(tau_{h-1}) over U_h; zero when tau is unreachable.
VectorXd predictive_state(const PomdpModel& model, const CoreTestSet& core, const Trajectory& tau);

// D_h = [q(tau_h)]_{tau_h} with columns in trajectory_index order.
MatrixXd predictive_state_matrix(const PomdpModel& model, const CoreTestSet& core, int h);

int psr_rank(const PomdpModel& model, const CoreTestSet& core);

// M_h(t, s) = P(t | s_h = s) for t in U_h.
MatrixXd emission_action_matrix(const PomdpModel& model, const CoreTestSet& core, int h);

}  // namespace psrlab
