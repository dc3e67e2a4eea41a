#pragma once

#include "psrlab/common.hpp"

namespace psrlab {

// minimize c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0
struct LinearProgram {
    VectorXd c;
    MatrixXd a_ub;
    VectorXd b_ub;
    MatrixXd a_eq;
    VectorXd b_eq;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    VectorXd x;
    double objective = 0.0;
    int iterations = 0;
};

// Dense two-phase tableau simplex. Dantzig pricing, Bland's rule after
// a run of degenerate pivots.
LpResult solve_lp(const LinearProgram& lp, int max_iterations = 200000);

// min over x in a product of simplices (sizes given by blocks) of
// max_i (M x)_i. y is the maximizing mixture over rows from the dual.
struct BlockGameSolution {
    VectorXd x;
    VectorXd y;
    double value = 0.0;
    double dual_value = 0.0;
};
BlockGameSolution solve_block_game(const MatrixXd& m, const std::vector<int>& blocks);

// Mirror-prox exponentiated gradient for the same game, step
// step_scale / (max M - min M). gap is the duality gap of the averaged
// iterates at exit.
struct EgReport {
    int iterations = 0;
    double gap = 0.0;
    bool converged = false;
};
BlockGameSolution solve_block_game_eg(const MatrixXd& m, const std::vector<int>& blocks, double step_scale,
                                      int max_iterations, double tolerance, EgReport* report);
// max_i (M x)_i minus the best response of x to y.
double block_game_gap(const MatrixXd& m, const std::vector<int>& blocks, const VectorXd& x, const VectorXd& y);

}  // namespace psrlab
