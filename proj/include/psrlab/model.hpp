#pragma once

#include "psrlab/common.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace psrlab {

// Tabular POMDP. Steps are 1-based in the accessors; storage is 0-based.
// trans(h, a)(s', s) = T_h(s'|s,a) for h in 1..H-1
// emit(h)(o, s)      = O_h(o|s)     for h in 1..H
// reward(h)(o, a)    = r_h(o,a)     for h in 1..H
struct PomdpModel {
    int H = 0;
    int S = 0;
    int O = 0;
    int A = 0;
    std::vector<std::vector<MatrixXd>> transitions;
    std::vector<MatrixXd> emissions;
    VectorXd mu1;
    std::vector<MatrixXd> rewards;

    const MatrixXd& trans(int h, int a) const { return transitions[h - 1][a]; }
    const MatrixXd& emit(int h) const { return emissions[h - 1]; }
    const MatrixXd& reward(int h) const { return rewards[h - 1]; }

    // Throws ValidationError on any broken invariant.
    void validate() const;
    // Max over positive-probability trajectories of the cumulative reward.
    double max_cumulative_reward() const;
};

PomdpModel make_model(int H, int S, int O, int A);

nlohmann::json model_to_json(const PomdpModel& m);
PomdpModel model_from_json(const nlohmann::json& j);
PomdpModel load_model(const std::string& path);
void save_model(const PomdpModel& m, const std::string& path);

nlohmann::json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace psrlab
