#pragma once

#include "psrlab/common.hpp"
#include "psrlab/learners.hpp"
#include "psrlab/model_class.hpp"

#include <json.hpp>

#include <vector>

namespace psrlab {

// f(x) = max_r sum_j |<x, y_{j,r}>| given either explicitly or as
// scale * ||Y x||_Pi over a future tree of O x A branching.
struct RuleFunction {
    std::vector<std::vector<VectorXd>> y;  // y[r][j]
    MatrixXd tree;                         // used when y is empty
    double scale = 1.0;
    int O = 0;
    int A = 0;

    double operator()(const VectorXd& x) const;
    // max_r sum_j ||y_{j,r}||_2
    double radius() const;
};

struct EluderInstance {
    int d = 0;
    std::vector<std::vector<VectorXd>> x;  // x[k][i]
    std::vector<VectorXd> q;               // q[k] over i
    std::vector<RuleFunction> f;           // f[k]

    int size() const { return static_cast<int>(f.size()); }
};

struct CheckResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs, minimized over prefixes where applicable
};

// beta_k = sum_{t<k} E_{q_t}[f_k(x_t)^2] computed from the instance.
std::vector<double> eluder_betas(const EluderInstance& inst);
// Worst prefix k; lhs/rhs are reported at that k.
CheckResult eluder_l2_check(const EluderInstance& inst, double M);

CheckResult elliptical_potential_check(const std::vector<MatrixXd>& phis, double lambda0);

struct DecouplingInstance {
    std::vector<VectorXd> x;          // x_i
    std::vector<RuleFunction> f;      // f_theta
    std::vector<VectorXd> q;          // q_theta over i
    VectorXd mu;                      // over theta
};
CheckResult decoupling_check(const DecouplingInstance& inst);

struct Spanner {
    MatrixXd F;                       // n x d
    std::vector<VectorXd> v;          // coefficients, x_i = F v_i
    std::vector<int> chosen;          // indices of xs forming the nonzero columns
    double max_coef = 0.0;            // max_i ||v_i||_inf, at most 2
    double residual = 0.0;            // max_i ||x_i - F v_i||_inf
    bool relaxed = true;              // factor-2 approximate spanner
};
Spanner barycentric_spanner(const std::vector<VectorXd>& xs, int d);

// Random instances for the falsification suites.
EluderInstance random_eluder_instance(Rng& rng);
std::vector<MatrixXd> random_psd_sequence(Rng& rng);
DecouplingInstance random_decoupling_instance(Rng& rng);

// x = predictive states of the truth at step h, f_k from the B-operator
// differences of the OMLE iterate theta^k, q_k the law of tau_{h-1}
// under the truth and pi^k.
EluderInstance eluder_from_omle(const ModelClass& cls, const RunLog& log, int h);

}  // namespace psrlab
