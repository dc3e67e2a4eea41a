#pragma once

#include "psrlab/brep.hpp"
#include "psrlab/norms.hpp"
#include "psrlab/policy.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace psrlab {

// Bound on Lambda from the construction. certified: lambda_hi <= value;
// consistent: lambda_lo <= value.
struct BoundCheck {
    std::string name;
    double value = 0.0;
    bool certified = false;
    bool consistent = false;
};

struct StabilityReport {
    std::vector<double> step_norms;  // L_h, exact l1 -> Pi operator norms
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    bool exact = false;
    double r_b = 1.0;
    double weak_ratio = 0.0;
    int weak_violations = 0;
    int u_a = 1;
    int samples = 0;
    std::vector<BoundCheck> bounds;
};

StabilityReport certify_stability(const BRep& b, int n_samples, std::uint64_t seed);
nlohmann::json report_to_json(const StabilityReport& r);
std::string report_table(const StabilityReport& r);

// ||B_{H:h} q||_Pi / ||q||_*
double fused_ratio(const BRep& b, int h, const VectorXd& q);
// ||B_{H:h}(p - q)||_Pi / (sqrt(2(||p||_Pi + ||q||_Pi)) ||sqrt p - sqrt q||_2), 0 when p == q.
double weak_ratio(const BRep& b, int h, const VectorXd& p, const VectorXd& q);

struct WeakPair {
    int h = 1;
    VectorXd p;
    VectorXd q;
};
struct WeakStabilityResult {
    double worst_ratio = 0.0;
    double worst_fused_ratio = 0.0;
    int violations = 0;  // samples with ratio > lambda_claim + 1e-9
    int samples = 0;
};
// Dirichlet pairs, their signed-part decompositions, and caller pairs.
WeakStabilityResult check_weak_stability(const BRep& b, int n_samples, std::uint64_t seed, double lambda_claim,
                                         const std::vector<WeakPair>& extra = {});

// G(o, a) = ||B^theta_{H:h+1} (B^theta_h(o,a) - B^bar_h(o,a)) q||_Pi.
MatrixXd b_error_terms(const BRep& theta, const BRep& bar, int h, const VectorXd& q);
// Half the best one-step rule, taken greedily per observation.
double b_error_step(const BRep& theta, const BRep& bar, int h, const VectorXd& q);

struct BErrorReport {
    double e0 = 0.0;
    std::vector<std::vector<double>> per_history;  // [h-1][index of tau_{h-1}]
    std::vector<double> expected;                  // E_{bar, pi}[E_h]
    std::vector<double> expected_sq;               // E_{bar, pi}[E_h^2]
    double total() const;
};
BErrorReport b_errors(const BRep& theta, const BRep& bar, const PomdpModel& model_bar, const Policy& policy);

struct HellingerSlack {
    int h = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};
// Slacks for h = 0..H with the stability parameter lambda of theta.
std::vector<HellingerSlack> hellinger_domination_check(const BRep& theta, const BRep& bar, const PomdpModel& model_bar,
                                                       const Policy& policy, double lambda);

struct WellConditioning {
    double gamma1_inv = 0.0;
    double gamma2_inv = 0.0;
};
WellConditioning well_conditioned_check(const BRep& b);

}  // namespace psrlab
