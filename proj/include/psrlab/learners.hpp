#pragma once

#include "psrlab/lp.hpp"
#include "psrlab/model_class.hpp"
#include "psrlab/policy.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace psrlab {

// Exact per-member tables over full trajectories tau_H.
struct ClassTables {
    int H = 0;
    int O = 0;
    int A = 0;
    int truth = 0;
    CoreTestSet core;
    std::vector<std::vector<double>> do_prob;
    std::vector<std::vector<double>> reward;
    std::vector<Policy> opt_policy;
    std::vector<double> opt_value;

    explicit ClassTables(const ModelClass& cls);
    int size() const { return static_cast<int>(do_prob.size()); }
    // pi(tau_H) for every full trajectory.
    std::vector<double> factor(const Policy& pi) const;
    double value(int theta, const std::vector<double>& factor) const;
    double hellinger(int theta, int other, const std::vector<double>& factor) const;
    // V_star - V_{truth}(pi)
    double suboptimality(const std::vector<double>& factor) const;
};

// Dominating likelihoods P~ over members theta0 (indices into the class).
struct OptimisticCover {
    std::vector<int> members;
    std::vector<std::vector<double>> likelihood;
    double rho = 0.0;
};
OptimisticCover exact_cover(const ClassTables& tables);
// Max violation of pointwise domination and of ||P~ - P||_1 <= rho^2.
double cover_violation(const OptimisticCover& cover, const ClassTables& tables);

struct LogLikelihood {
    double model_log = 0.0;   // log P_theta(tau), floored at log(1e-300)
    double policy_log = 0.0;  // log pi(tau), common to all models
    bool flagged = false;     // P_theta(tau) == 0
    double total() const { return model_log + policy_log; }
};
LogLikelihood log_likelihood(const PomdpModel& model, const Policy& policy, const Trajectory& tau);
double floored_log(double p, bool* flagged);

struct RunRecord {
    int iteration = 0;
    int chosen = -1;
    std::string policy;
    std::string trajectory;
    int set_size = 0;
    bool truth_in_set = true;
    double truth_mass = 0.0;
    double entropy = 0.0;
    double suboptimality = 0.0;
    double running_mean = 0.0;
    double extra = 0.0;
};

struct RunLog {
    std::string algorithm;
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::vector<RunRecord> records;
    std::vector<std::vector<int>> confidence_sets;
    std::vector<std::vector<double>> posteriors;
    nlohmann::json summary;

    void write_csv(std::ostream& out) const;
    nlohmann::json to_json() const;
};

struct LearnResult {
    Policy output;
    double output_suboptimality = 0.0;
    RunLog log;
};

// delta enters beta = 2 log(|Theta| / delta).
double default_beta(int class_size, double delta = 0.01);

LearnResult omle(const ModelClass& cls, int K, double beta, std::uint64_t seed);

struct MleCheck {
    std::vector<double> per_k;  // max over Theta^k of the Hellinger sum, minus 2 beta
    double max_slack = 0.0;
};
MleCheck mle_hellinger_check(const RunLog& log, const ModelClass& cls, double beta);

struct PolicyPool {
    std::vector<Policy> policies;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> factors;
    int size() const { return static_cast<int>(policies.size()); }
};
// pi_theta, phi_h o pi_theta and phi o pi_theta for the given members,
// with duplicates (equal trajectory factors) removed.
PolicyPool build_policy_pool(const ClassTables& tables, const std::vector<int>& members);

enum class SaddleMethod { Exact, ExponentiatedGradient };
struct SaddleConfig {
    SaddleMethod method = SaddleMethod::Exact;
    double step_scale = 0.1;
    int max_iterations = 5000;
    double tolerance = 1e-4;
};
struct SaddleResult {
    VectorXd p_exp;
    VectorXd p_out;
    double value = 0.0;
    double gap = 0.0;
    int iterations = 0;
    bool converged = true;
};

// hell[j][theta][other] = D_H^2(P^{pi_j}_theta, P^{pi_j}_other)
using HellingerTable = std::vector<std::vector<std::vector<double>>>;
HellingerTable hellinger_table(const ClassTables& tables, const PolicyPool& pool);

SaddleResult edec_saddle(const ClassTables& tables, const VectorXd& mu, double gamma, const PolicyPool& pool,
                         const SaddleConfig& cfg = {});
SaddleResult edec_saddle(const ClassTables& tables, const VectorXd& mu, double gamma, const PolicyPool& pool,
                         const HellingerTable& hell, const SaddleConfig& cfg = {});
// Objective value at a given feasible (p_exp, p_out).
double edec_objective(const ClassTables& tables, const VectorXd& mu, double gamma, const PolicyPool& pool,
                      const VectorXd& p_exp, const VectorXd& p_out);

LearnResult explorative_e2d(const ModelClass& cls, int T, double gamma, double eta, std::uint64_t seed,
                            const SaddleConfig& cfg = {});
LearnResult mops(const ModelClass& cls, int T, double gamma, double eta, std::uint64_t seed);

// sup over policies of D_TV(P^pi_p, P^pi_q) from do-probabilities.
double sup_tv(const std::vector<double>& p, const std::vector<double>& q, int O, int A);

// Cuts (theta, TV coefficients over mu_out), kept across episodes.
struct RfCuts {
    std::vector<int> theta;
    std::vector<VectorXd> tv;
    // false when the cut is already present
    bool add(const ClassTables& tables, int theta, const std::vector<std::vector<int>>& choice);
    // best responses to the uniform mixture, one per theta
    void seed_uniform(const ClassTables& tables);
};
struct RfSaddle {
    VectorXd p_exp;
    VectorXd mu_out;
    double value = 0.0;     // exact objective at (p_exp, mu_out)
    double lp_value = 0.0;  // value of the restricted game
    int rounds = 0;
};
// min over (p_exp, mu_out) of max_theta [sup_pi E_{mu_out} D_TV - gamma E_{p_exp, mu} D_H^2]
// by cutting planes over deterministic policies.
RfSaddle rf_saddle(const ClassTables& tables, const VectorXd& mu, double gamma, const PolicyPool& pool,
                   const HellingerTable& hell, RfCuts& cuts, int max_rounds = 500);
double rf_objective(const ClassTables& tables, const VectorXd& mu, double gamma, const HellingerTable& hell,
                    const VectorXd& p_exp, const VectorXd& mu_out);

struct RfResult {
    int estimate = 0;
    double estimation_error = 0.0;
    VectorXd mu_out;
    RunLog log;
};
RfResult rf_e2d(const ModelClass& cls, int T, double gamma, double eta, std::uint64_t seed);

}  // namespace psrlab
