#pragma once

#include "psrlab/fixtures.hpp"
#include "psrlab/learners.hpp"
#include "psrlab/oracles.hpp"
#include "psrlab/stability.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace psrlab {

struct SuiteResult {
    std::string name;
    int instances = 0;
    int failures = 0;
    double worst_slack = 0.0;
    nlohmann::json details = nlohmann::json::object();

    bool passed() const { return failures == 0; }
    nlohmann::json to_json() const;
};

// Constructor x fixture grid. A constructor whose precondition fails must
// raise a precondition error; a built representation must validate.
SuiteResult suite_brep(double tol = 1e-9);
// DP against exhaustive deterministic future policies.
SuiteResult suite_pi_norm(std::uint64_t seed, int n);
SuiteResult suite_stability(std::uint64_t seed);

struct Triple {
    PomdpModel theta;
    PomdpModel bar;
    Policy policy;
};
// FIX-NOISY-sized revealing pair with a random history-dependent policy.
Triple random_triple(std::uint64_t seed);
SuiteResult suite_decomposition(std::uint64_t seed, int n);
SuiteResult suite_hellinger(std::uint64_t seed, int n);
// Eluder, elliptical potential, decoupling and spanner suites.
SuiteResult suite_eluder(std::uint64_t seed, int n);
SuiteResult suite_elliptical(std::uint64_t seed, int n);
SuiteResult suite_decoupling(std::uint64_t seed, int n);
SuiteResult suite_spanner(std::uint64_t seed, int n);

// 9 d A U_A Lambda_hi^2 H^2 / gamma over the class.
struct EdecBound {
    int d = 0;
    int u_a = 1;
    double lambda_hi = 0.0;
    double coefficient = 0.0;  // bound * gamma
};
EdecBound edec_bound(const ModelClass& cls);

struct ExperimentConfig {
    std::string command;  // certify | learn | verify | eluder-suite
    std::string model_path;
    std::string class_path;
    std::string construct = "revealing";
    int m = 1;
    std::string algorithm = "omle";
    int T = 100;
    double gamma = 10.0;
    double beta = -1.0;  // negative: 2 log(|Theta| / 0.01)
    double eta = -1.0;   // negative: algorithm default
    std::string suite;
    int instances = 0;   // 0: suite default
    std::vector<std::uint64_t> seeds{0};
    std::string out_dir = "runs";
    std::uint64_t cap = 0;  // 0: keep the current enumeration cap

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    void validate() const;
    std::string hash() const;
};

ExperimentConfig load_config(const std::string& path);
double default_eta(const std::string& algorithm);

struct ExperimentOutcome {
    int exit_code = 0;
    std::filesystem::path directory;
    nlohmann::json summary;
};

// Writes artifacts under out_dir/<command>-<alg|suite>-<hash>/.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

nlohmann::json error_json(const std::exception& e);

double mean(const std::vector<double>& v);
double standard_error(const std::vector<double>& v);

}  // namespace psrlab
