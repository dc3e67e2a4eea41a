#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace psrlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& m) : Error("capacity", m) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error("validation", m) {}
};
struct RankDeficiencyError : Error {
    RankDeficiencyError(const std::string& m, double sigma_min)
        : Error("rank_deficiency", m), sigma_min(sigma_min) {}
    double sigma_min;
};
struct ConstraintError : Error {
    ConstraintError(const std::string& m, double residual)
        : Error("constraint_violation", m), residual(residual) {}
    double residual;
};
struct DecoderError : Error {
    explicit DecoderError(const std::string& m) : Error("decoder_inconsistent", m) {}
};
struct SolverError : Error {
    explicit SolverError(const std::string& m) : Error("solver", m) {}
};

// Enumeration cap on trajectory tables. PSRLAB_CAP overrides the default 1e6.
std::uint64_t enumeration_cap();
void check_capacity(std::uint64_t n, const std::string& what);

// Integer power with capacity check.
std::uint64_t ipow_checked(std::uint64_t base, int exp, const std::string& what);
std::uint64_t ipow(std::uint64_t base, int exp);

// Counter-based seed derivation: splitmix64 over (root, stream ids).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> ids);
std::uint64_t hash_string(const std::string& s);

// Small deterministic generator with portable uniform draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double uniform();
    int uniform_int(int n);
    double normal();
    int categorical(const std::vector<double>& p);
    int categorical(const VectorXd& p);
    VectorXd dirichlet(int n, double alpha = 1.0);

private:
    double gamma(double alpha);
    std::uint64_t state_;
};

// Numerical rank with threshold rel_tol * sigma_max.
int numerical_rank(const MatrixXd& m, double rel_tol = 1e-8);
MatrixXd pseudo_inverse(const MatrixXd& m, double rel_tol = 1e-12);
double norm_1to1(const MatrixXd& m);

std::string format_double(double x);

}  // namespace psrlab
