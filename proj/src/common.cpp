#include "psrlab/common.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace psrlab {

std::uint64_t enumeration_cap() {
    const std::uint64_t cap = [] {
        const char* env = std::getenv("PSRLAB_CAP");
        if (env != nullptr && *env != '\0') {
            char* end = nullptr;
            double v = std::strtod(env, &end);
            if (end != env && v >= 1.0) return static_cast<std::uint64_t>(v);
        }
        return static_cast<std::uint64_t>(1000000);
    }();
    return cap;
}

void check_capacity(std::uint64_t n, const std::string& what) {
    if (n > enumeration_cap()) {
        throw CapacityError(what + " needs " + std::to_string(n) +
                            " entries, cap is " + std::to_string(enumeration_cap()));
    }
}

std::uint64_t ipow(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

std::uint64_t ipow_checked(std::uint64_t base, int exp, const std::string& what) {
    std::uint64_t r = 1;
    const std::uint64_t cap = enumeration_cap();
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > cap / base + 1) {
            throw CapacityError(what + " exceeds enumeration cap " + std::to_string(cap));
        }
        r *= base;
    }
    check_capacity(r, what);
    return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = splitmix64(root);
    for (auto id : ids) s = splitmix64(s ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    return s;
}

std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// xoshiro-style mixing on a splitmix stream is enough here.
std::uint64_t Rng::next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

int Rng::uniform_int(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

double Rng::normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int Rng::categorical(const std::vector<double>& p) {
    double u = uniform();
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last = static_cast<int>(i);
        if (u < acc) return last;
    }
    return last < 0 ? 0 : last;
}

int Rng::categorical(const VectorXd& p) {
    return categorical(std::vector<double>(p.data(), p.data() + p.size()));
}

double Rng::gamma(double alpha) {
    if (alpha < 1.0) {
        double u = uniform();
        return gamma(1.0 + alpha) * std::pow(u, 1.0 / alpha);
    }
    // Marsaglia-Tsang
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

VectorXd Rng::dirichlet(int n, double alpha) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = gamma(alpha);
    double s = v.sum();
    if (s <= 0.0) return VectorXd::Constant(n, 1.0 / n);
    return v / s;
}

int numerical_rank(const MatrixXd& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return 0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * sv(0)) ++r;
    return r;
}

MatrixXd pseudo_inverse(const MatrixXd& m, double rel_tol) {
    Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    VectorXd inv = VectorXd::Zero(sv.size());
    double thresh = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > thresh) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double norm_1to1(const MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace psrlab
