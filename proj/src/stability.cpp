#include "psrlab/stability.hpp"

#include "psrlab/distribution.hpp"
#include "psrlab/predictive.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace psrlab {

namespace {

std::vector<MatrixXd> all_forward(const BRep& b) {
    std::vector<MatrixXd> w;
    for (int h = 1; h <= b.H() + 1; ++h) w.push_back(forward_operator(b, h));
    return w;
}

double weak_ratio_with(const MatrixXd& w, const BRep& b, int h, const VectorXd& p, const VectorXd& q) {
    const VectorXd d = p - q;
    if (d.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    const double num = pi_norm(VectorXd(w * d), b.O(), b.A());
    const auto& tests = b.core.tests(h);
    const double mass = test_set_pi_norm(p, tests) + test_set_pi_norm(q, tests);
    const double l2 = (p.cwiseSqrt() - q.cwiseSqrt()).norm();
    const double den = std::sqrt(2.0 * mass) * l2;
    return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

double fused_ratio_with(const MatrixXd& w, const BRep& b, int h, const VectorXd& q) {
    const double den = fused_norm(q, b.core, h).fused;
    if (den == 0.0) return 0.0;
    return pi_norm(VectorXd(w * q), b.O(), b.A()) / den;
}

void add_bound(StabilityReport& r, const std::string& name, double value) {
    BoundCheck c;
    c.name = name;
    c.value = value;
    c.certified = r.lambda_hi <= value + 1e-9;
    c.consistent = r.lambda_lo <= value + 1e-9;
    r.bounds.push_back(c);
}

}  // namespace

double fused_ratio(const BRep& b, int h, const VectorXd& q) { return fused_ratio_with(forward_operator(b, h), b, h, q); }

double weak_ratio(const BRep& b, int h, const VectorXd& p, const VectorXd& q) {
    return weak_ratio_with(forward_operator(b, h), b, h, p, q);
}

StabilityReport certify_stability(const BRep& b, int n_samples, std::uint64_t seed) {
    const int H = b.H();
    StabilityReport r;
    r.u_a = b.core.max_action_seqs();
    const auto w = all_forward(b);
    double lmax = 0.0;
    for (int h = 1; h <= H; ++h) {
        const MatrixXd& wh = w[h - 1];
        double lh = 0.0;
        for (int t = 0; t < wh.cols(); ++t) lh = std::max(lh, pi_norm(VectorXd(wh.col(t)), b.O(), b.A()));
        r.step_norms.push_back(lh);
        lmax = std::max(lmax, lh);
    }
    double sampled = 0.0;
    Rng rng(derive_seed(seed, {1}));
    for (int i = 0; i < n_samples; ++i) {
        const int h = 1 + rng.uniform_int(H);
        const int n = b.core.size(h);
        VectorXd q(n);
        if (i % 2 == 0) {
            for (int k = 0; k < n; ++k) q(k) = rng.normal();
        } else {
            // Sign patterns concentrate on the fused-ball extreme directions.
            for (int k = 0; k < n; ++k) q(k) = rng.uniform() < 0.5 ? -1.0 : 1.0;
            q(rng.uniform_int(n)) *= 1.0 + 4.0 * rng.uniform();
        }
        sampled = std::max(sampled, fused_ratio_with(w[h - 1], b, h, q));
    }
    r.samples = n_samples;
    r.lambda_lo = std::max(lmax, sampled);
    r.lambda_hi = std::sqrt(static_cast<double>(r.u_a)) * lmax;
    r.exact = r.u_a == 1 || r.lambda_hi - r.lambda_lo <= 1e-12;

    double rb = 1.0;
    for (int h = 1; h <= H; ++h) {
        VectorXd cols = VectorXd::Zero(b.core.size(h));
        for (const auto& m : b.ops[h - 1]) cols += m.cwiseAbs().colwise().sum().transpose();
        if (cols.size() > 0) rb = std::max(rb, cols.maxCoeff());
    }
    r.r_b = rb;

    WeakStabilityResult weak = check_weak_stability(b, n_samples, derive_seed(seed, {2}), r.lambda_hi);
    r.weak_ratio = weak.worst_ratio;
    r.weak_violations = weak.violations;

    auto diag = [&](const char* k) {
        auto it = b.diagnostics.find(k);
        return it == b.diagnostics.end() ? std::optional<double>() : std::optional<double>(it->second);
    };
    if (b.provenance == "revealing" && diag("alpha_rev") && diag("num_states") && *diag("alpha_rev") > 0.0)
        add_bound(r, "sqrt_S_over_alpha_rev", std::sqrt(*diag("num_states")) / *diag("alpha_rev"));
    if (b.provenance == "future-sufficient" && diag("nu") && diag("window"))
        add_bound(r, "sqrt_A_pow_m_minus_1_nu",
                  std::sqrt(std::pow(static_cast<double>(b.A()), *diag("window") - 1.0)) * *diag("nu"));
    if (b.provenance == "decodable") add_bound(r, "one", 1.0);
    if (b.provenance == "regular-psr" && diag("alpha_psr_inv"))
        add_bound(r, "sqrt_UA_alpha_psr_inv", std::sqrt(static_cast<double>(r.u_a)) * *diag("alpha_psr_inv"));
    return r;
}

nlohmann::json report_to_json(const StabilityReport& r) {
    nlohmann::json j;
    j["step_norms"] = r.step_norms;
    j["lambda_lo"] = r.lambda_lo;
    j["lambda_hi"] = r.lambda_hi;
    j["exact"] = r.exact;
    j["r_b"] = r.r_b;
    j["weak_ratio"] = r.weak_ratio;
    j["weak_violations"] = r.weak_violations;
    j["u_a"] = r.u_a;
    j["samples"] = r.samples;
    j["bounds"] = nlohmann::json::array();
    for (const auto& c : r.bounds)
        j["bounds"].push_back({{"name", c.name}, {"value", c.value}, {"certified", c.certified},
                               {"consistent", c.consistent}});
    return j;
}

std::string report_table(const StabilityReport& r) {
    std::ostringstream out;
    out << "h  L_h\n";
    for (std::size_t h = 0; h < r.step_norms.size(); ++h) out << h + 1 << "  " << format_double(r.step_norms[h]) << "\n";
    out << "lambda  [" << format_double(r.lambda_lo) << ", " << format_double(r.lambda_hi) << "]"
        << (r.exact ? " exact" : "") << "\n";
    out << "U_A     " << r.u_a << "\n";
    out << "R_B     " << format_double(r.r_b) << "\n";
    out << "weak    " << format_double(r.weak_ratio) << " (" << r.weak_violations << " violations)\n";
    for (const auto& c : r.bounds) {
        out << "bound " << c.name << " = " << format_double(c.value) << (c.certified ? " certified" : "")
            << (c.consistent ? " consistent" : " violated") << "\n";
    }
    return out.str();
}

WeakStabilityResult check_weak_stability(const BRep& b, int n_samples, std::uint64_t seed, double lambda_claim,
                                         const std::vector<WeakPair>& extra) {
    const auto w = all_forward(b);
    WeakStabilityResult res;
    auto record = [&](int h, const VectorXd& p, const VectorXd& q) {
        const double r = weak_ratio_with(w[h - 1], b, h, p, q);
        res.worst_ratio = std::max(res.worst_ratio, r);
        if (r > lambda_claim + 1e-9) ++res.violations;
        ++res.samples;
    };
    auto visit = [&](int h, const VectorXd& p, const VectorXd& q) {
        record(h, p, q);
        const VectorXd d = p - q;
        record(h, d.cwiseMax(0.0), (-d).cwiseMax(0.0));
        res.worst_fused_ratio = std::max(res.worst_fused_ratio, fused_ratio_with(w[h - 1], b, h, d));
    };
    Rng rng(seed);
    for (int i = 0; i < n_samples; ++i) {
        const int h = 1 + rng.uniform_int(b.H());
        const int n = b.core.size(h);
        VectorXd p = (0.1 + rng.uniform()) * rng.dirichlet(n, 0.5);
        VectorXd q;
        if (i % 3 == 2) {
            q = p;
            for (int k = 0; k < n; ++k) q(k) *= std::exp(0.2 * rng.normal());
        } else {
            q = (0.1 + rng.uniform()) * rng.dirichlet(n, 0.5);
        }
        visit(h, p, q);
    }
    for (const auto& pr : extra) visit(pr.h, pr.p, pr.q);
    return res;
}

MatrixXd b_error_terms(const BRep& theta, const BRep& bar, int h, const VectorXd& q) {
    const MatrixXd w = forward_operator(theta, h + 1);
    MatrixXd g(theta.O(), theta.A());
    for (int o = 0; o < theta.O(); ++o)
        for (int a = 0; a < theta.A(); ++a)
            g(o, a) = pi_norm(VectorXd(w * ((theta.op(h, o, a) - bar.op(h, o, a)) * q)), theta.O(), theta.A());
    return g;
}

double b_error_step(const BRep& theta, const BRep& bar, int h, const VectorXd& q) {
    return 0.5 * b_error_terms(theta, bar, h, q).rowwise().maxCoeff().sum();
}

double BErrorReport::total() const {
    double s = e0;
    for (double e : expected) s += e;
    return s;
}

BErrorReport b_errors(const BRep& theta, const BRep& bar, const PomdpModel& model_bar, const Policy& policy) {
    const int H = theta.H();
    const int O = theta.O();
    const int A = theta.A();
    if (bar.H() != H || bar.O() != O || bar.A() != A) throw ValidationError("b_errors needs matching shapes");
    BErrorReport r;
    r.e0 = 0.5 * pi_norm(VectorXd(forward_operator(theta, 1) * (theta.q0 - bar.q0)), O, A);
    for (int h = 1; h <= H; ++h) {
        const MatrixXd w = forward_operator(theta, h + 1);
        const TrajectoryDist dist = trajectory_distribution(model_bar, policy, h - 1);
        std::vector<double> vals(dist.size(), 0.0);
        double e = 0.0;
        double e2 = 0.0;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (dist.do_prob[i] <= 0.0) continue;
            const Trajectory tau = trajectory_from_index(i, h - 1, O, A);
            const VectorXd q = predictive_state(model_bar, bar.core, tau);
            double s = 0.0;
            for (int o = 0; o < O; ++o) {
                double best = 0.0;
                for (int a = 0; a < A; ++a)
                    best = std::max(best, pi_norm(VectorXd(w * ((theta.op(h, o, a) - bar.op(h, o, a)) * q)), O, A));
                s += best;
            }
            vals[i] = 0.5 * s;
            e += dist.prob[i] * vals[i];
            e2 += dist.prob[i] * vals[i] * vals[i];
        }
        r.per_history.push_back(std::move(vals));
        r.expected.push_back(e);
        r.expected_sq.push_back(e2);
    }
    return r;
}

std::vector<HellingerSlack> hellinger_domination_check(const BRep& theta, const BRep& bar, const PomdpModel& model_bar,
                                                       const Policy& policy, double lambda) {
    const int H = theta.H();
    const int O = theta.O();
    const int A = theta.A();
    const double ua = theta.core.max_action_seqs();
    const BErrorReport err = b_errors(theta, bar, model_bar, policy);
    const std::vector<double> p_theta = brep_do_probabilities(theta);
    const std::vector<double> p_bar = do_probabilities(model_bar, H);
    std::vector<double> dh(H);
    for (int h = 0; h < H; ++h) {
        const Policy explore = compose_exploration(policy, h, theta.core);
        dh[h] = hellinger_sq(combine(p_theta, explore, H, O, A), combine(p_bar, explore, H, O, A));
    }
    std::vector<HellingerSlack> out;
    auto push = [&](int h, double lhs, double rhs) { out.push_back({h, lhs, rhs, rhs - lhs}); };
    push(0, err.e0 * err.e0, lambda * lambda * ua * dh[0]);
    for (int h = 1; h <= H - 1; ++h)
        push(h, err.expected_sq[h - 1], 4.0 * lambda * lambda * A * ua * (dh[h] + dh[h - 1]));
    push(H, err.expected_sq[H - 1], 2.0 * (lambda + 1.0) * (lambda + 1.0) * dh[H - 1]);
    return out;
}

WellConditioning well_conditioned_check(const BRep& b) {
    WellConditioning wc;
    for (int h = 1; h <= b.H(); ++h) {
        const MatrixXd w = forward_operator(b, h);
        for (int t = 0; t < w.cols(); ++t) {
            wc.gamma1_inv = std::max(wc.gamma1_inv, pi_norm(VectorXd(w.col(t)), b.O(), b.A()));
            double s = 0.0;
            for (int o = 0; o < b.O(); ++o) {
                double best = 0.0;
                for (int a = 0; a < b.A(); ++a) best = std::max(best, b.op(h, o, a).col(t).cwiseAbs().sum());
                s += best;
            }
            wc.gamma2_inv = std::max(wc.gamma2_inv, s);
        }
    }
    return wc;
}

}  // namespace psrlab
