#include "psrlab/distribution.hpp"
#include "psrlab/learners.hpp"

#include <cmath>

namespace psrlab {

ClassTables::ClassTables(const ModelClass& cls) {
    cls.validate();
    const PomdpModel& m0 = cls.members.at(0);
    H = m0.H;
    O = m0.O;
    A = m0.A;
    truth = cls.truth_index;
    core = cls.core();
    for (const auto& m : cls.members) {
        do_prob.push_back(do_probabilities(m, H));
        reward.push_back(trajectory_rewards(m));
        auto [pi, v] = optimal_policy(m);
        opt_policy.push_back(std::move(pi));
        opt_value.push_back(v);
    }
}

std::vector<double> ClassTables::factor(const Policy& pi) const {
    const std::size_t n = do_prob.at(0).size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = pi.factor(trajectory_from_index(i, H, O, A));
    return f;
}

double ClassTables::value(int theta, const std::vector<double>& f) const {
    const auto& p = do_prob[theta];
    const auto& r = reward[theta];
    double v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) v += p[i] * f[i] * r[i];
    return v;
}

double ClassTables::hellinger(int theta, int other, const std::vector<double>& f) const {
    const auto& p = do_prob[theta];
    const auto& q = do_prob[other];
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        s += f[i] * d * d;
    }
    return s;
}

double ClassTables::suboptimality(const std::vector<double>& f) const { return opt_value[truth] - value(truth, f); }

OptimisticCover exact_cover(const ClassTables& tables) {
    OptimisticCover c;
    for (int i = 0; i < tables.size(); ++i) {
        c.members.push_back(i);
        c.likelihood.push_back(tables.do_prob[i]);
    }
    return c;
}

double cover_violation(const OptimisticCover& cover, const ClassTables& tables) {
    double worst = 0.0;
    for (int theta = 0; theta < tables.size(); ++theta) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cover.members.size(); ++k) {
            const auto& pt = cover.likelihood[k];
            const auto& p = tables.do_prob[theta];
            double dom = 0.0;
            double l1 = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                dom = std::max(dom, p[i] - pt[i]);
                l1 += std::abs(pt[i] - p[i]);
            }
            best = std::min(best, std::max(dom, l1 - cover.rho * cover.rho));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

double floored_log(double p, bool* flagged) {
    static const double floor_log = std::log(1e-300);
    if (p <= 0.0) {
        if (flagged) *flagged = true;
        return floor_log;
    }
    if (flagged) *flagged = false;
    return std::max(std::log(p), floor_log);
}

LogLikelihood log_likelihood(const PomdpModel& model, const Policy& policy, const Trajectory& tau) {
    LogLikelihood ll;
    const std::vector<double> p = do_probabilities(model, tau.length());
    ll.model_log = floored_log(p[trajectory_index(tau, model.O, model.A)], &ll.flagged);
    const double f = policy.factor(tau);
    ll.policy_log = f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity();
    return ll;
}

void RunLog::write_csv(std::ostream& out) const {
    out << "iteration,chosen,policy,trajectory,set_size,truth_in_set,truth_mass,entropy,suboptimality,running_mean,"
           "extra\n";
    for (const auto& r : records) {
        out << r.iteration << ',' << r.chosen << ',' << r.policy << ',' << r.trajectory << ',' << r.set_size << ','
            << (r.truth_in_set ? 1 : 0) << ',' << format_double(r.truth_mass) << ',' << format_double(r.entropy) << ','
            << format_double(r.suboptimality) << ',' << format_double(r.running_mean) << ','
            << format_double(r.extra) << '\n';
    }
}

nlohmann::json RunLog::to_json() const {
    nlohmann::json j;
    j["algorithm"] = algorithm;
    j["seed"] = seed;
    j["config"] = config;
    j["summary"] = summary;
    j["iterations"] = records.size();
    if (!confidence_sets.empty()) j["confidence_sets"] = confidence_sets;
    return j;
}

double default_beta(int class_size, double delta) { return 2.0 * std::log(class_size / delta); }

PolicyPool build_policy_pool(const ClassTables& tables, const std::vector<int>& members) {
    PolicyPool pool;
    auto add = [&](Policy pi, std::string label) {
        std::vector<double> f = tables.factor(pi);
        for (const auto& g : pool.factors)
            if (g == f) return;
        pool.policies.push_back(std::move(pi));
        pool.labels.push_back(std::move(label));
        pool.factors.push_back(std::move(f));
    };
    for (int theta : members) add(tables.opt_policy[theta], "pi" + std::to_string(theta));
    for (int theta : members) {
        for (int h = 0; h < tables.H; ++h)
            add(compose_exploration(tables.opt_policy[theta], h, tables.core),
                "phi" + std::to_string(h) + ".pi" + std::to_string(theta));
        add(exploration_mixture(tables.opt_policy[theta], tables.core), "phi.pi" + std::to_string(theta));
    }
    return pool;
}

HellingerTable hellinger_table(const ClassTables& tables, const PolicyPool& pool) {
    const int n = tables.size();
    HellingerTable t(pool.size(), std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    for (int j = 0; j < pool.size(); ++j)
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) t[j][a][b] = t[j][b][a] = tables.hellinger(a, b, pool.factors[j]);
    return t;
}

}  // namespace psrlab
