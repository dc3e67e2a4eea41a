#include "psrlab/distribution.hpp"
#include "psrlab/learners.hpp"

#include <algorithm>
#include <cmath>

namespace psrlab {

namespace {
constexpr std::uint64_t kOmle = 1;
}

LearnResult omle(const ModelClass& cls, int K, double beta, std::uint64_t seed) {
    if (K <= 0) throw ValidationError("OMLE needs K >= 1");
    if (beta < 0.0) throw ValidationError("beta must be nonnegative");
    const ClassTables tables(cls);
    const int n = tables.size();
    const PomdpModel& truth = cls.truth();

    std::vector<double> loglik(n, 0.0);
    std::vector<bool> excluded(n, false);
    std::vector<int> conf(n);
    for (int i = 0; i < n; ++i) conf[i] = i;
    std::vector<std::vector<double>> chosen_factors(n);

    LearnResult res;
    res.log.algorithm = "omle";
    res.log.seed = seed;
    res.log.config = {{"K", K}, {"beta", beta}};
    std::vector<Policy> iterates;
    double cum = 0.0;
    bool always_in = true;
    for (int k = 1; k <= K; ++k) {
        if (conf.empty()) throw SolverError("empty confidence set");
        int best = conf[0];
        for (int theta : conf)
            if (tables.opt_value[theta] > tables.opt_value[best]) best = theta;
        const Policy& pik = tables.opt_policy[best];
        if (chosen_factors[best].empty()) chosen_factors[best] = tables.factor(pik);

        RunRecord rec;
        rec.iteration = k;
        rec.chosen = best;
        rec.policy = "pi" + std::to_string(best);
        rec.set_size = static_cast<int>(conf.size());
        rec.truth_in_set = std::find(conf.begin(), conf.end(), tables.truth) != conf.end();
        always_in = always_in && rec.truth_in_set;
        res.log.confidence_sets.push_back(conf);

        for (int h = 0; h < tables.H; ++h) {
            const Policy explore = compose_exploration(pik, h, tables.core);
            Rng rng(derive_seed(seed, {kOmle, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(h)}));
            const Trajectory tau = sample_trajectory(truth, explore, rng);
            const std::uint64_t idx = trajectory_index(tau, tables.O, tables.A);
            for (int theta = 0; theta < n; ++theta) {
                bool flagged = false;
                loglik[theta] += floored_log(tables.do_prob[theta][idx], &flagged);
                if (flagged) excluded[theta] = true;
            }
            if (!rec.trajectory.empty()) rec.trajectory += ';';
            rec.trajectory += to_string(tau);
        }

        double top = -std::numeric_limits<double>::infinity();
        for (int theta = 0; theta < n; ++theta)
            if (!excluded[theta]) top = std::max(top, loglik[theta]);
        conf.clear();
        for (int theta = 0; theta < n; ++theta)
            if (!excluded[theta] && loglik[theta] >= top - beta) conf.push_back(theta);

        rec.suboptimality = tables.suboptimality(chosen_factors[best]);
        cum += rec.suboptimality;
        rec.running_mean = cum / k;
        rec.extra = top - loglik[tables.truth];
        res.log.records.push_back(rec);
        iterates.push_back(pik);
    }
    res.output = Policy::mixture(std::vector<double>(K, 1.0 / K), iterates);
    res.output_suboptimality = cum / K;
    res.log.summary = {{"output_suboptimality", res.output_suboptimality},
                       {"truth_always_in_set", always_in},
                       {"final_set_size", res.log.records.back().set_size}};
    return res;
}

MleCheck mle_hellinger_check(const RunLog& log, const ModelClass& cls, double beta) {
    const ClassTables tables(cls);
    const int n = tables.size();
    // dh[chosen][theta] = sum_h D_H^2(P^{pi_{h,exp}}_theta, P^{pi_{h,exp}}_truth)
    std::vector<std::vector<double>> dh(n);
    auto row = [&](int chosen) -> const std::vector<double>& {
        auto& r = dh[chosen];
        if (r.empty()) {
            r.assign(n, 0.0);
            for (int h = 0; h < tables.H; ++h) {
                const auto f = tables.factor(compose_exploration(tables.opt_policy[chosen], h, tables.core));
                for (int theta = 0; theta < n; ++theta) r[theta] += tables.hellinger(theta, tables.truth, f);
            }
        }
        return r;
    };
    MleCheck out;
    out.max_slack = -std::numeric_limits<double>::infinity();
    std::vector<double> acc(n, 0.0);
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        double worst = 0.0;
        for (int theta : log.confidence_sets.at(k)) worst = std::max(worst, acc[theta]);
        out.per_k.push_back(worst - 2.0 * beta);
        out.max_slack = std::max(out.max_slack, worst - 2.0 * beta);
        const auto& r = row(log.records[k].chosen);
        for (int theta = 0; theta < n; ++theta) acc[theta] += r[theta];
    }
    return out;
}

}  // namespace psrlab
