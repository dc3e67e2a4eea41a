#include "psrlab/distribution.hpp"
#include "psrlab/learners.hpp"

#include <cmath>

namespace psrlab {

namespace {
constexpr std::uint64_t kMops = 3;
}

LearnResult mops(const ModelClass& cls, int T, double gamma, double eta, std::uint64_t seed) {
    if (T <= 0) throw ValidationError("MOPS needs T >= 1");
    if (!(gamma > 0.0)) throw ValidationError("MOPS needs gamma > 0");
    const ClassTables tables(cls);
    const int n = tables.size();
    const OptimisticCover cover = exact_cover(tables);
    std::vector<double> sub(n);
    for (int theta = 0; theta < n; ++theta) sub[theta] = tables.suboptimality(tables.factor(tables.opt_policy[theta]));

    std::vector<double> logw(n, -std::log(static_cast<double>(n)));
    std::vector<bool> excluded(n, false);
    auto posterior = [&]() {
        double top = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            if (!excluded[i]) top = std::max(top, logw[i]);
        VectorXd w = VectorXd::Zero(n);
        for (int i = 0; i < n; ++i)
            if (!excluded[i]) w(i) = std::exp(logw[i] - top);
        if (!(w.sum() > 0.0)) throw SolverError("every member assigns zero likelihood");
        return VectorXd(w / w.sum());
    };

    LearnResult res;
    res.log.algorithm = "mops";
    res.log.seed = seed;
    res.log.config = {{"T", T}, {"gamma", gamma}, {"eta", eta}};
    VectorXd out = VectorXd::Zero(n);
    double cum = 0.0;
    VectorXd mu = posterior();
    for (int t = 1; t <= T; ++t) {
        Rng pick(derive_seed(seed, {kMops, static_cast<std::uint64_t>(t), 0}));
        const int theta_t = pick.categorical(mu);
        Rng step(derive_seed(seed, {kMops, static_cast<std::uint64_t>(t), 1}));
        const int h_t = step.uniform_int(tables.H);
        const Policy pi_t = compose_exploration(tables.opt_policy[theta_t], h_t, tables.core);
        Rng roll(derive_seed(seed, {kMops, static_cast<std::uint64_t>(t), 2}));
        const Trajectory tau = sample_trajectory(cls.truth(), pi_t, roll);
        const std::uint64_t idx = trajectory_index(tau, tables.O, tables.A);

        RunRecord rec;
        rec.iteration = t;
        rec.chosen = theta_t;
        rec.policy = "phi" + std::to_string(h_t) + ".pi" + std::to_string(theta_t);
        rec.trajectory = to_string(tau);
        int count = 0;
        double ent = 0.0;
        for (int i = 0; i < n; ++i) {
            if (mu(i) > 1e-12) ++count;
            if (mu(i) > 0.0) ent -= mu(i) * std::log(mu(i));
            rec.suboptimality += mu(i) * sub[i];
        }
        rec.set_size = count;
        rec.entropy = ent;
        rec.truth_mass = mu(tables.truth);
        rec.truth_in_set = mu(tables.truth) > 0.0;
        cum += rec.suboptimality;
        rec.running_mean = cum / t;
        res.log.records.push_back(rec);
        res.log.posteriors.push_back(std::vector<double>(mu.data(), mu.data() + n));
        out += mu;

        for (std::size_t k = 0; k < cover.members.size(); ++k) {
            const int theta = cover.members[k];
            bool flagged = false;
            logw[theta] += tables.opt_value[theta] / gamma + eta * floored_log(cover.likelihood[k][idx], &flagged);
            if (flagged) excluded[theta] = true;
        }
        mu = posterior();
        res.log.records.back().extra = mu(tables.truth);
    }
    out /= T;
    std::vector<double> w;
    std::vector<Policy> comps;
    for (int theta = 0; theta < n; ++theta) {
        if (out(theta) <= 0.0) continue;
        w.push_back(out(theta));
        comps.push_back(tables.opt_policy[theta]);
    }
    res.output = Policy::mixture(w, comps);
    res.output_suboptimality = cum / T;
    res.log.summary = {{"output_suboptimality", res.output_suboptimality}, {"final_truth_mass", mu(tables.truth)}};
    return res;
}

}  // namespace psrlab
