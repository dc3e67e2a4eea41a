#include "psrlab/distribution.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace psrlab {

std::vector<double> do_probabilities(const PomdpModel& model, int h_max) {
    if (h_max < 0 || h_max > model.H) throw ValidationError("h_max must lie in 0..H");
    const int O = model.O;
    const int A = model.A;
    const std::uint64_t n = ipow_checked(static_cast<std::uint64_t>(O) * A, h_max, "trajectory table");
    std::vector<double> out(n, 0.0);
    if (h_max == 0) {
        out[0] = 1.0;
        return out;
    }
    std::function<void(int, std::uint64_t, const VectorXd&)> rec = [&](int k, std::uint64_t idx, const VectorXd& alpha) {
        for (int o = 0; o < O; ++o) {
            VectorXd beta = model.emit(k).row(o).transpose().cwiseProduct(alpha);
            double p = beta.sum();
            if (p <= 0.0) continue;
            for (int a = 0; a < A; ++a) {
                std::uint64_t id = (idx * O + o) * A + a;
                if (k == h_max) {
                    out[id] = p;
                } else {
                    rec(k + 1, id, model.trans(k, a) * beta);
                }
            }
        }
    };
    rec(1, 0, model.mu1);
    return out;
}

TrajectoryDist combine(const std::vector<double>& do_prob, const Policy& policy, int h_max, int O, int A) {
    TrajectoryDist d;
    d.h_max = h_max;
    d.O = O;
    d.A = A;
    d.do_prob = do_prob;
    d.policy_factor.assign(do_prob.size(), 0.0);
    d.prob.assign(do_prob.size(), 0.0);
    for (std::uint64_t i = 0; i < do_prob.size(); ++i) {
        Trajectory t = trajectory_from_index(i, h_max, O, A);
        d.policy_factor[i] = policy.factor(t);
        d.prob[i] = d.policy_factor[i] * do_prob[i];
    }
    return d;
}

TrajectoryDist trajectory_distribution(const PomdpModel& model, const Policy& policy, int h_max) {
    if (policy.horizon() < h_max || policy.num_obs() != model.O || policy.num_actions() != model.A)
        throw ValidationError("policy does not match the model shape");
    return combine(do_probabilities(model, h_max), policy, h_max, model.O, model.A);
}

TrajectoryDist trajectory_distribution(const PomdpModel& model, const Policy& policy) {
    return trajectory_distribution(model, policy, model.H);
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ValidationError("distributions have different index sets");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

double hellinger_sq(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ValidationError("distributions have different index sets");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = std::sqrt(std::max(p[i], 0.0)) - std::sqrt(std::max(q[i], 0.0));
        s += d * d;
    }
    return s;
}

double tv_distance(const TrajectoryDist& d1, const TrajectoryDist& d2) {
    if (d1.h_max != d2.h_max || d1.O != d2.O || d1.A != d2.A)
        throw ValidationError("distributions have different index sets");
    return tv_distance(d1.prob, d2.prob);
}

double hellinger_sq(const TrajectoryDist& d1, const TrajectoryDist& d2) {
    if (d1.h_max != d2.h_max || d1.O != d2.O || d1.A != d2.A)
        throw ValidationError("distributions have different index sets");
    return hellinger_sq(d1.prob, d2.prob);
}

std::vector<double> trajectory_rewards(const PomdpModel& model) {
    const std::uint64_t n = ipow_checked(static_cast<std::uint64_t>(model.O) * model.A, model.H, "trajectory table");
    std::vector<double> r(n, 0.0);
    for (std::uint64_t i = 0; i < n; ++i) {
        Trajectory t = trajectory_from_index(i, model.H, model.O, model.A);
        double s = 0.0;
        for (int h = 1; h <= model.H; ++h) s += model.reward(h)(t.obs[h - 1], t.act[h - 1]);
        r[i] = s;
    }
    return r;
}

double value(const PomdpModel& model, const Policy& policy) {
    TrajectoryDist d = trajectory_distribution(model, policy);
    std::vector<double> r = trajectory_rewards(model);
    double v = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) v += d.prob[i] * r[i];
    return v;
}

std::pair<Policy, double> optimal_policy(const PomdpModel& model) {
    const int H = model.H;
    const int O = model.O;
    const int A = model.A;
    ipow_checked(static_cast<std::uint64_t>(O) * A, H, "trajectory table");
    std::vector<std::vector<int>> table(H);
    for (int h = 1; h <= H; ++h) table[h - 1].assign(ipow(static_cast<std::uint64_t>(O) * A, h - 1) * O, 0);

    // Values are unnormalized by P(history) so unreachable branches vanish.
    std::function<double(int, std::uint64_t, const VectorXd&)> rec = [&](int h, std::uint64_t prev, const VectorXd& alpha) {
        double total = 0.0;
        for (int o = 0; o < O; ++o) {
            VectorXd beta = model.emit(h).row(o).transpose().cwiseProduct(alpha);
            double w = beta.sum();
            std::uint64_t hist = prev * O + o;
            if (w <= 0.0) continue;
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double v = model.reward(h)(o, a) * w;
                if (h < H) v += rec(h + 1, hist * A + a, model.trans(h, a) * beta);
                if (v > best + 1e-13) {
                    best = v;
                    best_a = a;
                }
            }
            table[h - 1][hist] = best_a;
            total += best;
        }
        return total;
    };
    double v = rec(1, 0, model.mu1);
    return {Policy::deterministic(H, O, A, std::move(table)), v};
}

Trajectory sample_trajectory(const PomdpModel& model, const Policy& policy, Rng& rng) {
    Policy p = policy.is_behavioral() ? policy : policy.realize(rng);
    Trajectory t;
    int s = rng.categorical(model.mu1);
    for (int h = 1; h <= model.H; ++h) {
        int o = rng.categorical(VectorXd(model.emit(h).col(s)));
        t.obs.push_back(o);
        int a = p.sample_action(h, t, rng);
        t.act.push_back(a);
        if (h < model.H) s = rng.categorical(VectorXd(model.trans(h, a).col(s)));
    }
    return t;
}

Trajectory sample_trajectory(const PomdpModel& model, const Policy& policy, std::uint64_t seed) {
    Rng rng(seed);
    return sample_trajectory(model, policy, rng);
}

void write_csv(const TrajectoryDist& d, std::ostream& out) {
    out << "trajectory,do_probability,policy_factor,probability\n";
    for (std::size_t i = 0; i < d.prob.size(); ++i) {
        Trajectory t = trajectory_from_index(i, d.h_max, d.O, d.A);
        out << to_string(t) << ',' << format_double(d.do_prob[i]) << ',' << format_double(d.policy_factor[i]) << ','
            << format_double(d.prob[i]) << '\n';
    }
}

}  // namespace psrlab
