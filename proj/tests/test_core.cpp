#include "psrlab/distribution.hpp"
#include "psrlab/fixtures.hpp"
#include "psrlab/lp.hpp"
#include "psrlab/policy.hpp"

#include <doctest.h>

#include <cmath>

using namespace psrlab;

namespace {

// All deterministic tables for H=2, O=A=2: 2 step-1 slots, 8 step-2 slots.
std::vector<Policy> all_deterministic_h2() {
    std::vector<Policy> out;
    for (int mask = 0; mask < (1 << 10); ++mask) {
        std::vector<std::vector<int>> t(2);
        for (int i = 0; i < 2; ++i) t[0].push_back((mask >> i) & 1);
        for (int i = 0; i < 8; ++i) t[1].push_back((mask >> (2 + i)) & 1);
        out.push_back(Policy::deterministic(2, 2, 2, t));
    }
    return out;
}

}  // namespace

TEST_CASE("fixtures validate and carry the documented shapes") {
    for (const auto& name : {"FIX-ID", "FIX-NOISY", "FIX-DEC2", "FIX-LMDP"}) {
        const PomdpModel m = fixture_model(name);
        CHECK_NOTHROW(m.validate());
        CHECK(m.max_cumulative_reward() <= 1.0 + 1e-12);
    }
    const PomdpModel id = fix_id();
    CHECK(id.H == 2);
    CHECK(id.S == 2);
    CHECK(id.emit(1).isApprox(MatrixXd::Identity(2, 2)));
    Eigen::JacobiSVD<MatrixXd> svd(fix_noisy().emit(1));
    CHECK(svd.singularValues()(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(svd.singularValues()(1) == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("model validation rejects broken stochastic matrices") {
    PomdpModel m = fix_id();
    m.emissions[0](0, 0) = 0.5;
    CHECK_THROWS_AS(m.validate(), ValidationError);
    PomdpModel r = fix_id();
    r.rewards[0].setConstant(0.9);
    CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("model json round trip") {
    const PomdpModel m = fix_dec2();
    const PomdpModel back = model_from_json(model_to_json(m));
    CHECK(model_to_json(back) == model_to_json(m));
}

TEST_CASE("trajectory indexing round trip") {
    for (std::uint64_t i = 0; i < 64; ++i) CHECK(trajectory_index(trajectory_from_index(i, 3, 2, 2), 2, 2) == i);
    const Trajectory t{{1, 0}, {0, 1}};
    CHECK(trajectory_index(t, 2, 2) == 2u * 4u + 1u);
}

TEST_CASE("uniform policy on FIX-ID gives a normalized table") {
    const TrajectoryDist d = trajectory_distribution(fix_id(), Policy::uniform(2, 2, 2));
    double s = 0.0;
    for (double p : d.prob) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("FIX-NOISY joint law matches latent path enumeration") {
    const PomdpModel m = fix_noisy();
    const TrajectoryDist d = trajectory_distribution(m, Policy::uniform(2, 2, 2));
    for (int o1 = 0; o1 < 2; ++o1)
        for (int a1 = 0; a1 < 2; ++a1)
            for (int o2 = 0; o2 < 2; ++o2)
                for (int a2 = 0; a2 < 2; ++a2) {
                    double p = 0.0;
                    for (int s1 = 0; s1 < 2; ++s1)
                        for (int s2 = 0; s2 < 2; ++s2)
                            p += m.mu1(s1) * m.emit(1)(o1, s1) * 0.5 * m.trans(1, a1)(s2, s1) * m.emit(2)(o2, s2) * 0.5;
                    const Trajectory t{{o1, o2}, {a1, a2}};
                    CHECK(d.prob[trajectory_index(t, 2, 2)] == doctest::Approx(p).epsilon(1e-14));
                }
}

TEST_CASE("deterministic policy factor is an indicator") {
    const Policy pi = Policy::deterministic(2, 2, 2, {{1, 0}, {0, 1, 1, 0, 0, 0, 1, 1}});
    for (std::uint64_t i = 0; i < 16; ++i) {
        const Trajectory t = trajectory_from_index(i, 2, 2, 2);
        const bool first = t.act[0] == (t.obs[0] == 0 ? 1 : 0);
        const int slot = static_cast<int>(history_index(t, 2, 2, 2));
        const bool second = t.act[1] == pi.det_table()[1][slot];
        CHECK(pi.factor(t) == (first && second ? 1.0 : 0.0));
    }
}

TEST_CASE("optimal policy on FIX-ID equals exhaustive enumeration") {
    const PomdpModel m = fix_id();
    const auto [pi, v] = optimal_policy(m);
    double best = 0.0;
    for (const auto& p : all_deterministic_h2()) best = std::max(best, value(m, p));
    CHECK(v == doctest::Approx(best).epsilon(1e-14));
    CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(value(m, pi) == doctest::Approx(v).epsilon(1e-14));
}

TEST_CASE("optimal value dominates random policies on FIX-NOISY") {
    const PomdpModel m = fix_noisy();
    const double v = optimal_policy(m).second;
    CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        std::vector<std::vector<std::vector<double>>> t(2);
        for (int h = 1; h <= 2; ++h)
            for (std::uint64_t i = 0; i < ipow(4, h - 1) * 2; ++i) {
                const double a = rng.uniform();
                t[h - 1].push_back({a, 1.0 - a});
            }
        CHECK(value(m, Policy::stochastic(2, 2, 2, t)) <= v + 1e-12);
    }
}

TEST_CASE("zero reward gives zero value") {
    PomdpModel m = fix_noisy();
    for (auto& r : m.rewards) r.setZero();
    CHECK(value(m, Policy::uniform(2, 2, 2)) == 0.0);
    CHECK(optimal_policy(m).second == 0.0);
}

TEST_CASE("value matches Monte Carlo on FIX-NOISY") {
    const PomdpModel m = fix_noisy();
    const Policy pi = Policy::uniform(2, 2, 2);
    const double v = value(m, pi);
    Rng rng(17);
    const int n = 100000;
    double s = 0.0;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const Trajectory t = sample_trajectory(m, pi, rng);
        double r = 0.0;
        for (int h = 1; h <= 2; ++h) r += m.reward(h)(t.obs[h - 1], t.act[h - 1]);
        s += r;
        ss += r * r;
    }
    const double mu = s / n;
    const double se = std::sqrt((ss / n - mu * mu) / n);
    CHECK(std::abs(mu - v) <= 3.0 * se);
}

TEST_CASE("sampling frequencies match the exact law") {
    const PomdpModel m = fix_noisy();
    const Policy pi = Policy::uniform(2, 2, 2);
    const TrajectoryDist d = trajectory_distribution(m, pi);
    std::vector<double> counts(d.size(), 0.0);
    Rng rng(3);
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[trajectory_index(sample_trajectory(m, pi, rng), 2, 2)] += 1.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double sigma = std::sqrt(d.prob[i] * (1.0 - d.prob[i]) / n);
        CHECK(std::abs(counts[i] / n - d.prob[i]) <= 3.0 * sigma + 1e-12);
    }
}

TEST_CASE("sampling is deterministic per seed") {
    const PomdpModel m = fix_noisy();
    const Policy pi = Policy::uniform(2, 2, 2);
    for (std::uint64_t s = 0; s < 20; ++s) CHECK(sample_trajectory(m, pi, s) == sample_trajectory(m, pi, s));
    PomdpModel det = fix_id();
    const Policy flip = Policy::deterministic(2, 2, 2, {{1, 1}, std::vector<int>(8, 0)});
    const Trajectory t = sample_trajectory(det, flip, 9);
    CHECK(t == Trajectory{{0, 1}, {1, 0}});
}

TEST_CASE("TV and Hellinger on identical and disjoint laws") {
    const std::vector<double> p{0.2, 0.3, 0.5, 0.0};
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(hellinger_sq(p, p) == 0.0);
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{0.0, 1.0};
    CHECK(tv_distance(a, b) == 1.0);
    CHECK(hellinger_sq(a, b) == 2.0);
    Rng rng(8);
    for (int k = 0; k < 200; ++k) {
        const VectorXd x = rng.dirichlet(6);
        const VectorXd y = rng.dirichlet(6);
        const std::vector<double> u(x.data(), x.data() + 6);
        const std::vector<double> v(y.data(), y.data() + 6);
        CHECK(tv_distance(u, v) * tv_distance(u, v) <= hellinger_sq(u, v) + 1e-15);
    }
}

TEST_CASE("composed exploration factor on FIX-ID") {
    const PomdpModel m = fix_id();
    const CoreTestSet core = default_core_tests(m, 1);
    const Policy base = Policy::deterministic(2, 2, 2, {{1, 0}, {0, 1, 1, 0, 0, 0, 1, 1}});
    const Policy e1 = compose_exploration(base, 1, core);
    for (std::uint64_t i = 0; i < 16; ++i) {
        const Trajectory t = trajectory_from_index(i, 2, 2, 2);
        // base never acts; step 1 uniform, step 2 uniform over the single empty sequence then uniform tail
        CHECK(e1.factor(t) == doctest::Approx(0.25));
    }
    const Policy e0 = compose_exploration(base, 0, core);
    for (std::uint64_t i = 0; i < 16; ++i) CHECK(e0.factor(trajectory_from_index(i, 2, 2, 2)) == doctest::Approx(0.25));
    const Policy mix = exploration_mixture(base, core);
    double w = 0.0;
    for (double x : mix.weights()) w += x;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mix.weights().size() == 2u);
}

TEST_CASE("policy validation") {
    CHECK_THROWS_AS(Policy::stochastic(2, 2, 2, {{{0.5, 0.6}, {1.0, 0.0}}, {}}), ValidationError);
    CHECK_THROWS_AS(Policy::mixture({0.5, 0.6}, {Policy::uniform(2, 2, 2), Policy::uniform(2, 2, 2)}),
                    ValidationError);
}

TEST_CASE("core test counts") {
    const CoreTestSet c1 = default_core_tests(3, 2, 2, 1);
    for (int h = 1; h <= 3; ++h) {
        CHECK(c1.size(h) == 2);
        CHECK(c1.action_seqs(h).size() == 1u);
    }
    CHECK(c1.max_action_seqs() == 1);
    const CoreTestSet c2 = default_core_tests(3, 2, 2, 2);
    CHECK(c2.size(1) == 8);
    CHECK(c2.size(2) == 8);
    CHECK(c2.size(3) == 2);
    CHECK(c2.max_action_seqs() == 2);
    for (int h = 1; h <= 3; ++h)
        for (const auto& t : c2.tests(h)) CHECK(h + t.width() - 1 <= 4);
}

TEST_CASE("simplex on a small LP") {
    // max x + y s.t. x + 2y <= 4, 3x + y <= 6
    LinearProgram lp;
    lp.c = VectorXd(2);
    lp.c << -1.0, -1.0;
    lp.a_ub = MatrixXd(2, 2);
    lp.a_ub << 1, 2, 3, 1;
    lp.b_ub = VectorXd(2);
    lp.b_ub << 4, 6;
    const LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-2.8).epsilon(1e-12));
    CHECK(r.x(0) == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("block game matches brute force over pure strategies") {
    // two blocks of two: x ranges over a 2-simplex product; value checked on a fine grid
    Rng rng(21);
    for (int k = 0; k < 20; ++k) {
        MatrixXd m(3, 4);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = rng.normal();
        const BlockGameSolution s = solve_block_game(m, {2, 2});
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a <= 200; ++a)
            for (int b = 0; b <= 200; ++b) {
                VectorXd x(4);
                x << a / 200.0, 1 - a / 200.0, b / 200.0, 1 - b / 200.0;
                best = std::min(best, (m * x).maxCoeff());
            }
        CHECK(s.value <= best + 1e-12);
        CHECK(s.value >= best - 0.05);
        CHECK(s.value == doctest::Approx(s.dual_value).epsilon(1e-9));
        CHECK(block_game_gap(m, {2, 2}, s.x, s.y) <= 1e-9);
        EgReport rep;
        const BlockGameSolution eg = solve_block_game_eg(m, {2, 2}, 1.0, 20000, 1e-6, &rep);
        CHECK(rep.gap == doctest::Approx(block_game_gap(m, {2, 2}, eg.x, eg.y)).epsilon(1e-12));
        CHECK(rep.gap <= 1e-3);
        CHECK(std::abs(eg.value - s.value) <= 1e-3);
    }
}
