#include "psrlab/distribution.hpp"
#include "psrlab/fixtures.hpp"
#include "psrlab/learners.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace psrlab;

namespace {

ModelClass singleton() {
    ModelClass c;
    c.members = {fix_noisy()};
    c.truth_index = 0;
    c.window = 1;
    return c;
}

std::vector<std::vector<double>> all_deterministic_factors(const ClassTables& t) {
    std::vector<std::vector<double>> out;
    for (int mask = 0; mask < (1 << 10); ++mask) {
        std::vector<std::vector<int>> tab(2);
        for (int i = 0; i < 2; ++i) tab[0].push_back((mask >> i) & 1);
        for (int i = 0; i < 8; ++i) tab[1].push_back((mask >> (2 + i)) & 1);
        out.push_back(t.factor(Policy::deterministic(2, 2, 2, tab)));
    }
    return out;
}

VectorXd random_simplex(Rng& rng, int n) { return rng.dirichlet(n); }

}  // namespace

TEST_CASE("log likelihood") {
    const PomdpModel id = fix_id();
    const Policy pi = Policy::deterministic(2, 2, 2, {{1, 1}, std::vector<int>(8, 0)});
    const LogLikelihood ll = log_likelihood(id, pi, Trajectory{{0, 1}, {1, 0}});
    CHECK(ll.total() == 0.0);
    CHECK_FALSE(ll.flagged);
    const LogLikelihood zero = log_likelihood(id, pi, Trajectory{{1, 1}, {1, 0}});
    CHECK(zero.flagged);
    CHECK(zero.model_log == doctest::Approx(std::log(1e-300)));

    const ModelClass cls = noisy_class();
    const Trajectory tau{{0, 1}, {1, 0}};
    const Policy u = Policy::uniform(2, 2, 2);
    const Policy d = Policy::deterministic(2, 2, 2, {{1, 1}, std::vector<int>(8, 0)});
    const double du = log_likelihood(cls.members[0], u, tau).total() - log_likelihood(cls.members[3], u, tau).total();
    const double dd = log_likelihood(cls.members[0], d, tau).total() - log_likelihood(cls.members[3], d, tau).total();
    CHECK(du == doctest::Approx(dd).epsilon(1e-14));
}

TEST_CASE("truth has the largest empirical log likelihood") {
    const ModelClass cls = noisy_class();
    const Policy u = Policy::uniform(2, 2, 2);
    Rng rng(12);
    std::vector<double> mean(cls.size(), 0.0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const Trajectory tau = sample_trajectory(cls.truth(), u, rng);
        for (int th = 0; th < cls.size(); ++th) mean[th] += log_likelihood(cls.members[th], u, tau).model_log / n;
    }
    for (int th = 1; th < cls.size(); ++th) CHECK(mean[0] > mean[th]);
}

TEST_CASE("exact cover has no violation") {
    const ClassTables t(noisy_class());
    CHECK(cover_violation(exact_cover(t), t) == 0.0);
}

TEST_CASE("OMLE on a singleton class") {
    const LearnResult r = omle(singleton(), 30, 1.0, 4);
    for (const auto& rec : r.log.records) {
        CHECK(rec.set_size == 1);
        CHECK(rec.chosen == 0);
        CHECK(rec.suboptimality == doctest::Approx(0.0).epsilon(1e-15));
    }
    CHECK(r.output_suboptimality == doctest::Approx(0.0));
}

TEST_CASE("OMLE with a huge radius keeps the whole class") {
    const ModelClass cls = noisy_class();
    const LearnResult r = omle(cls, 40, 1e300, 2);
    for (const auto& s : r.log.confidence_sets) CHECK(s.size() == 8u);
    const MleCheck mc = mle_hellinger_check(r.log, cls, 5.0);
    CHECK(mc.per_k.front() == -10.0);
}

TEST_CASE("OMLE is deterministic per seed") {
    const ModelClass cls = noisy_class();
    std::ostringstream a;
    std::ostringstream b;
    omle(cls, 50, default_beta(8), 9).log.write_csv(a);
    omle(cls, 50, default_beta(8), 9).log.write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(default_beta(8) == doctest::Approx(2.0 * std::log(800.0)));
}

TEST_CASE("policy pool") {
    const ClassTables t(noisy_class());
    std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7};
    const PolicyPool pool = build_policy_pool(t, all);
    for (int th : all) {
        bool found = false;
        for (const auto& f : pool.factors) found = found || f == t.factor(t.opt_policy[th]);
        CHECK(found);
    }
    for (int i = 0; i < pool.size(); ++i)
        for (int j = i + 1; j < pool.size(); ++j) CHECK(pool.factors[i] != pool.factors[j]);
}

TEST_CASE("EDEC saddle on a singleton class") {
    const ModelClass cls = singleton();
    const ClassTables t(cls);
    const PolicyPool pool = build_policy_pool(t, {0});
    const SaddleResult s = edec_saddle(t, VectorXd::Ones(1), 10.0, pool);
    CHECK(s.value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.suboptimality(pool.factors[0]) == doctest::Approx(0.0));
}

TEST_CASE("EDEC saddle solution minimizes the objective") {
    const ClassTables t(noisy_class());
    std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7};
    const PolicyPool pool = build_policy_pool(t, all);
    Rng rng(31);
    for (double gamma : {0.0, 1.0, 10.0, 100.0}) {
        const VectorXd mu = random_simplex(rng, 8);
        const SaddleResult s = edec_saddle(t, mu, gamma, pool);
        CHECK(edec_objective(t, mu, gamma, pool, s.p_exp, s.p_out) == doctest::Approx(s.value).epsilon(1e-9));
        for (int k = 0; k < 50; ++k) {
            const VectorXd pe = random_simplex(rng, pool.size());
            const VectorXd po = random_simplex(rng, pool.size());
            CHECK(s.value <= edec_objective(t, mu, gamma, pool, pe, po) + 1e-9);
        }
        SaddleConfig eg;
        eg.method = SaddleMethod::ExponentiatedGradient;
        eg.step_scale = 1.0;
        eg.max_iterations = 20000;
        const SaddleResult e = edec_saddle(t, mu, gamma, pool, eg);
        const double primal = edec_objective(t, mu, gamma, pool, e.p_exp, e.p_out);
        CHECK(primal >= s.value - 1e-9);
        CHECK(primal <= s.value + e.gap + 1e-9);
    }
}

TEST_CASE("learners on a singleton class output the optimal policy") {
    const ModelClass cls = singleton();
    CHECK(explorative_e2d(cls, 10, 10.0, 1.0 / 3.0, 1).output_suboptimality == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mops(cls, 10, 10.0, 1.0 / 6.0, 1).output_suboptimality == doctest::Approx(0.0).epsilon(1e-12));
    const RfResult r = rf_e2d(cls, 10, 10.0, 0.5, 1);
    CHECK(r.estimate == 0);
    CHECK(r.estimation_error == 0.0);
}

TEST_CASE("MOPS with zero learning rate follows the optimistic prior") {
    const ModelClass cls = noisy_class();
    const ClassTables t(cls);
    const double gamma = 10.0;
    const LearnResult r = mops(cls, 20, gamma, 0.0, 3);
    for (std::size_t k = 0; k < r.log.posteriors.size(); ++k) {
        double z = 0.0;
        for (int i = 0; i < 8; ++i) z += std::exp(static_cast<double>(k) * t.opt_value[i] / gamma);
        for (int i = 0; i < 8; ++i)
            CHECK(r.log.posteriors[k][i] ==
                  doctest::Approx(std::exp(static_cast<double>(k) * t.opt_value[i] / gamma) / z).epsilon(1e-12));
    }
}

TEST_CASE("sup TV via the DP equals exhaustive policy enumeration") {
    const ClassTables t(noisy_class());
    const auto factors = all_deterministic_factors(t);
    for (int a = 0; a < 8; ++a)
        for (int b = a + 1; b < 8; ++b) {
            double best = 0.0;
            for (const auto& f : factors) {
                double s = 0.0;
                for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * std::abs(t.do_prob[a][i] - t.do_prob[b][i]);
                best = std::max(best, 0.5 * s);
            }
            CHECK(sup_tv(t.do_prob[a], t.do_prob[b], 2, 2) == doctest::Approx(best).epsilon(1e-14));
        }
}

TEST_CASE("RF saddle cutting plane equals the fully enumerated game") {
    const ClassTables t(noisy_class());
    std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7};
    const PolicyPool pool = build_policy_pool(t, all);
    const HellingerTable hell = hellinger_table(t, pool);
    const auto factors = all_deterministic_factors(t);
    const int n = 8;
    const int m = pool.size();
    Rng rng(77);
    for (double gamma : {1.0, 10.0, 100.0}) {
        const VectorXd mu = random_simplex(rng, n);
        RfCuts cuts;
        const RfSaddle s = rf_saddle(t, mu, gamma, pool, hell, cuts);
        // every (theta, deterministic policy) cut, dominated rows dropped
        std::vector<std::pair<int, VectorXd>> rows;
        for (int th = 0; th < n; ++th) {
            std::vector<VectorXd> mine;
            for (const auto& f : factors) {
                VectorXd coef(n);
                for (int o = 0; o < n; ++o) {
                    double v = 0.0;
                    for (std::size_t i = 0; i < f.size(); ++i) v += f[i] * std::abs(t.do_prob[th][i] - t.do_prob[o][i]);
                    coef(o) = 0.5 * v;
                }
                mine.push_back(coef);
            }
            for (std::size_t i = 0; i < mine.size(); ++i) {
                bool dominated = false;
                for (std::size_t j = 0; j < mine.size() && !dominated; ++j) {
                    if (i == j) continue;
                    const bool ge = (mine[j].array() >= mine[i].array()).all();
                    const bool strict = (mine[j].array() > mine[i].array()).any();
                    dominated = ge && (strict || j < i);
                }
                if (!dominated) rows.emplace_back(th, mine[i]);
            }
        }
        MatrixXd mat(static_cast<int>(rows.size()), m + n);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (int j = 0; j < m; ++j) {
                double c = 0.0;
                for (int o = 0; o < n; ++o) c += mu(o) * hell[j][rows[k].first][o];
                mat(static_cast<int>(k), j) = -gamma * c;
            }
            mat.block(static_cast<int>(k), m, 1, n) = rows[k].second.transpose();
        }
        const BlockGameSolution full = solve_block_game(mat, {m, n});
        CHECK(s.value == doctest::Approx(full.value).epsilon(1e-9));
        CHECK(rf_objective(t, mu, gamma, hell, s.p_exp, s.mu_out) == doctest::Approx(s.value).epsilon(1e-12));
        for (int k = 0; k < 50; ++k) {
            const VectorXd pe = random_simplex(rng, m);
            const VectorXd po = random_simplex(rng, n);
            CHECK(s.value <= rf_objective(t, mu, gamma, hell, pe, po) + 1e-9);
        }
    }
}

TEST_CASE("E2D and MOPS are deterministic per seed") {
    const ModelClass cls = noisy_class();
    std::ostringstream a;
    std::ostringstream b;
    explorative_e2d(cls, 30, 10.0, 1.0 / 3.0, 5).log.write_csv(a);
    explorative_e2d(cls, 30, 10.0, 1.0 / 3.0, 5).log.write_csv(b);
    CHECK(a.str() == b.str());
    std::ostringstream c;
    std::ostringstream d;
    mops(cls, 30, 10.0, 1.0 / 6.0, 5).log.write_csv(c);
    mops(cls, 30, 10.0, 1.0 / 6.0, 5).log.write_csv(d);
    CHECK(c.str() == d.str());
}

TEST_CASE("class tables reproduce the member values") {
    const ClassTables t(noisy_class());
    const double vstar[] = {0.5, 0.65, 0.5, 0.65, 0.5, 0.54, 0.5, 0.54};
    const double sub[] = {0.0, 0.06, 0.3, 0.24, 0.0, 0.3, 0.3, 0.0};
    for (int i = 0; i < 8; ++i) {
        CHECK(t.opt_value[i] == doctest::Approx(vstar[i]).epsilon(1e-12));
        CHECK(t.suboptimality(t.factor(t.opt_policy[i])) == doctest::Approx(sub[i]).epsilon(1e-12));
        CHECK(value(noisy_class().members[i], t.opt_policy[i]) == doctest::Approx(vstar[i]).epsilon(1e-12));
    }
}

TEST_CASE("policy pool restriction is lossless on the noisy class") {
    const ClassTables t(noisy_class());
    std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7};
    const PolicyPool pool = build_policy_pool(t, all);
    PolicyPool wide = pool;
    for (int mask = 0; mask < (1 << 10); ++mask) {
        std::vector<std::vector<int>> tab(2);
        for (int i = 0; i < 2; ++i) tab[0].push_back((mask >> i) & 1);
        for (int i = 0; i < 8; ++i) tab[1].push_back((mask >> (2 + i)) & 1);
        const Policy p = Policy::deterministic(2, 2, 2, tab);
        wide.policies.push_back(p);
        wide.factors.push_back(t.factor(p));
        wide.labels.push_back("det" + std::to_string(mask));
    }
    Rng rng(4);
    for (double gamma : {0.0, 1.0, 10.0}) {
        const VectorXd mu = random_simplex(rng, 8);
        const double narrow = edec_saddle(t, mu, gamma, pool).value;
        const double full = edec_saddle(t, mu, gamma, wide).value;
        CHECK(full <= narrow + 1e-12);
        CHECK(narrow - full <= 1e-12);
    }
    const LearnResult r = explorative_e2d(noisy_class(), 50, 10.0, 1.0 / 3.0, 2);
    CHECK(r.log.summary.at("pool_restriction_gap").get<double>() <= 1e-12);
}

TEST_CASE("E2D with zero learning rate keeps the uniform posterior") {
    const LearnResult r = explorative_e2d(noisy_class(), 20, 10.0, 0.0, 3);
    for (const auto& p : r.log.posteriors)
        for (double x : p) CHECK(x == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("MOPS with huge gamma and zero learning rate keeps the prior") {
    const LearnResult r = mops(noisy_class(), 20, 1e300, 0.0, 3);
    for (const auto& p : r.log.posteriors)
        for (double x : p) CHECK(x == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
}
