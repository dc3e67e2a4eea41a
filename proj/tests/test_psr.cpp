#include "psrlab/brep.hpp"
#include "psrlab/distribution.hpp"
#include "psrlab/fixtures.hpp"
#include "psrlab/latent_mdp.hpp"
#include "psrlab/predictive.hpp"

#include <doctest.h>

#include <cmath>

using namespace psrlab;

namespace {

double sigma_min(const MatrixXd& m) {
    Eigen::JacobiSVD<MatrixXd> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

// S=1 model: observations drawn iid from a fixed emission.
PomdpModel single_state() {
    PomdpModel m = make_model(2, 1, 2, 2);
    for (auto& e : m.emissions) e << 0.3, 0.7;
    m.mu1 << 1.0;
    for (auto& step : m.transitions)
        for (auto& t : step) t << 1.0;
    for (auto& r : m.rewards) r.setZero();
    m.validate();
    return m;
}

}  // namespace

TEST_CASE("predictive state of FIX-ID at the empty history") {
    const PomdpModel m = fix_id();
    const VectorXd q = predictive_state(m, default_core_tests(m, 1), Trajectory{});
    REQUIRE(q.size() == 2);
    CHECK(q(0) == 1.0);
    CHECK(q(1) == 0.0);
}

TEST_CASE("unreachable history gives a zero predictive state") {
    const PomdpModel m = fix_id();
    const VectorXd q = predictive_state(m, default_core_tests(m, 1), Trajectory{{1}, {0}});
    CHECK(q.isZero(0.0));
}

TEST_CASE("predictive states are probabilities grouped by action sequence") {
    for (const auto& name : {"FIX-NOISY", "FIX-DEC2", "FIX-LMDP"}) {
        const PomdpModel m = fixture_model(name);
        const CoreTestSet core = default_core_tests(m, 2);
        for (int h = 1; h <= m.H; ++h) {
            const MatrixXd d = predictive_state_matrix(m, core, h - 1);
            CHECK(d.minCoeff() >= 0.0);
            CHECK(d.maxCoeff() <= 1.0 + 1e-12);
            for (const auto& seq : core.action_seqs(h)) {
                for (int c = 0; c < d.cols(); ++c) {
                    double s = 0.0;
                    for (int t = 0; t < core.size(h); ++t)
                        if (core.tests(h)[t].act == seq) s += d(t, c);
                    CHECK(s <= 1.0 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("PSR rank") {
    const PomdpModel id = fix_id();
    CHECK(psr_rank(id, default_core_tests(id, 1)) == 2);
    const PomdpModel one = single_state();
    CHECK(psr_rank(one, default_core_tests(one, 1)) == 1);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const PomdpModel m = random_pomdp(3, 2, 2, 3, s);
        CHECK(psr_rank(m, default_core_tests(m, 2)) <= 3);
    }
}

TEST_CASE("revealing construction") {
    const BRep id = brep_revealing(fix_id(), 1);
    CHECK(validate_brep(id, fix_id()) <= 1e-10);
    CHECK(id.diagnostics.at("alpha_rev") == doctest::Approx(1.0).epsilon(1e-14));
    const BRep noisy = brep_revealing(fix_noisy(), 1);
    CHECK(noisy.diagnostics.at("alpha_rev") == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(validate_brep(noisy, fix_noisy()) <= 1e-10);
    const BRep l1 = brep_revealing(fix_noisy(), 1, InverseMode::L1Left);
    CHECK(validate_brep(l1, fix_noisy()) <= 1e-10);
    CHECK(l1.diagnostics.at("max_left_inverse_norm_1to1") <=
          noisy.diagnostics.at("max_left_inverse_norm_1to1") + 1e-12);
}

TEST_CASE("revealing blocks beyond H - m are indicator selections") {
    const PomdpModel m = fix_noisy();
    const BRep b = brep_revealing(m, 2);
    for (int h = 1; h <= m.H; ++h) {
        for (int o = 0; o < 2; ++o)
            for (int a = 0; a < 2; ++a) {
                const MatrixXd& op = b.op(h, o, a);
                for (int r = 0; r < op.rows(); ++r) {
                    int ones = 0;
                    for (int c = 0; c < op.cols(); ++c) {
                        CHECK((op(r, c) == 0.0 || op(r, c) == 1.0));
                        ones += op(r, c) == 1.0;
                    }
                    CHECK(ones <= 1);
                }
            }
    }
}

TEST_CASE("revealing precondition failure") {
    CHECK_THROWS_AS(brep_revealing(fix_dec2(), 1), RankDeficiencyError);
    CHECK_THROWS_AS(brep_revealing(fix_lmdp(), 1), RankDeficiencyError);
}

TEST_CASE("decodable construction") {
    const PomdpModel id = fix_id();
    const BRep b = brep_decodable(id, derive_decoder(id, 1), 1);
    CHECK(validate_brep(b, id) <= 1e-10);
    const BRep d2 = brep_decodable(fix_dec2(), fix_dec2_decoder(), 2);
    CHECK(validate_brep(d2, fix_dec2()) <= 1e-10);
    for (const BRep* r : {&b, &d2})
        for (int h = 1; h <= r->H(); ++h)
            for (const auto& op : r->ops[h - 1]) {
                CHECK(op.minCoeff() >= 0.0);
                if (h == r->H()) {
                    CHECK(op.colwise().sum().maxCoeff() <= 1.0 + 1e-12);
                    continue;
                }
                // sub-stochastic within each action sequence of U_{h+1}
                for (const auto& seq : r->core.action_seqs(h + 1)) {
                    VectorXd s = VectorXd::Zero(op.cols());
                    for (int t = 0; t < r->core.size(h + 1); ++t)
                        if (r->core.tests(h + 1)[t].act == seq) s += op.row(t).transpose();
                    CHECK(s.maxCoeff() <= 1.0 + 1e-12);
                }
            }
    CHECK_THROWS_AS(derive_decoder(fix_noisy(), 1), DecoderError);
    CHECK_THROWS_AS(derive_decoder(fix_dec2(), 1), DecoderError);
    CHECK_NOTHROW(verify_decoder(fix_dec2(), derive_decoder(fix_dec2(), 2)));
}

TEST_CASE("future-sufficient with the pseudo-inverse matches revealing") {
    const PomdpModel m = fix_noisy();
    const BRep fs = brep_future_sufficient(m, 1, std::nullopt, NaturalMode::Pseudo);
    const BRep rv = brep_revealing(m, 1);
    CHECK((fs.q0 - rv.q0).cwiseAbs().maxCoeff() <= 1e-12);
    for (int h = 1; h <= m.H; ++h)
        for (std::size_t k = 0; k < fs.ops[h - 1].size(); ++k)
            CHECK((fs.ops[h - 1][k] - rv.ops[h - 1][k]).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(validate_brep(brep_future_sufficient(m, 1), m) <= 1e-10);
    for (const auto& name : {"FIX-ID", "FIX-NOISY", "FIX-DEC2", "FIX-LMDP"}) {
        const BRep b = brep_future_sufficient(fixture_model(name), 2);
        CHECK(b.diagnostics.at("nu") >= 1.0);
    }
}

TEST_CASE("future-sufficient on a low-rank model that is not revealing") {
    const PomdpModel m = random_low_rank(4, 2, 2, 3, 2, 7);
    CHECK_THROWS_AS(brep_revealing(m, 1), RankDeficiencyError);
    const BRep b = brep_future_sufficient(m, 1);
    CHECK(validate_brep(b, m) <= 1e-9);
}

TEST_CASE("regular PSR construction") {
    const PomdpModel m = fix_noisy();
    const CoreTestSet core = default_core_tests(m, 1);
    const RegularPsrResult ex = brep_regular_psr(m, core, CoreChoice::Exhaustive);
    const RegularPsrResult gr = brep_regular_psr(m, core, CoreChoice::Greedy);
    CHECK(ex.exhaustive);
    CHECK(ex.alpha_inv <= gr.alpha_inv + 1e-12);
    CHECK(validate_brep(ex.brep, m) <= 1e-10);
    CHECK(validate_brep(gr.brep, m) <= 1e-10);
    CHECK_THROWS_AS(brep_regular_psr(fix_dec2(), default_core_tests(fix_dec2(), 1)), ConstraintError);
    const RegularPsrResult d2 = brep_regular_psr(fix_dec2(), default_core_tests(fix_dec2(), 2));
    CHECK(validate_brep(d2.brep, fix_dec2()) <= 1e-10);
}

TEST_CASE("square full-rank D is its own core matrix") {
    MatrixXd d(2, 2);
    d << 0.8, 0.2, 0.2, 0.8;
    bool exhaustive = false;
    const auto cols = select_core_columns(d, CoreChoice::Auto, &exhaustive);
    CHECK(cols == std::vector<int>{0, 1});
}

TEST_CASE("validation detects a zeroed operator") {
    const PomdpModel m = fix_noisy();
    BRep b = brep_revealing(m, 1);
    b.op(1, 0, 1).setZero();
    CHECK(validate_brep(b, m) > 1e-3);
}

TEST_CASE("forward operator reproduces conditional futures") {
    for (const auto& name : {"FIX-NOISY", "FIX-DEC2", "FIX-LMDP"}) {
        const PomdpModel m = fixture_model(name);
        const BRep b = brep_revealing(m, 2);
        const std::vector<double> full = do_probabilities(m, m.H);
        for (int h = 1; h <= m.H; ++h) {
            const MatrixXd w = forward_operator(b, h);
            const std::uint64_t nprefix = ipow(static_cast<std::uint64_t>(m.O) * m.A, h - 1);
            const std::uint64_t nfut = ipow(static_cast<std::uint64_t>(m.O) * m.A, m.H - h + 1);
            const std::vector<double> pre = do_probabilities(m, h - 1);
            for (std::uint64_t i = 0; i < nprefix; ++i) {
                if (pre[i] <= 1e-12) continue;
                const Trajectory tau = trajectory_from_index(i, h - 1, m.O, m.A);
                const VectorXd f = w * predictive_state(m, b.core, tau);
                for (std::uint64_t j = 0; j < nfut; ++j)
                    CHECK(f(static_cast<Eigen::Index>(j)) == doctest::Approx(full[i * nfut + j] / pre[i]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("brep json round trip") {
    const BRep b = brep_revealing(fix_dec2(), 2);
    const BRep back = brep_from_json(brep_to_json(b));
    CHECK(validate_brep(back, fix_dec2()) <= 1e-10);
    CHECK(brep_to_json(back) == brep_to_json(b));
}

TEST_CASE("single MDP mixture keeps the optimal value") {
    const auto comps = fix_lmdp_components();
    for (const auto& mdp : comps) {
        const PomdpModel p = latent_mdp_to_pomdp({mdp}, VectorXd::Ones(1));
        CHECK(optimal_policy(p).second == doctest::Approx(mdp_optimal_value(mdp)).epsilon(1e-10));
    }
}

TEST_CASE("latent MDP emission-action matrix is block diagonal") {
    const auto comps = fix_lmdp_components();
    const PomdpModel m = fix_lmdp();
    const CoreTestSet core = default_core_tests(m, 2);
    for (int h = 1; h < m.H; ++h) {
        double smallest = std::numeric_limits<double>::infinity();
        for (int s = 0; s < comps[0].S; ++s) smallest = std::min(smallest, sigma_min(latent_block(comps, h, s)));
        CHECK(sigma_min(emission_action_matrix(m, core, h)) == doctest::Approx(smallest).epsilon(1e-10));
    }
}

TEST_CASE("random generators are reproducible and respect the floor") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const PomdpModel a = random_revealing(2, 2, 2, 2, 0.3, s);
        CHECK(model_to_json(a) == model_to_json(random_revealing(2, 2, 2, 2, 0.3, s)));
        for (int h = 1; h <= 2; ++h) CHECK(sigma_min(a.emit(h)) >= 0.3 - 1e-12);
        const PomdpModel d = random_decodable(2, 3, 2, 2, s);
        CHECK_NOTHROW(derive_decoder(d, 1));
    }
}
