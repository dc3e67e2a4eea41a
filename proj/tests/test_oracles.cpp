#include "psrlab/fixtures.hpp"
#include "psrlab/learners.hpp"
#include "psrlab/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace psrlab;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
    VectorXd v(static_cast<Eigen::Index>(xs.size()));
    int i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

RuleFunction explicit_rule(std::vector<std::vector<VectorXd>> y) {
    RuleFunction f;
    f.y = std::move(y);
    return f;
}

}  // namespace

TEST_CASE("rule function explicit form") {
    const RuleFunction f = explicit_rule({{vec({1, 0}), vec({0, -1})}, {vec({2, 2})}});
    CHECK(f(vec({1, 2})) == doctest::Approx(6.0));
    CHECK(f(vec({3, -3})) == doctest::Approx(6.0));
    CHECK(f.radius() == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("rule function tree form") {
    RuleFunction choose;
    choose.tree = MatrixXd::Identity(2, 2);
    choose.scale = 0.5;
    choose.O = 1;
    choose.A = 2;
    CHECK(choose(vec({-3, 1})) == doctest::Approx(1.5));
    RuleFunction sum = choose;
    sum.O = 2;
    sum.A = 1;
    CHECK(sum(vec({-3, 1})) == doctest::Approx(2.0));
    CHECK(sum.radius() == doctest::Approx(1.0));
}

TEST_CASE("eluder check by hand") {
    EluderInstance inst;
    inst.d = 1;
    inst.x = {{vec({1})}, {vec({2})}};
    inst.q = {vec({1}), vec({1})};
    inst.f = {explicit_rule({{vec({3})}}), explicit_rule({{vec({0.5})}})};
    const auto beta = eluder_betas(inst);
    CHECK(beta[0] == 0.0);
    CHECK(beta[1] == doctest::Approx(0.25));
    const CheckResult c = eluder_l2_check(inst, 1.0);
    CHECK(c.lhs == doctest::Approx(1.0));
    CHECK(c.rhs == doctest::Approx(std::sqrt(2.0 * std::log(37.0))));
    CHECK_THROWS_AS(eluder_l2_check(inst, 0.0), ValidationError);
}

TEST_CASE("eluder check with vanishing functions") {
    EluderInstance inst;
    inst.d = 2;
    for (int k = 0; k < 5; ++k) {
        inst.x.push_back({vec({1, 2}), vec({-1, 0})});
        inst.q.push_back(vec({0.5, 0.5}));
        inst.f.push_back(explicit_rule({{VectorXd::Zero(2)}}));
    }
    const CheckResult c = eluder_l2_check(inst, 1.0);
    CHECK(c.lhs == 0.0);
    CHECK(c.rhs == 0.0);
    CHECK(c.slack == 0.0);
}

TEST_CASE("eluder check with a single step") {
    Rng rng(5);
    for (int n = 0; n < 50; ++n) {
        EluderInstance inst = random_eluder_instance(rng);
        inst.x.resize(1);
        inst.q.resize(1);
        inst.f.resize(1);
        const double M = std::exp(rng.normal());
        double e = 0.0;
        double rx2 = 0.0;
        for (std::size_t i = 0; i < inst.x[0].size(); ++i) {
            e += inst.q[0](static_cast<int>(i)) * inst.f[0](inst.x[0][i]);
            rx2 += inst.q[0](static_cast<int>(i)) * inst.x[0][i].squaredNorm();
        }
        const double ry = inst.f[0].radius();
        const CheckResult c = eluder_l2_check(inst, M);
        CHECK(c.lhs == doctest::Approx(std::min(M, e)));
        CHECK(c.rhs == doctest::Approx(std::sqrt(2.0 * inst.d * M * M * std::log1p(rx2 * ry * ry / (inst.d * M * M)))));
        CHECK(c.slack >= -1e-9);
    }
}

TEST_CASE("elliptical potential with identity increments is harmonic") {
    for (int K : {1, 2, 10, 100}) {
        std::vector<MatrixXd> phis(K, MatrixXd::Identity(1, 1));
        const CheckResult c = elliptical_potential_check(phis, 1.0);
        double harmonic = 0.0;
        for (int k = 1; k <= K; ++k) harmonic += 1.0 / k;
        CHECK(c.lhs == doctest::Approx(harmonic).epsilon(1e-12));
        CHECK(c.rhs == doctest::Approx(2.0 * std::log(1.0 + K)).epsilon(1e-12));
        CHECK(c.slack >= 0.0);
    }
}

TEST_CASE("elliptical potential rejects bad input") {
    MatrixXd asym(2, 2);
    asym << 1, 1, 0, 1;
    CHECK_THROWS_AS(elliptical_potential_check({asym}, 1.0), ValidationError);
    MatrixXd neg(2, 2);
    neg << 1, 0, 0, -1;
    CHECK_THROWS_AS(elliptical_potential_check({neg}, 1.0), ValidationError);
    CHECK_THROWS_AS(elliptical_potential_check({MatrixXd::Identity(2, 2)}, 0.0), ValidationError);
}

TEST_CASE("decoupling check closed forms") {
    DecouplingInstance zero;
    zero.x = {vec({1, 0}), vec({0, 1})};
    zero.f = {explicit_rule({{VectorXd::Zero(2)}}), explicit_rule({{VectorXd::Zero(2)}})};
    zero.q = {vec({0.5, 0.5}), vec({0.2, 0.8})};
    zero.mu = vec({0.3, 0.7});
    CHECK(decoupling_check(zero).lhs == 0.0);
    CHECK(decoupling_check(zero).rhs == 0.0);

    DecouplingInstance point;
    point.x = {vec({1, 2})};
    point.f = {explicit_rule({{vec({1, 1})}})};
    point.q = {vec({1})};
    point.mu = vec({1});
    const CheckResult c = decoupling_check(point);
    CHECK(c.lhs == doctest::Approx(3.0));
    CHECK(c.rhs == doctest::Approx(3.0));
}

TEST_CASE("random oracle instances satisfy the inequalities") {
    Rng rng(8);
    for (int n = 0; n < 100; ++n) {
        CHECK(eluder_l2_check(random_eluder_instance(rng), std::exp(rng.normal())).slack >= -1e-9);
        CHECK(elliptical_potential_check(random_psd_sequence(rng), std::exp(rng.normal())).slack >= -1e-9);
        CHECK(decoupling_check(random_decoupling_instance(rng)).slack >= -1e-9);
    }
}

TEST_CASE("spanner of the standard basis") {
    std::vector<VectorXd> xs;
    for (int i = 0; i < 3; ++i) xs.push_back(VectorXd::Unit(3, i));
    const Spanner sp = barycentric_spanner(xs, 3);
    CHECK(sp.residual == 0.0);
    CHECK(sp.max_coef == doctest::Approx(1.0));
    CHECK(sp.F.cwiseAbs().colwise().sum().maxCoeff() <= 1.0 + 1e-12);
    xs.push_back(vec({1, 1, 1}));
    const Spanner sp2 = barycentric_spanner(xs, 3);
    CHECK(sp2.residual <= 1e-12);
    CHECK(sp2.max_coef <= 2.0 + 1e-12);
}

TEST_CASE("spanner properties on random families") {
    Rng rng(21);
    for (int n = 0; n < 50; ++n) {
        const int dim = 2 + rng.uniform_int(4);
        const int rank = 1 + rng.uniform_int(dim);
        MatrixXd basis(dim, rank);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < rank; ++j) basis(i, j) = rng.normal();
        std::vector<VectorXd> xs;
        double max_l1 = 0.0;
        for (int i = 0; i < 3 + rng.uniform_int(10); ++i) {
            VectorXd c(rank);
            for (int j = 0; j < rank; ++j) c(j) = rng.normal();
            xs.push_back(basis * c);
            max_l1 = std::max(max_l1, xs.back().lpNorm<1>());
        }
        const Spanner sp = barycentric_spanner(xs, dim);
        CHECK(sp.residual <= 1e-9);
        CHECK(sp.max_coef <= 2.0 + 1e-9);
        CHECK(sp.F.cwiseAbs().colwise().sum().maxCoeff() <= max_l1 + 1e-12);
    }
}

TEST_CASE("spanner rejects a family wider than d") {
    std::vector<VectorXd> xs{VectorXd::Unit(2, 0), VectorXd::Unit(2, 1)};
    CHECK_THROWS_AS(barycentric_spanner(xs, 1), ValidationError);
    CHECK_THROWS_AS(barycentric_spanner({}, 1), ValidationError);
    const Spanner z = barycentric_spanner({VectorXd::Zero(2)}, 2);
    CHECK(z.residual == 0.0);
}

TEST_CASE("eluder instance from an OMLE run") {
    const ModelClass cls = noisy_class();
    const LearnResult r = omle(cls, 30, default_beta(8), 1);
    for (int h : {1, 2}) {
        const EluderInstance inst = eluder_from_omle(cls, r.log, h);
        CHECK(inst.size() == 30);
        CHECK(inst.d == cls.core().size(h));
        for (const auto& q : inst.q) CHECK(q.sum() == doctest::Approx(1.0));
        CHECK(eluder_l2_check(inst, 1.0).slack >= -1e-9);
    }
    CHECK_THROWS_AS(eluder_from_omle(cls, r.log, 0), ValidationError);
}
