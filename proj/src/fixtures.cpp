#include "psrlab/fixtures.hpp"

namespace psrlab {

namespace {

MatrixXd flip() {
    MatrixXd t(2, 2);
    t << 0, 1, 1, 0;
    return t;
}

PomdpModel flip_stay_model(double accuracy, const VectorXd& mu1, int flip_action) {
    PomdpModel m = make_model(2, 2, 2, 2);
    MatrixXd e(2, 2);
    e << accuracy, 1 - accuracy, 1 - accuracy, accuracy;
    m.emissions.assign(2, e);
    m.transitions[0][flip_action] = flip();
    m.transitions[0][1 - flip_action] = MatrixXd::Identity(2, 2);
    m.mu1 = mu1;
    for (auto& r : m.rewards) {
        r.setZero();
        r.row(1).setConstant(0.5);
    }
    m.validate();
    return m;
}

MatrixXd random_stochastic(int rows, int cols, Rng& rng, double alpha = 1.0) {
    MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c) m.col(c) = rng.dirichlet(rows, alpha);
    return m;
}

void random_rewards(PomdpModel& m, Rng& rng) {
    for (auto& r : m.rewards)
        for (int i = 0; i < r.rows(); ++i)
            for (int j = 0; j < r.cols(); ++j) r(i, j) = rng.uniform() / m.H;
}

}  // namespace

PomdpModel fix_id() {
    VectorXd mu(2);
    mu << 1, 0;
    return flip_stay_model(1.0, mu, 1);
}

PomdpModel fix_noisy() {
    VectorXd mu(2);
    mu << 1, 0;
    return flip_stay_model(0.8, mu, 1);
}

PomdpModel fix_dec2() {
    const int H = 3;
    PomdpModel m = make_model(H, 4, 2, 2);
    auto idx = [](int p, int x) { return p * 2 + x; };
    MatrixXd e = MatrixXd::Zero(2, 4);
    for (int p = 0; p < 2; ++p)
        for (int x = 0; x < 2; ++x) e(x, idx(p, x)) = 1.0;
    m.emissions.assign(H, e);
    for (int h = 1; h < H; ++h) {
        for (int a = 0; a < 2; ++a) {
            MatrixXd t = MatrixXd::Zero(4, 4);
            for (int p = 0; p < 2; ++p) {
                for (int x = 0; x < 2; ++x) {
                    const int p2 = x ^ a;
                    t(idx(p2, p), idx(p, x)) += 0.8;
                    t(idx(p2, 1 - p), idx(p, x)) += 0.2;
                }
            }
            m.transitions[h - 1][a] = t;
        }
    }
    m.mu1 = VectorXd::Zero(4);
    m.mu1(idx(0, 0)) = 0.5;
    m.mu1(idx(0, 1)) = 0.5;
    for (auto& r : m.rewards) {
        r.setZero();
        r.row(1).setConstant(1.0 / H);
    }
    m.validate();
    return m;
}

Decoder fix_dec2_decoder() { return derive_decoder(fix_dec2(), 2); }

std::vector<Mdp> fix_lmdp_components() {
    std::vector<Mdp> out;
    for (int k = 0; k < 2; ++k) {
        Mdp d;
        d.H = 3;
        d.S = 2;
        d.A = 2;
        d.mu1 = VectorXd::Constant(2, 0.5);
        for (int h = 1; h < d.H; ++h) {
            std::vector<MatrixXd> per;
            for (int a = 0; a < 2; ++a) {
                const int target = k == 0 ? a : 1 - a;
                MatrixXd t(2, 2);
                for (int s = 0; s < 2; ++s) {
                    t(target, s) = 0.9;
                    t(1 - target, s) = 0.1;
                }
                per.push_back(t);
            }
            d.trans.push_back(per);
            MatrixXd r(2, 2);
            for (int s = 0; s < 2; ++s)
                for (int a = 0; a < 2; ++a) r(s, a) = (a == s) == (k == 0) ? 0.8 : 0.2;
            d.reward_prob.push_back(r);
        }
        out.push_back(d);
    }
    return out;
}

PomdpModel fix_lmdp() { return latent_mdp_to_pomdp(fix_lmdp_components(), VectorXd::Constant(2, 0.5)); }

ModelClass noisy_class() {
    ModelClass c;
    c.window = 1;
    c.truth_index = 0;
    for (int i = 0; i < 8; ++i) {
        const int b0 = i & 1;
        const int b1 = (i >> 1) & 1;
        const int b2 = (i >> 2) & 1;
        VectorXd mu(2);
        if (b0 == 0) {
            mu << 1.0, 0.0;
        } else {
            mu << 0.3, 0.7;
        }
        c.members.push_back(flip_stay_model(b2 == 0 ? 0.8 : 0.6, mu, b1 == 0 ? 1 : 0));
    }
    c.validate();
    return c;
}

PomdpModel random_pomdp(int S, int O, int A, int H, std::uint64_t seed) {
    Rng rng(seed);
    PomdpModel m = make_model(H, S, O, A);
    for (auto& step : m.transitions)
        for (auto& t : step) t = random_stochastic(S, S, rng);
    for (auto& e : m.emissions) e = random_stochastic(O, S, rng);
    m.mu1 = rng.dirichlet(S);
    random_rewards(m, rng);
    m.validate();
    return m;
}

PomdpModel random_revealing(int S, int O, int A, int H, double sigma_floor, std::uint64_t seed) {
    if (O < S) throw ValidationError("revealing fixtures need O >= S");
    Rng rng(seed);
    PomdpModel m = make_model(H, S, O, A);
    for (auto& step : m.transitions)
        for (auto& t : step) t = random_stochastic(S, S, rng);
    for (auto& e : m.emissions) {
        bool ok = false;
        for (int tries = 0; tries < 1000 && !ok; ++tries) {
            const double w = 0.3 + 0.65 * rng.uniform();
            MatrixXd embed = MatrixXd::Zero(O, S);
            for (int s = 0; s < S; ++s) embed(s, s) = 1.0;
            MatrixXd cand = w * embed + (1.0 - w) * random_stochastic(O, S, rng);
            for (int c = 0; c < S; ++c) cand.col(c) /= cand.col(c).sum();
            Eigen::JacobiSVD<MatrixXd> svd(cand);
            if (svd.singularValues()(S - 1) >= sigma_floor) {
                e = cand;
                ok = true;
            }
        }
        if (!ok) throw ValidationError("sigma_min floor " + format_double(sigma_floor) + " unreachable after 1000 draws");
    }
    m.mu1 = rng.dirichlet(S);
    random_rewards(m, rng);
    m.validate();
    return m;
}

PomdpModel random_decodable(int S, int O, int A, int H, std::uint64_t seed) {
    if (O < S) throw ValidationError("decodable fixtures need O >= S");
    Rng rng(seed);
    PomdpModel m = make_model(H, S, O, A);
    for (auto& step : m.transitions)
        for (auto& t : step) t = random_stochastic(S, S, rng);
    for (auto& e : m.emissions) {
        e = MatrixXd::Zero(O, S);
        for (int s = 0; s < S; ++s) {
            std::vector<int> support;
            for (int o = 0; o < O; ++o)
                if (o % S == s) support.push_back(o);
            VectorXd w = rng.dirichlet(static_cast<int>(support.size()));
            for (std::size_t i = 0; i < support.size(); ++i) e(support[i], s) = w(static_cast<int>(i));
        }
    }
    m.mu1 = rng.dirichlet(S);
    random_rewards(m, rng);
    m.validate();
    return m;
}

PomdpModel random_low_rank(int S, int O, int A, int H, int d, std::uint64_t seed) {
    Rng rng(seed);
    for (int tries = 0; tries < 1000; ++tries) {
        PomdpModel m = make_model(H, S, O, A);
        MatrixXd psi = random_stochastic(S, d, rng, 0.5);
        for (auto& step : m.transitions)
            for (auto& t : step) t = psi * random_stochastic(d, S, rng);
        for (auto& e : m.emissions) e = random_stochastic(O, S, rng);
        m.mu1 = psi * rng.dirichlet(d);
        random_rewards(m, rng);
        bool ok = true;
        for (const auto& e : m.emissions) {
            MatrixXd mp = e * psi;
            Eigen::JacobiSVD<MatrixXd> svd(mp);
            if (svd.singularValues()(d - 1) < 0.05) ok = false;
        }
        if (!ok) continue;
        // Re-normalize columns exactly for validation.
        for (auto& step : m.transitions)
            for (auto& t : step)
                for (int c = 0; c < S; ++c) t.col(c) /= t.col(c).sum();
        m.mu1 /= m.mu1.sum();
        m.validate();
        return m;
    }
    throw ValidationError("could not draw a well-conditioned low-rank model");
}

bool fixture_is_class(const std::string& name) { return name == "FIX-NOISY-CLASS"; }

PomdpModel fixture_model(const std::string& name) {
    if (name == "FIX-ID") return fix_id();
    if (name == "FIX-NOISY") return fix_noisy();
    if (name == "FIX-DEC2") return fix_dec2();
    if (name == "FIX-LMDP") return fix_lmdp();
    throw ValidationError("unknown fixture " + name);
}

nlohmann::json generate_fixture(const std::string& name, const nlohmann::json& params, std::uint64_t seed) {
    if (name == "FIX-NOISY-CLASS") return class_to_json(noisy_class());
    if (name == "random-revealing") {
        return model_to_json(random_revealing(params.value("S", 2), params.value("O", 2), params.value("A", 2),
                                              params.value("H", 2), params.value("sigma_floor", 0.3), seed));
    }
    if (name == "random-decodable") {
        return model_to_json(random_decodable(params.value("S", 2), params.value("O", 3), params.value("A", 2),
                                              params.value("H", 2), seed));
    }
    if (name == "random-low-rank") {
        return model_to_json(random_low_rank(params.value("S", 4), params.value("O", 2), params.value("A", 2),
                                             params.value("H", 3), params.value("d", 2), seed));
    }
    return model_to_json(fixture_model(name));
}

}  // namespace psrlab
