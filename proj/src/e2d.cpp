#include "psrlab/distribution.hpp"
#include "psrlab/learners.hpp"
#include "psrlab/norms.hpp"

#include <cmath>

namespace psrlab {

namespace {

constexpr std::uint64_t kE2d = 2;
constexpr std::uint64_t kRfE2d = 4;

VectorXd softmax(const std::vector<double>& logw, const std::vector<bool>& excluded) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logw.size(); ++i)
        if (!excluded[i]) top = std::max(top, logw[i]);
    VectorXd w = VectorXd::Zero(static_cast<int>(logw.size()));
    for (std::size_t i = 0; i < logw.size(); ++i)
        if (!excluded[i]) w(static_cast<int>(i)) = std::exp(logw[i] - top);
    const double s = w.sum();
    if (!(s > 0.0)) throw SolverError("every member assigns zero likelihood");
    return w / s;
}

double entropy(const VectorXd& mu) {
    double e = 0.0;
    for (int i = 0; i < mu.size(); ++i)
        if (mu(i) > 0.0) e -= mu(i) * std::log(mu(i));
    return e;
}

int support(const VectorXd& mu) {
    int c = 0;
    for (int i = 0; i < mu.size(); ++i)
        if (mu(i) > 1e-12) ++c;
    return c;
}

// C[theta][j] = E_{other ~ mu} D_H^2(P^{pi_j}_theta, P^{pi_j}_other)
MatrixXd info_matrix(const HellingerTable& hell, const VectorXd& mu, int n) {
    const int m = static_cast<int>(hell.size());
    MatrixXd c = MatrixXd::Zero(n, m);
    for (int j = 0; j < m; ++j)
        for (int theta = 0; theta < n; ++theta)
            for (int o = 0; o < n; ++o) c(theta, j) += mu(o) * hell[j][theta][o];
    return c;
}

MatrixXd gap_matrix(const ClassTables& tables, const PolicyPool& pool) {
    const int n = tables.size();
    MatrixXd g(n, pool.size());
    for (int theta = 0; theta < n; ++theta)
        for (int j = 0; j < pool.size(); ++j)
            g(theta, j) = tables.opt_value[theta] - tables.value(theta, pool.factors[j]);
    return g;
}

SaddleResult solve_saddle(const MatrixXd& g, const MatrixXd& c, double gamma, const SaddleConfig& cfg) {
    const int n = static_cast<int>(g.rows());
    const int m = static_cast<int>(g.cols());
    MatrixXd mat(n, 2 * m);
    mat.leftCols(m) = -gamma * c;
    mat.rightCols(m) = g;
    const std::vector<int> blocks{m, m};
    SaddleResult r;
    BlockGameSolution sol;
    if (cfg.method == SaddleMethod::Exact) {
        sol = solve_block_game(mat, blocks);
        r.gap = std::max(0.0, sol.value - sol.dual_value);
    } else {
        EgReport rep;
        sol = solve_block_game_eg(mat, blocks, cfg.step_scale, cfg.max_iterations, cfg.tolerance, &rep);
        r.gap = rep.gap;
        r.iterations = rep.iterations;
        r.converged = rep.converged;
    }
    r.p_exp = sol.x.head(m);
    r.p_out = sol.x.tail(m);
    r.value = sol.value;
    return r;
}

std::vector<double> abs_mixture(const ClassTables& tables, int theta, const VectorXd& mu) {
    std::vector<double> v(tables.do_prob[theta].size(), 0.0);
    for (int o = 0; o < mu.size(); ++o) {
        if (mu(o) == 0.0) continue;
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] += mu(o) * std::abs(tables.do_prob[theta][i] - tables.do_prob[o][i]);
    }
    return v;
}

std::vector<double> deterministic_factor(const std::vector<std::vector<int>>& choice, int H, int O, int A) {
    const std::uint64_t n = ipow(static_cast<std::uint64_t>(O) * A, H);
    std::vector<double> f(n, 0.0);
    for (std::uint64_t i = 0; i < n; ++i) {
        const Trajectory t = trajectory_from_index(i, H, O, A);
        bool ok = true;
        for (int k = 1; k <= H && ok; ++k)
            ok = t.act[k - 1] == choice[k - 1][history_index(t, k, O, A)];
        f[i] = ok ? 1.0 : 0.0;
    }
    return f;
}

// Gap columns of every deterministic policy, dominated columns dropped.
// Empty when the policy count exceeds the enumeration cap.
MatrixXd deterministic_gap_columns(const ClassTables& tables) {
    const int H = tables.H;
    const int O = tables.O;
    const int A = tables.A;
    std::vector<std::uint64_t> sizes;
    std::uint64_t slots = 0;
    for (int h = 1; h <= H; ++h) {
        sizes.push_back(ipow(static_cast<std::uint64_t>(O) * A, h - 1) * O);
        slots += sizes.back();
    }
    if (slots >= 64 || ipow(static_cast<std::uint64_t>(A), static_cast<int>(slots)) > enumeration_cap()) return {};
    const int n = tables.size();
    std::vector<VectorXd> cols;
    std::vector<std::vector<int>> choice(H);
    for (int h = 0; h < H; ++h) choice[h].assign(sizes[h], 0);
    for (bool more = true; more;) {
        const std::vector<double> f = deterministic_factor(choice, H, O, A);
        VectorXd g(n);
        for (int theta = 0; theta < n; ++theta) g(theta) = tables.opt_value[theta] - tables.value(theta, f);
        cols.push_back(g);
        more = false;
        for (int h = 0; h < H && !more; ++h)
            for (auto& c : choice[h]) {
                if (++c < A) {
                    more = true;
                    break;
                }
                c = 0;
            }
    }
    std::vector<int> keep;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < cols.size() && !dominated; ++j) {
            if (i == j) continue;
            const bool le = (cols[j].array() <= cols[i].array()).all();
            dominated = le && ((cols[j].array() < cols[i].array()).any() || j < i);
        }
        if (!dominated) keep.push_back(static_cast<int>(i));
    }
    MatrixXd out(n, static_cast<int>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) out.col(static_cast<int>(k)) = cols[keep[k]];
    return out;
}

// Saddle value with p_out over pool and the extra columns.
double widened_value(const MatrixXd& g, const MatrixXd& extra, const MatrixXd& c, double gamma) {
    const int n = static_cast<int>(g.rows());
    const int m = static_cast<int>(g.cols());
    const int k = static_cast<int>(extra.cols());
    MatrixXd mat(n, 2 * m + k);
    mat.leftCols(m) = -gamma * c;
    mat.middleCols(m, m) = g;
    mat.rightCols(k) = extra;
    return solve_block_game(mat, {m, m + k}).value;
}

}  // namespace

SaddleResult edec_saddle(const ClassTables& tables, const VectorXd& mu, double gamma, const PolicyPool& pool,
                         const HellingerTable& hell, const SaddleConfig& cfg) {
    if (gamma < 0.0) throw ValidationError("gamma must be nonnegative");
    if (mu.size() != tables.size()) throw ValidationError("mu must cover the class");
    return solve_saddle(gap_matrix(tables, pool), info_matrix(hell, mu, tables.size()), gamma, cfg);
}

SaddleResult edec_saddle(const ClassTables& tables, const VectorXd& mu, double gamma, const PolicyPool& pool,
                         const SaddleConfig& cfg) {
    return edec_saddle(tables, mu, gamma, pool, hellinger_table(tables, pool), cfg);
}

double edec_objective(const ClassTables& tables, const VectorXd& mu, double gamma, const PolicyPool& pool,
                      const VectorXd& p_exp, const VectorXd& p_out) {
    const MatrixXd g = gap_matrix(tables, pool);
    const MatrixXd c = info_matrix(hellinger_table(tables, pool), mu, tables.size());
    return (g * p_out - gamma * (c * p_exp)).maxCoeff();
}

LearnResult explorative_e2d(const ModelClass& cls, int T, double gamma, double eta, std::uint64_t seed,
                            const SaddleConfig& cfg) {
    if (T <= 0) throw ValidationError("E2D needs T >= 1");
    const ClassTables tables(cls);
    const int n = tables.size();
    const OptimisticCover cover = exact_cover(tables);
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    const PolicyPool pool = build_policy_pool(tables, all);
    const HellingerTable hell = hellinger_table(tables, pool);
    const MatrixXd g = gap_matrix(tables, pool);
    std::vector<double> sub(pool.size());
    for (int j = 0; j < pool.size(); ++j) sub[j] = tables.suboptimality(pool.factors[j]);

    std::vector<double> logw(n, 0.0);
    std::vector<bool> excluded(n, false);
    VectorXd out = VectorXd::Zero(pool.size());
    LearnResult res;
    res.log.algorithm = "e2d";
    res.log.seed = seed;
    res.log.config = {{"T", T}, {"gamma", gamma}, {"eta", eta},
                      {"saddle", cfg.method == SaddleMethod::Exact ? "exact" : "eg"}};
    double cum = 0.0;
    double worst_gap = 0.0;
    bool all_converged = true;
    const MatrixXd extra = deterministic_gap_columns(tables);
    double restriction = 0.0;
    VectorXd mu = softmax(logw, excluded);
    for (int t = 1; t <= T; ++t) {
        const MatrixXd c = info_matrix(hell, mu, n);
        const SaddleResult s = solve_saddle(g, c, gamma, cfg);
        worst_gap = std::max(worst_gap, s.gap);
        if (extra.cols() > 0) restriction = std::max(restriction, s.value - widened_value(g, extra, c, gamma));
        all_converged = all_converged && s.converged;
        Rng pick(derive_seed(seed, {kE2d, static_cast<std::uint64_t>(t), 0}));
        const int j = pick.categorical(s.p_exp);
        Rng roll(derive_seed(seed, {kE2d, static_cast<std::uint64_t>(t), 1}));
        const Trajectory tau = sample_trajectory(cls.truth(), pool.policies[j], roll);
        const std::uint64_t idx = trajectory_index(tau, tables.O, tables.A);

        RunRecord rec;
        rec.iteration = t;
        rec.chosen = j;
        rec.policy = pool.labels[j];
        rec.trajectory = to_string(tau);
        rec.set_size = support(mu);
        rec.truth_mass = mu(tables.truth);
        rec.truth_in_set = mu(tables.truth) > 0.0;
        rec.entropy = entropy(mu);
        for (int k = 0; k < pool.size(); ++k) rec.suboptimality += s.p_out(k) * sub[k];
        cum += rec.suboptimality;
        rec.running_mean = cum / t;
        rec.extra = s.value;
        res.log.records.push_back(rec);
        res.log.posteriors.push_back(std::vector<double>(mu.data(), mu.data() + n));
        out += s.p_out;

        for (std::size_t k = 0; k < cover.members.size(); ++k) {
            bool flagged = false;
            logw[cover.members[k]] += eta * floored_log(cover.likelihood[k][idx], &flagged);
            if (flagged) excluded[cover.members[k]] = true;
        }
        mu = softmax(logw, excluded);
    }
    out /= T;
    std::vector<double> w;
    std::vector<Policy> comps;
    for (int j = 0; j < pool.size(); ++j) {
        if (out(j) <= 0.0) continue;
        w.push_back(out(j));
        comps.push_back(pool.policies[j]);
    }
    res.output = Policy::mixture(w, comps);
    res.output_suboptimality = cum / T;
    res.log.summary = {{"output_suboptimality", res.output_suboptimality},
                       {"final_truth_mass", mu(tables.truth)},
                       {"max_saddle_gap", worst_gap},
                       {"saddle_converged", all_converged},
                       {"pool_size", pool.size()},
                       {"pool_restriction_gap", extra.cols() > 0 ? nlohmann::json(restriction) : nlohmann::json()}};
    return res;
}

double sup_tv(const std::vector<double>& p, const std::vector<double>& q, int O, int A) {
    VectorXd d(static_cast<int>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) d(static_cast<int>(i)) = p[i] - q[i];
    return 0.5 * pi_norm(d, O, A);
}

bool RfCuts::add(const ClassTables& tables, int theta, const std::vector<std::vector<int>>& choice) {
    const std::vector<double> f = deterministic_factor(choice, tables.H, tables.O, tables.A);
    const int n = tables.size();
    VectorXd coef(n);
    for (int o = 0; o < n; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * std::abs(tables.do_prob[theta][i] - tables.do_prob[o][i]);
        coef(o) = 0.5 * s;
    }
    for (std::size_t k = 0; k < this->theta.size(); ++k)
        if (this->theta[k] == theta && (tv[k] - coef).cwiseAbs().maxCoeff() == 0.0) return false;
    this->theta.push_back(theta);
    tv.push_back(std::move(coef));
    return true;
}

void RfCuts::seed_uniform(const ClassTables& tables) {
    const int n = tables.size();
    const VectorXd uniform = VectorXd::Constant(n, 1.0 / n);
    for (int theta = 0; theta < n; ++theta) {
        const std::vector<double> v = abs_mixture(tables, theta, uniform);
        add(tables, theta,
            pi_norm_argmax(Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), tables.O, tables.A)
                .choice);
    }
}

double rf_objective(const ClassTables& tables, const VectorXd& mu, double gamma, const HellingerTable& hell,
                    const VectorXd& p_exp, const VectorXd& mu_out) {
    const MatrixXd c = info_matrix(hell, mu, tables.size());
    double value = -std::numeric_limits<double>::infinity();
    for (int theta = 0; theta < tables.size(); ++theta) {
        const std::vector<double> v = abs_mixture(tables, theta, mu_out);
        value = std::max(value, 0.5 * pi_norm(v, tables.O, tables.A) - gamma * c.row(theta).dot(p_exp));
    }
    return value;
}

RfSaddle rf_saddle(const ClassTables& tables, const VectorXd& mu, double gamma, const PolicyPool& pool,
                   const HellingerTable& hell, RfCuts& cuts, int max_rounds) {
    const int n = tables.size();
    const int m = pool.size();
    if (cuts.theta.empty()) cuts.seed_uniform(tables);
    const MatrixXd c = info_matrix(hell, mu, n);
    RfSaddle out;
    for (int round = 0; round < max_rounds; ++round) {
        ++out.rounds;
        const int rows = static_cast<int>(cuts.theta.size());
        MatrixXd mat(rows, m + n);
        for (int k = 0; k < rows; ++k) {
            mat.block(k, 0, 1, m) = -gamma * c.row(cuts.theta[k]);
            mat.block(k, m, 1, n) = cuts.tv[k].transpose();
        }
        const BlockGameSolution sol = solve_block_game(mat, {m, n});
        out.p_exp = sol.x.head(m);
        out.mu_out = sol.x.tail(n);
        out.lp_value = sol.value;
        bool added = false;
        out.value = -std::numeric_limits<double>::infinity();
        for (int theta = 0; theta < n; ++theta) {
            const std::vector<double> v = abs_mixture(tables, theta, out.mu_out);
            const PiNormResult pn = pi_norm_argmax(
                Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), tables.O, tables.A);
            const double exact = 0.5 * pn.value - gamma * c.row(theta).dot(out.p_exp);
            out.value = std::max(out.value, exact);
            if (exact > sol.value + 1e-10 && cuts.add(tables, theta, pn.choice)) added = true;
        }
        if (!added) break;
    }
    return out;
}

RfResult rf_e2d(const ModelClass& cls, int T, double gamma, double eta, std::uint64_t seed) {
    if (T <= 0) throw ValidationError("RF-E2D needs T >= 1");
    const ClassTables tables(cls);
    const int n = tables.size();
    const OptimisticCover cover = exact_cover(tables);
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    const PolicyPool pool = build_policy_pool(tables, all);
    const HellingerTable hell = hellinger_table(tables, pool);
    RfCuts cuts;
    cuts.seed_uniform(tables);

    auto projection = [&](const VectorXd& mu_out, double* err) {
        int best = 0;
        double best_v = std::numeric_limits<double>::infinity();
        for (int theta = 0; theta < n; ++theta) {
            const std::vector<double> v = abs_mixture(tables, theta, mu_out);
            const double val = 0.5 * pi_norm(v, tables.O, tables.A);
            if (val < best_v - 1e-15) {
                best_v = val;
                best = theta;
            }
        }
        if (err) *err = sup_tv(tables.do_prob[best], tables.do_prob[tables.truth], tables.O, tables.A);
        return best;
    };

    std::vector<double> logw(n, 0.0);
    std::vector<bool> excluded(n, false);
    VectorXd mu = softmax(logw, excluded);
    VectorXd mu_sum = VectorXd::Zero(n);
    RfResult res;
    res.log.algorithm = "rfe2d";
    res.log.seed = seed;
    res.log.config = {{"T", T}, {"gamma", gamma}, {"eta", eta}};
    double cum = 0.0;
    int total_rounds = 0;
    for (int t = 1; t <= T; ++t) {
        const RfSaddle sad = rf_saddle(tables, mu, gamma, pool, hell, cuts);
        total_rounds += sad.rounds;
        const VectorXd& p_exp = sad.p_exp;
        const VectorXd& mu_out = sad.mu_out;
        const double value = sad.value;
        Rng pick(derive_seed(seed, {kRfE2d, static_cast<std::uint64_t>(t), 0}));
        const int j = pick.categorical(p_exp);
        Rng roll(derive_seed(seed, {kRfE2d, static_cast<std::uint64_t>(t), 1}));
        const Trajectory tau = sample_trajectory(cls.truth(), pool.policies[j], roll);
        const std::uint64_t idx = trajectory_index(tau, tables.O, tables.A);
        mu_sum += mu_out;

        RunRecord rec;
        rec.iteration = t;
        rec.chosen = j;
        rec.policy = pool.labels[j];
        rec.trajectory = to_string(tau);
        rec.set_size = support(mu);
        rec.truth_mass = mu(tables.truth);
        rec.truth_in_set = mu(tables.truth) > 0.0;
        rec.entropy = entropy(mu);
        projection(mu_sum / t, &rec.suboptimality);
        cum += rec.suboptimality;
        rec.running_mean = cum / t;
        rec.extra = value;
        res.log.records.push_back(rec);
        res.log.posteriors.push_back(std::vector<double>(mu.data(), mu.data() + n));

        for (std::size_t k = 0; k < cover.members.size(); ++k) {
            bool flagged = false;
            logw[cover.members[k]] += eta * floored_log(cover.likelihood[k][idx], &flagged);
            if (flagged) excluded[cover.members[k]] = true;
        }
        mu = softmax(logw, excluded);
    }
    res.mu_out = mu_sum / T;
    res.estimate = projection(res.mu_out, &res.estimation_error);
    res.log.summary = {{"estimate", res.estimate},
                       {"estimation_error", res.estimation_error},
                       {"final_truth_mass", mu(tables.truth)},
                       {"cuts", cuts.theta.size()},
                       {"cutting_plane_rounds", total_rounds}};
    return res;
}

}  // namespace psrlab
