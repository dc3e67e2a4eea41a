#include "psrlab/brep.hpp"

#include "psrlab/distribution.hpp"
#include "psrlab/lp.hpp"
#include "psrlab/predictive.hpp"

#include <cmath>
#include <functional>

namespace psrlab {

BRep zero_brep(const CoreTestSet& core) {
    BRep b;
    b.core = core;
    b.q0 = VectorXd::Zero(core.size(1));
    const int n = core.num_obs() * core.num_actions();
    for (int h = 1; h <= core.horizon(); ++h) b.ops.emplace_back(n, MatrixXd::Zero(core.size(h + 1), core.size(h)));
    return b;
}

MatrixXd forward_operator(const BRep& b, int h) {
    const int H = b.H();
    const int OA = b.O() * b.A();
    if (h == H + 1) return MatrixXd::Identity(1, 1);
    ipow_checked(OA, H - h + 1, "forward operator");
    MatrixXd next = MatrixXd::Identity(1, 1);
    for (int k = H; k >= h; --k) {
        const int rows = static_cast<int>(next.rows());
        MatrixXd cur(rows * OA, b.core.size(k));
        for (int p = 0; p < OA; ++p) cur.middleRows(p * rows, rows) = next * b.ops[k - 1][p];
        next = std::move(cur);
    }
    return next;
}

std::vector<double> brep_do_probabilities(const BRep& b) {
    VectorXd v = forward_operator(b, 1) * b.q0;
    return std::vector<double>(v.data(), v.data() + v.size());
}

VectorXd brep_prefix_vector(const BRep& b, const Trajectory& tau) {
    VectorXd v = b.q0;
    for (int k = 1; k <= tau.length(); ++k) v = b.op(k, tau.obs[k - 1], tau.act[k - 1]) * v;
    return v;
}

double validate_brep(const BRep& b, const PomdpModel& model) {
    const int H = model.H;
    const int O = model.O;
    const int A = model.A;
    if (b.H() != H || b.O() != O || b.A() != A) throw ValidationError("brep and model disagree on shape");
    const CoreTestSet& core = b.core;
    double res = 0.0;
    // Product identity over all (h, tau_h, t_{h+1}).
    std::function<void(const Trajectory&, const VectorXd&)> rec = [&](const Trajectory& tau, const VectorXd& v) {
        VectorXd truth = joint_test_vector(model, core, tau);
        res = std::max(res, (v - truth).cwiseAbs().maxCoeff());
        const int h = tau.length();
        if (h == H) return;
        for (int o = 0; o < O; ++o) {
            for (int a = 0; a < A; ++a) {
                Trajectory t2 = tau;
                t2.obs.push_back(o);
                t2.act.push_back(a);
                rec(t2, b.op(h + 1, o, a) * v);
            }
        }
    };
    rec(Trajectory{}, b.q0);

    // One-step identity and future identity on reachable histories.
    for (int h = 1; h <= H; ++h) {
        MatrixXd w = forward_operator(b, h);
        const std::uint64_t n = ipow(static_cast<std::uint64_t>(O) * A, h - 1);
        const std::uint64_t nf = ipow(static_cast<std::uint64_t>(O) * A, H - h + 1);
        for (std::uint64_t i = 0; i < n; ++i) {
            Trajectory tau = trajectory_from_index(i, h - 1, O, A);
            double p = history_probability(model, tau);
            if (p <= 0.0) continue;
            VectorXd q = predictive_state(model, core, tau);
            for (int o = 0; o < O; ++o) {
                for (int a = 0; a < A; ++a) {
                    Trajectory t2 = tau;
                    t2.obs.push_back(o);
                    t2.act.push_back(a);
                    VectorXd lhs = joint_test_vector(model, core, t2) / p;
                    res = std::max(res, (lhs - b.op(h, o, a) * q).cwiseAbs().maxCoeff());
                }
            }
            VectorXd fut = w * q;
            for (std::uint64_t j = 0; j < nf; ++j) {
                Trajectory f = trajectory_from_index(j, H - h + 1, O, A);
                Trajectory full = tau;
                full.obs.insert(full.obs.end(), f.obs.begin(), f.obs.end());
                full.act.insert(full.act.end(), f.act.begin(), f.act.end());
                double cond = history_probability(model, full) / p;
                res = std::max(res, std::abs(fut(static_cast<int>(j)) - cond));
            }
        }
    }
    return res;
}

MatrixXd l1_left_inverse(const MatrixXd& m) {
    const int U = static_cast<int>(m.rows());
    const int S = static_cast<int>(m.cols());
    const int nx = S * U;
    // Variables: X+ (nx), X- (nx), t. X(i,j) stored at j*S + i.
    LinearProgram lp;
    lp.c = VectorXd::Zero(2 * nx + 1);
    lp.c(2 * nx) = 1.0;
    lp.a_eq = MatrixXd::Zero(S * S, 2 * nx + 1);
    lp.b_eq = VectorXd::Zero(S * S);
    for (int i = 0; i < S; ++i) {
        for (int k = 0; k < S; ++k) {
            const int row = i * S + k;
            for (int j = 0; j < U; ++j) {
                lp.a_eq(row, j * S + i) = m(j, k);
                lp.a_eq(row, nx + j * S + i) = -m(j, k);
            }
            lp.b_eq(row) = i == k ? 1.0 : 0.0;
        }
    }
    lp.a_ub = MatrixXd::Zero(U, 2 * nx + 1);
    lp.b_ub = VectorXd::Zero(U);
    for (int j = 0; j < U; ++j) {
        for (int i = 0; i < S; ++i) {
            lp.a_ub(j, j * S + i) = 1.0;
            lp.a_ub(j, nx + j * S + i) = 1.0;
        }
        lp.a_ub(j, 2 * nx) = -1.0;
    }
    LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal) throw SolverError("l1 left-inverse LP did not reach optimality");
    MatrixXd x(S, U);
    for (int j = 0; j < U; ++j)
        for (int i = 0; i < S; ++i) x(i, j) = r.x(j * S + i) - r.x(nx + j * S + i);
    return x;
}

namespace {

// 1(t_h = (o, a, t_{h+1})), with the dummy test standing for the empty tail.
MatrixXd indicator_shift(const CoreTestSet& core, int h, int o, int a) {
    const auto& cur = core.tests(h);
    const auto& nxt = core.tests(h + 1);
    MatrixXd m = MatrixXd::Zero(static_cast<int>(nxt.size()), static_cast<int>(cur.size()));
    for (int j = 0; j < static_cast<int>(nxt.size()); ++j) {
        Test want;
        want.obs.push_back(o);
        if (!nxt[j].dummy) {
            want.act.push_back(a);
            want.obs.insert(want.obs.end(), nxt[j].obs.begin(), nxt[j].obs.end());
            want.act.insert(want.act.end(), nxt[j].act.begin(), nxt[j].act.end());
        }
        int i = core.index_of(h, want);
        if (i >= 0) m(j, i) = 1.0;
    }
    return m;
}

BRep operators_from_natural(const PomdpModel& model, const CoreTestSet& core, int m,
                            const std::vector<MatrixXd>& mats, const std::vector<MatrixXd>& inverses) {
    BRep b;
    b.core = core;
    b.q0 = mats[0] * model.mu1;
    for (int h = 1; h <= model.H; ++h) {
        std::vector<MatrixXd> per;
        for (int o = 0; o < model.O; ++o) {
            for (int a = 0; a < model.A; ++a) {
                if (h <= model.H - m) {
                    per.push_back(mats[h] * model.trans(h, a) * model.emit(h).row(o).transpose().asDiagonal() *
                                  inverses[h - 1]);
                } else {
                    per.push_back(indicator_shift(core, h, o, a));
                }
            }
        }
        b.ops.push_back(std::move(per));
    }
    return b;
}

double sigma_rank_s(const MatrixXd& m, int S) {
    Eigen::JacobiSVD<MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    return sv.size() >= S ? sv(S - 1) : 0.0;
}

}  // namespace

BRep brep_revealing(const PomdpModel& model, int m, InverseMode mode) {
    CoreTestSet core = default_core_tests(model, m);
    const int H = model.H;
    std::vector<MatrixXd> mats;
    for (int h = 1; h <= H; ++h) mats.push_back(emission_action_matrix(model, core, h));
    double alpha = std::numeric_limits<double>::infinity();
    for (int h = 1; h <= H - m + 1; ++h) {
        double sig = sigma_rank_s(mats[h - 1], model.S);
        alpha = std::min(alpha, sig);
        if (numerical_rank(mats[h - 1]) < model.S || sig <= 1e-12) {
            throw RankDeficiencyError("emission-action matrix M_" + std::to_string(h) + " has rank below S; sigma_S = " +
                                          format_double(sig),
                                      sig);
        }
    }
    std::vector<MatrixXd> inv;
    double inv_norm = 0.0;
    for (int h = 1; h <= H - m; ++h) {
        MatrixXd x = mode == InverseMode::Pseudo ? pseudo_inverse(mats[h - 1]) : l1_left_inverse(mats[h - 1]);
        inv_norm = std::max(inv_norm, norm_1to1(x));
        inv.push_back(std::move(x));
    }
    BRep b = operators_from_natural(model, core, m, mats, inv);
    b.provenance = "revealing";
    b.diagnostics["alpha_rev"] = alpha;
    b.diagnostics["num_states"] = model.S;
    b.diagnostics["max_left_inverse_norm_1to1"] = inv_norm;
    b.diagnostics["window"] = m;
    b.diagnostics["l1_left"] = mode == InverseMode::L1Left ? 1.0 : 0.0;
    return b;
}

BRep brep_future_sufficient(const PomdpModel& model, int m, const std::optional<std::vector<MatrixXd>>& m_natural,
                            NaturalMode mode) {
    CoreTestSet core = default_core_tests(model, m);
    const int H = model.H;
    std::vector<MatrixXd> mats;
    for (int h = 1; h <= H; ++h) mats.push_back(emission_action_matrix(model, core, h));
    std::vector<MatrixXd> nat;
    double raw = 0.0;
    double worst_residual = 0.0;
    for (int h = 1; h <= H - m; ++h) {
        // T_{h-1} as an S x (S*A) block row; mu1 stands in for T_0.
        MatrixXd t;
        if (h == 1) {
            t = model.mu1;
        } else {
            t.resize(model.S, model.S * model.A);
            for (int a = 0; a < model.A; ++a) t.middleCols(a * model.S, model.S) = model.trans(h - 1, a);
        }
        MatrixXd x;
        if (m_natural.has_value()) {
            if (static_cast<int>(m_natural->size()) < h) throw ValidationError("m_natural needs one matrix per step h <= H-m");
            x = (*m_natural)[h - 1];
        } else if (mode == NaturalMode::Pseudo) {
            x = pseudo_inverse(mats[h - 1]);
        } else {
            Eigen::JacobiSVD<MatrixXd> svd(t, Eigen::ComputeThinU);
            int r = numerical_rank(t);
            MatrixXd psi = svd.matrixU().leftCols(r);
            x = psi * pseudo_inverse(mats[h - 1] * psi);
        }
        if (x.rows() != model.S || x.cols() != mats[h - 1].rows())
            throw ValidationError("m_natural has the wrong shape at step " + std::to_string(h));
        double resid = (x * mats[h - 1] * t - t).cwiseAbs().maxCoeff();
        worst_residual = std::max(worst_residual, resid);
        if (resid > 1e-9) {
            throw ConstraintError("M_natural M T != T at step " + std::to_string(h) + ", residual " + format_double(resid),
                                  resid);
        }
        raw = std::max(raw, norm_1to1(x));
        nat.push_back(std::move(x));
    }
    BRep b = operators_from_natural(model, core, m, mats, nat);
    b.provenance = "future-sufficient";
    b.diagnostics["natural_norm_1to1"] = raw;
    b.diagnostics["nu"] = std::max(1.0, raw);
    b.diagnostics["constraint_residual"] = worst_residual;
    b.diagnostics["window"] = m;
    return b;
}

std::optional<int> Decoder::decode(int h, const std::vector<int>& z) const {
    if (h < 1 || h > static_cast<int>(phi.size())) return std::nullopt;
    auto it = phi[h - 1].find(z);
    if (it == phi[h - 1].end()) return std::nullopt;
    return it->second;
}

std::vector<int> decoder_window(const Trajectory& history, int h, int m) {
    const int w = std::min(m, h);
    std::vector<int> z;
    for (int k = h - w + 1; k <= h; ++k) {
        z.push_back(history.obs[k - 1]);
        if (k < h) z.push_back(history.act[k - 1]);
    }
    return z;
}

namespace {

// Visits every positive-probability (latent state, history) pair.
void enumerate_latent(const PomdpModel& model, const std::function<void(int, int, const Trajectory&)>& visit) {
    std::function<void(int, int, Trajectory&)> rec = [&](int h, int s, Trajectory& hist) {
        for (int o = 0; o < model.O; ++o) {
            if (model.emit(h)(o, s) <= 0.0) continue;
            hist.obs.push_back(o);
            visit(h, s, hist);
            if (h < model.H) {
                for (int a = 0; a < model.A; ++a) {
                    hist.act.push_back(a);
                    for (int s2 = 0; s2 < model.S; ++s2)
                        if (model.trans(h, a)(s2, s) > 0.0) rec(h + 1, s2, hist);
                    hist.act.pop_back();
                }
            }
            hist.obs.pop_back();
        }
    };
    for (int s = 0; s < model.S; ++s) {
        if (model.mu1(s) <= 0.0) continue;
        Trajectory hist;
        rec(1, s, hist);
    }
}

}  // namespace

Decoder derive_decoder(const PomdpModel& model, int m) {
    Decoder d;
    d.m = m;
    d.phi.resize(model.H);
    enumerate_latent(model, [&](int h, int s, const Trajectory& hist) {
        auto z = decoder_window(hist, h, m);
        auto [it, inserted] = d.phi[h - 1].emplace(z, s);
        if (!inserted && it->second != s) {
            throw DecoderError("window at step " + std::to_string(h) + " is consistent with latent states " +
                               std::to_string(it->second) + " and " + std::to_string(s));
        }
    });
    return d;
}

void verify_decoder(const PomdpModel& model, const Decoder& d) {
    if (static_cast<int>(d.phi.size()) != model.H) throw DecoderError("decoder needs one map per step");
    enumerate_latent(model, [&](int h, int s, const Trajectory& hist) {
        auto got = d.decode(h, decoder_window(hist, h, d.m));
        if (!got.has_value() || *got != s) {
            throw DecoderError("decoder disagrees with the realized latent state at step " + std::to_string(h));
        }
    });
}

BRep brep_decodable(const PomdpModel& model, const Decoder& decoder, int m) {
    if (decoder.m != m) throw DecoderError("decoder window differs from m");
    verify_decoder(model, decoder);
    CoreTestSet core = default_core_tests(model, m);
    const int H = model.H;
    BRep b;
    b.core = core;
    b.q0 = joint_test_vector(model, core, Trajectory{});
    for (int h = 1; h <= H; ++h) {
        std::vector<MatrixXd> per;
        for (int o = 0; o < model.O; ++o) {
            for (int a = 0; a < model.A; ++a) {
                if (h > H - m) {
                    per.push_back(indicator_shift(core, h, o, a));
                    continue;
                }
                const auto& cur = core.tests(h);
                const auto& nxt = core.tests(h + 1);
                MatrixXd mat = MatrixXd::Zero(static_cast<int>(nxt.size()), static_cast<int>(cur.size()));
                for (int j = 0; j < static_cast<int>(nxt.size()); ++j) {
                    Test w;
                    w.obs.push_back(o);
                    w.act.push_back(a);
                    w.obs.insert(w.obs.end(), nxt[j].obs.begin(), nxt[j].obs.end());
                    w.act.insert(w.act.end(), nxt[j].act.begin(), nxt[j].act.end());
                    Test prefix;
                    prefix.obs.assign(w.obs.begin(), w.obs.begin() + m);
                    prefix.act.assign(w.act.begin(), w.act.begin() + (m - 1));
                    int i = core.index_of(h, prefix);
                    if (i < 0) continue;
                    Trajectory zt;
                    zt.obs = prefix.obs;
                    zt.act = prefix.act;
                    auto s = decoder.decode(h + m - 1, decoder_window(zt, m, m));
                    if (!s.has_value()) continue;
                    const int act = w.act[m - 1];
                    const int obs = w.obs[m];
                    VectorXd next_state = model.trans(h + m - 1, act).col(*s);
                    mat(j, i) = model.emit(h + m).row(obs).dot(next_state);
                }
                per.push_back(std::move(mat));
            }
        }
        b.ops.push_back(std::move(per));
    }
    b.provenance = "decodable";
    b.diagnostics["window"] = m;
    return b;
}

std::vector<int> select_core_columns(const MatrixXd& d, CoreChoice choice, bool* exhaustive) {
    // Drop zero and duplicate columns; they never help.
    std::vector<int> keep;
    for (int j = 0; j < d.cols(); ++j) {
        if (d.col(j).cwiseAbs().maxCoeff() <= 1e-14) continue;
        bool dup = false;
        for (int k : keep)
            if ((d.col(j) - d.col(k)).cwiseAbs().maxCoeff() <= 1e-12) dup = true;
        if (!dup) keep.push_back(j);
    }
    MatrixXd cols(d.rows(), static_cast<int>(keep.size()));
    for (int i = 0; i < static_cast<int>(keep.size()); ++i) cols.col(i) = d.col(keep[i]);
    const int n = static_cast<int>(cols.cols());
    const int r = numerical_rank(cols);
    if (exhaustive) *exhaustive = true;
    if (r == 0) return {};
    double count = 1.0;
    for (int i = 0; i < r; ++i) count = count * (n - i) / (i + 1);
    const bool use_exhaustive = choice == CoreChoice::Exhaustive || (choice == CoreChoice::Auto && count <= 1e5);
    if (choice == CoreChoice::Exhaustive && count > 1e5)
        throw CapacityError("exhaustive core-matrix search needs " + format_double(count) + " subsets, cap is 1e5");
    if (exhaustive) *exhaustive = use_exhaustive;
    std::vector<int> pick;
    if (use_exhaustive) {
        std::vector<int> idx(r);
        for (int i = 0; i < r; ++i) idx[i] = i;
        double best = std::numeric_limits<double>::infinity();
        while (true) {
            MatrixXd k(cols.rows(), r);
            for (int i = 0; i < r; ++i) k.col(i) = cols.col(idx[i]);
            if (numerical_rank(k) == r) {
                double v = norm_1to1(pseudo_inverse(k));
                if (v < best - 1e-12) {
                    best = v;
                    pick = idx;
                }
            }
            int i = r - 1;
            while (i >= 0 && idx[i] == n - r + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
        }
    } else {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(cols);
        for (int i = 0; i < r; ++i) pick.push_back(qr.colsPermutation().indices()(i));
        std::sort(pick.begin(), pick.end());
    }
    std::vector<int> out;
    for (int i : pick) out.push_back(keep[i]);
    return out;
}

namespace {

// states(h) gives D_h; images(h, o, a, D_{h-1}) gives the columns
// P(o|tau) q(tau, o, a) aligned with D_{h-1}.
RegularPsrResult regular_from_states(const CoreTestSet& core, const VectorXd& q0,
                                     const std::function<MatrixXd(int)>& states,
                                     const std::function<MatrixXd(int, int, int, const MatrixXd&)>& images,
                                     CoreChoice choice) {
    RegularPsrResult res;
    res.brep.core = core;
    res.brep.q0 = q0;
    res.exhaustive = true;
    const int H = core.horizon();
    double worst = 0.0;
    for (int h = 1; h <= H; ++h) {
        MatrixXd d = states(h - 1);
        bool ex = true;
        std::vector<int> cols = select_core_columns(d, choice, &ex);
        res.exhaustive = res.exhaustive && ex;
        MatrixXd k(d.rows(), static_cast<int>(cols.size()));
        for (int i = 0; i < k.cols(); ++i) k.col(i) = d.col(cols[i]);
        MatrixXd kinv = pseudo_inverse(k);
        if (k.cols() > 0) res.alpha_inv = std::max(res.alpha_inv, norm_1to1(kinv));
        std::vector<MatrixXd> per;
        for (int o = 0; o < core.num_obs(); ++o) {
            for (int a = 0; a < core.num_actions(); ++a) {
                MatrixXd y = images(h, o, a, d);
                MatrixXd yk(y.rows(), k.cols());
                for (int i = 0; i < k.cols(); ++i) yk.col(i) = y.col(cols[i]);
                MatrixXd b = k.cols() == 0 ? MatrixXd::Zero(core.size(h + 1), core.size(h)) : MatrixXd(yk * kinv);
                if (d.cols() > 0) worst = std::max(worst, (b * d - y).cwiseAbs().maxCoeff());
                per.push_back(std::move(b));
            }
        }
        res.brep.ops.push_back(std::move(per));
        res.core_matrices.push_back(std::move(k));
    }
    if (worst > 1e-9) {
        throw ConstraintError("test sets are not core: predictive-state images are not linear in q, residual " +
                                  format_double(worst),
                              worst);
    }
    res.brep.provenance = "regular-psr";
    res.brep.diagnostics["alpha_psr_inv"] = res.alpha_inv;
    res.brep.diagnostics["exhaustive"] = res.exhaustive ? 1.0 : 0.0;
    return res;
}

}  // namespace

RegularPsrResult brep_regular_psr(const PomdpModel& model, const CoreTestSet& core, CoreChoice choice) {
    auto states = [&](int h) { return predictive_state_matrix(model, core, h); };
    auto images = [&](int h, int o, int a, const MatrixXd& d) {
        MatrixXd y(core.size(h + 1), d.cols());
        for (int j = 0; j < d.cols(); ++j) {
            Trajectory tau = trajectory_from_index(j, h - 1, model.O, model.A);
            double p = history_probability(model, tau);
            if (p <= 0.0) {
                y.col(j).setZero();
                continue;
            }
            tau.obs.push_back(o);
            tau.act.push_back(a);
            y.col(j) = joint_test_vector(model, core, tau) / p;
        }
        return y;
    };
    return regular_from_states(core, joint_test_vector(model, core, Trajectory{}), states, images, choice);
}

RegularPsrResult brep_regular_psr(const BRep& raw, CoreChoice choice) {
    const int H = raw.H();
    const int O = raw.O();
    const int A = raw.A();
    // Predictive states from the raw operators: normalize B_{h:1}(tau) q0 by
    // P(tau_h), obtained by rolling out all-zero actions to the horizon.
    auto states = [&](int h) {
        const std::uint64_t n = ipow_checked(static_cast<std::uint64_t>(O) * A, h, "predictive state matrix");
        MatrixXd w = forward_operator(raw, h + 1);
        MatrixXd d(raw.core.size(h + 1), static_cast<int>(n));
        const std::uint64_t nf = ipow(static_cast<std::uint64_t>(O) * A, H - h);
        for (std::uint64_t i = 0; i < n; ++i) {
            Trajectory tau = trajectory_from_index(i, h, O, A);
            VectorXd u = brep_prefix_vector(raw, tau);
            VectorXd fut = w * u;
            double p = 0.0;
            for (std::uint64_t j = 0; j < nf; ++j) {
                Trajectory f = trajectory_from_index(j, H - h, O, A);
                bool zero_actions = true;
                for (int a : f.act)
                    if (a != 0) zero_actions = false;
                if (zero_actions) p += fut(static_cast<int>(j));
            }
            d.col(static_cast<int>(i)) = p > 1e-15 ? VectorXd(u / p) : VectorXd::Zero(u.size());
        }
        return d;
    };
    auto images = [&](int h, int o, int a, const MatrixXd& d) { return MatrixXd(raw.op(h, o, a) * d); };
    return regular_from_states(raw.core, raw.q0, states, images, choice);
}

Test parse_test(const std::string& s) {
    if (s == "dum") return dummy_test();
    Test t;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i++];
        std::size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        if (j == i) throw ValidationError("malformed test label " + s);
        int v = std::stoi(s.substr(i, j - i));
        if (c == 'o') {
            t.obs.push_back(v);
        } else if (c == 'a') {
            t.act.push_back(v);
        } else {
            throw ValidationError("malformed test label " + s);
        }
        i = j;
    }
    return t;
}

nlohmann::json brep_to_json(const BRep& b) {
    nlohmann::json j;
    j["provenance"] = b.provenance;
    j["horizon"] = b.H();
    j["num_observations"] = b.O();
    j["num_actions"] = b.A();
    j["window"] = b.core.window();
    nlohmann::json tests = nlohmann::json::array();
    for (int h = 1; h <= b.H() + 1; ++h) {
        nlohmann::json ts = nlohmann::json::array();
        for (const auto& t : b.core.tests(h)) ts.push_back(to_string(t));
        tests.push_back(ts);
    }
    j["tests"] = tests;
    j["q0"] = vector_to_json(b.q0);
    nlohmann::json ops = nlohmann::json::array();
    for (int h = 1; h <= b.H(); ++h) {
        for (int o = 0; o < b.O(); ++o) {
            for (int a = 0; a < b.A(); ++a) {
                nlohmann::json e;
                e["step"] = h;
                e["obs"] = o;
                e["act"] = a;
                e["matrix"] = matrix_to_json(b.op(h, o, a));
                ops.push_back(e);
            }
        }
    }
    j["operators"] = ops;
    nlohmann::json diag = nlohmann::json::object();
    for (const auto& [k, v] : b.diagnostics) diag[k] = v;
    j["diagnostics"] = diag;
    return j;
}

BRep brep_from_json(const nlohmann::json& j) {
    try {
        const int H = j.at("horizon").get<int>();
        const int O = j.at("num_observations").get<int>();
        const int A = j.at("num_actions").get<int>();
        std::vector<std::vector<Test>> tests;
        const auto& jt = j.at("tests");
        for (int h = 1; h <= H; ++h) {
            std::vector<Test> ts;
            for (const auto& s : jt.at(h - 1)) ts.push_back(parse_test(s.get<std::string>()));
            tests.push_back(std::move(ts));
        }
        BRep b;
        b.core = CoreTestSet(H, O, A, std::move(tests), j.value("window", 0));
        b.provenance = j.value("provenance", "raw");
        b.q0 = vector_from_json(j.at("q0"));
        b.ops.assign(H, std::vector<MatrixXd>(O * A));
        for (const auto& e : j.at("operators")) {
            const int h = e.at("step").get<int>();
            const int o = e.at("obs").get<int>();
            const int a = e.at("act").get<int>();
            MatrixXd m = matrix_from_json(e.at("matrix"));
            if (m.rows() != b.core.size(h + 1) || m.cols() != b.core.size(h))
                throw ValidationError("operator shape mismatch at step " + std::to_string(h));
            b.op(h, o, a) = m;
        }
        if (j.contains("diagnostics"))
            for (const auto& [k, v] : j.at("diagnostics").items()) b.diagnostics[k] = v.get<double>();
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed brep json: ") + e.what());
    }
}

}  // namespace psrlab
