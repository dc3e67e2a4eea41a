#include "psrlab/latent_mdp.hpp"

#include <cmath>

namespace psrlab {

namespace {

void check_mdp(const Mdp& d, const Mdp& ref) {
    if (d.H != ref.H || d.S != ref.S || d.A != ref.A) throw ValidationError("latent MDPs must share H, S and A");
    if (d.mu1.size() != d.S) throw ValidationError("MDP initial distribution has wrong length");
    if (static_cast<int>(d.trans.size()) != d.H - 1 || static_cast<int>(d.reward_prob.size()) != d.H - 1)
        throw ValidationError("MDP needs H-1 transition and reward steps");
    for (int h = 0; h < d.H - 1; ++h) {
        if (static_cast<int>(d.trans[h].size()) != d.A) throw ValidationError("MDP transition needs A matrices");
        for (const auto& t : d.trans[h])
            if (t.rows() != d.S || t.cols() != d.S) throw ValidationError("MDP transition must be S x S");
        if (d.reward_prob[h].rows() != d.S || d.reward_prob[h].cols() != d.A)
            throw ValidationError("MDP reward table must be S x A");
    }
}

}  // namespace

PomdpModel latent_mdp_to_pomdp(const std::vector<Mdp>& mdps, const VectorXd& mixing) {
    if (mdps.empty()) throw ValidationError("need at least one latent MDP");
    if (mixing.size() != static_cast<int>(mdps.size())) throw ValidationError("mixing weights must match the MDP count");
    for (const auto& d : mdps) check_mdp(d, mdps[0]);
    const int N = static_cast<int>(mdps.size());
    const int H = mdps[0].H;
    const int S = mdps[0].S;
    const int A = mdps[0].A;
    const int SS = N * S * 2;
    const int OO = S * 2;
    auto lat = [&](int m, int s, int r) { return (m * S + s) * 2 + r; };

    PomdpModel p = make_model(H, SS, OO, A);
    p.mu1 = VectorXd::Zero(SS);
    for (int m = 0; m < N; ++m)
        for (int s = 0; s < S; ++s) p.mu1(lat(m, s, 0)) = mixing(m) * mdps[m].mu1(s);
    for (int h = 1; h <= H; ++h) {
        MatrixXd e = MatrixXd::Zero(OO, SS);
        for (int m = 0; m < N; ++m)
            for (int s = 0; s < S; ++s)
                for (int r = 0; r < 2; ++r) e(s * 2 + r, lat(m, s, r)) = 1.0;
        p.emissions[h - 1] = e;
        MatrixXd rw = MatrixXd::Zero(OO, A);
        if (h >= 2)
            for (int s = 0; s < S; ++s) rw.row(s * 2 + 1).setConstant(1.0 / (H - 1));
        p.rewards[h - 1] = rw;
    }
    for (int h = 1; h < H; ++h) {
        for (int a = 0; a < A; ++a) {
            MatrixXd t = MatrixXd::Zero(SS, SS);
            for (int m = 0; m < N; ++m) {
                const MatrixXd& tm = mdps[m].trans[h - 1][a];
                for (int s = 0; s < S; ++s) {
                    const double pr = mdps[m].reward_prob[h - 1](s, a);
                    for (int r = 0; r < 2; ++r)
                        for (int s2 = 0; s2 < S; ++s2) {
                            t(lat(m, s2, 1), lat(m, s, r)) = tm(s2, s) * pr;
                            t(lat(m, s2, 0), lat(m, s, r)) = tm(s2, s) * (1.0 - pr);
                        }
                }
            }
            p.transitions[h - 1][a] = t;
        }
    }
    p.validate();
    return p;
}

double mdp_optimal_value(const Mdp& mdp) {
    const int H = mdp.H;
    VectorXd v = VectorXd::Zero(mdp.S);
    for (int h = H - 1; h >= 1; --h) {
        VectorXd cur(mdp.S);
        for (int s = 0; s < mdp.S; ++s) {
            double best = -1e300;
            for (int a = 0; a < mdp.A; ++a) {
                double q = mdp.reward_prob[h - 1](s, a) / (H - 1) + mdp.trans[h - 1][a].col(s).dot(v);
                best = std::max(best, q);
            }
            cur(s) = best;
        }
        v = cur;
    }
    return mdp.mu1.dot(v);
}

MatrixXd latent_block(const std::vector<Mdp>& mdps, int h, int s) {
    const int N = static_cast<int>(mdps.size());
    const int S = mdps[0].S;
    const int A = mdps[0].A;
    MatrixXd l(A * S * 2, N);
    for (int m = 0; m < N; ++m) {
        for (int a = 0; a < A; ++a) {
            const double pr = mdps[m].reward_prob[h - 1](s, a);
            for (int s2 = 0; s2 < S; ++s2) {
                const double t = mdps[m].trans[h - 1][a](s2, s);
                l((a * S + s2) * 2 + 0, m) = t * (1.0 - pr);
                l((a * S + s2) * 2 + 1, m) = t * pr;
            }
        }
    }
    return l;
}

}  // namespace psrlab
