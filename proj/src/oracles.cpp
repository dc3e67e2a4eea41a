#include "psrlab/oracles.hpp"

#include "psrlab/brep.hpp"
#include "psrlab/distribution.hpp"
#include "psrlab/norms.hpp"
#include "psrlab/predictive.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace psrlab {

double RuleFunction::operator()(const VectorXd& x) const {
    if (y.empty()) return scale * pi_norm(VectorXd(tree * x), O, A);
    double best = 0.0;
    for (const auto& rule : y) {
        double s = 0.0;
        for (const auto& v : rule) s += std::abs(v.dot(x));
        best = std::max(best, s);
    }
    return best;
}

double RuleFunction::radius() const {
    if (y.empty()) return scale * pi_norm(VectorXd(tree.rowwise().norm()), O, A);
    double best = 0.0;
    for (const auto& rule : y) {
        double s = 0.0;
        for (const auto& v : rule) s += v.norm();
        best = std::max(best, s);
    }
    return best;
}

std::vector<double> eluder_betas(const EluderInstance& inst) {
    const int K = inst.size();
    std::vector<double> beta(K, 0.0);
    for (int k = 0; k < K; ++k) {
        for (int t = 0; t < k; ++t) {
            double e = 0.0;
            for (std::size_t i = 0; i < inst.x[t].size(); ++i) {
                const double v = inst.f[k](inst.x[t][i]);
                e += inst.q[t](static_cast<int>(i)) * v * v;
            }
            beta[k] += e;
        }
    }
    return beta;
}

CheckResult eluder_l2_check(const EluderInstance& inst, double M) {
    if (!(M > 0.0)) throw ValidationError("M must be positive");
    const int K = inst.size();
    const std::vector<double> beta = eluder_betas(inst);
    double rx2 = 0.0;
    double ry = 0.0;
    for (int k = 0; k < K; ++k) {
        double e = 0.0;
        for (std::size_t i = 0; i < inst.x[k].size(); ++i) e += inst.q[k](static_cast<int>(i)) * inst.x[k][i].squaredNorm();
        rx2 = std::max(rx2, e);
        ry = std::max(ry, inst.f[k].radius());
    }
    CheckResult worst;
    worst.slack = std::numeric_limits<double>::infinity();
    double lhs = 0.0;
    double beta_sum = 0.0;
    for (int k = 0; k < K; ++k) {
        double e = 0.0;
        for (std::size_t i = 0; i < inst.x[k].size(); ++i) e += inst.q[k](static_cast<int>(i)) * inst.f[k](inst.x[k][i]);
        lhs += std::min(M, e);
        beta_sum += beta[k];
        const double kk = k + 1;
        const double rhs = std::sqrt(2.0 * inst.d * (M * M * kk + beta_sum) *
                                     std::log1p(kk / inst.d * rx2 * ry * ry / (M * M)));
        if (rhs - lhs < worst.slack) worst = {lhs, rhs, rhs - lhs};
    }
    if (K == 0) worst.slack = 0.0;
    return worst;
}

CheckResult elliptical_potential_check(const std::vector<MatrixXd>& phis, double lambda0) {
    if (!(lambda0 > 0.0)) throw ValidationError("lambda0 must be positive");
    if (phis.empty()) return {0.0, 0.0, 0.0};
    const int d = static_cast<int>(phis[0].rows());
    MatrixXd v = lambda0 * MatrixXd::Identity(d, d);
    double lhs = 0.0;
    double trace_sum = 0.0;
    for (const auto& phi : phis) {
        if (phi.rows() != d || phi.cols() != d) throw ValidationError("matrices must be d x d");
        const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
        if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw ValidationError("matrix is not symmetric");
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(phi);
        if (es.eigenvalues().minCoeff() < -1e-10 * scale) throw ValidationError("matrix is not positive semidefinite");
        lhs += std::min(1.0, v.ldlt().solve(phi).trace());
        trace_sum += phi.trace();
        v += phi;
    }
    const double rhs = 2.0 * d * std::log1p(trace_sum / (d * lambda0));
    return {lhs, rhs, rhs - lhs};
}

CheckResult decoupling_check(const DecouplingInstance& inst) {
    const int n = static_cast<int>(inst.f.size());
    const int m = static_cast<int>(inst.x.size());
    MatrixXd xs(inst.x.empty() ? 0 : inst.x[0].size(), m);
    for (int i = 0; i < m; ++i) xs.col(i) = inst.x[i];
    const int dx = m == 0 ? 0 : numerical_rank(xs);
    MatrixXd fx(n, m);
    for (int th = 0; th < n; ++th)
        for (int i = 0; i < m; ++i) fx(th, i) = inst.f[th](inst.x[i]);
    double lhs = 0.0;
    double second = 0.0;
    for (int th = 0; th < n; ++th) {
        lhs += inst.mu(th) * inst.q[th].dot(fx.row(th).transpose());
        for (int tp = 0; tp < n; ++tp)
            second += inst.mu(th) * inst.mu(tp) * inst.q[tp].dot(fx.row(th).transpose().cwiseAbs2());
    }
    const double rhs = std::sqrt(dx * second);
    return {lhs, rhs, rhs - lhs};
}

Spanner barycentric_spanner(const std::vector<VectorXd>& xs, int d) {
    if (xs.empty()) throw ValidationError("empty vector family");
    const int n = static_cast<int>(xs[0].size());
    const int N = static_cast<int>(xs.size());
    MatrixXd x(n, N);
    for (int i = 0; i < N; ++i) x.col(i) = xs[i];
    const int r = numerical_rank(x);
    if (r > d) throw ValidationError("span dimension " + std::to_string(r) + " exceeds d = " + std::to_string(d));
    Spanner sp;
    sp.F = MatrixXd::Zero(n, d);
    if (r == 0) {
        sp.v.assign(N, VectorXd::Zero(d));
        return sp;
    }
    Eigen::JacobiSVD<MatrixXd> svd(x, Eigen::ComputeThinU);
    const MatrixXd u = svd.matrixU().leftCols(r);
    const MatrixXd z = u.transpose() * x;
    MatrixXd basis = MatrixXd::Identity(r, r);
    std::vector<int> idx(r, -1);
    auto det_with = [&](int j, int i) {
        MatrixXd b = basis;
        b.col(j) = z.col(i);
        return std::abs(b.determinant());
    };
    for (int j = 0; j < r; ++j) {
        int best = 0;
        double best_v = -1.0;
        for (int i = 0; i < N; ++i) {
            const double v = det_with(j, i);
            if (v > best_v) {
                best_v = v;
                best = i;
            }
        }
        basis.col(j) = z.col(best);
        idx[j] = best;
    }
    for (bool improved = true; improved;) {
        improved = false;
        const double cur = std::abs(basis.determinant());
        for (int j = 0; j < r && !improved; ++j) {
            for (int i = 0; i < N && !improved; ++i) {
                if (det_with(j, i) > 2.0 * cur) {
                    basis.col(j) = z.col(i);
                    idx[j] = i;
                    improved = true;
                }
            }
        }
    }
    for (int j = 0; j < r; ++j) sp.F.col(j) = x.col(idx[j]);
    sp.chosen = idx;
    const Eigen::PartialPivLU<MatrixXd> lu(basis);
    for (int i = 0; i < N; ++i) {
        VectorXd v = VectorXd::Zero(d);
        v.head(r) = lu.solve(z.col(i));
        sp.max_coef = std::max(sp.max_coef, v.cwiseAbs().maxCoeff());
        sp.residual = std::max(sp.residual, (x.col(i) - sp.F * v).cwiseAbs().maxCoeff());
        sp.v.push_back(std::move(v));
    }
    return sp;
}

namespace {

VectorXd normal_vector(Rng& rng, int n, double scale = 1.0) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * rng.normal();
    return v;
}

RuleFunction random_rule_function(Rng& rng, int d) {
    RuleFunction f;
    const int rules = 1 + rng.uniform_int(3);
    const int J = 1 + rng.uniform_int(3);
    const double scale = std::exp(rng.normal());
    for (int r = 0; r < rules; ++r) {
        std::vector<VectorXd> ys;
        for (int j = 0; j < J; ++j) ys.push_back(normal_vector(rng, d, scale));
        f.y.push_back(std::move(ys));
    }
    return f;
}

}  // namespace

EluderInstance random_eluder_instance(Rng& rng) {
    EluderInstance inst;
    inst.d = 1 + rng.uniform_int(5);
    const int K = 1 + rng.uniform_int(50);
    const int m = 1 + rng.uniform_int(4);
    for (int k = 0; k < K; ++k) {
        std::vector<VectorXd> xk;
        for (int i = 0; i < m; ++i) xk.push_back(normal_vector(rng, inst.d));
        inst.x.push_back(std::move(xk));
        inst.q.push_back(rng.dirichlet(m));
        inst.f.push_back(random_rule_function(rng, inst.d));
    }
    return inst;
}

std::vector<MatrixXd> random_psd_sequence(Rng& rng) {
    const int d = 1 + rng.uniform_int(5);
    const int K = 1 + rng.uniform_int(50);
    std::vector<MatrixXd> out;
    for (int k = 0; k < K; ++k) {
        const int rank = rng.uniform_int(d + 1);
        MatrixXd g(d, rank);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < rank; ++j) g(i, j) = rng.normal();
        MatrixXd phi = std::exp(2.0 * rng.normal()) * g * g.transpose();
        out.push_back(0.5 * (phi + phi.transpose()));
    }
    return out;
}

DecouplingInstance random_decoupling_instance(Rng& rng) {
    DecouplingInstance inst;
    const int n = 1 + rng.uniform_int(6);
    const int m = 1 + rng.uniform_int(6);
    const int dim = 1 + rng.uniform_int(n);
    MatrixXd basis(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) basis(i, j) = rng.normal();
    for (int i = 0; i < m; ++i) inst.x.push_back(basis * normal_vector(rng, dim));
    const int thetas = 1 + rng.uniform_int(5);
    for (int t = 0; t < thetas; ++t) {
        inst.f.push_back(random_rule_function(rng, n));
        inst.q.push_back(rng.dirichlet(m));
    }
    inst.mu = rng.dirichlet(thetas);
    return inst;
}

EluderInstance eluder_from_omle(const ModelClass& cls, const RunLog& log, int h) {
    const PomdpModel& truth = cls.truth();
    const int H = truth.H;
    if (h < 1 || h > H) throw ValidationError("step must lie in 1..H");
    const CoreTestSet core = cls.core();
    auto rep = [&](const PomdpModel& m) {
        try {
            return brep_revealing(m, cls.window);
        } catch (const RankDeficiencyError&) {
            return brep_regular_psr(m, core).brep;
        }
    };
    const BRep star = rep(truth);
    std::vector<std::optional<BRep>> reps(cls.size());
    std::vector<MatrixXd> ys(cls.size());
    const ClassTables tables(cls);

    EluderInstance inst;
    inst.d = core.size(h);
    const std::uint64_t nh = ipow(static_cast<std::uint64_t>(truth.O) * truth.A, h - 1);
    std::vector<VectorXd> xs;
    for (std::uint64_t i = 0; i < nh; ++i)
        xs.push_back(predictive_state(truth, core, trajectory_from_index(i, h - 1, truth.O, truth.A)));
    for (const auto& rec : log.records) {
        const int th = rec.chosen;
        if (!reps[th]) {
            reps[th] = rep(cls.members[th]);
            const MatrixXd w = forward_operator(*reps[th], h + 1);
            MatrixXd y(truth.O * truth.A * w.rows(), core.size(h));
            for (int o = 0; o < truth.O; ++o)
                for (int a = 0; a < truth.A; ++a)
                    y.middleRows((o * truth.A + a) * w.rows(), w.rows()) =
                        w * (reps[th]->op(h, o, a) - star.op(h, o, a));
            ys[th] = y;
        }
        RuleFunction f;
        f.tree = ys[th];
        f.scale = 0.5;
        f.O = truth.O;
        f.A = truth.A;
        inst.f.push_back(f);
        inst.x.push_back(xs);
        const TrajectoryDist dist = trajectory_distribution(truth, tables.opt_policy[th], h - 1);
        inst.q.push_back(Eigen::Map<const VectorXd>(dist.prob.data(), static_cast<Eigen::Index>(dist.prob.size())));
    }
    return inst;
}

}  // namespace psrlab
