#include "psrlab/lp.hpp"

#include <cmath>
#include <limits>

namespace psrlab {

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

struct Simplex {
    Tableau t;               // rows 0..m-1 constraints, row m reduced costs
    std::vector<int> basis;  // basic column per row
    int m = 0;
    int n = 0;  // structural + slack + artificial columns (rhs at column n)
    std::vector<bool> allowed;
    int iterations = 0;

    void pivot(int r, int c) {
        t.row(r) /= t(r, c);
        for (int i = 0; i <= m; ++i) {
            if (i == r) continue;
            double f = t(i, c);
            if (f != 0.0) t.row(i) -= f * t.row(r);
        }
        basis[r] = c;
        ++iterations;
    }

    // Returns Optimal, Unbounded or IterationLimit.
    LpStatus run(int max_iterations) {
        int degenerate_run = 0;
        while (iterations < max_iterations) {
            bool bland = degenerate_run > 50;
            int enter = -1;
            double best = -kCostTol;
            for (int j = 0; j < n; ++j) {
                if (!allowed[j]) continue;
                double d = t(m, j);
                if (bland) {
                    if (d < -kCostTol) {
                        enter = j;
                        break;
                    }
                } else if (d < best) {
                    best = d;
                    enter = j;
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            int leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                double a = t(i, enter);
                if (a <= kPivotTol) continue;
                double r = t(i, n) / a;
                if (r < ratio - 1e-14 || (std::abs(r - ratio) <= 1e-14 && leave >= 0 &&
                                          basis[i] < basis[leave])) {
                    ratio = r;
                    leave = i;
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
            pivot(leave, enter);
        }
        return LpStatus::IterationLimit;
    }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, int max_iterations) {
    const int nx = static_cast<int>(lp.c.size());
    const int mu = static_cast<int>(lp.b_ub.size());
    const int me = static_cast<int>(lp.b_eq.size());
    if (lp.a_ub.rows() != mu || (mu > 0 && lp.a_ub.cols() != nx) || lp.a_eq.rows() != me ||
        (me > 0 && lp.a_eq.cols() != nx)) {
        throw ValidationError("linear program dimensions are inconsistent");
    }
    const int m = mu + me;
    // Columns: x (nx), slacks (mu), artificials (one per row needing one).
    std::vector<int> art_row;
    for (int i = 0; i < mu; ++i)
        if (lp.b_ub(i) < 0.0) art_row.push_back(i);
    for (int i = 0; i < me; ++i) art_row.push_back(mu + i);
    const int na = static_cast<int>(art_row.size());
    const int n = nx + mu + na;

    Simplex s;
    s.m = m;
    s.n = n;
    s.t = Tableau::Zero(m + 1, n + 1);
    s.basis.assign(m, -1);
    for (int i = 0; i < mu; ++i) {
        double sign = lp.b_ub(i) < 0.0 ? -1.0 : 1.0;
        s.t.row(i).head(nx) = sign * lp.a_ub.row(i);
        s.t(i, nx + i) = sign;
        s.t(i, n) = sign * lp.b_ub(i);
        if (sign > 0.0) s.basis[i] = nx + i;
    }
    for (int i = 0; i < me; ++i) {
        double sign = lp.b_eq(i) < 0.0 ? -1.0 : 1.0;
        s.t.row(mu + i).head(nx) = sign * lp.a_eq.row(i);
        s.t(mu + i, n) = sign * lp.b_eq(i);
    }
    for (int k = 0; k < na; ++k) {
        int r = art_row[k];
        s.t(r, nx + mu + k) = 1.0;
        s.basis[r] = nx + mu + k;
    }

    LpResult res;
    // Phase 1: minimize the sum of artificials.
    s.allowed.assign(n, true);
    if (na > 0) {
        for (int k = 0; k < na; ++k) s.t(m, nx + mu + k) = 1.0;
        for (int k = 0; k < na; ++k) s.t.row(m) -= s.t.row(art_row[k]);
        LpStatus st = s.run(max_iterations);
        if (st == LpStatus::IterationLimit) {
            res.status = st;
            res.iterations = s.iterations;
            return res;
        }
        double scale = 1.0 + s.t.col(n).head(m).cwiseAbs().maxCoeff();
        if (-s.t(m, n) > 1e-9 * scale) {
            res.status = LpStatus::Infeasible;
            res.iterations = s.iterations;
            return res;
        }
        // Drive artificials out of the basis; drop redundant rows.
        std::vector<int> keep;
        for (int i = 0; i < m; ++i) {
            if (s.basis[i] >= nx + mu) {
                int col = -1;
                double best = 1e-9;
                for (int j = 0; j < nx + mu; ++j) {
                    if (std::abs(s.t(i, j)) > best) {
                        best = std::abs(s.t(i, j));
                        col = j;
                    }
                }
                if (col >= 0) {
                    s.pivot(i, col);
                    keep.push_back(i);
                }
            } else {
                keep.push_back(i);
            }
        }
        if (static_cast<int>(keep.size()) < m) {
            Tableau t2(keep.size() + 1, n + 1);
            std::vector<int> b2;
            for (std::size_t r = 0; r < keep.size(); ++r) {
                t2.row(r) = s.t.row(keep[r]);
                b2.push_back(s.basis[keep[r]]);
            }
            s.t = t2;
            s.basis = b2;
            s.m = static_cast<int>(keep.size());
        }
        for (int k = 0; k < na; ++k) s.allowed[nx + mu + k] = false;
    }

    // Phase 2 cost row.
    s.t.row(s.m).setZero();
    s.t.row(s.m).head(nx) = lp.c.transpose();
    for (int i = 0; i < s.m; ++i) {
        int b = s.basis[i];
        if (b < nx && lp.c(b) != 0.0) s.t.row(s.m) -= lp.c(b) * s.t.row(i);
    }
    LpStatus st = s.run(max_iterations);
    res.status = st;
    res.iterations = s.iterations;
    res.x = VectorXd::Zero(nx);
    for (int i = 0; i < s.m; ++i)
        if (s.basis[i] < nx) res.x(s.basis[i]) = s.t(i, n);
    res.objective = lp.c.dot(res.x);
    return res;
}

BlockGameSolution solve_block_game(const MatrixXd& mat, const std::vector<int>& blocks) {
    const int rows = static_cast<int>(mat.rows());
    const int cols = static_cast<int>(mat.cols());
    int total = 0;
    for (int b : blocks) {
        if (b <= 0) throw ValidationError("empty simplex block");
        total += b;
    }
    if (total != cols || rows == 0) throw ValidationError("block game dimensions are inconsistent");
    const int nb = static_cast<int>(blocks.size());

    // Shift to keep the value variable nonnegative.
    const double shift = std::max(0.0, -mat.minCoeff() * nb) + 1.0;
    BlockGameSolution sol;
    {
        // min v  s.t.  M x - v <= 0,  block sums = 1
        LinearProgram lp;
        lp.c = VectorXd::Zero(cols + 1);
        lp.c(cols) = 1.0;
        lp.a_ub = MatrixXd::Zero(rows, cols + 1);
        lp.a_ub.leftCols(cols) = mat;
        lp.a_ub.col(cols).setConstant(-1.0);
        lp.b_ub = VectorXd::Constant(rows, -shift);
        lp.a_eq = MatrixXd::Zero(nb, cols + 1);
        lp.b_eq = VectorXd::Ones(nb);
        int off = 0;
        for (int k = 0; k < nb; ++k) {
            lp.a_eq.block(k, off, 1, blocks[k]).setOnes();
            off += blocks[k];
        }
        // Constraint is M x - v <= -shift, i.e. v' = v - shift.
        LpResult r = solve_lp(lp);
        if (r.status != LpStatus::Optimal) throw SolverError("primal game LP failed");
        sol.x = r.x.head(cols);
        off = 0;
        for (int k = 0; k < nb; ++k) {
            auto seg = sol.x.segment(off, blocks[k]);
            seg = seg.cwiseMax(0.0);
            double s = seg.sum();
            if (s > 0) seg /= s;
            off += blocks[k];
        }
        sol.value = (mat * sol.x).maxCoeff();
    }
    {
        // max sum_k w_k  s.t.  w_k <= (y'M)_j for j in block k,  sum y = 1.
        // w_k = w'_k - shift_k with w'_k >= 0.
        LinearProgram lp;
        const double wshift = std::max(0.0, -mat.minCoeff()) + 1.0;
        lp.c = VectorXd::Zero(rows + nb);
        lp.c.tail(nb).setConstant(-1.0);
        lp.a_ub = MatrixXd::Zero(cols, rows + nb);
        lp.b_ub = VectorXd::Constant(cols, wshift);
        int off = 0;
        for (int k = 0; k < nb; ++k) {
            for (int j = off; j < off + blocks[k]; ++j) {
                lp.a_ub.block(j, 0, 1, rows) = -mat.col(j).transpose();
                lp.a_ub(j, rows + k) = 1.0;
            }
            off += blocks[k];
        }
        lp.a_eq = MatrixXd::Zero(1, rows + nb);
        lp.a_eq.block(0, 0, 1, rows).setOnes();
        lp.b_eq = VectorXd::Ones(1);
        LpResult r = solve_lp(lp);
        if (r.status != LpStatus::Optimal) throw SolverError("dual game LP failed");
        sol.y = r.x.head(rows).cwiseMax(0.0);
        sol.y /= sol.y.sum();
        VectorXd g = mat.transpose() * sol.y;
        double dv = 0.0;
        off = 0;
        for (int k = 0; k < nb; ++k) {
            dv += g.segment(off, blocks[k]).minCoeff();
            off += blocks[k];
        }
        sol.dual_value = dv;
    }
    return sol;
}

double block_game_gap(const MatrixXd& m, const std::vector<int>& blocks, const VectorXd& x, const VectorXd& y) {
    const VectorXd row = m.transpose() * y;
    double low = 0.0;
    int off = 0;
    for (int b : blocks) {
        low += row.segment(off, b).minCoeff();
        off += b;
    }
    return (m * x).maxCoeff() - low;
}

namespace {

void mirror_step(VectorXd& x, const VectorXd& anchor, const VectorXd& grad, double eta, const std::vector<int>& blocks,
                 double sign) {
    int off = 0;
    for (int b : blocks) {
        auto g = grad.segment(off, b);
        VectorXd logits = anchor.segment(off, b).array().log() + sign * eta * (g.array() - g.minCoeff());
        logits.array() -= logits.maxCoeff();
        VectorXd w = logits.array().exp();
        x.segment(off, b) = w / w.sum();
        off += b;
    }
}

}  // namespace

BlockGameSolution solve_block_game_eg(const MatrixXd& m, const std::vector<int>& blocks, double step_scale,
                                      int max_iterations, double tolerance, EgReport* report) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    const double range = std::max(m.maxCoeff() - m.minCoeff(), 1e-12);
    const double eta = step_scale / range;
    VectorXd x(cols);
    int off = 0;
    for (int b : blocks) {
        x.segment(off, b).setConstant(1.0 / b);
        off += b;
    }
    const std::vector<int> yblock{rows};
    VectorXd y = VectorXd::Constant(rows, 1.0 / rows);
    VectorXd xs = VectorXd::Zero(cols);
    VectorXd ys = VectorXd::Zero(rows);
    EgReport rep;
    BlockGameSolution sol;
    for (int it = 1; it <= max_iterations; ++it) {
        VectorXd xh(cols), yh(rows);
        mirror_step(xh, x, m.transpose() * y, eta, blocks, -1.0);
        mirror_step(yh, y, m * x, eta, yblock, 1.0);
        mirror_step(x, x, m.transpose() * yh, eta, blocks, -1.0);
        mirror_step(y, y, m * xh, eta, yblock, 1.0);
        xs += xh;
        ys += yh;
        rep.iterations = it;
        if (it % 25 == 0 || it == max_iterations) {
            rep.gap = block_game_gap(m, blocks, xs / it, ys / it);
            if (rep.gap <= tolerance) {
                rep.converged = true;
                break;
            }
        }
    }
    sol.x = xs / rep.iterations;
    sol.y = ys / rep.iterations;
    sol.value = (m * sol.x).maxCoeff();
    sol.dual_value = sol.value - rep.gap;
    if (report) *report = rep;
    return sol;
}

}  // namespace psrlab
