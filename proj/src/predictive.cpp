#include "psrlab/predictive.hpp"

#include <algorithm>

namespace psrlab {

VectorXd unnormalized_belief(const PomdpModel& model, const Trajectory& tau) {
    VectorXd alpha = model.mu1;
    for (int k = 1; k <= tau.length(); ++k) {
        alpha = model.emit(k).row(tau.obs[k - 1]).transpose().cwiseProduct(alpha);
        alpha = model.trans(k, tau.act[k - 1]) * alpha;
    }
    return alpha;
}

double test_joint(const PomdpModel& model, int h, const VectorXd& alpha, const Test& t) {
    VectorXd a = alpha;
    const int w = t.width();
    for (int k = 0; k < w; ++k) {
        a = model.emit(h + k).row(t.obs[k]).transpose().cwiseProduct(a);
        if (k + 1 < w) a = model.trans(h + k, t.act[k]) * a;
    }
    return a.sum();
}

double history_probability(const PomdpModel& model, const Trajectory& tau) {
    const int L = tau.length();
    if (L == 0) return 1.0;
    Trajectory head = tau;
    head.obs.pop_back();
    head.act.pop_back();
    VectorXd alpha = unnormalized_belief(model, head);
    return model.emit(L).row(tau.obs[L - 1]).transpose().cwiseProduct(alpha).sum();
}

VectorXd joint_test_vector(const PomdpModel& model, const CoreTestSet& core, const Trajectory& tau) {
    const int h = tau.length() + 1;
    const auto& tests = core.tests(h);
    VectorXd v(static_cast<int>(tests.size()));
    if (h == model.H + 1) {
        v.setConstant(history_probability(model, tau));
        return v;
    }
    VectorXd alpha = unnormalized_belief(model, tau);
    for (int i = 0; i < v.size(); ++i) v(i) = test_joint(model, h, alpha, tests[i]);
    return v;
}

VectorXd predictive_state(const PomdpModel& model, const CoreTestSet& core, const Trajectory& tau) {
    const int h = tau.length() + 1;
    double p = history_probability(model, tau);
    if (p <= 0.0) return VectorXd::Zero(core.size(h));
    return joint_test_vector(model, core, tau) / p;
}

MatrixXd predictive_state_matrix(const PomdpModel& model, const CoreTestSet& core, int h) {
    const std::uint64_t n = ipow_checked(static_cast<std::uint64_t>(model.O) * model.A, h, "predictive state matrix");
    MatrixXd d(core.size(h + 1), static_cast<int>(n));
    for (std::uint64_t i = 0; i < n; ++i)
        d.col(static_cast<int>(i)) = predictive_state(model, core, trajectory_from_index(i, h, model.O, model.A));
    return d;
}

int psr_rank(const PomdpModel& model, const CoreTestSet& core) {
    int r = 0;
    for (int h = 0; h <= model.H; ++h) r = std::max(r, numerical_rank(predictive_state_matrix(model, core, h)));
    return r;
}

MatrixXd emission_action_matrix(const PomdpModel& model, const CoreTestSet& core, int h) {
    const auto& tests = core.tests(h);
    MatrixXd m(static_cast<int>(tests.size()), model.S);
    for (int s = 0; s < model.S; ++s) {
        VectorXd e = VectorXd::Zero(model.S);
        e(s) = 1.0;
        for (int i = 0; i < m.rows(); ++i) m(i, s) = tests[i].dummy ? 1.0 : test_joint(model, h, e, tests[i]);
    }
    return m;
}

}  // namespace psrlab
