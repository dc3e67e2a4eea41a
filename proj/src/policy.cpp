#include "psrlab/policy.hpp"

#include "psrlab/core_tests.hpp"

#include <cmath>

namespace psrlab {

Policy Policy::deterministic(int H, int O, int A, std::vector<std::vector<int>> table) {
    if (static_cast<int>(table.size()) != H) throw ValidationError("deterministic table needs H steps");
    for (int h = 1; h <= H; ++h) {
        std::uint64_t n = ipow(static_cast<std::uint64_t>(O) * A, h - 1) * O;
        if (table[h - 1].size() != n) throw ValidationError("deterministic table has wrong size at step " + std::to_string(h));
        for (int a : table[h - 1])
            if (a < 0 || a >= A) throw ValidationError("deterministic action out of range");
    }
    Policy p;
    p.kind_ = Kind::DeterministicTable;
    p.H_ = H;
    p.O_ = O;
    p.A_ = A;
    p.det_ = std::move(table);
    return p;
}

Policy Policy::stochastic(int H, int O, int A, std::vector<std::vector<std::vector<double>>> table) {
    if (static_cast<int>(table.size()) != H) throw ValidationError("stochastic table needs H steps");
    for (int h = 1; h <= H; ++h) {
        std::uint64_t n = ipow(static_cast<std::uint64_t>(O) * A, h - 1) * O;
        if (table[h - 1].size() != n) throw ValidationError("stochastic table has wrong size at step " + std::to_string(h));
        for (const auto& row : table[h - 1]) {
            if (static_cast<int>(row.size()) != A) throw ValidationError("action distribution has wrong length");
            double s = 0.0;
            for (double x : row) {
                if (x < 0.0) throw ValidationError("negative action probability");
                s += x;
            }
            if (std::abs(s - 1.0) > 1e-12) throw ValidationError("action distribution does not sum to 1");
        }
    }
    Policy p;
    p.kind_ = Kind::StochasticTable;
    p.H_ = H;
    p.O_ = O;
    p.A_ = A;
    p.stoch_ = std::move(table);
    return p;
}

Policy Policy::uniform(int H, int O, int A) {
    check_capacity(ipow_checked(static_cast<std::uint64_t>(O) * A, H - 1, "policy table") * O, "policy table");
    std::vector<std::vector<std::vector<double>>> t(H);
    for (int h = 1; h <= H; ++h) {
        std::uint64_t n = ipow(static_cast<std::uint64_t>(O) * A, h - 1) * O;
        t[h - 1].assign(n, std::vector<double>(A, 1.0 / A));
    }
    return stochastic(H, O, A, std::move(t));
}

Policy Policy::mixture(std::vector<double> weights, std::vector<Policy> components) {
    if (weights.size() != components.size() || components.empty())
        throw ValidationError("mixture needs one weight per component");
    double s = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ValidationError("negative mixture weight");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-10) throw ValidationError("mixture weights must sum to 1");
    Policy p;
    p.kind_ = Kind::Mixture;
    p.H_ = components[0].H_;
    p.O_ = components[0].O_;
    p.A_ = components[0].A_;
    for (const auto& c : components)
        if (c.H_ != p.H_ || c.O_ != p.O_ || c.A_ != p.A_) throw ValidationError("mixture components disagree on shape");
    p.weights_ = std::move(weights);
    p.components_ = std::move(components);
    return p;
}

Policy Policy::composed(const Policy& base, int h, std::vector<std::vector<int>> sequences) {
    if (h < 0 || h >= base.H_) throw ValidationError("composition step must lie in 0..H-1");
    if (sequences.empty()) throw ValidationError("composition needs a nonempty action-sequence set");
    for (const auto& s : sequences) {
        if (h + static_cast<int>(s.size()) > base.H_) throw ValidationError("action sequence exceeds horizon");
        for (int a : s)
            if (a < 0 || a >= base.A_) throw ValidationError("sequence action out of range");
    }
    Policy p;
    p.kind_ = Kind::Composed;
    p.H_ = base.H_;
    p.O_ = base.O_;
    p.A_ = base.A_;
    p.base_ = std::make_shared<const Policy>(base);
    p.compose_h_ = h;
    p.sequences_ = std::move(sequences);
    return p;
}

double Policy::factor(const Trajectory& t) const {
    const int L = t.length();
    switch (kind_) {
        case Kind::DeterministicTable: {
            for (int k = 1; k <= L; ++k)
                if (det_[k - 1][history_index(t, k, O_, A_)] != t.act[k - 1]) return 0.0;
            return 1.0;
        }
        case Kind::StochasticTable: {
            double f = 1.0;
            for (int k = 1; k <= L && f > 0.0; ++k) f *= stoch_[k - 1][history_index(t, k, O_, A_)][t.act[k - 1]];
            return f;
        }
        case Kind::Mixture: {
            double f = 0.0;
            for (std::size_t i = 0; i < components_.size(); ++i)
                if (weights_[i] > 0.0) f += weights_[i] * components_[i].factor(t);
            return f;
        }
        case Kind::Composed: {
            const int h = compose_h_;
            const int prefix = std::min(std::max(h - 1, 0), L);
            double f = 1.0;
            if (prefix > 0) {
                Trajectory head;
                head.obs.assign(t.obs.begin(), t.obs.begin() + prefix);
                head.act.assign(t.act.begin(), t.act.begin() + prefix);
                f = base_->factor(head);
                if (f == 0.0) return 0.0;
            }
            if (h >= 1 && L >= h) f /= A_;
            const int after = std::max(0, L - h);
            double sum = 0.0;
            for (const auto& seq : sequences_) {
                const int len = static_cast<int>(seq.size());
                bool match = true;
                for (int i = 0; i < std::min(len, after) && match; ++i)
                    if (t.act[h + i] != seq[i]) match = false;
                if (match) sum += std::pow(1.0 / A_, std::max(0, after - len));
            }
            return f * sum / static_cast<double>(sequences_.size());
        }
    }
    return 0.0;
}

bool Policy::is_behavioral() const {
    switch (kind_) {
        case Kind::DeterministicTable:
        case Kind::StochasticTable:
            return true;
        case Kind::Mixture:
            return components_.size() == 1 && components_[0].is_behavioral();
        case Kind::Composed:
            return sequences_.size() == 1 && (compose_h_ <= 1 || base_->is_behavioral());
    }
    return false;
}

double Policy::action_prob(int h, const Trajectory& history, int a) const {
    switch (kind_) {
        case Kind::DeterministicTable:
            return det_[h - 1][history_index(history, h, O_, A_)] == a ? 1.0 : 0.0;
        case Kind::StochasticTable:
            return stoch_[h - 1][history_index(history, h, O_, A_)][a];
        case Kind::Mixture:
            if (components_.size() != 1) throw ValidationError("mixture is not behavioral; realize it first");
            return components_[0].action_prob(h, history, a);
        case Kind::Composed: {
            if (sequences_.size() != 1) throw ValidationError("composed policy is not behavioral; realize it first");
            const int c = compose_h_;
            if (h < c) return base_->action_prob(h, history, a);
            if (h == c) return 1.0 / A_;
            const auto& seq = sequences_[0];
            if (h - c <= static_cast<int>(seq.size())) return seq[h - c - 1] == a ? 1.0 : 0.0;
            return 1.0 / A_;
        }
    }
    return 0.0;
}

Policy Policy::realize(Rng& rng) const {
    switch (kind_) {
        case Kind::DeterministicTable:
        case Kind::StochasticTable:
            return *this;
        case Kind::Mixture: {
            int i = rng.categorical(weights_);
            return components_[i].realize(rng);
        }
        case Kind::Composed: {
            int j = sequences_.size() == 1 ? 0 : rng.uniform_int(static_cast<int>(sequences_.size()));
            Policy b = compose_h_ > 1 ? base_->realize(rng) : *base_;
            return composed(b, compose_h_, {sequences_[j]});
        }
    }
    return *this;
}

int Policy::sample_action(int h, const Trajectory& history, Rng& rng) const {
    std::vector<double> p(A_);
    for (int a = 0; a < A_; ++a) p[a] = action_prob(h, history, a);
    return rng.categorical(p);
}

std::string Policy::describe() const {
    switch (kind_) {
        case Kind::DeterministicTable:
            return "det";
        case Kind::StochasticTable:
            return "stoch";
        case Kind::Mixture:
            return "mix" + std::to_string(components_.size());
        case Kind::Composed:
            return "comp" + std::to_string(compose_h_) + "(" + base_->describe() + ")";
    }
    return "?";
}

Policy compose_exploration(const Policy& policy, int h, const CoreTestSet& core) {
    if (h < 0 || h > policy.horizon() - 1) throw ValidationError("exploration step must lie in 0..H-1");
    const auto& seqs = core.action_seqs(h + 1);
    if (seqs.empty()) throw ValidationError("empty action-sequence set U_{A," + std::to_string(h + 1) + "}");
    return Policy::composed(policy, h, seqs);
}

Policy exploration_mixture(const Policy& policy, const CoreTestSet& core) {
    const int H = policy.horizon();
    std::vector<Policy> comps;
    for (int h = 0; h < H; ++h) comps.push_back(compose_exploration(policy, h, core));
    return Policy::mixture(std::vector<double>(H, 1.0 / H), std::move(comps));
}

}  // namespace psrlab
