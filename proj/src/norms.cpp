#include "psrlab/norms.hpp"

#include <cmath>
#include <map>

namespace psrlab {

int future_length(std::size_t n, int O, int A) {
    const std::size_t oa = static_cast<std::size_t>(O) * A;
    int len = 0;
    std::size_t p = 1;
    while (p < n) {
        p *= oa;
        ++len;
    }
    if (p != n) throw ValidationError("vector length " + std::to_string(n) + " is not a power of O*A");
    return len;
}

PiNormResult pi_norm_argmax(const VectorXd& b, int O, int A) {
    const int len = future_length(static_cast<std::size_t>(b.size()), O, A);
    PiNormResult res;
    res.choice.resize(len);
    std::vector<double> vals(b.size());
    for (int i = 0; i < b.size(); ++i) vals[i] = std::abs(b(i));
    for (int k = len; k >= 1; --k) {
        const std::size_t n = vals.size() / (static_cast<std::size_t>(O) * A);
        std::vector<double> next(n, 0.0);
        auto& ch = res.choice[k - 1];
        ch.assign(n * O, 0);
        for (std::size_t p = 0; p < n; ++p) {
            for (int o = 0; o < O; ++o) {
                const std::size_t base = (p * O + o) * A;
                int best = 0;
                for (int a = 1; a < A; ++a)
                    if (vals[base + a] > vals[base + best]) best = a;
                ch[p * O + o] = best;
                next[p] += vals[base + best];
            }
        }
        vals = std::move(next);
    }
    res.value = vals.empty() ? 0.0 : vals[0];
    return res;
}

double pi_norm(const VectorXd& b, int O, int A) { return pi_norm_argmax(b, O, A).value; }

double pi_norm(const std::vector<double>& b, int O, int A) {
    return pi_norm(Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())), O, A);
}

namespace {

// Node at an observation-terminated prefix of length depth+1 observations.
double trie_value(const VectorXd& v, const std::vector<Test>& tests, const std::vector<int>& members, int depth) {
    double self = 0.0;
    std::map<int, std::map<int, std::vector<int>>> kids;
    for (int i : members) {
        const Test& t = tests[i];
        if (t.width() == depth + 1) {
            self = std::max(self, std::abs(v(i)));
        } else {
            kids[t.act[depth]][t.obs[depth + 1]].push_back(i);
        }
    }
    double best = self;
    for (const auto& [a, by_obs] : kids) {
        double s = 0.0;
        for (const auto& [o, sub] : by_obs) s += trie_value(v, tests, sub, depth + 1);
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

double test_set_pi_norm(const VectorXd& v, const std::vector<Test>& tests, const std::vector<int>& subset) {
    std::map<int, std::vector<int>> roots;
    double dummy = 0.0;
    for (int i : subset) {
        if (tests[i].dummy) {
            dummy = std::max(dummy, std::abs(v(i)));
        } else {
            roots[tests[i].obs[0]].push_back(i);
        }
    }
    double s = 0.0;
    for (const auto& [o, sub] : roots) s += trie_value(v, tests, sub, 0);
    return std::max(s, dummy);
}

double test_set_pi_norm(const VectorXd& v, const std::vector<Test>& tests) {
    std::vector<int> all(tests.size());
    for (std::size_t i = 0; i < tests.size(); ++i) all[i] = static_cast<int>(i);
    return test_set_pi_norm(v, tests, all);
}

FusedNorm fused_norm(const VectorXd& q, const CoreTestSet& core, int h) {
    const auto& tests = core.tests(h);
    std::map<std::vector<int>, double> groups;
    for (std::size_t i = 0; i < tests.size(); ++i) groups[tests[i].act] += std::abs(q(static_cast<int>(i)));
    FusedNorm f;
    double sq = 0.0;
    for (const auto& [a, s] : groups) sq += s * s;
    f.one_two = std::sqrt(sq);
    f.pi_prime = test_set_pi_norm(q, tests, core.prefix_free(h));
    f.fused = std::max(f.one_two, f.pi_prime);
    return f;
}

}  // namespace psrlab
