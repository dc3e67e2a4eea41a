#include "psrlab/trajectory.hpp"

namespace psrlab {

std::string to_string(const Trajectory& t) {
    std::string s;
    for (std::size_t i = 0; i < t.obs.size(); ++i) {
        s += "o" + std::to_string(t.obs[i]);
        if (i < t.act.size()) s += "a" + std::to_string(t.act[i]);
    }
    return s;
}

std::uint64_t trajectory_index(const Trajectory& t, int O, int A) {
    std::uint64_t idx = 0;
    const std::uint64_t base = static_cast<std::uint64_t>(O) * A;
    for (int k = 0; k < t.length(); ++k) idx = idx * base + static_cast<std::uint64_t>(t.obs[k] * A + t.act[k]);
    return idx;
}

Trajectory trajectory_from_index(std::uint64_t idx, int length, int O, int A) {
    Trajectory t;
    t.obs.assign(length, 0);
    t.act.assign(length, 0);
    const std::uint64_t base = static_cast<std::uint64_t>(O) * A;
    for (int k = length - 1; k >= 0; --k) {
        int pair = static_cast<int>(idx % base);
        idx /= base;
        t.obs[k] = pair / A;
        t.act[k] = pair % A;
    }
    return t;
}

std::uint64_t history_index(const Trajectory& t, int step, int O, int A) {
    std::uint64_t idx = 0;
    const std::uint64_t base = static_cast<std::uint64_t>(O) * A;
    for (int k = 0; k < step - 1; ++k) idx = idx * base + static_cast<std::uint64_t>(t.obs[k] * A + t.act[k]);
    return idx * O + static_cast<std::uint64_t>(t.obs[step - 1]);
}

}  // namespace psrlab
