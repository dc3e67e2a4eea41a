#pragma once

#include "psrlab/common.hpp"

#include <string>
#include <vector>

namespace psrlab {

// Alternating observations and actions starting at some step. A full
// trajectory of length L has L observations and L actions; a history
// (tau_{h-1}, o_h) has one more observation than actions.
struct Trajectory {
    std::vector<int> obs;
    std::vector<int> act;

    int length() const { return static_cast<int>(act.size()); }
    bool operator==(const Trajectory& o) const { return obs == o.obs && act == o.act; }
};

std::string to_string(const Trajectory& t);

// Mixed-radix index over (O*A)^L, first step most significant, pair = o*A + a.
std::uint64_t trajectory_index(const Trajectory& t, int O, int A);
Trajectory trajectory_from_index(std::uint64_t idx, int length, int O, int A);

// Index of (tau_{h-1}, o_h) among the (OA)^{h-1} * O histories at step h.
std::uint64_t history_index(const Trajectory& t, int step, int O, int A);

}  // namespace psrlab
