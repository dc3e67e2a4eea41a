#pragma once

#include "psrlab/common.hpp"

#include <map>
#include <string>
#include <vector>

namespace psrlab {

struct PomdpModel;

// A test (o_h, a_h, ..., o_{h+W-1}). The terminal set U_{H+1} holds the
// single dummy test.
struct Test {
    std::vector<int> obs;
    std::vector<int> act;
    bool dummy = false;

    int width() const { return static_cast<int>(obs.size()); }
    bool operator<(const Test& o) const {
        if (dummy != o.dummy) return dummy < o.dummy;
        if (obs != o.obs) return obs < o.obs;
        return act < o.act;
    }
    bool operator==(const Test& o) const {
        return dummy == o.dummy && obs == o.obs && act == o.act;
    }
};

std::string to_string(const Test& t);
Test dummy_test();

// Core test sets U_1 .. U_{H+1}, accessed with 1-based steps.
class CoreTestSet {
public:
    CoreTestSet() = default;
    // tests[h-1] for h = 1..H; U_{H+1} = {dummy} is appended.
    CoreTestSet(int H, int O, int A, std::vector<std::vector<Test>> tests, int window = 0);

    int horizon() const { return H_; }
    int num_obs() const { return O_; }
    int num_actions() const { return A_; }
    int window() const { return window_; }

    const std::vector<Test>& tests(int h) const { return tests_.at(h - 1); }
    int size(int h) const { return static_cast<int>(tests_.at(h - 1).size()); }
    const std::vector<std::vector<int>>& action_seqs(int h) const { return action_seqs_.at(h - 1); }
    const std::vector<int>& prefix_free(int h) const { return prefix_free_.at(h - 1); }
    // U_A = max_h |U_{A,h}|
    int max_action_seqs() const;
    // Index of test t in U_h, or -1.
    int index_of(int h, const Test& t) const;

private:
    int H_ = 0;
    int O_ = 0;
    int A_ = 0;
    int window_ = 0;
    std::vector<std::vector<Test>> tests_;
    std::vector<std::vector<std::vector<int>>> action_seqs_;
    std::vector<std::vector<int>> prefix_free_;
    std::vector<std::map<Test, int>> lookup_;
};

// U_h = (O x A)^{min(m-1, H-h)} x O.
CoreTestSet default_core_tests(int H, int O, int A, int m);
CoreTestSet default_core_tests(const PomdpModel& model, int m);

}  // namespace psrlab
