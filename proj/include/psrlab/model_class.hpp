#pragma once

#include "psrlab/core_tests.hpp"
#include "psrlab/model.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace psrlab {

// Finite model class; all members share H, O, A and the windowed core tests.
struct ModelClass {
    std::vector<PomdpModel> members;
    int truth_index = 0;
    int window = 1;

    const PomdpModel& truth() const { return members.at(truth_index); }
    int size() const { return static_cast<int>(members.size()); }
    CoreTestSet core() const { return default_core_tests(members.at(0), window); }
    void validate() const;
};

nlohmann::json class_to_json(const ModelClass& c);
ModelClass class_from_json(const nlohmann::json& j);
ModelClass load_class(const std::string& path);

}  // namespace psrlab
