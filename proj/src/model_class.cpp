#include "psrlab/model_class.hpp"

#include <fstream>

namespace psrlab {

void ModelClass::validate() const {
    if (members.empty()) throw ValidationError("model class is empty");
    if (truth_index < 0 || truth_index >= size()) throw ValidationError("truth index out of range");
    const auto& m0 = members[0];
    if (window < 1 || window > m0.H) throw ValidationError("class window must satisfy 1 <= m <= H");
    for (const auto& m : members) {
        if (m.H != m0.H || m.O != m0.O || m.A != m0.A)
            throw ValidationError("class members must share H, O and A");
        m.validate();
    }
}

nlohmann::json class_to_json(const ModelClass& c) {
    nlohmann::json j;
    j["truth_index"] = c.truth_index;
    j["window"] = c.window;
    nlohmann::json mem = nlohmann::json::array();
    for (const auto& m : c.members) mem.push_back(model_to_json(m));
    j["members"] = mem;
    return j;
}

ModelClass class_from_json(const nlohmann::json& j) {
    try {
        ModelClass c;
        c.truth_index = j.at("truth_index").get<int>();
        c.window = j.value("window", 1);
        for (const auto& m : j.at("members")) c.members.push_back(model_from_json(m));
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed class json: ") + e.what());
    }
}

ModelClass load_class(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open class file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("cannot parse " + path + ": " + e.what());
    }
    return class_from_json(j);
}

}  // namespace psrlab
