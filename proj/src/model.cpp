#include "psrlab/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace psrlab {

namespace {

void check_stochastic_columns(const MatrixXd& m, const std::string& what) {
    for (int c = 0; c < m.cols(); ++c) {
        for (int r = 0; r < m.rows(); ++r) {
            if (!(m(r, c) >= 0.0)) throw ValidationError(what + " has a negative entry");
        }
        double s = m.col(c).sum();
        if (std::abs(s - 1.0) > 1e-12) {
            throw ValidationError(what + " column " + std::to_string(c) + " sums to " +
                                  format_double(s));
        }
    }
}

}  // namespace

PomdpModel make_model(int H, int S, int O, int A) {
    PomdpModel m;
    m.H = H;
    m.S = S;
    m.O = O;
    m.A = A;
    m.transitions.assign(std::max(H - 1, 0), std::vector<MatrixXd>(A, MatrixXd::Identity(S, S)));
    m.emissions.assign(H, MatrixXd::Constant(O, S, 1.0 / O));
    m.mu1 = VectorXd::Constant(S, 1.0 / S);
    m.rewards.assign(H, MatrixXd::Zero(O, A));
    return m;
}

void PomdpModel::validate() const {
    if (H < 1 || S < 1 || O < 1 || A < 1) throw ValidationError("model cardinalities must be >= 1");
    if (static_cast<int>(transitions.size()) != H - 1)
        throw ValidationError("expected H-1 transition steps");
    if (static_cast<int>(emissions.size()) != H) throw ValidationError("expected H emission steps");
    if (static_cast<int>(rewards.size()) != H) throw ValidationError("expected H reward steps");
    if (mu1.size() != S) throw ValidationError("initial distribution has wrong length");
    for (int h = 1; h < H; ++h) {
        if (static_cast<int>(transitions[h - 1].size()) != A)
            throw ValidationError("transition step " + std::to_string(h) + " needs A matrices");
        for (int a = 0; a < A; ++a) {
            const MatrixXd& t = trans(h, a);
            if (t.rows() != S || t.cols() != S)
                throw ValidationError("transition matrix must be S x S");
            check_stochastic_columns(t, "transition h=" + std::to_string(h) + " a=" + std::to_string(a));
        }
    }
    for (int h = 1; h <= H; ++h) {
        if (emit(h).rows() != O || emit(h).cols() != S)
            throw ValidationError("emission matrix must be O x S");
        check_stochastic_columns(emit(h), "emission h=" + std::to_string(h));
        const MatrixXd& r = reward(h);
        if (r.rows() != O || r.cols() != A) throw ValidationError("reward matrix must be O x A");
        if (r.minCoeff() < 0.0 || r.maxCoeff() > 1.0)
            throw ValidationError("rewards must lie in [0,1]");
    }
    if (mu1.minCoeff() < 0.0 || std::abs(mu1.sum() - 1.0) > 1e-12)
        throw ValidationError("initial distribution must be a probability vector");
    double mx = max_cumulative_reward();
    if (mx > 1.0 + 1e-12)
        throw ValidationError("cumulative reward can reach " + format_double(mx) + " > 1");
}

double PomdpModel::max_cumulative_reward() const {
    const double ninf = -std::numeric_limits<double>::infinity();
    VectorXd next = VectorXd::Zero(S);
    for (int h = H; h >= 1; --h) {
        VectorXd cur = VectorXd::Constant(S, ninf);
        for (int s = 0; s < S; ++s) {
            for (int o = 0; o < O; ++o) {
                if (emit(h)(o, s) <= 0.0) continue;
                for (int a = 0; a < A; ++a) {
                    double cont = 0.0;
                    if (h < H) {
                        cont = ninf;
                        for (int s2 = 0; s2 < S; ++s2)
                            if (trans(h, a)(s2, s) > 0.0) cont = std::max(cont, next(s2));
                    }
                    cur(s) = std::max(cur(s), reward(h)(o, a) + cont);
                }
            }
        }
        next = cur;
    }
    double best = ninf;
    for (int s = 0; s < S; ++s)
        if (mu1(s) > 0.0) best = std::max(best, next(s));
    return best;
}

nlohmann::json matrix_to_json(const MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("matrix must be an array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
            throw ValidationError("ragged matrix rows");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

nlohmann::json vector_to_json(const VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

VectorXd vector_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("vector must be an array");
    VectorXd v(static_cast<int>(j.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

nlohmann::json model_to_json(const PomdpModel& m) {
    nlohmann::json j;
    j["horizon"] = m.H;
    j["num_states"] = m.S;
    j["num_observations"] = m.O;
    j["num_actions"] = m.A;
    j["initial"] = vector_to_json(m.mu1);
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& step : m.transitions) {
        nlohmann::json per_a = nlohmann::json::array();
        for (const auto& t : step) per_a.push_back(matrix_to_json(t));
        tr.push_back(per_a);
    }
    j["transitions"] = tr;
    nlohmann::json em = nlohmann::json::array();
    for (const auto& e : m.emissions) em.push_back(matrix_to_json(e));
    j["emissions"] = em;
    nlohmann::json rw = nlohmann::json::array();
    for (const auto& r : m.rewards) rw.push_back(matrix_to_json(r));
    j["rewards"] = rw;
    return j;
}

PomdpModel model_from_json(const nlohmann::json& j) {
    try {
        PomdpModel m;
        m.H = j.at("horizon").get<int>();
        m.S = j.at("num_states").get<int>();
        m.O = j.at("num_observations").get<int>();
        m.A = j.at("num_actions").get<int>();
        m.mu1 = vector_from_json(j.at("initial"));
        for (const auto& step : j.at("transitions")) {
            std::vector<MatrixXd> per_a;
            for (const auto& t : step) per_a.push_back(matrix_from_json(t));
            m.transitions.push_back(per_a);
        }
        for (const auto& e : j.at("emissions")) m.emissions.push_back(matrix_from_json(e));
        for (const auto& r : j.at("rewards")) m.rewards.push_back(matrix_from_json(r));
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed model json: ") + e.what());
    }
}

PomdpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("cannot parse " + path + ": " + e.what());
    }
    return model_from_json(j);
}

void save_model(const PomdpModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << model_to_json(m).dump(2) << "\n";
}

}  // namespace psrlab
