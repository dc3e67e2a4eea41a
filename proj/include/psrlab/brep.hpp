#pragma once

#include "psrlab/core_tests.hpp"
#include "psrlab/model.hpp"
#include "psrlab/trajectory.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace psrlab {

// Operators B_h(o,a) of shape |U_{h+1}| x |U_h| and q0 over U_1.
struct BRep {
    CoreTestSet core;
    VectorXd q0;
    std::vector<std::vector<MatrixXd>> ops;  // [h-1][o*A + a]
    std::string provenance = "raw";
    std::map<std::string, double> diagnostics;

    int H() const { return core.horizon(); }
    int O() const { return core.num_obs(); }
    int A() const { return core.num_actions(); }
    const MatrixXd& op(int h, int o, int a) const { return ops[h - 1][o * A() + a]; }
    MatrixXd& op(int h, int o, int a) { return ops[h - 1][o * A() + a]; }
};

BRep zero_brep(const CoreTestSet& core);

// W_h with rows tau_{h:H} (trajectory_index order) and columns U_h, so that
// B_{H:h}(tau_{h:H}) x = (W_h x)(tau_{h:H}). W_{H+1} is the 1x1 identity.
MatrixXd forward_operator(const BRep& b, int h);
// P(tau_H) = B_{H:1}(tau_H) q0 for all tau_H.
std::vector<double> brep_do_probabilities(const BRep& b);
// B_{h:1}(tau_h) q0 for a full trajectory of length h.
VectorXd brep_prefix_vector(const BRep& b, const Trajectory& tau);

// Max residual of the product identity, the one-step identity and the
// future-probability identity against exact enumeration.
double validate_brep(const BRep& b, const PomdpModel& model);

enum class InverseMode { Pseudo, L1Left };
// Left inverse minimizing ||X||_{1->1} subject to X M = I.
MatrixXd l1_left_inverse(const MatrixXd& m);

BRep brep_revealing(const PomdpModel& model, int m, InverseMode mode = InverseMode::Pseudo);

// phi[h-1] maps the flattened window z_h = (o, a, ..., o_h) of length
// min(m, h) observations to the latent state.
struct Decoder {
    int m = 1;
    std::vector<std::map<std::vector<int>, int>> phi;
    std::optional<int> decode(int h, const std::vector<int>& z) const;
};
std::vector<int> decoder_window(const Trajectory& history, int h, int m);
// Builds the decoder by joint enumeration; throws DecoderError when some
// window is consistent with two latent states.
Decoder derive_decoder(const PomdpModel& model, int m);
void verify_decoder(const PomdpModel& model, const Decoder& d);
BRep brep_decodable(const PomdpModel& model, const Decoder& decoder, int m);

enum class NaturalMode { Pseudo, Subspace };
BRep brep_future_sufficient(const PomdpModel& model, int m,
                            const std::optional<std::vector<MatrixXd>>& m_natural = std::nullopt,
                            NaturalMode mode = NaturalMode::Subspace);

enum class CoreChoice { Auto, Exhaustive, Greedy };
struct RegularPsrResult {
    BRep brep;
    double alpha_inv = 0.0;  // max_h ||K_h^+||_{1->1}
    bool exhaustive = true;  // false flags greedy (possibly suboptimal) selection
    std::vector<MatrixXd> core_matrices;
};
RegularPsrResult brep_regular_psr(const PomdpModel& model, const CoreTestSet& core,
                                  CoreChoice choice = CoreChoice::Auto);
RegularPsrResult brep_regular_psr(const BRep& raw, CoreChoice choice = CoreChoice::Auto);
// Column indices of D forming K with rank(K) = rank(D); exhaustive mode
// minimizes ||K^+||_{1->1}.
std::vector<int> select_core_columns(const MatrixXd& d, CoreChoice choice, bool* exhaustive);

nlohmann::json brep_to_json(const BRep& b);
BRep brep_from_json(const nlohmann::json& j);
Test parse_test(const std::string& s);

}  // namespace psrlab
