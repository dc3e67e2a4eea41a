#pragma once

#include "psrlab/brep.hpp"
#include "psrlab/latent_mdp.hpp"
#include "psrlab/model.hpp"
#include "psrlab/model_class.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace psrlab {

// H=2, S=O=A=2, identity emissions; action 1 flips the state, action 0
// keeps it; mu1 = (1,0); reward 1/H for observation 1.
PomdpModel fix_id();
// fix_id with emission [[0.8,0.2],[0.2,0.8]].
PomdpModel fix_noisy();
// H=3, S=4 latent (p, x) with o = x, p' = x xor a, x' drawn toward p.
// Decodable from (o_{h-1}, a_{h-1}, o_h) but not from o_h alone.
PomdpModel fix_dec2();
Decoder fix_dec2_decoder();
// Two latent MDPs (S=2, A=2, H=3) with opposite dynamics and rewards.
std::vector<Mdp> fix_lmdp_components();
PomdpModel fix_lmdp();

// Eight members of FIX-NOISY shape indexed by bits (initial, action
// semantics, emission accuracy); member 0 is FIX-NOISY.
ModelClass noisy_class();

PomdpModel random_revealing(int S, int O, int A, int H, double sigma_floor, std::uint64_t seed);
// 1-step decodable: disjoint observation supports per state (O >= S).
PomdpModel random_decodable(int S, int O, int A, int H, std::uint64_t seed);
// Rank-d transitions T = Psi Phi with an O < S emission; future-sufficient
// with m = 1 but not revealing.
PomdpModel random_low_rank(int S, int O, int A, int H, int d, std::uint64_t seed);
PomdpModel random_pomdp(int S, int O, int A, int H, std::uint64_t seed);

// name in {FIX-ID, FIX-NOISY, FIX-DEC2, FIX-LMDP, FIX-NOISY-CLASS,
// random-revealing, random-decodable, random-low-rank}. Returns model or
// class json.
nlohmann::json generate_fixture(const std::string& name, const nlohmann::json& params, std::uint64_t seed);
bool fixture_is_class(const std::string& name);
PomdpModel fixture_model(const std::string& name);

}  // namespace psrlab
