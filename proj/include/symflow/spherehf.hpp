#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "symflow/errors.hpp"
#include "symflow/halfint.hpp"

namespace symflow::spherehf {

// Geodesic-loop index on the unit cotangent bundle of S^n: 2 m (n-1) for
// every multiplicity m (constant orbits at m = 0 get 0; negative m by loop
// reversal antisymmetry).
HalfInt geodesic_cz(int n, std::int64_t m);

struct SphereGenerator {
    std::int64_t m = 0;
    int h0_index = 0;     // one of {0, n-1, n, 2n-1}
    HalfInt grading;      // 2 m (n-1) + h0_index - (2n-1)/2
    double action = 0;    // = m
};

std::vector<SphereGenerator> grading_table(int n, std::int64_t m_lo, std::int64_t m_hi);

struct LacunaryPair {
    int i1 = 0, i2 = 0;
    std::int64_t dm = 0;  // multiplicity jump > 0 solving 2 dm (n-1) + (i2-i1) = 1
};

// Complete exact enumeration over ALL multiplicities (the required jump
// grows linearly in dm while the index differences are bounded, so only
// finitely many dm are feasible and the loop provably terminates).
std::vector<LacunaryPair> lacunary_scan(int n);

struct HFTable {
    int n = 0;
    double window_lo = 0, window_hi = 0;
    std::map<HalfInt, int> ranks;
};

struct HFResult {
    std::optional<HFTable> table;             // present when the scan is empty
    std::vector<LacunaryPair> obstructions;   // otherwise the candidate pairs
};

// Chain-level homology table: with an empty lacunary scan the boundary
// vanishes and ranks equal generator counts per degree; otherwise a
// structured refusal carrying the scan output.
HFResult hf_table(int n, double window_lo, double window_hi);

}  // namespace symflow::spherehf
