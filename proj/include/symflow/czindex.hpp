#pragma once

#include <cstdint>
#include <vector>

#include "symflow/halfint.hpp"
#include "symflow/paths.hpp"

namespace symflow::czindex {

struct CZCrossing {
    double t = 0;
    int kernel_dim = 0;   // dim ker(id - Psi_delta(t))
    int signature = 0;    // shifted generator restricted to the kernel
    int weight_halves = 2;  // 1 = endpoint weight 1/2, 2 = interior weight 1
};

struct CZReport {
    HalfInt index;
    std::vector<CZCrossing> crossings;
    double delta = 0;
};

struct RSOptions {
    int scan_samples = 2048;     // grid resolution for integration and scanning
    double defect_tol = 1e-10;
    double t_tol = 1e-10;        // crossing refinement tolerance
    double kernel_cutoff = 1e-8;
};

// Maslov-type index of the symplectic path generated by Psi' = J0 (S - delta id) Psi
// on [0,1]: crossings of det(id - Psi(t)) = 0, contribution = signature of
// the shifted generator on the kernel, weight 1/2 at t in {0,1}, 1 inside.
// delta = 0 gives the unperturbed (possibly half-integer) index.
CZReport rs_index(const SymmetricPath& s, double delta, const RSOptions& opt = {});

struct PerturbedLimits {
    std::int64_t mu_plus = 0;   // stabilized limit of rs_index at +delta
    std::int64_t mu_minus = 0;  // stabilized limit at -delta
};

// Stabilized values over a decreasing positive sweep; the last three entries
// on each side must agree, else SweepError (ResolutionError).
PerturbedLimits perturbed_limits(const SymmetricPath& s, std::vector<double> sweep = {},
                                 const RSOptions& opt = {});

struct Coz1Report {
    std::int64_t lhs = 0;  // numerically integrated perturbed shear index
    std::int64_t rhs = 0;  // (sign(a) - sign(delta)) / 2
    bool agree = false;
};

// Normal-direction shear block with a = eta * h''(0); valid for |delta| < |a|.
Coz1Report coz1_check(double eta, double hpp, double delta);

struct Coz2Report {
    std::int64_t gap = 0;           // mu_minus - mu_plus
    std::int64_t expected_gap = 0;  // dim C (full) or dim C - 1 (transverse)
    bool agree = false;
    HalfInt unperturbed;            // also checked against (mu_+ + mu_-)/2
};

Coz2Report coz2_relations(const SymmetricPath& s, int geometric_dim_c, bool transverse,
                          const RSOptions& opt = {});

// Sign convention for the auxiliary Morse function's contribution. The
// default reproduces the worked unit-cotangent computation; the alternative
// is the other printed display, kept selectable rather than silently fixed.
enum class SigConvention { worked_value, negated_display };

struct GradedGenerator {
    HalfInt cz;
    HalfInt sig_index;
    HalfInt grading;  // cz + sig_index, exact
    double action = 0;
};

GradedGenerator floer_grading(HalfInt cz, int morse_index_h, int dim_component,
                              SigConvention convention = SigConvention::worked_value,
                              double action = 0);

// Local virtual dimension of the space of connecting trajectories between
// two critical families: cz_plus - cz_minus + 2 c1 + (dim C- + dim C+)/2.
// The sphere-class term is an integer input and defaults to zero (the
// trivial regime); it is never computed geometrically here.
HalfInt virtual_dimension(HalfInt cz_minus, HalfInt cz_plus, int dim_c_minus, int dim_c_plus,
                          int c1_term = 0);

// Common generator families.
SymmetricPath shear_generator(double a);                    // S = diag(a, 0) on [0,1]
SymmetricPath rotation_generator(double omega, int dim = 2);  // S = omega * id on [0,1]
SymmetricPath block_sum(const SymmetricPath& s1, const SymmetricPath& s2);
SymmetricPath time_reversed(const SymmetricPath& s);  // t -> -S(1-t)

}  // namespace symflow::czindex
