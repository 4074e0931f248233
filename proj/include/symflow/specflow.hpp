#pragma once

#include <optional>
#include <vector>

#include "symflow/paths.hpp"

namespace symflow::specflow {

enum class FlowMethod { crossing_form, endpoint_signature, eigenvalue_tracking };

struct FlowCrossing {
    double s = 0;
    int kernel_dim = 0;
    int signature = 0;   // crossing-form signature restricted to the kernel
    double weight = 1.0;  // 1 inside, 1/2 at a path endpoint
};

struct SpectralFlowReport {
    int flow = 0;
    std::vector<FlowCrossing> crossings;
    FlowMethod method = FlowMethod::crossing_form;
    // set when a degenerate crossing forced internal delta-regularization
    bool regularized = false;
    double delta_used = 0.0;
};

struct SpecflowOptions {
    double param_tol = 1e-10;      // bisection tolerance on the parameter
    double kernel_cutoff = 1e-8;   // singular-value cutoff for kernels
    double endpoint_cutoff = 1e-8; // invertibility cutoff for asymptotes
    int scan_samples = 1024;
    int oracle_refine_limit = 5;
};

// Net signed eigenvalue crossing count of a symmetric path with invertible
// asymptotes. Throws DegenerateEndpointError if an asymptote is singular
// (delta_regularize first), ResolutionError on unresolvable crossing clusters.
SpectralFlowReport spectral_flow(const SymmetricPath& a, FlowMethod method,
                                 const SpecflowOptions& opt = {});

// Brute-force ground truth: dense sampling of all eigenvalue branches plus
// signed zero-crossing counting. Refines on near-zero samples, fails past
// the refinement limit.
int spectral_flow_oracle(const SymmetricPath& a, int samples = 1024,
                         const SpecflowOptions& opt = {});

struct RegularizedPath {
    SymmetricPath path;        // A - delta * beta * id
    bool delta_large = false;  // delta at/above the smallest nonzero asymptotic eigenvalue
};

// beta is the fixed C^1 cubic ramp, applied to the path parameter affinely
// rescaled onto [-1,1]; asymptotes shift by +delta (left) and -delta (right).
RegularizedPath delta_regularize(const SymmetricPath& a, double delta);

// mu(A) := stabilized flow of A_delta over a decreasing sweep (last three
// entries must agree). Works for degenerate asymptotes.
int stabilized_flow(const SymmetricPath& a, std::vector<double> sweep = {},
                    const SpecflowOptions& opt = {});

// sign(B^* A_hat^{-1} B) for a regular pair; throws RegularityError naming
// the violated clause otherwise.
int regular_pair_signature(const RegularPair& p, double tol = 1e-9);

// Pair of paths s -> (A(s), B(s)) with regular asymptotic pairs; B samples
// are aligned with a.params.
struct AugmentedPath {
    SymmetricPath a;
    std::vector<Mat> b_samples;
    Mat b_left, b_right;

    void validate() const;
    int dim_w() const { return a.dim; }
    int dim_v() const { return static_cast<int>(b_left.cols()); }
};

// The symmetric path s -> [[A(s), B(s)], [B(s)^T, 0]] on W + V.
SymmetricPath augmented_symmetric_path(const AugmentedPath& p);

struct LagrangeIdentityReport {
    int mu_ab = 0;
    int mu_a = 0;
    int sigma_minus = 0;
    int sigma_plus = 0;
    bool identity_holds = false;
};

// mu(A_B) = mu(A) + (sigma(A^-,B^-) - sigma(A^+,B^+)) / 2, checked exactly.
LagrangeIdentityReport lagrange_flow_identity(const AugmentedPath& p,
                                              const SpecflowOptions& opt = {});

struct VarlagReport {
    int sigma = 0;
    int minus_sign_dv = 0;
    bool agree = false;
    double eigenvector_residual = 0.0;  // |Hess grad_h + dv/drho(0) grad_h|_max
};

// Plane model f = a x^2/2 + b y^2/2 with constraint h = x: the rho-family of
// constrained critical points is x(rho) = (rho, 0), v(rho) = -a rho; compares
// sigma(Hess, grad h) with -sign(dv/drho(0)). Throws RegularityError for a = 0.
VarlagReport varlag_signature(double a, double b);

}  // namespace symflow::specflow
