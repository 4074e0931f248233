#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "symflow/errors.hpp"

namespace symflow {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Standard complex structure on R^{2k}: J0 = [[0, -I],[I, 0]] blockwise,
// i.e. multiplication by i in coordinates (x_1..x_k, y_1..y_k).
Mat standard_j(int dim);

// Max-norm symplectic defect ||M^T J0 M - J0||_max <= tol.
// Throws ValidationError on a non-square or odd-dimensional input.
bool validate_symplectic(const Mat& m, double tol);

// A path of symmetric matrices, piecewise-linear between samples, with
// declared asymptote values outside the sampled interval.
struct SymmetricPath {
    int dim = 0;
    std::vector<double> params;   // strictly increasing
    std::vector<Mat> samples;     // symmetric, one per parameter
    Mat left_asymptote, right_asymptote;

    double lo() const { return params.front(); }
    double hi() const { return params.back(); }

    // Piecewise-linear evaluation; clamps to the asymptotes outside [lo, hi].
    Mat at(double s) const;
    // Path derivative by central difference with step tied to the local
    // sample spacing; inside a segment this is the exact segment slope.
    Mat derivative(double s) const;

    void validate(double symmetry_tol = 1e-10) const;
};

// Uniformly sampled path on [lo, hi]; asymptotes are set to the endpoint
// values. Throws ValidationError if the generator returns a non-symmetric
// or wrongly sized matrix.
SymmetricPath sample_path(const std::function<Mat(double)>& generator,
                          double lo, double hi, int count);

struct LinearizedFlowOptions {
    double defect_tol = 1e-9;  // symplectic defect bound per sample
    int max_doublings = 12;    // step halvings before giving up
};

// Path t |-> Psi(t) generated by Psi' = J0 S(t) Psi, Psi(0) = id.
// `times`/`frames` hold the requested coarse grid; the fine integration
// grid is kept so Psi can be re-evaluated at arbitrary t.
struct SymplecticPath {
    int dim = 0;
    SymmetricPath generator;
    std::vector<double> times;
    std::vector<Mat> frames;

    // Evaluate Psi(t) by stepping from the nearest fine-grid frame.
    Mat at(double t) const;

    std::vector<double> fine_times;
    std::vector<Mat> fine_frames;
};

// Fixed-step RK4 on the matrix ODE; on defect violation the whole
// integration is rerun at doubled resolution (deterministic), up to
// the refinement limit. Throws IntegrationError past the limit.
SymplecticPath linearized_flow(const SymmetricPath& s, int steps,
                               const LinearizedFlowOptions& opt = {});

// Pair (A, B): B injective, A preserving range(B) with invertible restriction.
struct RegularPair {
    Mat a;  // dim_W x dim_W symmetric
    Mat b;  // dim_W x dim_V, dim_V <= dim_W
};

// Throws RegularityError naming the violated clause.
void validate_regular_pair(const RegularPair& p, double tol = 1e-9);

// JSON path file format: {"dim", "interval", "samples": [[s, row-major]], and
// optional "left_asymptote"/"right_asymptote" row-major}. Round-trips bit-exactly.
SymmetricPath path_from_json_text(const std::string& text);
std::string path_to_json_text(const SymmetricPath& p);
SymmetricPath load_path(const std::string& file);
void save_path(const SymmetricPath& p, const std::string& file);

}  // namespace symflow
