#include "symflow/specflow.hpp"

#include <algorithm>
#include <cmath>

namespace symflow::specflow {

namespace {

// Signature of a symmetric matrix: #(eig > cut) - #(eig < -cut).
int signature_of(const Mat& a, double cut) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    int sig = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double l = es.eigenvalues()[i];
        if (l > cut) ++sig;
        else if (l < -cut) --sig;
    }
    return sig;
}

double min_abs_eig(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    return es.eigenvalues().cwiseAbs().minCoeff();
}

// Kernel basis: eigenvectors with |eig| <= cut.
Mat kernel_basis(const Mat& a, double cut) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()[i]) <= cut) idx.push_back(i);
    Mat v(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(idx[k]);
    return v;
}

// Path extended by linear junction segments to the asymptote values, so
// crossings hidden between the declared limits and the first/last sample
// are scanned too.
SymmetricPath extend_to_asymptotes(const SymmetricPath& a) {
    SymmetricPath e = a;
    const double pad = 0.1 * (a.hi() - a.lo());
    if ((a.left_asymptote - a.samples.front()).cwiseAbs().maxCoeff() > 0) {
        e.params.insert(e.params.begin(), a.lo() - pad);
        e.samples.insert(e.samples.begin(), a.left_asymptote);
    }
    if ((a.right_asymptote - a.samples.back()).cwiseAbs().maxCoeff() > 0) {
        e.params.push_back(a.hi() + pad);
        e.samples.push_back(a.right_asymptote);
    }
    return e;
}

std::vector<double> scan_grid(const SymmetricPath& p, int scan_samples) {
    std::vector<double> grid(p.params);
    const double span = p.hi() - p.lo();
    for (int i = 0; i <= scan_samples; ++i) grid.push_back(p.lo() + span * i / scan_samples);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [&](double x, double y) { return std::abs(x - y) < 1e-15 * (1 + span); }),
               grid.end());
    return grid;
}

double max_segment_slope(const SymmetricPath& p) {
    double slope = 0;
    for (std::size_t i = 0; i + 1 < p.params.size(); ++i)
        slope = std::max(slope, (p.samples[i + 1] - p.samples[i]).cwiseAbs().maxCoeff() /
                                    (p.params[i + 1] - p.params[i]));
    return slope * p.dim;  // crude operator-norm bound
}

struct Located {
    double s;
    int kernel_dim;
    int signature;
    bool degenerate;  // singular crossing form at an odd crossing
};

Located analyze_crossing(const SymmetricPath& p, double s, double slope, const SpecflowOptions& opt) {
    const double cut = std::max(opt.kernel_cutoff, 8.0 * slope * opt.param_tol);
    const Mat a = p.at(s);
    const Mat v = kernel_basis(a, cut);
    const int kdim = static_cast<int>(v.cols());
    const Mat form = v.transpose() * p.derivative(s) * v;
    const int sig = signature_of(form, opt.kernel_cutoff);
    // regular crossing = nondegenerate restricted form, whatever the kernel
    // dimension; a singular form leaves the contribution undetermined by
    // first-order data
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (form + form.transpose()));
    bool degen = kdim == 0;
    if (kdim >= 1 && es.eigenvalues().cwiseAbs().minCoeff() <= opt.kernel_cutoff) degen = true;
    return {s, kdim, sig, degen};
}

double bisect_det_zero(const SymmetricPath& p, double a, double b, double fa, const SpecflowOptions& opt) {
    while (b - a > opt.param_tol) {
        const double m = 0.5 * (a + b);
        const double fm = p.at(m).determinant();
        if (fm == 0.0) return m;
        if ((fa < 0) != (fm < 0)) b = m;
        else { a = m; fa = fm; }
    }
    return 0.5 * (a + b);
}

double ternary_min(const SymmetricPath& p, double a, double b, const SpecflowOptions& opt) {
    while (b - a > opt.param_tol) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (min_abs_eig(p.at(m1)) < min_abs_eig(p.at(m2))) b = m2;
        else a = m1;
    }
    return 0.5 * (a + b);
}

int negative_count(const Mat& a, double cut) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    int neg = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] < -cut) ++neg;
    return neg;
}

// One crossing-form pass; degenerate odd crossings are flagged, not resolved.
std::vector<Located> locate_crossings(const SymmetricPath& path, const SpecflowOptions& opt) {
    const SymmetricPath ext = extend_to_asymptotes(path);
    const std::vector<double> grid = scan_grid(ext, opt.scan_samples);
    std::vector<double> det(grid.size()), gmin(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Mat a = ext.at(grid[i]);
        det[i] = a.determinant();
        gmin[i] = min_abs_eig(a);
    }
    const double slope = std::max(max_segment_slope(ext), 1e-12);

    std::vector<Located> out;
    auto push = [&](Located c) {
        for (const Located& prev : out)
            if (std::abs(prev.s - c.s) <= 4.0 * opt.param_tol) return;
        out.push_back(std::move(c));
    };

    std::vector<bool> used(grid.size(), false);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if ((det[i] < 0) == (det[i + 1] < 0)) continue;
        const double s = bisect_det_zero(ext, grid[i], grid[i + 1], det[i], opt);
        push(analyze_crossing(ext, s, slope, opt));
        used[i] = true;
    }
    // even-order events: an eigenvalue branch reaches zero with no
    // determinant sign change (a tangency or a paired crossing). Their net
    // contribution is pinned exactly by the two-sided negative-eigenvalue
    // count over the bracket, which both ends resolve cleanly.
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        if (used[i - 1] || used[i]) continue;
        const double h = std::max(grid[i] - grid[i - 1], grid[i + 1] - grid[i]);
        if (gmin[i] > 2.0 * slope * h) continue;
        if (gmin[i] > gmin[i - 1] || gmin[i] > gmin[i + 1]) continue;
        const double s = ternary_min(ext, grid[i - 1], grid[i + 1], opt);
        const Mat at_s = ext.at(s);
        if (min_abs_eig(at_s) > opt.kernel_cutoff) continue;
        const int net = negative_count(ext.at(grid[i - 1]), opt.kernel_cutoff) -
                        negative_count(ext.at(grid[i + 1]), opt.kernel_cutoff);
        const int kdim = static_cast<int>(kernel_basis(at_s, opt.kernel_cutoff).cols());
        push({s, std::max(kdim, 1), net, false});
    }

    std::sort(out.begin(), out.end(), [](const Located& a, const Located& b) { return a.s < b.s; });
    return out;
}

std::vector<double> default_sweep() {
    std::vector<double> sweep;
    for (int j = 0; j < 8; ++j) sweep.push_back(1e-2 / (1 << j));
    return sweep;
}

int endpoint_flow(const SymmetricPath& a, const SpecflowOptions& opt) {
    const int diff = signature_of(a.right_asymptote, opt.endpoint_cutoff) -
                     signature_of(a.left_asymptote, opt.endpoint_cutoff);
    return diff / 2;  // invertible ends make the difference even
}

void require_invertible_ends(const SymmetricPath& a, const SpecflowOptions& opt) {
    if (min_abs_eig(a.left_asymptote) <= opt.endpoint_cutoff ||
        min_abs_eig(a.right_asymptote) <= opt.endpoint_cutoff)
        throw DegenerateEndpointError(
            "spectral_flow: asymptote has a (near-)kernel; delta_regularize the path first");
}

}  // namespace

SpectralFlowReport spectral_flow(const SymmetricPath& a, FlowMethod method, const SpecflowOptions& opt) {
    a.validate();
    require_invertible_ends(a, opt);

    SpectralFlowReport rep;
    rep.method = method;
    switch (method) {
        case FlowMethod::endpoint_signature:
            rep.flow = endpoint_flow(a, opt);
            return rep;
        case FlowMethod::eigenvalue_tracking:
            rep.flow = spectral_flow_oracle(a, opt.scan_samples, opt);
            return rep;
        case FlowMethod::crossing_form:
            break;
    }

    std::vector<Located> crossings = locate_crossings(a, opt);
    const bool clean = std::none_of(crossings.begin(), crossings.end(),
                                    [](const Located& c) { return c.degenerate; });
    if (!clean) {
        // resolve by delta-perturbing the whole path, never by local fudging
        const double eig_room = std::min(min_abs_eig(a.left_asymptote), min_abs_eig(a.right_asymptote));
        std::vector<int> flows;
        double used = 0;
        for (double delta : {0.25 * eig_room, 0.125 * eig_room, 0.0625 * eig_room}) {
            const SymmetricPath reg = delta_regularize(a, delta).path;
            std::vector<Located> rc = locate_crossings(reg, opt);
            if (std::any_of(rc.begin(), rc.end(), [](const Located& c) { return c.degenerate; })) continue;
            int f = 0;
            for (const Located& c : rc) f += c.signature;
            flows.push_back(f);
            if (flows.size() == 1) { crossings = std::move(rc); used = delta; }
        }
        if (flows.size() < 2 || !std::equal(flows.begin() + 1, flows.end(), flows.begin()))
            throw ResolutionError("spectral_flow: unresolvable degenerate crossing cluster");
        rep.regularized = true;
        rep.delta_used = used;
    }

    rep.flow = 0;
    for (const Located& c : crossings) {
        rep.flow += c.signature;
        rep.crossings.push_back({c.s, c.kernel_dim, c.signature, 1.0});
    }
    return rep;
}

int spectral_flow_oracle(const SymmetricPath& a, int samples, const SpecflowOptions& opt) {
    a.validate();
    require_invertible_ends(a, opt);
    const double cut = opt.kernel_cutoff;

    for (int attempt = 0; attempt <= opt.oracle_refine_limit; ++attempt) {
        const int n = samples << attempt;
        const double phase = 0.381966 / (1 << attempt);
        std::vector<Vec> eigs;
        eigs.reserve(n + 2);
        auto eig_of = [&](const Mat& m) {
            return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (m + m.transpose())).eigenvalues().eval();
        };
        eigs.push_back(eig_of(a.left_asymptote));
        bool ambiguous = false;
        for (int i = 0; i <= n && !ambiguous; ++i) {
            const double s = a.lo() + (a.hi() - a.lo()) * (i + phase) / (n + 1);
            Vec e = eig_of(a.at(s));
            if (e.cwiseAbs().minCoeff() <= cut) ambiguous = true;  // branch hit zero at a node
            eigs.push_back(std::move(e));
        }
        if (ambiguous) continue;
        eigs.push_back(eig_of(a.right_asymptote));

        int flow = 0;
        for (std::size_t i = 0; i + 1 < eigs.size(); ++i) {
            for (Eigen::Index k = 0; k < eigs[i].size(); ++k) {
                const double x = eigs[i][k], y = eigs[i + 1][k];
                if (x < -cut && y > cut) ++flow;
                else if (x > cut && y < -cut) --flow;
            }
        }
        return flow;
    }
    throw ResolutionError("spectral_flow_oracle: eigenvalue-branch ambiguity persists past refinement limit");
}

RegularizedPath delta_regularize(const SymmetricPath& a, double delta) {
    a.validate();
    if (delta <= 0) throw ValidationError("delta_regularize: delta must be positive");
    // fixed C^1 cubic ramp on the affinely normalized parameter
    const auto beta = [&](double s) {
        const double u = std::clamp(2.0 * (s - a.lo()) / (a.hi() - a.lo()) - 1.0, -1.0, 1.0);
        return 0.5 * u * (3.0 - u * u);
    };
    RegularizedPath out;
    out.path = a;
    const Mat id = Mat::Identity(a.dim, a.dim);
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        out.path.samples[i] = a.samples[i] - delta * beta(a.params[i]) * id;
    out.path.left_asymptote = a.left_asymptote + delta * id;
    out.path.right_asymptote = a.right_asymptote - delta * id;

    double smallest_nonzero = std::numeric_limits<double>::infinity();
    for (const Mat* m : {&a.left_asymptote, &a.right_asymptote}) {
        Eigen::SelfAdjointEigenSolver<Mat> es(*m);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double l = std::abs(es.eigenvalues()[i]);
            if (l > 1e-12) smallest_nonzero = std::min(smallest_nonzero, l);
        }
    }
    out.delta_large = delta >= smallest_nonzero;
    return out;
}

int stabilized_flow(const SymmetricPath& a, std::vector<double> sweep, const SpecflowOptions& opt) {
    if (sweep.empty()) sweep = default_sweep();
    std::vector<int> flows;
    for (double d : sweep) {
        try {
            flows.push_back(endpoint_flow(delta_regularize(a, d).path, opt));
        } catch (const DegenerateEndpointError&) {
            // delta coincided with an asymptotic eigenvalue; skip this entry
        }
    }
    if (flows.size() >= 3) {
        const int v = flows.back();
        if (flows[flows.size() - 2] == v && flows[flows.size() - 3] == v) return v;
    }
    throw ResolutionError("stabilized_flow: delta sweep did not stabilize over its last three entries");
}

int regular_pair_signature(const RegularPair& p, double tol) {
    validate_regular_pair(p, tol);
    if (p.b.cols() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(p.b, Eigen::ComputeThinU);
    const Mat q = svd.matrixU();
    const Mat a_hat = q.transpose() * p.a * q;
    const Mat c = q.transpose() * p.b;
    const Mat s = c.transpose() * a_hat.fullPivLu().solve(c);
    return signature_of(s, tol);
}

void AugmentedPath::validate() const {
    a.validate();
    if (b_samples.size() != a.params.size())
        throw ValidationError("AugmentedPath: B samples must align with A parameters");
    const auto v = b_left.cols();
    for (const Mat* m : {&b_left, &b_right})
        if (m->rows() != a.dim || m->cols() != v)
            throw ValidationError("AugmentedPath: B asymptote shape mismatch");
    for (const Mat& m : b_samples)
        if (m.rows() != a.dim || m.cols() != v)
            throw ValidationError("AugmentedPath: B sample shape mismatch");
}

SymmetricPath augmented_symmetric_path(const AugmentedPath& p) {
    p.validate();
    const int w = p.dim_w(), v = p.dim_v();
    auto augment = [&](const Mat& a, const Mat& b) {
        Mat c = Mat::Zero(w + v, w + v);
        c.topLeftCorner(w, w) = a;
        c.topRightCorner(w, v) = b;
        c.bottomLeftCorner(v, w) = b.transpose();
        return c;
    };
    SymmetricPath out;
    out.dim = w + v;
    out.params = p.a.params;
    for (std::size_t i = 0; i < p.a.samples.size(); ++i)
        out.samples.push_back(augment(p.a.samples[i], p.b_samples[i]));
    out.left_asymptote = augment(p.a.left_asymptote, p.b_left);
    out.right_asymptote = augment(p.a.right_asymptote, p.b_right);
    out.validate();
    return out;
}

LagrangeIdentityReport lagrange_flow_identity(const AugmentedPath& p, const SpecflowOptions& opt) {
    p.validate();
    validate_regular_pair({p.a.left_asymptote, p.b_left});
    validate_regular_pair({p.a.right_asymptote, p.b_right});

    LagrangeIdentityReport rep;
    rep.mu_a = spectral_flow(p.a, FlowMethod::crossing_form, opt).flow;
    rep.mu_ab = spectral_flow(augmented_symmetric_path(p), FlowMethod::crossing_form, opt).flow;
    rep.sigma_minus = regular_pair_signature({p.a.left_asymptote, p.b_left});
    rep.sigma_plus = regular_pair_signature({p.a.right_asymptote, p.b_right});
    rep.identity_holds = 2 * (rep.mu_ab - rep.mu_a) == rep.sigma_minus - rep.sigma_plus;
    return rep;
}

VarlagReport varlag_signature(double a, double b) {
    if (a == 0.0)
        throw RegularityError("varlag_signature: a = 0 puts grad h in the kernel of the Hessian (pair not regular)");

    // rho-family of constrained critical points: grad f + v grad h = 0, h = rho
    // with f = a x^2/2 + b y^2/2, h = x, solved exactly.
    const auto family = [&](double rho) {
        const double x = rho, y = 0.0, v = -a * rho;
        return std::array<double, 3>{x, y, v};
    };
    const double h = 1e-3;
    const double dv0 = (family(h)[2] - family(-h)[2]) / (2.0 * h);

    Mat hess = Mat::Zero(2, 2);
    hess(0, 0) = a;
    hess(1, 1) = b;
    Mat grad_h(2, 1);
    grad_h << 1.0, 0.0;

    VarlagReport rep;
    rep.sigma = regular_pair_signature({hess, grad_h});
    rep.minus_sign_dv = dv0 > 0 ? -1 : (dv0 < 0 ? 1 : 0);
    rep.agree = rep.sigma == rep.minus_sign_dv;
    rep.eigenvector_residual = (hess * grad_h + dv0 * grad_h).cwiseAbs().maxCoeff();
    return rep;
}

}  // namespace symflow::specflow
