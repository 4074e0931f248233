#include "symflow/czindex.hpp"

#include <algorithm>
#include <cmath>

namespace symflow::czindex {

namespace {

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

// Kernel of (id - Psi) via right singular vectors; Psi is not symmetric.
Mat gap_kernel(const Mat& psi, double cut) {
    const Mat gap = Mat::Identity(psi.rows(), psi.cols()) - psi;
    Eigen::JacobiSVD<Mat> svd(gap, Eigen::ComputeFullV);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] <= cut) idx.push_back(i);
    Mat v(psi.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = svd.matrixV().col(idx[k]);
    return v;
}

double sigma_min(const Mat& psi) {
    const Mat gap = Mat::Identity(psi.rows(), psi.cols()) - psi;
    return Eigen::JacobiSVD<Mat>(gap).singularValues().minCoeff();
}

double gap_det(const Mat& psi) {
    return (Mat::Identity(psi.rows(), psi.cols()) - psi).determinant();
}

SymmetricPath shifted_generator(const SymmetricPath& s, double delta) {
    SymmetricPath out = s;
    const Mat id = Mat::Identity(s.dim, s.dim);
    for (Mat& a : out.samples) a -= delta * id;
    out.left_asymptote -= delta * id;
    out.right_asymptote -= delta * id;
    return out;
}

struct Event {
    double t;
    int kernel_dim;
    int signature;
    int weight_halves;
};

}  // namespace

CZReport rs_index(const SymmetricPath& s, double delta, const RSOptions& opt) {
    s.validate();
    if (s.dim % 2 != 0) throw ValidationError("rs_index: generator dimension must be even");

    const SymmetricPath gen = shifted_generator(s, delta);
    LinearizedFlowOptions flow_opt;
    flow_opt.defect_tol = opt.defect_tol;
    const SymplecticPath psi = linearized_flow(gen, opt.scan_samples, flow_opt);

    const int n = static_cast<int>(psi.times.size()) - 1;
    std::vector<double> g(n + 1), det(n + 1);
    for (int i = 0; i <= n; ++i) {
        g[i] = sigma_min(psi.frames[i]);
        det[i] = gap_det(psi.frames[i]);
    }
    // Lipschitz bound for sigma_min along t: |dPsi/dt| <= |S - delta| |Psi|
    double gen_norm = 0, psi_norm = 0;
    for (int i = 0; i <= n; ++i) {
        gen_norm = std::max(gen_norm, gen.at(psi.times[i]).cwiseAbs().maxCoeff());
        psi_norm = std::max(psi_norm, psi.frames[i].cwiseAbs().maxCoeff());
    }
    const double slope = std::max(1e-9, gen_norm * psi_norm * s.dim * s.dim);
    const double h = 1.0 / n;
    const double cut = opt.kernel_cutoff;

    std::vector<Event> events;
    auto add_event = [&](double t) {
        const double merge_window = std::max(16.0 * opt.t_tol, 1e-13);
        for (const Event& e : events)
            if (std::abs(e.t - t) <= merge_window) return;
        const Mat frame = psi.at(t);
        const Mat v = gap_kernel(frame, cut);
        if (v.cols() == 0) return;  // refinement landed off the kernel set
        const Mat form = v.transpose() * gen.at(t) * v;
        const int w = (t <= opt.t_tol || t >= 1.0 - opt.t_tol) ? 1 : 2;
        events.push_back({t, static_cast<int>(v.cols()), signature_of(form, cut), w});
    };

    // runs of grid points with nontrivial kernel (t = 0 always qualifies)
    std::vector<std::pair<int, int>> clusters;
    for (int i = 0; i <= n;) {
        if (g[i] >= cut) { ++i; continue; }
        int j = i;
        while (j + 1 <= n && g[j + 1] < cut) ++j;
        clusters.emplace_back(i, j);
        i = j + 1;
    }

    for (const auto& [a, b] : clusters) {
        if (a == b) {
            add_event(psi.times[a]);
            continue;
        }
        // persistent-kernel stretch: kernel-dimension jumps are isolated
        // crossings embedded in the stretch, the plateau itself contributes
        // the signature of the (necessarily degenerate) restricted form
        std::vector<int> kdim(b - a + 1);
        for (int i = a; i <= b; ++i)
            kdim[i - a] = static_cast<int>(gap_kernel(psi.frames[i], cut).cols());
        std::vector<int> sorted = kdim;
        std::sort(sorted.begin(), sorted.end());
        const int modal = sorted[sorted.size() / 2];
        for (int i = a; i <= b; ++i)
            if (kdim[i - a] > modal) add_event(psi.times[i]);
        int rep = -1;
        for (int i = a; i <= b; ++i) {
            if (kdim[i - a] != modal) continue;
            if (rep < 0 || std::abs(i - (a + b) / 2) < std::abs(rep - (a + b) / 2)) rep = i;
        }
        if (rep >= 0) {
            const Mat v = gap_kernel(psi.frames[rep], cut);
            const Mat form = v.transpose() * gen.at(psi.times[rep]) * v;
            if (signature_of(form, cut) != 0)
                throw ResolutionError(
                    "rs_index: crossing cluster with indefinite persistent form is unresolvable "
                    "at this resolution; rerun with a delta sweep");
            add_event(psi.times[rep]);
        }
        if (kdim[0] == modal && a == 0) add_event(0.0);
        if (kdim[b - a] == modal && b == n) add_event(1.0);
    }

    // isolated crossings off the grid: determinant sign changes, then
    // near-tangent minima of the smallest singular value
    std::vector<bool> used(n, false);
    for (const auto& [a, b] : clusters) {
        for (int i = std::max(0, a - 1); i <= std::min(n - 1, b); ++i) used[i] = true;
    }
    for (int i = 0; i < n; ++i) {
        if (used[i] || (det[i] < 0) == (det[i + 1] < 0)) continue;
        double lo = psi.times[i], hi = psi.times[i + 1], flo = det[i];
        while (hi - lo > opt.t_tol) {
            const double m = 0.5 * (lo + hi);
            const double fm = gap_det(psi.at(m));
            if ((flo < 0) != (fm < 0)) hi = m;
            else { lo = m; flo = fm; }
        }
        add_event(0.5 * (lo + hi));
        used[i] = true;
    }
    for (int i = 1; i < n; ++i) {
        if (used[i - 1] || used[i]) continue;
        if (g[i] > g[i - 1] || g[i] > g[i + 1]) continue;
        if (g[i] > 2.0 * slope * h) continue;
        double lo = psi.times[i - 1], hi = psi.times[i + 1];
        while (hi - lo > opt.t_tol) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (sigma_min(psi.at(m1)) < sigma_min(psi.at(m2))) hi = m2;
            else lo = m1;
        }
        const double t = 0.5 * (lo + hi);
        if (sigma_min(psi.at(t)) <= cut) add_event(t);
    }

    std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) { return x.t < y.t; });

    CZReport rep;
    rep.delta = delta;
    std::int64_t twice = 0;
    for (const Event& e : events) {
        twice += static_cast<std::int64_t>(e.signature) * e.weight_halves;
        rep.crossings.push_back({e.t, e.kernel_dim, e.signature, e.weight_halves});
    }
    rep.index = HalfInt{twice};
    return rep;
}

PerturbedLimits perturbed_limits(const SymmetricPath& s, std::vector<double> sweep, const RSOptions& opt) {
    if (sweep.empty()) sweep = {0.08, 0.04, 0.02, 0.01, 0.005};
    for (std::size_t i = 0; i + 1 < sweep.size(); ++i)
        if (!(sweep[i] > sweep[i + 1]) || sweep[i + 1] <= 0)
            throw ValidationError("perturbed_limits: sweep must be decreasing and positive");

    auto stabilized = [&](double side) {
        std::vector<std::int64_t> vals;
        for (double d : sweep) {
            const CZReport r = rs_index(s, side * d, opt);
            if (!r.index.is_integer())
                throw ResolutionError("perturbed_limits: perturbed index came out non-integer; sweep unresolved");
            vals.push_back(r.index.as_integer());
        }
        const std::size_t m = vals.size();
        if (m < 3 || vals[m - 1] != vals[m - 2] || vals[m - 2] != vals[m - 3])
            throw ResolutionError("perturbed_limits: delta sweep did not stabilize over its last three entries");
        return vals.back();
    };
    PerturbedLimits lim;
    lim.mu_plus = stabilized(+1.0);
    lim.mu_minus = stabilized(-1.0);
    return lim;
}

Coz1Report coz1_check(double eta, double hpp, double delta) {
    const double a = eta * hpp;
    if (a == 0.0) throw PreconditionError("coz1_check: eta * h''(0) must be nonzero");
    if (delta == 0.0 || std::abs(delta) >= std::abs(a))
        throw PreconditionError("coz1_check: need 0 < |delta| < |eta * h''(0)|");

    const CZReport r = rs_index(shear_generator(a), delta);
    Coz1Report rep;
    if (!r.index.is_integer()) throw ResolutionError("coz1_check: perturbed index not integer");
    rep.lhs = r.index.as_integer();
    const auto sgn = [](double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); };
    rep.rhs = (sgn(a) - sgn(delta)) / 2;
    rep.agree = rep.lhs == rep.rhs;
    return rep;
}

Coz2Report coz2_relations(const SymmetricPath& s, int geometric_dim_c, bool transverse, const RSOptions& opt) {
    if (geometric_dim_c < 0) throw ValidationError("coz2_relations: component dimension must be nonnegative");
    const PerturbedLimits lim = perturbed_limits(s, {}, opt);
    Coz2Report rep;
    rep.gap = lim.mu_minus - lim.mu_plus;
    rep.expected_gap = transverse ? geometric_dim_c - 1 : geometric_dim_c;
    rep.unperturbed = rs_index(s, 0.0, opt).index;
    // unperturbed index must be the average of the two perturbed limits
    rep.agree = rep.gap == rep.expected_gap && rep.unperturbed.twice == lim.mu_plus + lim.mu_minus;
    return rep;
}

GradedGenerator floer_grading(HalfInt cz, int morse_index_h, int dim_component,
                              SigConvention convention, double action) {
    if (morse_index_h < 0 || morse_index_h > dim_component)
        throw ValidationError("floer_grading: Morse index out of range [0, dim_component]");
    GradedGenerator g;
    g.cz = cz;
    g.sig_index = convention == SigConvention::worked_value
                      ? HalfInt{2 * static_cast<std::int64_t>(morse_index_h) - dim_component}
                      : HalfInt{-2 * static_cast<std::int64_t>(morse_index_h) - dim_component};
    g.grading = g.cz + g.sig_index;
    g.action = action;
    return g;
}

HalfInt virtual_dimension(HalfInt cz_minus, HalfInt cz_plus, int dim_c_minus, int dim_c_plus,
                          int c1_term) {
    if (dim_c_minus < 0 || dim_c_plus < 0)
        throw ValidationError("virtual_dimension: component dimensions must be nonnegative");
    return cz_plus - cz_minus + HalfInt::whole(2 * c1_term) + HalfInt{dim_c_minus + dim_c_plus};
}

SymmetricPath shear_generator(double a) {
    return sample_path([a](double) {
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = a;
        return m;
    }, 0.0, 1.0, 3);
}

SymmetricPath rotation_generator(double omega, int dim) {
    if (dim <= 0 || dim % 2 != 0) throw ValidationError("rotation_generator: dimension must be even positive");
    return sample_path([omega, dim](double) { return (omega * Mat::Identity(dim, dim)).eval(); }, 0.0, 1.0, 3);
}

SymmetricPath block_sum(const SymmetricPath& s1, const SymmetricPath& s2) {
    if (std::abs(s1.lo() - s2.lo()) > 1e-12 || std::abs(s1.hi() - s2.hi()) > 1e-12)
        throw ValidationError("block_sum: paths must share their parameter interval");
    if (s1.dim % 2 != 0 || s2.dim % 2 != 0)
        throw ValidationError("block_sum: factors must be even-dimensional");
    std::vector<double> grid(s1.params);
    grid.insert(grid.end(), s2.params.begin(), s2.params.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    // J0 splits coordinates as (x_1..x_K, y_1..y_K), so the factors embed
    // interleaved: block 1 takes x-slots 0..k1-1 and y-slots K..K+k1-1.
    const int k1 = s1.dim / 2, k2 = s2.dim / 2, K = k1 + k2;
    std::vector<int> pos(s1.dim + s2.dim);
    for (int i = 0; i < k1; ++i) { pos[i] = i; pos[k1 + i] = K + i; }
    for (int i = 0; i < k2; ++i) { pos[s1.dim + i] = k1 + i; pos[s1.dim + k2 + i] = K + k1 + i; }
    auto blk = [&](const Mat& a, const Mat& b) {
        Mat m = Mat::Zero(2 * K, 2 * K);
        for (int i = 0; i < s1.dim; ++i)
            for (int j = 0; j < s1.dim; ++j) m(pos[i], pos[j]) = a(i, j);
        for (int i = 0; i < s2.dim; ++i)
            for (int j = 0; j < s2.dim; ++j) m(pos[s1.dim + i], pos[s1.dim + j]) = b(i, j);
        return m;
    };
    SymmetricPath out;
    out.dim = s1.dim + s2.dim;
    out.params = grid;
    for (double t : grid) out.samples.push_back(blk(s1.at(t), s2.at(t)));
    out.left_asymptote = blk(s1.left_asymptote, s2.left_asymptote);
    out.right_asymptote = blk(s1.right_asymptote, s2.right_asymptote);
    out.validate();
    return out;
}

SymmetricPath time_reversed(const SymmetricPath& s) {
    SymmetricPath out;
    out.dim = s.dim;
    const double lo = s.lo(), hi = s.hi();
    for (std::size_t i = s.params.size(); i-- > 0;) {
        out.params.push_back(lo + hi - s.params[i]);
        out.samples.push_back(-s.samples[i]);
    }
    out.left_asymptote = -s.right_asymptote;
    out.right_asymptote = -s.left_asymptote;
    out.validate();
    return out;
}

}  // namespace symflow::czindex
