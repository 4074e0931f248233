#include "symflow/selftest.hpp"

#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "symflow/cascades.hpp"
#include "symflow/czindex.hpp"
#include "symflow/rabinowitz.hpp"
#include "symflow/specflow.hpp"
#include "symflow/spherehf.hpp"

namespace symflow::selftest {

namespace {

constexpr double kPi = 3.14159265358979323846;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_count(const char* what, int ok, int total) {
    std::ostringstream os;
    os << ok << "/" << total << " " << what;
    return os.str();
}

Mat random_symmetric(std::mt19937_64& rng, int dim, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) a(i, j) = a(j, i) = scale * u(rng);
    return a;
}

double min_abs_eig(const Mat& a) {
    return Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues().cwiseAbs().minCoeff();
}

// Symmetric matrix with the same eigenvectors but eigenvalues pushed away
// from zero; used to construct certifiably invertible asymptotics.
Mat push_spectrum(const Mat& a, double floor_mag) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    Vec l = es.eigenvalues();
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        const double s = l[i] >= 0 ? 1.0 : -1.0;
        l[i] = s * std::max(std::abs(l[i]), floor_mag);
    }
    return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

CriterionResult check_hf_tables() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (int n : {4, 5, 6, 8}) {
        const auto res = spherehf::hf_table(n, -20.0, 20.0);
        if (!res.table) { ok = false; break; }
        std::map<HalfInt, int> expected;
        const std::int64_t base[4] = {1 - 2 * n, -1, 1, 2 * n - 1};  // doubled degrees
        for (std::int64_t j = -40; j <= 40; ++j)
            for (std::int64_t b : base) {
                const std::int64_t twice = b + j * 4 * (n - 1);
                if (twice >= -40 && twice <= 40) expected[HalfInt{twice}] = 1;
            }
        if (res.table->ranks != expected) { ok = false; break; }
    }
    const bool fast = seconds_since(t0) < 1.0;
    return {1, "unit-cotangent homology table (n = 4, 5, 6, 8)", ok && fast,
            ok ? "rank 1 exactly on the four-degree lattice, window [-20, 20]" : "table mismatch"};
}

CriterionResult check_lacunary() {
    bool ok = true;
    for (int n = 4; n <= 12; ++n)
        if (!spherehf::lacunary_scan(n).empty()) ok = false;
    const auto three = spherehf::lacunary_scan(3);
    auto has = [&](int i1, int i2, std::int64_t dm) {
        for (const auto& p : three)
            if (p.i1 == i1 && p.i2 == i2 && p.dm == dm) return true;
        return false;
    };
    ok = ok && three.size() == 2 && has(3, 0, 1) && has(5, 2, 1);
    return {2, "lacunary dichotomy (empty for 4..12, witnesses at n = 3)", ok,
            ok ? "scan empty for n in 4..12; n = 3 yields (3,0,1) and (5,2,1)" : "scan mismatch"};
}

CriterionResult check_flow_methods(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed ^ 0x5f3759df);
    int ok = 0;
    const int total = 200;
    for (int c = 0; c < total; ++c) {
        const int dim = 1 + c % 8;
        SymmetricPath path;
        for (int attempt = 0;; ++attempt) {
            const Mat a0 = random_symmetric(rng, dim, 1.0);
            const Mat a1 = random_symmetric(rng, dim, 1.0);
            const Mat a2 = random_symmetric(rng, dim, 0.5);
            const bool affine = c % 2 == 0;
            path = sample_path(
                [&](double s) {
                    Mat m = a0 + s * a1;
                    if (!affine) m += (1.0 - s * s) * std::sin(2.0 * s) * a2;
                    return m;
                },
                -1.0, 1.0, affine ? 9 : 33);
            if (min_abs_eig(path.left_asymptote) > 0.05 && min_abs_eig(path.right_asymptote) > 0.05) break;
            if (attempt > 200) throw ResolutionError("selftest: could not build invertible-ended path");
        }
        try {
            const int f1 = specflow::spectral_flow(path, specflow::FlowMethod::crossing_form).flow;
            const int f2 = specflow::spectral_flow(path, specflow::FlowMethod::endpoint_signature).flow;
            const int f3 = specflow::spectral_flow_oracle(path);
            if (f1 == f2 && f2 == f3) ++ok;
        } catch (const Error&) {
            // counted as a failure
        }
    }
    const bool fast = seconds_since(t0) < 60.0;
    return {3, "spectral-flow method agreement on 200 random paths", ok == total && fast,
            fmt_count("paths with crossing-form = endpoint-signature = tracking oracle", ok, total)};
}

CriterionResult check_lagrange_identity(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int ok = 0;
    const int total = 100;
    for (int c = 0; c < total; ++c) {
        const int dw = 1 + c % 6;
        const int dv = c % 7 == 6 ? 0 : std::min(3, 1 + c % std::max(1, dw));
        auto regular_end = [&](Mat& a_end, Mat& b_end) {
            const Mat full = Eigen::HouseholderQR<Mat>(random_symmetric(rng, dw, 1.0)).householderQ();
            const Mat q = full.leftCols(dv);
            const Mat q_perp = full.rightCols(dw - dv);
            const Mat mv = push_spectrum(random_symmetric(rng, std::max(dv, 1), 1.0), 0.3).topLeftCorner(dv, dv);
            const Mat mp = push_spectrum(random_symmetric(rng, std::max(dw - dv, 1), 1.0), 0.3)
                               .topLeftCorner(dw - dv, dw - dv);
            a_end = q * mv * q.transpose() + q_perp * mp * q_perp.transpose();
            Mat rv(dv, dv);
            do {
                for (int i = 0; i < dv; ++i)
                    for (int j = 0; j < dv; ++j) rv(i, j) = u(rng);
            } while (dv > 0 && std::abs(rv.determinant()) < 0.05);
            b_end = q * rv;
        };
        Mat a_minus, b_minus, a_plus, b_plus;
        regular_end(a_minus, b_minus);
        regular_end(a_plus, b_plus);
        const Mat za = random_symmetric(rng, dw, 0.7);
        Mat zb(dw, dv);
        for (int i = 0; i < dw; ++i)
            for (int j = 0; j < dv; ++j) zb(i, j) = 0.7 * u(rng);

        specflow::AugmentedPath ap;
        const int count = 21;
        ap.a.dim = dw;
        for (int i = 0; i < count; ++i) {
            const double s = -1.0 + 2.0 * i / (count - 1);
            const double ramp = 0.5 * (1.0 + s), bump = 1.0 - s * s;
            ap.a.params.push_back(s);
            ap.a.samples.push_back((1.0 - ramp) * a_minus + ramp * a_plus + bump * za);
            ap.b_samples.push_back((1.0 - ramp) * b_minus + ramp * b_plus + bump * zb);
        }
        ap.a.left_asymptote = a_minus;
        ap.a.right_asymptote = a_plus;
        ap.b_left = b_minus;
        ap.b_right = b_plus;
        try {
            if (specflow::lagrange_flow_identity(ap).identity_holds) ++ok;
        } catch (const Error&) {
            // counted as a failure
        }
    }
    return {4, "multiplier-augmentation flow identity on 100 regular pairs", ok == total,
            fmt_count("paths with mu(A_B) - mu(A) = (sigma- - sigma+)/2", ok, total)};
}

CriterionResult check_varlag() {
    int ok = 0, total = 0;
    for (double a : {2.0, -2.0, 0.5, -0.5})
        for (double b : {1.0, 3.0}) {
            ++total;
            const auto rep = specflow::varlag_signature(a, b);
            if (rep.agree && rep.eigenvector_residual <= 1e-12) ++ok;
        }
    return {5, "constrained-signature model (sigma = -sign dv)", ok == total,
            fmt_count("parameter picks with exact sign match and eigenvector identity", ok, total)};
}

CriterionResult check_shear_grid() {
    int ok = 0, total = 0;
    for (double a : {0.5, -0.5, 1.0, -1.0, 2.0, -2.0})
        for (double d : {0.01, -0.01, 0.1, -0.1}) {
            if (std::abs(d) >= std::abs(a)) continue;
            ++total;
            const auto rep = czindex::coz1_check(a, 1.0, d);
            if (rep.agree) ++ok;
        }
    return {6, "shear-path index formula over the parameter grid", ok == total,
            fmt_count("grid points with integrated index = (sign a - sign delta)/2", ok, total)};
}

CriterionResult check_rotations() {
    int ok = 0;
    const int total = 5;
    for (int k = 1; k <= 5; ++k) {
        const auto rep = czindex::rs_index(czindex::rotation_generator(2.0 * kPi * k), 0.0);
        bool good = rep.index == HalfInt::whole(2 * k);
        // crossing structure: k+1 crossings of full kernel, signature 2 each
        good = good && rep.crossings.size() == static_cast<std::size_t>(k + 1);
        for (const auto& c : rep.crossings) good = good && c.signature == 2 && c.kernel_dim == 2;
        if (good) ++ok;
    }
    return {7, "rotation-loop index 2k with full crossing structure", ok == total,
            fmt_count("loop multiplicities with index 2k", ok, total)};
}

CriterionResult check_cascade_homology() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = cascades::make_s2_zsq_model();
    model->validate();
    const auto complex = cascades::assemble_complex(*model);  // validates d^2 = 0
    const auto ranks = cascades::homology(complex);
    const std::map<HalfInt, int> expected = {
        {HalfInt::whole(0), 1}, {HalfInt::whole(1), 0}, {HalfInt::whole(2), 1}};
    const bool ok = ranks == expected;
    const bool fast = seconds_since(t0) < 30.0;
    return {8, "sphere-model cascade homology", ok && fast,
            ok ? "d^2 = 0 and ranks 1, 0, 1 in degrees 0, 1, 2" : "rank mismatch"};
}

CriterionResult check_rabinowitz(std::uint64_t seed) {
    const rabinowitz::CircleModel model;
    const int n = 256;
    const double delta = 0.2;

    const auto crit = rabinowitz::critical_suite(model, 7, seed ^ 0x1234, n, 1e-9);
    int crit_ok = 0;
    for (const auto& r : crit)
        if (r.eta_ok && r.action_ok) ++crit_ok;

    const auto s1 = rabinowitz::step1_suite(model, 1000, seed ^ 0x8888, n, delta);
    int s1_ok = 0;
    for (const auto& r : s1)
        if (r.holds) ++s1_ok;

    const auto s2 = rabinowitz::step2_suite(model, 1000, seed ^ 0x4444, n, delta);
    int s2_ok = 0;
    for (const auto& r : s2)
        if (r.holds) ++s2_ok;

    const auto fd = rabinowitz::gradient_fd_suite(model, 100, seed ^ 0x2222, n);
    int fd_ok = 0;
    for (const auto& r : fd)
        if (r.ok) ++fd_ok;

    const bool ok = crit_ok == static_cast<int>(crit.size()) && s1_ok == 1000 && s2_ok == 1000 &&
                    fd_ok == 100;
    std::ostringstream os;
    os << crit_ok << "/" << crit.size() << " critical searches, " << s1_ok
       << "/1000 shell estimates, " << s2_ok << "/1000 gradient floors, " << fd_ok
       << "/100 finite-difference checks";
    return {9, "discretized multiplier functional (orbits, estimates, gradient)", ok, os.str()};
}

CriterionResult check_nocrit(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xabcd);
    std::uniform_int_distribution<long long> num(1, 40), den(1, 20);
    int ok = 0;
    const int total = 50;
    for (int c = 0; c < total; ++c) {
        const auto rep = rabinowitz::nocrit_epsilon_exact(num(rng), den(rng), num(rng), den(rng));
        if (rep.below_threshold && rep.margin_positive) ++ok;
    }
    return {10, "parameter inequality in exact rational arithmetic", ok == total,
            fmt_count("rational pairs with both inequalities exact", ok, total)};
}

std::vector<CriterionResult> run_core(std::uint64_t seed) {
    std::vector<CriterionResult> out;
    out.push_back(check_hf_tables());
    out.push_back(check_lacunary());
    out.push_back(check_flow_methods(seed));
    out.push_back(check_lagrange_identity(seed));
    out.push_back(check_varlag());
    out.push_back(check_shear_grid());
    out.push_back(check_rotations());
    out.push_back(check_cascade_homology());
    out.push_back(check_rabinowitz(seed));
    out.push_back(check_nocrit(seed));
    return out;
}

std::string serialize_core(const std::vector<CriterionResult>& results) {
    std::ostringstream os;
    for (const auto& r : results)
        os << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << ". " << r.name << ": " << r.details << "\n";
    return os.str();
}

}  // namespace

Report run(std::uint64_t seed) {
    Report rep;
    rep.seed = seed;
    rep.criteria = run_core(seed);
    const std::string once = serialize_core(rep.criteria);
    const std::string twice = serialize_core(run_core(seed));
    rep.criteria.push_back({11, "report determinism (same seed, byte-identical)", once == twice,
                            once == twice ? "two full runs serialized identically" : "byte mismatch"});
    rep.all_pass = true;
    for (const auto& c : rep.criteria) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

std::string to_text(const Report& report) {
    std::ostringstream os;
    os << "selftest seed=" << report.seed << "\n";
    os << serialize_core(report.criteria);
    os << (report.all_pass ? "all criteria passed\n" : "FAILURES present\n");
    return os.str();
}

std::string to_json(const Report& report) {
    nlohmann::json doc;
    doc["seed"] = report.seed;
    doc["all_pass"] = report.all_pass;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : report.criteria)
        arr.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"details", c.details}});
    doc["criteria"] = std::move(arr);
    return doc.dump(2) + "\n";
}

}  // namespace symflow::selftest
