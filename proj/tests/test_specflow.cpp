#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "symflow/specflow.hpp"

using namespace symflow;
using namespace symflow::specflow;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

SymmetricPath arctan_path(int dim = 1) {
    auto p = sample_path([dim](double s) { return (std::atan(s) * Mat::Identity(dim, dim)).eval(); },
                         -40, 40, 801);
    p.left_asymptote = -std::asin(1.0) * Mat::Identity(dim, dim);   // -pi/2
    p.right_asymptote = std::asin(1.0) * Mat::Identity(dim, dim);
    return p;
}

Mat random_symmetric(std::mt19937_64& rng, int dim, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-1, 1);
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) a(i, j) = a(j, i) = scale * u(rng);
    return a;
}

}  // namespace

TEST_CASE("normalization: the arctan path has flow one") {
    const auto p = arctan_path();
    for (auto method : {FlowMethod::crossing_form, FlowMethod::endpoint_signature,
                        FlowMethod::eigenvalue_tracking})
        CHECK(spectral_flow(p, method).flow == 1);
    const auto rep = spectral_flow(p, FlowMethod::crossing_form);
    REQUIRE(rep.crossings.size() == 1);
    CHECK(rep.crossings[0].s == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(rep.crossings[0].signature == 1);
}

TEST_CASE("constant invertible paths have zero flow") {
    const auto p = sample_path([](double) { return diag2(1.5, -0.5).eval(); }, -1, 1, 5);
    CHECK(spectral_flow(p, FlowMethod::crossing_form).flow == 0);
    CHECK(spectral_flow(p, FlowMethod::crossing_form).crossings.empty());
    CHECK(spectral_flow_oracle(p) == 0);
}

TEST_CASE("tanh-diagonal path crosses once") {
    const auto p = sample_path([](double s) { return diag2(std::tanh(s), 1.0).eval(); }, -8, 8, 257);
    CHECK(spectral_flow(p, FlowMethod::crossing_form).flow == 1);
    CHECK(spectral_flow(p, FlowMethod::endpoint_signature).flow == 1);
    CHECK(spectral_flow_oracle(p) == 1);
}

TEST_CASE("oracle: direct sum of arctan and its negative cancels") {
    const auto p = sample_path(
        [](double s) { return diag2(std::atan(s), -std::atan(s)).eval(); }, -40, 40, 801);
    CHECK(spectral_flow_oracle(p) == 0);
    CHECK(spectral_flow(p, FlowMethod::crossing_form).flow == 0);
}

TEST_CASE("oracle agrees with the crossing form on random affine paths") {
    std::mt19937_64 rng(1234);
    for (int c = 0; c < 50; ++c) {
        const int dim = 6;
        Mat a0, a1;
        SymmetricPath p;
        for (;;) {
            a0 = random_symmetric(rng, dim);
            a1 = random_symmetric(rng, dim);
            p = sample_path([&](double s) { return (a0 + s * a1).eval(); }, -1, 1, 9);
            Eigen::SelfAdjointEigenSolver<Mat> l(p.left_asymptote), r(p.right_asymptote);
            if (l.eigenvalues().cwiseAbs().minCoeff() > 0.05 &&
                r.eigenvalues().cwiseAbs().minCoeff() > 0.05)
                break;
        }
        CHECK(spectral_flow(p, FlowMethod::crossing_form).flow == spectral_flow_oracle(p));
    }
}

TEST_CASE("endpoint-signature formula matches on every invertible-ended random path") {
    std::mt19937_64 rng(99);
    for (int c = 0; c < 30; ++c) {
        const int dim = 1 + c % 5;
        SymmetricPath p;
        for (;;) {
            const Mat a0 = random_symmetric(rng, dim);
            const Mat a1 = random_symmetric(rng, dim);
            p = sample_path([&](double s) { return (a0 + s * a1).eval(); }, -1, 1, 9);
            Eigen::SelfAdjointEigenSolver<Mat> l(p.left_asymptote), r(p.right_asymptote);
            if (l.eigenvalues().cwiseAbs().minCoeff() > 0.05 &&
                r.eigenvalues().cwiseAbs().minCoeff() > 0.05)
                break;
        }
        CHECK(spectral_flow(p, FlowMethod::crossing_form).flow ==
              spectral_flow(p, FlowMethod::endpoint_signature).flow);
    }
}

TEST_CASE("homotopy with fixed invertible endpoints preserves the flow") {
    std::mt19937_64 rng(4321);
    for (int c = 0; c < 10; ++c) {
        const int dim = 3;
        Mat a0, a1;
        SymmetricPath base;
        for (;;) {
            a0 = random_symmetric(rng, dim);
            a1 = random_symmetric(rng, dim);
            base = sample_path([&](double s) { return (a0 + s * a1).eval(); }, -1, 1, 33);
            Eigen::SelfAdjointEigenSolver<Mat> l(base.left_asymptote), r(base.right_asymptote);
            if (l.eigenvalues().cwiseAbs().minCoeff() > 0.05 &&
                r.eigenvalues().cwiseAbs().minCoeff() > 0.05)
                break;
        }
        const Mat z = random_symmetric(rng, dim, 0.8);
        const int f0 = spectral_flow(base, FlowMethod::crossing_form).flow;
        for (double lam : {0.5, 1.0}) {
            const auto moved = sample_path(
                [&](double s) { return (a0 + s * a1 + lam * (1 - s * s) * z).eval(); }, -1, 1, 33);
            CHECK(spectral_flow(moved, FlowMethod::crossing_form).flow == f0);
        }
    }
}

TEST_CASE("direct sums add flows") {
    std::mt19937_64 rng(777);
    for (int c = 0; c < 10; ++c) {
        auto make = [&](int dim) {
            for (;;) {
                const Mat a0 = random_symmetric(rng, dim);
                const Mat a1 = random_symmetric(rng, dim);
                auto p = sample_path([&](double s) { return (a0 + s * a1).eval(); }, -1, 1, 9);
                Eigen::SelfAdjointEigenSolver<Mat> l(p.left_asymptote), r(p.right_asymptote);
                if (l.eigenvalues().cwiseAbs().minCoeff() > 0.05 &&
                    r.eigenvalues().cwiseAbs().minCoeff() > 0.05)
                    return p;
            }
        };
        const auto p1 = make(2), p2 = make(3);
        auto joint = sample_path(
            [&](double s) {
                Mat m = Mat::Zero(5, 5);
                m.topLeftCorner(2, 2) = p1.at(s);
                m.bottomRightCorner(3, 3) = p2.at(s);
                return m;
            },
            -1, 1, 9);
        CHECK(spectral_flow(joint, FlowMethod::crossing_form).flow ==
              spectral_flow(p1, FlowMethod::crossing_form).flow +
                  spectral_flow(p2, FlowMethod::crossing_form).flow);
    }
}

TEST_CASE("degenerate endpoints are refused with advice") {
    const auto p = sample_path([](double s) { return (s * Mat::Identity(1, 1) * 0.0).eval(); },
                               -1, 1, 5);
    CHECK_THROWS_AS(spectral_flow(p, FlowMethod::crossing_form), DegenerateEndpointError);
}

TEST_CASE("delta-regularization of the zero path flows by minus one") {
    const auto zero = sample_path([](double) { return Mat::Zero(1, 1).eval(); }, -1, 1, 9);
    const auto reg = delta_regularize(zero, 0.1);
    CHECK(reg.path.left_asymptote(0, 0) == doctest::Approx(0.1));
    CHECK(reg.path.right_asymptote(0, 0) == doctest::Approx(-0.1));
    CHECK(spectral_flow(reg.path, FlowMethod::endpoint_signature).flow == -1);
    CHECK(spectral_flow(reg.path, FlowMethod::crossing_form).flow == -1);
    CHECK(stabilized_flow(zero) == -1);
}

TEST_CASE("regularizing an invertible-ended path keeps its flow") {
    const auto p = arctan_path();
    for (double d : {1e-2, 1e-3})
        CHECK(spectral_flow(delta_regularize(p, d).path, FlowMethod::crossing_form).flow == 1);
}

TEST_CASE("constant positive path survives a large delta") {
    const auto one = sample_path([](double) { return Mat::Identity(1, 1).eval(); }, -1, 1, 9);
    const auto reg = delta_regularize(one, 0.5);
    CHECK_FALSE(reg.delta_large);
    CHECK(spectral_flow(reg.path, FlowMethod::endpoint_signature).flow == 0);
}

TEST_CASE("delta at the asymptotic eigenvalue scale is flagged") {
    const auto one = sample_path([](double) { return Mat::Identity(1, 1).eval(); }, -1, 1, 9);
    CHECK(delta_regularize(one, 1.5).delta_large);
}

TEST_CASE("stabilization on degenerate-ended paths") {
    // one branch crosses, one branch sits at zero at the right end
    const auto p = sample_path([](double s) { return diag2(std::atan(s), 0.0).eval(); }, -6, 6, 121);
    CHECK(stabilized_flow(p) == 0);  // +1 from arctan, -1 from the dying branch
}

TEST_CASE("degeneracy is refused on every method and short sweeps cannot certify") {
    const auto p = sample_path([](double s) { return (0.0 * s * Mat::Identity(1, 1)).eval(); },
                               -1, 1, 5);
    CHECK_THROWS_AS(spectral_flow(p, FlowMethod::endpoint_signature), DegenerateEndpointError);
    CHECK_THROWS_AS(spectral_flow_oracle(p), DegenerateEndpointError);
    CHECK_THROWS_AS(stabilized_flow(p, {0.1, 0.05}), ResolutionError);
}

TEST_CASE("regular pair signatures from direct arithmetic") {
    Mat b1(2, 1);
    b1 << 1, 0;
    CHECK(regular_pair_signature({diag2(2, -1), b1}) == 1);
    CHECK(regular_pair_signature({diag2(-2, -1), b1}) == -1);

    Mat a3 = Mat::Zero(3, 3);
    a3(0, 0) = 1;
    a3(1, 1) = -1;
    a3(2, 2) = 5;
    Mat b32 = Mat::Zero(3, 2);
    b32(0, 0) = 1;
    b32(1, 1) = 1;
    CHECK(regular_pair_signature({a3, b32}) == 0);
}

TEST_CASE("augmented identity reduces to the plain flow for empty V") {
    specflow::AugmentedPath ap;
    ap.a = arctan_path();
    ap.b_samples.assign(ap.a.params.size(), Mat::Zero(1, 0));
    ap.b_left = Mat::Zero(1, 0);
    ap.b_right = Mat::Zero(1, 0);
    const auto rep = lagrange_flow_identity(ap);
    CHECK(rep.mu_a == 1);
    CHECK(rep.mu_ab == 1);
    CHECK(rep.sigma_minus == 0);
    CHECK(rep.sigma_plus == 0);
    CHECK(rep.identity_holds);
}

TEST_CASE("scalar positive path with unit coupling") {
    // A stays positive, B = 1: both end signatures are +1, flows vanish
    specflow::AugmentedPath ap;
    ap.a = sample_path([](double s) { return ((std::atan(s) + 2.0) * Mat::Identity(1, 1)).eval(); },
                       -40, 40, 801);
    ap.b_samples.assign(ap.a.params.size(), Mat::Identity(1, 1));
    ap.b_left = Mat::Identity(1, 1);
    ap.b_right = Mat::Identity(1, 1);
    const auto rep = lagrange_flow_identity(ap);
    CHECK(rep.mu_a == 0);
    CHECK(rep.sigma_minus == 1);
    CHECK(rep.sigma_plus == 1);
    CHECK(rep.mu_ab == 0);
    CHECK(rep.identity_holds);
}

TEST_CASE("regularity failure at an end is refused") {
    specflow::AugmentedPath ap;
    ap.a = arctan_path();  // invertible ends, but B breaks injectivity
    ap.b_samples.assign(ap.a.params.size(), Mat::Zero(1, 1));
    ap.b_left = Mat::Zero(1, 1);
    ap.b_right = Mat::Zero(1, 1);
    CHECK_THROWS_AS(lagrange_flow_identity(ap), RegularityError);
}

TEST_CASE("misaligned augmentations and bad regularization inputs are rejected") {
    specflow::AugmentedPath ap;
    ap.a = arctan_path();
    ap.b_samples.assign(3, Mat::Identity(1, 1));  // wrong count
    ap.b_left = Mat::Identity(1, 1);
    ap.b_right = Mat::Identity(1, 1);
    CHECK_THROWS_AS(ap.validate(), ValidationError);

    const auto p = arctan_path();
    CHECK_THROWS_AS(delta_regularize(p, 0.0), ValidationError);
    CHECK_THROWS_AS(delta_regularize(p, -0.1), ValidationError);
}

TEST_CASE("plane constrained model: signature equals minus the multiplier slope sign") {
    const auto r1 = varlag_signature(2.0, 1.0);
    CHECK(r1.sigma == 1);
    CHECK(r1.minus_sign_dv == 1);
    CHECK(r1.agree);
    CHECK(r1.eigenvector_residual <= 1e-12);

    const auto r2 = varlag_signature(-0.5, 3.0);
    CHECK(r2.sigma == -1);
    CHECK(r2.agree);
    CHECK(r2.eigenvector_residual <= 1e-12);

    CHECK_THROWS_AS(varlag_signature(0.0, 1.0), RegularityError);
}
