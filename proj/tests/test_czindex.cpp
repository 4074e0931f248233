#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "symflow/czindex.hpp"

using namespace symflow;
using namespace symflow::czindex;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("rotation loops index at twice the multiplicity") {
    for (int k = 1; k <= 5; ++k) {
        const auto rep = rs_index(rotation_generator(2 * kPi * k), 0.0);
        CHECK(rep.index == HalfInt::whole(2 * k));
        CHECK(rep.crossings.size() == static_cast<std::size_t>(k + 1));
    }
}

TEST_CASE("shear block: perturbed indices match the sign formula") {
    CHECK(rs_index(shear_generator(1.0), 0.1).index == HalfInt::whole(0));
    CHECK(rs_index(shear_generator(1.0), -0.1).index == HalfInt::whole(1));
    CHECK(rs_index(shear_generator(-1.0), 0.1).index == HalfInt::whole(-1));
    CHECK(rs_index(shear_generator(-1.0), -0.1).index == HalfInt::whole(0));
}

TEST_CASE("unperturbed shear carries the half contribution at the start") {
    const auto rep = rs_index(shear_generator(1.0), 0.0);
    CHECK(rep.index == HalfInt::halves(1));
    REQUIRE(!rep.crossings.empty());
    CHECK(rep.crossings.front().t == 0.0);
    CHECK(rep.crossings.front().weight_halves == 1);
    CHECK(rep.crossings.front().signature == 1);
    CHECK(rep.crossings.front().kernel_dim == 2);
}

TEST_CASE("perturbed limits stabilize on shears and rotations") {
    const auto sh1 = perturbed_limits(shear_generator(1.0));
    CHECK(sh1.mu_plus == 0);
    CHECK(sh1.mu_minus == 1);

    const auto shm = perturbed_limits(shear_generator(-1.0));
    CHECK(shm.mu_plus == -1);
    CHECK(shm.mu_minus == 0);

    const auto rot = perturbed_limits(rotation_generator(2 * kPi));
    CHECK(rot.mu_minus - rot.mu_plus == 2);
    CHECK(rot.mu_plus == 1);
    CHECK(rot.mu_minus == 3);
}

TEST_CASE("normal-shear closed form across the parameter grid") {
    for (double a : {0.5, -0.5, 1.0, -1.0, 2.0, -2.0})
        for (double d : {0.01, -0.01, 0.1, -0.1}) {
            if (std::abs(d) >= std::abs(a)) continue;
            const auto rep = coz1_check(a, 1.0, d);
            CHECK(rep.agree);
        }
    const auto rep = coz1_check(-2.0, 1.0, 0.05);
    CHECK(rep.lhs == -1);
    CHECK(rep.rhs == -1);
}

TEST_CASE("shear closed-form preconditions") {
    CHECK_THROWS_AS(coz1_check(1.0, 1.0, 2.0), PreconditionError);
    CHECK_THROWS_AS(coz1_check(0.0, 1.0, 0.1), PreconditionError);
}

TEST_CASE("perturbed-limit gaps against declared component dimensions") {
    // rotation loop: full tangent space version of a circle family
    const auto rot = coz2_relations(rotation_generator(2 * kPi), 2, false);
    CHECK(rot.gap == 2);
    CHECK(rot.agree);
    CHECK(rot.unperturbed == HalfInt::whole(2));

    // shear treated as isolated in its normal direction
    const auto sh = coz2_relations(shear_generator(1.0), 1, false);
    CHECK(sh.gap == 1);
    CHECK(sh.agree);
    CHECK(sh.unperturbed == HalfInt::halves(1));

    // constant zero generator: the gap is the whole space
    const auto z = coz2_relations(sample_path([](double) { return Mat::Zero(2, 2).eval(); }, 0, 1, 3),
                                  2, false);
    CHECK(z.gap == 2);
    CHECK(z.agree);
    CHECK(z.unperturbed == HalfInt::whole(0));
}

TEST_CASE("time reversal flips the index") {
    for (int k = 1; k <= 3; ++k) {
        const auto fwd = rs_index(rotation_generator(2 * kPi * k), 0.0);
        const auto bwd = rs_index(time_reversed(rotation_generator(2 * kPi * k)), 0.0);
        CHECK(bwd.index == -fwd.index);
    }
    const auto fwd = rs_index(shear_generator(0.8), 0.0);
    const auto bwd = rs_index(time_reversed(shear_generator(0.8)), 0.0);
    CHECK(bwd.index == -fwd.index);
}

TEST_CASE("block sums add indices") {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> u(0.3, 2.0);
    std::uniform_int_distribution<int> ks(1, 3);
    for (int c = 0; c < 6; ++c) {
        const auto s1 = rotation_generator(2 * kPi * ks(rng));
        const auto s2 = shear_generator(u(rng) * (c % 2 ? 1 : -1));
        const double delta = 0.07;
        const auto joint = rs_index(block_sum(s1, s2), delta);
        const auto a = rs_index(s1, delta);
        const auto b = rs_index(s2, delta);
        CHECK(joint.index == a.index + b.index);
    }
}

TEST_CASE("unperturbed index is the average of the perturbed limits") {
    for (const auto& gen : {rotation_generator(2 * kPi), rotation_generator(4 * kPi),
                            shear_generator(1.0), shear_generator(-1.4)}) {
        const auto lim = perturbed_limits(gen);
        const auto mid = rs_index(gen, 0.0);
        CHECK(2 * mid.index.twice == 2 * (lim.mu_plus + lim.mu_minus));
    }
}

TEST_CASE("sweeps must decrease and stay positive") {
    CHECK_THROWS_AS(perturbed_limits(shear_generator(1.0), {0.1, 0.2, 0.3}), ValidationError);
    CHECK_THROWS_AS(perturbed_limits(shear_generator(1.0), {0.1, 0.05, -0.01}), ValidationError);
    CHECK_THROWS_AS(perturbed_limits(shear_generator(1.0), {0.1, 0.05}), ResolutionError);
}

TEST_CASE("gradings combine exactly in halves") {
    // degree window of the base multiplicity at n = 4
    const auto g0 = floer_grading(HalfInt::whole(0), 0, 7);
    CHECK(g0.grading == HalfInt{-7});
    const auto g3 = floer_grading(HalfInt::whole(0), 3, 7);
    CHECK(g3.grading == HalfInt{-1});
    const auto g1 = floer_grading(HalfInt::whole(6), 0, 7);
    CHECK(g1.grading == HalfInt{5});  // 6 - 7/2 = 5/2
    CHECK(g1.grading - g0.grading == HalfInt::whole(6));

    // the alternative printed convention stays selectable
    const auto alt = floer_grading(HalfInt::whole(0), 3, 7, SigConvention::negated_display);
    CHECK(alt.grading == HalfInt{-13});

    CHECK_THROWS_AS(floer_grading(HalfInt::whole(0), 8, 7), ValidationError);
}

TEST_CASE("virtual dimensions combine gradings with the component correction") {
    // consecutive multiplicities on the cotangent bundle of the 4-sphere:
    // index jump 6, components of dimension 7
    CHECK(virtual_dimension(HalfInt::whole(0), HalfInt::whole(6), 7, 7) == HalfInt::whole(13));
    // the sphere-class input shifts by an even amount
    CHECK(virtual_dimension(HalfInt::whole(0), HalfInt::whole(6), 7, 7, -3) == HalfInt::whole(7));
    // nondegenerate orbits come as circles
    CHECK(virtual_dimension(HalfInt::halves(3), HalfInt::halves(5), 1, 1) == HalfInt::whole(2));
    CHECK_THROWS_AS(virtual_dimension(HalfInt::whole(0), HalfInt::whole(0), -1, 0), ValidationError);
}

TEST_CASE("no floating grading arithmetic sneaks in") {
    const auto g = floer_grading(HalfInt::whole(2), 1, 3);
    CHECK(g.grading.twice % 1 == 0);  // trivially integral in halves
    CHECK(g.grading == HalfInt{2 * 2 + 2 * 1 - 3});
    CHECK_FALSE(g.grading.is_integer());
}
