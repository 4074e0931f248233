#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symflow/cascades.hpp"

using namespace symflow;
using namespace symflow::cascades;

TEST_CASE("signature index shifts by half the dimension") {
    CHECK(signature_index(0, 0) == HalfInt::whole(0));
    CHECK(signature_index(2, 2) == HalfInt::whole(1));
    CHECK(signature_index(3, 7) == HalfInt{-1});
    CHECK_THROWS_AS(signature_index(5, 3), ValidationError);
}

TEST_CASE("moduli dimension from endpoint indices") {
    EndpointIndex same{2, 0, 0, std::nullopt, std::nullopt};
    CHECK(cascade_dimension(same, same, {}, DimFlavor::morse) == -1);

    // sphere model: pole against the circle's upper point
    EndpointIndex pole{2, 0, 0, std::nullopt, 2};
    EndpointIndex hmax{0, 1, 1, std::nullopt, 2};
    CHECK(cascade_dimension(hmax, pole, {}, DimFlavor::morse) == 0);
    CHECK(cascade_dimension(hmax, pole, {}, DimFlavor::signature) == 0);

    // Floer flavor: a grading jump of one is rigid
    EndpointIndex lo{std::nullopt, 0, 1, HalfInt::halves(1), std::nullopt};
    EndpointIndex hi{std::nullopt, 0, 1, HalfInt::halves(3), std::nullopt};
    CHECK(cascade_dimension(lo, hi, {}, DimFlavor::floer) == 0);

    CHECK_THROWS_AS(cascade_dimension(lo, hi, {}, DimFlavor::morse), DataError);
}

TEST_CASE("flavors agree wherever both are defined") {
    for (int fm = 0; fm <= 2; ++fm)
        for (int hm = 0; hm <= 1; ++hm)
            for (int fp = 0; fp <= 2; ++fp)
                for (int hp = 0; hp <= 1; ++hp) {
                    EndpointIndex a{fm, hm, 1, std::nullopt, 4};
                    EndpointIndex b{fp, hp, 1, std::nullopt, 4};
                    CHECK(cascade_dimension(a, b, {}, DimFlavor::morse) ==
                          cascade_dimension(a, b, {}, DimFlavor::signature));
                }
}

TEST_CASE("chained dimensions telescope") {
    EndpointIndex hmax{0, 1, 1, std::nullopt, std::nullopt};
    EndpointIndex pole{2, 0, 0, std::nullopt, std::nullopt};
    const std::vector<ChainComponent> chain = {{0, 1}, {2, 0}};
    CHECK(cascade_dimension(hmax, pole, chain, DimFlavor::morse) == 0);
    const std::vector<ChainComponent> bad = {{1, 1}, {2, 0}};
    CHECK_THROWS_AS(cascade_dimension(hmax, pole, bad, DimFlavor::morse), DataError);
}

TEST_CASE("sphere model validates its critical set") {
    const auto model = make_s2_zsq_model();
    CHECK_NOTHROW(model->validate());
    CHECK(model->components().size() == 3);
}

TEST_CASE("pole-to-circle-maximum cascade count is odd") {
    const auto model = make_s2_zsq_model();
    const auto c = count_cascades(*model, "eq-hmax", "north", {});
    CHECK(c.parity == 1);
    CHECK(c.trajectories.size() == 1);
    const auto s = count_cascades(*model, "eq-hmax", "south", {});
    CHECK(s.parity == 1);
}

TEST_CASE("dimension mismatch is a precondition error, never a silent zero") {
    const auto model = make_s2_zsq_model();
    CHECK_THROWS_AS(count_cascades(*model, "eq-hmin", "north", {}), PreconditionError);
    CHECK_THROWS_AS(count_cascades(*model, "north", "south", {}), PreconditionError);
}

TEST_CASE("zero-cascade count inside the circle is even") {
    const auto model = make_s2_zsq_model();
    const auto c = count_cascades(*model, "eq-hmin", "eq-hmax", {});
    CHECK(c.parity == 0);
    CHECK(c.trajectories.size() == 2);  // the two arcs
}

TEST_CASE("shooting that cannot reach a tube is reported, never silently zero") {
    const auto model = make_s2_zsq_model();
    CascadeParams params;
    params.max_steps = 10;  // far too few to descend from the pole
    CHECK_THROWS_AS(count_cascades(*model, "eq-hmax", "north", params), CountUnreliableError);
}

TEST_CASE("assembled sphere complex computes the sphere homology") {
    const auto model = make_s2_zsq_model();
    const auto cx = assemble_complex(*model);
    CHECK(cx.generators.size() == 4);
    CHECK_NOTHROW(cx.validate());
    const auto ranks = homology(cx);
    CHECK(ranks.at(HalfInt::whole(0)) == 1);
    CHECK(ranks.at(HalfInt::whole(1)) == 0);
    CHECK(ranks.at(HalfInt::whole(2)) == 1);
}

TEST_CASE("homology of a complex with zero boundary counts generators") {
    GradedComplex cx;
    cx.generators = {{"a", HalfInt::whole(0), 0.0}, {"b", HalfInt::whole(0), 0.0},
                     {"c", HalfInt::whole(2), 1.0}};
    cx.boundary.assign(3, std::vector<unsigned char>(3, 0));
    const auto ranks = homology(cx);
    CHECK(ranks.at(HalfInt::whole(0)) == 2);
    CHECK(ranks.at(HalfInt::whole(2)) == 1);
}

TEST_CASE("an acyclic pair cancels") {
    GradedComplex cx;
    cx.generators = {{"top", HalfInt::whole(1), 1.0}, {"bot", HalfInt::whole(0), 0.0}};
    cx.boundary.assign(2, std::vector<unsigned char>(2, 0));
    cx.boundary[0][1] = 1;
    const auto ranks = homology(cx);
    CHECK(ranks.at(HalfInt::whole(1)) == 0);
    CHECK(ranks.at(HalfInt::whole(0)) == 0);
}

TEST_CASE("a boundary that fails to square to zero is rejected with a witness") {
    GradedComplex cx;
    cx.generators = {{"x", HalfInt::whole(2), 2.0}, {"y", HalfInt::whole(1), 1.0},
                     {"z", HalfInt::whole(0), 0.0}};
    cx.boundary.assign(3, std::vector<unsigned char>(3, 0));
    cx.boundary[0][1] = 1;
    cx.boundary[1][2] = 1;
    CHECK_THROWS_WITH_AS(homology(cx), doctest::Contains("x"), DataError);
}

TEST_CASE("grading and action rules are enforced") {
    GradedComplex cx;
    cx.generators = {{"x", HalfInt::whole(2), 2.0}, {"z", HalfInt::whole(0), 0.0}};
    cx.boundary.assign(2, std::vector<unsigned char>(2, 0));
    cx.boundary[0][1] = 1;  // drops grading by two
    CHECK_THROWS_AS(cx.validate(), DataError);

    GradedComplex cy;
    cy.generators = {{"x", HalfInt::whole(1), 0.0}, {"z", HalfInt::whole(0), 1.0}};
    cy.boundary.assign(2, std::vector<unsigned char>(2, 0));
    cy.boundary[0][1] = 1;  // raises the action
    CHECK_THROWS_AS(cy.validate(), DataError);
}

TEST_CASE("the involution transform negates the grading and squares to the identity") {
    const auto model = make_s2_zsq_model();
    const auto cx = assemble_complex(*model);
    const auto inv = involuted(cx);
    for (std::size_t i = 0; i < cx.generators.size(); ++i) {
        CHECK(inv.generators[i].grading == -cx.generators[i].grading);
        CHECK(inv.generators[i].action == -cx.generators[i].action);
    }
    const auto back = involuted(inv);
    for (std::size_t s = 0; s < cx.generators.size(); ++s)
        for (std::size_t t = 0; t < cx.generators.size(); ++t)
            CHECK(back.boundary[s][t] == cx.boundary[s][t]);
    // the transformed complex computes the reversed ranks
    const auto ranks = homology(inv);
    CHECK(ranks.at(HalfInt::whole(0)) == 1);
    CHECK(ranks.at(HalfInt::whole(-1)) == 0);
    CHECK(ranks.at(HalfInt::whole(-2)) == 1);
}

TEST_CASE("action windows truncate the complex") {
    const auto model = make_s2_zsq_model();
    const auto cx = assemble_complex(*model, {}, -0.5, 0.5);  // only the circle generators
    CHECK(cx.generators.size() == 2);
    const auto ranks = homology(cx);
    CHECK(ranks.at(HalfInt::whole(0)) == 1);
    CHECK(ranks.at(HalfInt::whole(1)) == 1);
}
