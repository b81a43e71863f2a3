#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "../support.hpp"

using namespace motionforge;

TEST_CASE("user coefficients are normalized")
{
    const ConstraintSystem sys = builtin("disk_packing_4");
    const RigidityReport rep = analyze(sys);
    const FlexChoice c = select_flex(rep, Vec::Constant(2, 3.0));
    CHECK(c.coefficients.norm() == doctest::Approx(1.0));
    CHECK(c.source == FlexSource::UserCoefficients);
    CHECK((c.flex - rep.nontrivial_flex_basis * c.coefficients).norm() < 1e-15);
    CHECK_THROWS_AS(select_flex(rep, Vec::Zero(2)), InputError);
    CHECK_THROWS_AS(select_flex(rep, Vec::Ones(3)), InputError);
}

TEST_CASE("rigid systems have nothing to select")
{
    const Mat P = (Mat(2, 3) << 0, 1, 0.3, 0, 0, 1.1).finished();
    const ConstraintSystem tri = framework(mf_test::complete_edges(3), P, {});
    const RigidityReport rep = analyze(tri);
    CHECK_THROWS_AS(select_flex(rep, Vec::Ones(0)), PreconditionError);
    CHECK_THROWS_AS(find_unblocked_flex(tri, rep), PreconditionError);
}

TEST_CASE("no stresses: the first basis flex is returned")
{
    const ConstraintSystem fb = builtin("four_bar");
    const RigidityReport rep = analyze(fb);
    const auto c = find_unblocked_flex(fb, rep);
    REQUIRE(c.has_value());
    CHECK(c->source == FlexSource::SoleFlex);
    CHECK((c->flex - rep.nontrivial_flex_basis.col(0)).norm() < 1e-15);
}

TEST_CASE("blocked prism has no unblocked flex")
{
    const ConstraintSystem prism = builtin("three_prism_symmetric");
    const RigidityReport rep = analyze(prism);
    CHECK_FALSE(find_unblocked_flex(prism, rep, 16, 0).has_value());
}

TEST_CASE("Double Watt start has an unblocked flex")
{
    const ConstraintSystem dw = builtin("double_watt");
    const RigidityReport rep = analyze(dw);
    REQUIRE(rep.nontrivial_dim() == 2);
    REQUIRE(rep.stress_dim() == 1);
    const auto c = find_unblocked_flex(dw, rep, 64, 0);
    REQUIRE(c.has_value());
    CHECK(c->source == FlexSource::SolvedUnblocked);
    CHECK(c->coefficients.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const QTensor q = q_system(dw, rep);
    CHECK(q.evaluate(c->coefficients).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK_FALSE(is_blocked(dw, rep, c->flex));
    // first nonzero coefficient is positive
    Eigen::Index first = 0;
    while (std::abs(c->coefficients(first)) <= 1e-12) {
        ++first;
    }
    CHECK(c->coefficients(first) > 0.0);

    const auto again = find_unblocked_flex(dw, rep, 64, 0);
    REQUIRE(again.has_value());
    CHECK((again->coefficients - c->coefficients).norm() == 0.0);
}
