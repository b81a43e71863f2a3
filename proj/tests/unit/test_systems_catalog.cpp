#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "../support.hpp"

using namespace motionforge;

namespace {

std::set<Edge> distance_pairs(const ConstraintSystem& sys)
{
    std::set<Edge> out;
    for (const auto& c : sys.constraints()) {
        if (c.kind == ConstraintKind::Distance) {
            out.emplace(std::min(c.vertices[0], c.vertices[1]), std::max(c.vertices[0], c.vertices[1]));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("framework input errors")
{
    const Mat P = (Mat(2, 3) << 0, 1, 0, 0, 0, 1).finished();
    CHECK_THROWS_AS(framework({{0, 1}, {1, 0}}, P, {}), InvalidSystem);
    CHECK_THROWS_AS(framework({{0, 5}}, P, {}), Error);
    const Mat Q = (Mat(2, 2) << 0, 0, 0, 0).finished();
    CHECK_THROWS_AS(framework({{0, 1}}, Q, {}), Error);
    CHECK_THROWS_AS(builtin("no_such_system"), InputError);
}

TEST_CASE("every catalog entry loads and satisfies its constraints")
{
    CHECK(catalog_entries().size() == 10);
    for (const auto& e : catalog_entries()) {
        const ConstraintSystem sys = builtin(e.name);
        CAPTURE(e.name);
        CHECK(residual_norm(sys, sys.realization()) <= 1e-8);
        CHECK(sys.options().name == e.name);
    }
}

TEST_CASE("contact detection")
{
    PackingSpec two;
    two.centers = (Mat(2, 2) << 0, 2.5, 0, 0).finished();
    CHECK(detect_contacts(two).empty());

    PackingSpec tri;
    tri.centers = (Mat(2, 3) << 0, 2, 1, 0, 0, std::sqrt(3.0)).finished();
    CHECK(detect_contacts(tri).size() == 3);

    PackingSpec overlap;
    overlap.centers = (Mat(2, 2) << 0, 1, 0, 0).finished();
    CHECK_THROWS_AS(detect_contacts(overlap), InvalidSystem);

    const ConstraintSystem packing = builtin("disk_packing_4");
    CHECK(distance_pairs(packing) == std::set<Edge>{{0, 1}, {1, 2}, {2, 3}});
    REQUIRE(packing_of(packing).has_value());
    CHECK(packing_of(packing)->radius == 1.0);
    CHECK_FALSE(packing_of(builtin("four_bar")).has_value());
}

TEST_CASE("sticky update closes exactly one new contact")
{
    const ConstraintSystem packing = builtin("disk_packing_4");
    const PackingSpec spec = *packing_of(packing);
    CHECK_FALSE(sticky_update(spec, packing, packing.realization()).has_value());

    // Swing disk 4 about disk 3 until it overlaps disk 2.
    Vec x = packing.realization();
    const Vec p2 = vertex_position(x, 2, 1);
    const Vec p3 = vertex_position(x, 2, 2);
    const Vec u = p2 - p3;
    const double angle = std::atan2(u(1), u(0)) + 55.0 * M_PI / 180.0;
    x.segment(6, 2) = p3 + 2.0 * (Vec(2) << std::cos(angle), std::sin(angle)).finished();
    REQUIRE((vertex_position(x, 2, 3) - p2).norm() < 2.0);
    CHECK(residual_norm(packing, x) < 1e-12);

    const auto updated = sticky_update(spec, packing, x);
    REQUIRE(updated.has_value());
    CHECK(updated->n_free_constraints() == packing.n_free_constraints() + 1);
    CHECK(distance_pairs(*updated) == std::set<Edge>{{0, 1}, {1, 2}, {2, 3}, {1, 3}});
    CHECK(residual_norm(*updated, updated->realization()) <= 1e-8);
    CHECK(residual_norm(packing, updated->realization()) <= 1e-8);
    CHECK_FALSE(sticky_update(spec, *updated, updated->realization()).has_value());
}

TEST_CASE("polytope edges match a brute-force intersection")
{
    const PolytopeSpec cube = cube_spec();
    std::set<Edge> brute;
    for (std::size_t a = 0; a < cube.faces.size(); ++a) {
        for (std::size_t b = a + 1; b < cube.faces.size(); ++b) {
            std::vector<std::size_t> common;
            for (std::size_t i : cube.faces[a]) {
                for (std::size_t j : cube.faces[b]) {
                    if (i == j) {
                        common.push_back(i);
                    }
                }
            }
            if (common.size() == 2) {
                brute.emplace(std::min(common[0], common[1]), std::max(common[0], common[1]));
            }
        }
    }
    const auto edges = polytope_edges(cube.faces);
    CHECK(edges.size() == 12);
    CHECK(std::set<Edge>(edges.begin(), edges.end()) == brute);
    CHECK_THROWS_AS(polytope_edges({{0, 1, 2}, {0, 1, 2, 3}}), InvalidSystem);
}

TEST_CASE("polytope systems")
{
    const ConstraintSystem cube = builtin("cube_polytope");
    CHECK(cube.ambient_dim() == 42);
    const RigidityReport rep = analyze(cube);
    CHECK(rep.rank == 33);
    CHECK(rep.nontrivial_dim() == 3);
    CHECK(analyze(polytope(tetrahedron_spec(), {})).inf_rigid);
    const ConstraintSystem prism = polytope(triangular_prism_spec(), {});
    CHECK(residual_norm(prism, prism.realization()) <= 1e-8);
    for (std::size_t j = 8; j < 14; ++j) {
        CHECK(cube.is_normal_vertex(j));
        CHECK(vertex_position(cube.realization(), 3, j).norm() == doctest::Approx(1.0));
    }
}

TEST_CASE("edge contraction reaches the target length")
{
    const ConstraintSystem tet = polytope(tetrahedron_spec(), {});
    const Vec& x0 = tet.realization();
    const double L0 = (vertex_position(x0, 3, 0) - vertex_position(x0, 3, 1)).norm();
    const DeformationPath path = edge_contraction_path(tet, {0, 1}, 0.75, 30);
    REQUIRE(path.complete);
    REQUIRE(path.realizations.size() == 31);
    REQUIRE(path.final_system.has_value());
    double previous = L0;
    for (std::size_t i = 1; i < path.realizations.size(); ++i) {
        const double L = (vertex_position(path.realizations[i], 3, 0) - vertex_position(path.realizations[i], 3, 1)).norm();
        CHECK(L < previous);
        previous = L;
        CHECK(path.residual_log[i] <= 1e-8);
    }
    CHECK(std::abs(previous - 0.75 * L0) <= 1e-8);
    CHECK(residual_norm(*path.final_system, path.realizations.back()) <= 1e-8);

    const DeformationPath still = edge_contraction_path(tet, {0, 1}, 1.0, 3);
    REQUIRE(still.complete);
    for (const Vec& x : still.realizations) {
        CHECK((x - x0).norm() <= 1e-12);
    }
    CHECK(still.tangents.back().norm() == 0.0);

    const ConstraintSystem cube = builtin("cube_polytope");
    CHECK_THROWS_AS(edge_contraction_path(cube, {0, 6}, 0.9, 5), InputError);
    CHECK_THROWS_AS(edge_contraction_path(cube, {0, 1}, 1.5, 5), InputError);
}

TEST_CASE("single-edge contraction of quadrilateral-faced polytopes is infeasible")
{
    // Equilateral planar quadrilaterals are rhombi, which forces the opposite edge to shrink as well.
    for (const ConstraintSystem& sys : {builtin("cube_polytope"), polytope(triangular_prism_spec(), {})}) {
        const DeformationPath path = edge_contraction_path(sys, {0, 1}, 0.9, 20);
        CHECK_FALSE(path.complete);
        CHECK(path.realizations.size() == 1);
        CHECK(path.error.find("step 1") != std::string::npos);
    }
}

TEST_CASE("body systems and volume hypergraphs")
{
    const ConstraintSystem bb = builtin("cube_body_bar");
    CHECK(bb.n_free_constraints() == 16);
    CHECK(analyze(bb).nontrivial_dim() == 4);
    CHECK(analyze(builtin("pentagon_body_hinge")).nontrivial_dim() == 2);

    const Mat P = (Mat(2, 3) << 0, 1, 0, 0, 0, 1).finished();
    const ConstraintSystem one = volume_hypergraph({{0, 1, 2}}, P, {});
    CHECK(one.n_constraints() == 1);
    CHECK(one.trivial_kind() == TrivialKind::VolumePreserving);
    CHECK(one.constraints()[0].value(one.realization()) == doctest::Approx(0.0));
    CHECK(one.constraints()[0].const_term == doctest::Approx(-1.0));
}
