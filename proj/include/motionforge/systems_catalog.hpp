#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "motionforge/path_tracker.hpp"

namespace motionforge {

using Edge = std::pair<std::size_t, std::size_t>;

// Bar-joint framework; coords is d×n, indices are 0-based.
ConstraintSystem framework(const std::vector<Edge>& edges, const Mat& coords, const std::vector<std::size_t>& pins,
                           const std::string& name = {});

struct PackingSpec {
    double radius = 1.0;
    Mat centers;
    double contact_tol = 1e-6;
};

std::vector<Edge> detect_contacts(const PackingSpec& spec);

ConstraintSystem sphere_packing(const PackingSpec& spec, const std::vector<std::size_t>& pins,
                                const std::string& name = {});

std::optional<ConstraintSystem> sticky_update(const PackingSpec& spec, const ConstraintSystem& system, const Vec& x,
                                              const TrackerConfig& config = {});

ContactHook sticky_hook(const PackingSpec& spec, const TrackerConfig& config = {});

// Packing data recovered from a system carrying a packing radius.
std::optional<PackingSpec> packing_of(const ConstraintSystem& system);

struct PolytopeSpec {
    std::vector<std::vector<std::size_t>> faces;
    Mat vertex_coords;
    Mat normals_init;
};

// Edges as 2-element intersections of facet pairs, sorted.
std::vector<Edge> polytope_edges(const std::vector<std::vector<std::size_t>>& faces);

// Validates the combinatorics and fits outward unit normals.
PolytopeSpec make_polytope_spec(std::vector<std::vector<std::size_t>> faces, const Mat& vertex_coords);

ConstraintSystem polytope(const PolytopeSpec& spec, const std::vector<std::size_t>& pins,
                          const std::string& name = {});

DeformationPath edge_contraction_path(const ConstraintSystem& system, Edge edge, double gamma, int steps,
                                      const TrackerConfig& config = {});

ConstraintSystem body_hinge(const std::vector<std::vector<std::size_t>>& panels, const Mat& coords,
                            const std::string& name = {});
ConstraintSystem body_bar(const std::vector<Edge>& bars, const std::vector<std::vector<std::size_t>>& panels,
                          const Mat& coords, const std::string& name = {});

ConstraintSystem volume_hypergraph(const std::vector<std::vector<std::size_t>>& triangles, const Mat& coords,
                                   const std::vector<std::size_t>& pins, const std::string& name = {});

struct CatalogEntry {
    std::string name;
    std::string description;
};

const std::vector<CatalogEntry>& catalog_entries();

ConstraintSystem builtin(const std::string& name);

// Cube, tetrahedron and triangular prism as polytope specs.
PolytopeSpec cube_spec();
PolytopeSpec tetrahedron_spec();
PolytopeSpec triangular_prism_spec();

}  // namespace motionforge
