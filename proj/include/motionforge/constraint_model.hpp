#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "motionforge/errors.hpp"
#include "motionforge/linalg.hpp"

namespace motionforge {

using SparseMat = Eigen::SparseMatrix<double>;
using Realization = Vec;

enum class ConstraintKind { Distance, Pin, Planarity, UnitNorm, Volume2D, Generic };
enum class TrivialKind { Euclidean, VolumePreserving, PinsOnly };

const char* to_string(ConstraintKind kind);
const char* to_string(TrivialKind kind);

/**
 * @brief One quadratic polynomial g(x) = xᵀ·quad·x + lin·x + const_term over the flattened coordinates.
 *
 * `vertices` records the vertices the constraint was built from; it is metadata only.
 */
struct QuadraticConstraint {
    SparseMat quad;
    Vec lin;
    double const_term = 0.0;
    ConstraintKind kind = ConstraintKind::Generic;
    std::vector<std::size_t> vertices;

    std::size_t ambient_dim() const { return static_cast<std::size_t>(lin.size()); }
    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    double form(const Vec& v) const;
    double bilinear(const Vec& v, const Vec& w) const;
};

QuadraticConstraint distance_constraint(int dim, std::size_t n_vertices, std::size_t u, std::size_t v,
                                        double squared_length);
QuadraticConstraint pin_constraint(int dim, std::size_t n_vertices, std::size_t vertex, int coord, double target);
// aᵀ(p_u − p_ref) with a the coordinates of the normal vertex.
QuadraticConstraint planarity_constraint(int dim, std::size_t n_vertices, std::size_t normal, std::size_t u,
                                         std::size_t ref);
QuadraticConstraint unit_norm_constraint(int dim, std::size_t n_vertices, std::size_t normal);
// det[[p_a p_b p_c],[1 1 1]] − target in the plane.
QuadraticConstraint volume2d_constraint(std::size_t n_vertices, std::size_t a, std::size_t b, std::size_t c,
                                        double target);
QuadraticConstraint generic_constraint(const SparseMat& quad, const Vec& lin, double const_term);

/** @brief An ordered list of quadratics on a common coordinate space. */
class QuadraticMap {
public:
    QuadraticMap() = default;
    QuadraticMap(std::size_t ambient_dim, std::vector<QuadraticConstraint> constraints);

    std::size_t ambient_dim() const { return ambient_; }
    std::size_t size() const { return constraints_.size(); }
    const std::vector<QuadraticConstraint>& constraints() const { return constraints_; }

    Vec evaluate(const Vec& x) const;
    Mat jacobian(const Vec& x) const;
    Vec hessian_form(const Vec& v) const;
    Vec bilinear_form(const Vec& v, const Vec& w) const;
    // Σ λ_i·quad_i as a dense matrix.
    Mat weighted_quad(const Vec& lambda) const;
    // Rows of the returned map are Σ_j mix(i,j)·g_j.
    QuadraticMap mixed(const Mat& mix) const;

private:
    void check_point(const Vec& x) const;

    std::size_t ambient_ = 0;
    std::vector<QuadraticConstraint> constraints_;
};

struct SystemOptions {
    // Vertices that carry directions (polytope facet normals); translations do not move them.
    std::vector<std::size_t> normal_vertices;
    std::optional<double> packing_radius;
    std::string name;
    double feasibility_tol = 1e-8;
};

/**
 * @brief Vertices, a realization, quadratic constraints and pins.
 *
 * Pins are appended after the given constraints as `dim` Pin constraints per pinned vertex.
 * Construction fails when the realization violates the constraints.
 */
class ConstraintSystem {
public:
    ConstraintSystem(int dim, std::size_t n_vertices, Vec realization, std::vector<QuadraticConstraint> constraints,
                     std::vector<std::size_t> pinned, TrivialKind trivial_kind, SystemOptions options = {});

    int dim() const { return dim_; }
    std::size_t n_vertices() const { return n_; }
    std::size_t ambient_dim() const { return static_cast<std::size_t>(dim_) * n_; }
    std::size_t n_constraints() const { return map_.size(); }
    std::size_t n_free_constraints() const { return n_free_; }
    const Vec& realization() const { return realization_; }
    const std::vector<QuadraticConstraint>& constraints() const { return map_.constraints(); }
    const QuadraticMap& map() const { return map_; }
    const std::vector<std::size_t>& pinned() const { return pinned_; }
    TrivialKind trivial_kind() const { return trivial_kind_; }
    const SystemOptions& options() const { return options_; }
    bool is_normal_vertex(std::size_t j) const;

    // New system with `c` inserted after the non-pin constraints, realized at x.
    ConstraintSystem with_added_constraint(QuadraticConstraint c, const Vec& x) const;
    // New system with constraint `index` replaced, realized at x.
    ConstraintSystem with_replaced_constraint(std::size_t index, QuadraticConstraint c, const Vec& x) const;

private:
    struct Raw {};
    ConstraintSystem(Raw, int dim, std::size_t n_vertices, Vec realization, std::vector<QuadraticConstraint> all,
                     std::size_t n_free, std::vector<std::size_t> pinned, TrivialKind trivial_kind,
                     SystemOptions options);
    void validate() const;

    int dim_;
    std::size_t n_;
    Vec realization_;
    QuadraticMap map_;
    std::size_t n_free_;
    std::vector<std::size_t> pinned_;
    TrivialKind trivial_kind_;
    SystemOptions options_;
};

Vec evaluate(const ConstraintSystem& system, const Realization& x);
// Row i is (2·A_i·x + b_i)ᵀ. Distance rows are twice the half-scaled convention.
Mat rigidity_matrix(const ConstraintSystem& system, const Realization& x);
// Component i is vᵀ·A_i·v.
Vec hessian_form(const ConstraintSystem& system, const Vec& v);
double residual_norm(const ConstraintSystem& system, const Realization& x);

Vec vertex_position(const Vec& x, int dim, std::size_t j);
Mat as_columns(const Vec& x, int dim);
Vec flatten_columns(const Mat& coords);

}  // namespace motionforge
