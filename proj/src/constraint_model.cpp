#include "motionforge/constraint_model.hpp"

#include <algorithm>
#include <sstream>

namespace motionforge {

namespace {

using Triplet = Eigen::Triplet<double>;

std::size_t coord_index(int dim, std::size_t vertex, int coord)
{
    return vertex * static_cast<std::size_t>(dim) + static_cast<std::size_t>(coord);
}

void check_vertex(std::size_t n_vertices, std::size_t j, const char* what)
{
    if (j >= n_vertices) {
        std::ostringstream os;
        os << what << ": vertex index " << j << " out of range (n = " << n_vertices << ")";
        throw InvalidSystem(os.str());
    }
}

SparseMat build_sparse(std::size_t N, const std::vector<Triplet>& entries)
{
    SparseMat m(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return m;
}

// Adds the symmetric pair of entries for s·x_i·x_j.
void add_product(std::vector<Triplet>& t, std::size_t i, std::size_t j, double s)
{
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    if (a == b) {
        t.emplace_back(a, a, s);
    } else {
        t.emplace_back(a, b, 0.5 * s);
        t.emplace_back(b, a, 0.5 * s);
    }
}

}  // namespace

const char* to_string(ConstraintKind kind)
{
    switch (kind) {
    case ConstraintKind::Distance: return "distance";
    case ConstraintKind::Pin: return "pin";
    case ConstraintKind::Planarity: return "planarity";
    case ConstraintKind::UnitNorm: return "unit_norm";
    case ConstraintKind::Volume2D: return "volume2d";
    case ConstraintKind::Generic: return "generic";
    }
    return "generic";
}

const char* to_string(TrivialKind kind)
{
    switch (kind) {
    case TrivialKind::Euclidean: return "euclidean";
    case TrivialKind::VolumePreserving: return "volume_preserving";
    case TrivialKind::PinsOnly: return "pins_only";
    }
    return "pins_only";
}

double QuadraticConstraint::value(const Vec& x) const
{
    return x.dot(quad * x) + lin.dot(x) + const_term;
}

Vec QuadraticConstraint::gradient(const Vec& x) const
{
    return 2.0 * (quad * x) + lin;
}

double QuadraticConstraint::form(const Vec& v) const
{
    return v.dot(quad * v);
}

double QuadraticConstraint::bilinear(const Vec& v, const Vec& w) const
{
    return v.dot(quad * w);
}

QuadraticConstraint distance_constraint(int dim, std::size_t n_vertices, std::size_t u, std::size_t v,
                                        double squared_length)
{
    check_vertex(n_vertices, u, "distance");
    check_vertex(n_vertices, v, "distance");
    if (u == v) {
        throw InvalidSystem("distance: endpoints coincide");
    }
    const std::size_t N = static_cast<std::size_t>(dim) * n_vertices;
    std::vector<Triplet> t;
    for (int k = 0; k < dim; ++k) {
        const auto a = static_cast<Eigen::Index>(coord_index(dim, u, k));
        const auto b = static_cast<Eigen::Index>(coord_index(dim, v, k));
        t.emplace_back(a, a, 1.0);
        t.emplace_back(b, b, 1.0);
        t.emplace_back(a, b, -1.0);
        t.emplace_back(b, a, -1.0);
    }
    QuadraticConstraint c;
    c.quad = build_sparse(N, t);
    c.lin = Vec::Zero(static_cast<Eigen::Index>(N));
    c.const_term = -squared_length;
    c.kind = ConstraintKind::Distance;
    c.vertices = {u, v};
    return c;
}

QuadraticConstraint pin_constraint(int dim, std::size_t n_vertices, std::size_t vertex, int coord, double target)
{
    check_vertex(n_vertices, vertex, "pin");
    const std::size_t N = static_cast<std::size_t>(dim) * n_vertices;
    QuadraticConstraint c;
    c.quad = SparseMat(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    c.lin = Vec::Zero(static_cast<Eigen::Index>(N));
    c.lin(static_cast<Eigen::Index>(coord_index(dim, vertex, coord))) = 1.0;
    c.const_term = -target;
    c.kind = ConstraintKind::Pin;
    c.vertices = {vertex};
    return c;
}

QuadraticConstraint planarity_constraint(int dim, std::size_t n_vertices, std::size_t normal, std::size_t u,
                                         std::size_t ref)
{
    check_vertex(n_vertices, normal, "planarity");
    check_vertex(n_vertices, u, "planarity");
    check_vertex(n_vertices, ref, "planarity");
    if (u == ref || normal == u || normal == ref) {
        throw InvalidSystem("planarity: vertices must be distinct");
    }
    const std::size_t N = static_cast<std::size_t>(dim) * n_vertices;
    std::vector<Triplet> t;
    for (int k = 0; k < dim; ++k) {
        add_product(t, coord_index(dim, normal, k), coord_index(dim, u, k), 1.0);
        add_product(t, coord_index(dim, normal, k), coord_index(dim, ref, k), -1.0);
    }
    QuadraticConstraint c;
    c.quad = build_sparse(N, t);
    c.lin = Vec::Zero(static_cast<Eigen::Index>(N));
    c.kind = ConstraintKind::Planarity;
    c.vertices = {normal, u, ref};
    return c;
}

QuadraticConstraint unit_norm_constraint(int dim, std::size_t n_vertices, std::size_t normal)
{
    check_vertex(n_vertices, normal, "unit_norm");
    const std::size_t N = static_cast<std::size_t>(dim) * n_vertices;
    std::vector<Triplet> t;
    for (int k = 0; k < dim; ++k) {
        add_product(t, coord_index(dim, normal, k), coord_index(dim, normal, k), 1.0);
    }
    QuadraticConstraint c;
    c.quad = build_sparse(N, t);
    c.lin = Vec::Zero(static_cast<Eigen::Index>(N));
    c.const_term = -1.0;
    c.kind = ConstraintKind::UnitNorm;
    c.vertices = {normal};
    return c;
}

QuadraticConstraint volume2d_constraint(std::size_t n_vertices, std::size_t a, std::size_t b, std::size_t c,
                                        double target)
{
    check_vertex(n_vertices, a, "volume2d");
    check_vertex(n_vertices, b, "volume2d");
    check_vertex(n_vertices, c, "volume2d");
    if (a == b || b == c || a == c) {
        throw InvalidSystem("volume2d: vertices must be distinct");
    }
    const std::size_t N = 2 * n_vertices;
    auto X = [](std::size_t j) { return 2 * j; };
    auto Y = [](std::size_t j) { return 2 * j + 1; };
    // x_a(y_b − y_c) − x_b(y_a − y_c) + x_c(y_a − y_b)
    std::vector<Triplet> t;
    add_product(t, X(a), Y(b), 1.0);
    add_product(t, X(a), Y(c), -1.0);
    add_product(t, X(b), Y(a), -1.0);
    add_product(t, X(b), Y(c), 1.0);
    add_product(t, X(c), Y(a), 1.0);
    add_product(t, X(c), Y(b), -1.0);
    QuadraticConstraint q;
    q.quad = build_sparse(N, t);
    q.lin = Vec::Zero(static_cast<Eigen::Index>(N));
    q.const_term = -target;
    q.kind = ConstraintKind::Volume2D;
    q.vertices = {a, b, c};
    return q;
}

QuadraticConstraint generic_constraint(const SparseMat& quad, const Vec& lin, double const_term)
{
    if (quad.rows() != quad.cols() || quad.rows() != lin.size()) {
        throw DimensionMismatch("generic: quad and lin sizes disagree");
    }
    QuadraticConstraint c;
    c.quad = quad;
    c.quad.makeCompressed();
    c.lin = lin;
    c.const_term = const_term;
    c.kind = ConstraintKind::Generic;
    return c;
}

QuadraticMap::QuadraticMap(std::size_t ambient_dim, std::vector<QuadraticConstraint> constraints)
    : ambient_(ambient_dim), constraints_(std::move(constraints))
{
    for (const auto& c : constraints_) {
        if (c.ambient_dim() != ambient_ || static_cast<std::size_t>(c.quad.rows()) != ambient_ ||
            static_cast<std::size_t>(c.quad.cols()) != ambient_) {
            throw DimensionMismatch("constraint size does not match the coordinate count");
        }
    }
}

void QuadraticMap::check_point(const Vec& x) const
{
    if (static_cast<std::size_t>(x.size()) != ambient_) {
        std::ostringstream os;
        os << "expected a vector of length " << ambient_ << ", got " << x.size();
        throw DimensionMismatch(os.str());
    }
}

Vec QuadraticMap::evaluate(const Vec& x) const
{
    check_point(x);
    Vec out(static_cast<Eigen::Index>(constraints_.size()));
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = constraints_[i].value(x);
    }
    return out;
}

Mat QuadraticMap::jacobian(const Vec& x) const
{
    check_point(x);
    Mat J(static_cast<Eigen::Index>(constraints_.size()), static_cast<Eigen::Index>(ambient_));
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        J.row(static_cast<Eigen::Index>(i)) = constraints_[i].gradient(x).transpose();
    }
    return J;
}

Vec QuadraticMap::hessian_form(const Vec& v) const
{
    check_point(v);
    Vec out(static_cast<Eigen::Index>(constraints_.size()));
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = constraints_[i].form(v);
    }
    return out;
}

Vec QuadraticMap::bilinear_form(const Vec& v, const Vec& w) const
{
    check_point(v);
    check_point(w);
    Vec out(static_cast<Eigen::Index>(constraints_.size()));
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = constraints_[i].bilinear(v, w);
    }
    return out;
}

Mat QuadraticMap::weighted_quad(const Vec& lambda) const
{
    if (static_cast<std::size_t>(lambda.size()) != constraints_.size()) {
        throw DimensionMismatch("multiplier count does not match constraint count");
    }
    Mat out = Mat::Zero(static_cast<Eigen::Index>(ambient_), static_cast<Eigen::Index>(ambient_));
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        const double w = lambda(static_cast<Eigen::Index>(i));
        if (w == 0.0) {
            continue;
        }
        const SparseMat& A = constraints_[i].quad;
        for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
            for (SparseMat::InnerIterator it(A, k); it; ++it) {
                out(it.row(), it.col()) += w * it.value();
            }
        }
    }
    return out;
}

QuadraticMap QuadraticMap::mixed(const Mat& mix) const
{
    if (static_cast<std::size_t>(mix.cols()) != constraints_.size()) {
        throw DimensionMismatch("mixing matrix column count does not match constraint count");
    }
    std::vector<QuadraticConstraint> out;
    out.reserve(static_cast<std::size_t>(mix.rows()));
    const auto N = static_cast<Eigen::Index>(ambient_);
    for (Eigen::Index r = 0; r < mix.rows(); ++r) {
        SparseMat q(N, N);
        Vec lin = Vec::Zero(N);
        double c = 0.0;
        for (std::size_t i = 0; i < constraints_.size(); ++i) {
            const double w = mix(r, static_cast<Eigen::Index>(i));
            q += w * constraints_[i].quad;
            lin += w * constraints_[i].lin;
            c += w * constraints_[i].const_term;
        }
        out.push_back(generic_constraint(q, lin, c));
    }
    return QuadraticMap(ambient_, std::move(out));
}

ConstraintSystem::ConstraintSystem(int dim, std::size_t n_vertices, Vec realization,
                                   std::vector<QuadraticConstraint> constraints, std::vector<std::size_t> pinned,
                                   TrivialKind trivial_kind, SystemOptions options)
    : dim_(dim), n_(n_vertices), realization_(std::move(realization)), n_free_(constraints.size()),
      trivial_kind_(trivial_kind), options_(std::move(options))
{
    if (dim_ < 1 || n_ < 1) {
        throw InvalidSystem("dimension and vertex count must be positive");
    }
    if (static_cast<std::size_t>(realization_.size()) != ambient_dim()) {
        std::ostringstream os;
        os << "realization has length " << realization_.size() << ", expected " << ambient_dim();
        throw InvalidSystem(os.str());
    }
    std::sort(pinned.begin(), pinned.end());
    pinned.erase(std::unique(pinned.begin(), pinned.end()), pinned.end());
    for (std::size_t j : pinned) {
        check_vertex(n_, j, "pinned");
        for (int k = 0; k < dim_; ++k) {
            constraints.push_back(pin_constraint(dim_, n_, j, k,
                                                 realization_(static_cast<Eigen::Index>(coord_index(dim_, j, k)))));
        }
    }
    pinned_ = std::move(pinned);
    map_ = QuadraticMap(ambient_dim(), std::move(constraints));
    std::sort(options_.normal_vertices.begin(), options_.normal_vertices.end());
    validate();
}

ConstraintSystem::ConstraintSystem(Raw, int dim, std::size_t n_vertices, Vec realization,
                                   std::vector<QuadraticConstraint> all, std::size_t n_free,
                                   std::vector<std::size_t> pinned, TrivialKind trivial_kind, SystemOptions options)
    : dim_(dim), n_(n_vertices), realization_(std::move(realization)), map_(dim * n_vertices, std::move(all)),
      n_free_(n_free), pinned_(std::move(pinned)), trivial_kind_(trivial_kind), options_(std::move(options))
{
    validate();
}

void ConstraintSystem::validate() const
{
    for (std::size_t j : options_.normal_vertices) {
        check_vertex(n_, j, "normal vertex");
    }
    for (std::size_t i = 0; i < map_.size(); ++i) {
        const auto& c = map_.constraints()[i];
        SparseMat diff = SparseMat(c.quad.transpose()) - c.quad;
        if (diff.norm() != 0.0) {
            throw InvalidSystem("constraint " + std::to_string(i + 1) + " has a non-symmetric quadratic part");
        }
        if (c.kind == ConstraintKind::Pin && c.quad.norm() != 0.0) {
            throw InvalidSystem("pin constraint with a quadratic part");
        }
        if ((c.kind == ConstraintKind::Distance || c.kind == ConstraintKind::UnitNorm) && c.lin.norm() != 0.0) {
            throw InvalidSystem("distance or unit-norm constraint with a linear part");
        }
        if (trivial_kind_ == TrivialKind::VolumePreserving && c.kind != ConstraintKind::Pin &&
            c.kind != ConstraintKind::Volume2D) {
            throw InvalidSystem("volume-preserving trivial motions need volume constraints only");
        }
    }
    if (trivial_kind_ == TrivialKind::VolumePreserving && dim_ != 2) {
        throw InvalidSystem("volume-preserving systems are supported in the plane only");
    }
    const double r = map_.evaluate(realization_).norm();
    if (!(r <= options_.feasibility_tol)) {
        std::ostringstream os;
        os << "realization violates the constraints (residual " << r << " > " << options_.feasibility_tol << ")";
        throw InvalidSystem(os.str());
    }
}

bool ConstraintSystem::is_normal_vertex(std::size_t j) const
{
    return std::binary_search(options_.normal_vertices.begin(), options_.normal_vertices.end(), j);
}

ConstraintSystem ConstraintSystem::with_added_constraint(QuadraticConstraint c, const Vec& x) const
{
    std::vector<QuadraticConstraint> all = map_.constraints();
    all.insert(all.begin() + static_cast<std::ptrdiff_t>(n_free_), std::move(c));
    return ConstraintSystem(Raw{}, dim_, n_, x, std::move(all), n_free_ + 1, pinned_, trivial_kind_, options_);
}

ConstraintSystem ConstraintSystem::with_replaced_constraint(std::size_t index, QuadraticConstraint c,
                                                            const Vec& x) const
{
    if (index >= map_.size()) {
        throw InvalidSystem("constraint index out of range");
    }
    std::vector<QuadraticConstraint> all = map_.constraints();
    all[index] = std::move(c);
    return ConstraintSystem(Raw{}, dim_, n_, x, std::move(all), n_free_, pinned_, trivial_kind_, options_);
}

Vec evaluate(const ConstraintSystem& system, const Realization& x)
{
    return system.map().evaluate(x);
}

Mat rigidity_matrix(const ConstraintSystem& system, const Realization& x)
{
    return system.map().jacobian(x);
}

Vec hessian_form(const ConstraintSystem& system, const Vec& v)
{
    return system.map().hessian_form(v);
}

double residual_norm(const ConstraintSystem& system, const Realization& x)
{
    return system.map().evaluate(x).norm();
}

Vec vertex_position(const Vec& x, int dim, std::size_t j)
{
    return x.segment(static_cast<Eigen::Index>(j) * dim, dim);
}

Mat as_columns(const Vec& x, int dim)
{
    const Eigen::Index n = x.size() / dim;
    return Eigen::Map<const Mat>(x.data(), dim, n);
}

Vec flatten_columns(const Mat& coords)
{
    return Eigen::Map<const Vec>(coords.data(), coords.size());
}

}  // namespace motionforge
