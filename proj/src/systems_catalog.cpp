#include "motionforge/systems_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

namespace motionforge {

namespace {

Edge ordered(std::size_t a, std::size_t b)
{
    return a < b ? Edge{a, b} : Edge{b, a};
}

double squared_distance(const Mat& coords, std::size_t u, std::size_t v)
{
    return (coords.col(static_cast<Eigen::Index>(u)) - coords.col(static_cast<Eigen::Index>(v))).squaredNorm();
}

std::vector<QuadraticConstraint> bar_constraints(const std::vector<Edge>& edges, const Mat& coords)
{
    const int d = static_cast<int>(coords.rows());
    const auto n = static_cast<std::size_t>(coords.cols());
    std::set<Edge> seen;
    std::vector<QuadraticConstraint> out;
    for (const Edge& e : edges) {
        if (e.first >= n || e.second >= n) {
            throw InvalidSystem("edge refers to a missing vertex");
        }
        if (!seen.insert(ordered(e.first, e.second)).second) {
            throw InvalidSystem("repeated edge " + std::to_string(e.first + 1) + "-" + std::to_string(e.second + 1));
        }
        const double L2 = squared_distance(coords, e.first, e.second);
        if (L2 == 0.0) {
            throw InvalidSystem("zero-length bar " + std::to_string(e.first + 1) + "-" +
                                std::to_string(e.second + 1));
        }
        out.push_back(distance_constraint(d, n, e.first, e.second, L2));
    }
    return out;
}

std::vector<Edge> panel_edges(const std::vector<std::vector<std::size_t>>& panels, const Mat& coords)
{
    std::set<Edge> edges;
    const int d = static_cast<int>(coords.rows());
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        if (panel.size() < 3) {
            throw InvalidSystem("panels need at least 3 vertices");
        }
        Mat P(d, static_cast<Eigen::Index>(panel.size()));
        for (std::size_t i = 0; i < panel.size(); ++i) {
            if (panel[i] >= static_cast<std::size_t>(coords.cols())) {
                throw InvalidSystem("panel refers to a missing vertex");
            }
            P.col(static_cast<Eigen::Index>(i)) = coords.col(static_cast<Eigen::Index>(panel[i]));
            for (std::size_t j = i + 1; j < panel.size(); ++j) {
                edges.insert(ordered(panel[i], panel[j]));
            }
        }
        Vec c = P.rowwise().mean();
        P.colwise() -= c;
        const int span = numerical_rank(P, 1e-10);
        if (span < std::min(static_cast<int>(panel.size()) - 1, std::min(d, 2))) {
            spdlog::warn("panel {} is affinely degenerate (span {})", p + 1, span);
        }
    }
    return {edges.begin(), edges.end()};
}

Mat columns(std::initializer_list<std::initializer_list<double>> rows)
{
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.begin()->size());
    Mat out(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double value : row) {
            out(i, j++) = value;
        }
        ++i;
    }
    return out;
}

std::vector<Edge> one_based(std::initializer_list<std::pair<int, int>> edges)
{
    std::vector<Edge> out;
    for (const auto& e : edges) {
        out.emplace_back(static_cast<std::size_t>(e.first - 1), static_cast<std::size_t>(e.second - 1));
    }
    return out;
}

std::vector<std::vector<std::size_t>> one_based_lists(std::initializer_list<std::initializer_list<int>> lists)
{
    std::vector<std::vector<std::size_t>> out;
    for (const auto& l : lists) {
        std::vector<std::size_t> v;
        for (int i : l) {
            v.push_back(static_cast<std::size_t>(i - 1));
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace

ConstraintSystem framework(const std::vector<Edge>& edges, const Mat& coords, const std::vector<std::size_t>& pins,
                           const std::string& name)
{
    SystemOptions opts;
    opts.name = name;
    return ConstraintSystem(static_cast<int>(coords.rows()), static_cast<std::size_t>(coords.cols()),
                            flatten_columns(coords), bar_constraints(edges, coords), pins, TrivialKind::Euclidean,
                            opts);
}

std::vector<Edge> detect_contacts(const PackingSpec& spec)
{
    if (!(spec.radius > 0.0)) {
        throw InvalidSystem("packing radius must be positive");
    }
    const auto n = static_cast<std::size_t>(spec.centers.cols());
    const double target = 2.0 * spec.radius;
    std::vector<Edge> out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dist = std::sqrt(squared_distance(spec.centers, i, j));
            if (dist < target - spec.contact_tol) {
                std::ostringstream os;
                os << "disks " << i + 1 << " and " << j + 1 << " overlap (distance " << dist << ")";
                throw InvalidSystem(os.str());
            }
            if (std::abs(dist - target) <= spec.contact_tol) {
                out.emplace_back(i, j);
            }
        }
    }
    return out;
}

ConstraintSystem sphere_packing(const PackingSpec& spec, const std::vector<std::size_t>& pins,
                                const std::string& name)
{
    const auto contacts = detect_contacts(spec);
    const int d = static_cast<int>(spec.centers.rows());
    const auto n = static_cast<std::size_t>(spec.centers.cols());
    const double target = 4.0 * spec.radius * spec.radius;
    std::vector<QuadraticConstraint> cons;
    for (const Edge& e : contacts) {
        cons.push_back(distance_constraint(d, n, e.first, e.second, target));
    }
    SystemOptions opts;
    opts.name = name;
    opts.packing_radius = spec.radius;
    Vec x = flatten_columns(spec.centers);
    std::vector<QuadraticConstraint> all = cons;
    for (std::size_t j : pins) {
        for (int k = 0; k < d; ++k) {
            all.push_back(pin_constraint(d, n, j, k, x(static_cast<Eigen::Index>(j) * d + k)));
        }
    }
    const QuadraticMap full(static_cast<std::size_t>(d) * n, all);
    if (full.evaluate(x).norm() > 1e-12) {
        // Contacts within tolerance are snapped to exact tangency.
        CorrectorResult snap = project_point(full, x, x, TrackerConfig{});
        if (!snap.converged) {
            throw InvalidSystem("could not snap contacts to exact tangency");
        }
        x = snap.state.x;
    }
    return ConstraintSystem(d, n, x, cons, pins, TrivialKind::Euclidean, opts);
}

std::optional<ConstraintSystem> sticky_update(const PackingSpec& spec, const ConstraintSystem& system, const Vec& x,
                                              const TrackerConfig& config)
{
    const int d = system.dim();
    const std::size_t n = system.n_vertices();
    std::set<Edge> contacts;
    for (const auto& c : system.constraints()) {
        if (c.kind == ConstraintKind::Distance && c.vertices.size() == 2) {
            contacts.insert(ordered(c.vertices[0], c.vertices[1]));
        }
    }
    const double target = 2.0 * spec.radius;
    std::optional<Edge> closest;
    double closest_dist = target - spec.contact_tol;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (contacts.count({i, j}) != 0) {
                continue;
            }
            const double dist = (vertex_position(x, d, i) - vertex_position(x, d, j)).norm();
            if (dist < closest_dist) {
                closest_dist = dist;
                closest = Edge{i, j};
            }
        }
    }
    if (!closest) {
        return std::nullopt;
    }
    QuadraticConstraint c = distance_constraint(d, n, closest->first, closest->second, target * target);
    std::vector<QuadraticConstraint> all = system.constraints();
    all.push_back(c);
    const QuadraticMap augmented(system.ambient_dim(), all);
    CorrectorResult proj = project_point(augmented, x, x, config);
    if (!proj.converged) {
        throw Error("sticky contact: projection onto the augmented constraints failed");
    }
    spdlog::debug("sticky contact {}-{}", closest->first + 1, closest->second + 1);
    return system.with_added_constraint(std::move(c), proj.state.x);
}

ContactHook sticky_hook(const PackingSpec& spec, const TrackerConfig& config)
{
    return [spec, config](const ConstraintSystem& system, const Vec& x) {
        return sticky_update(spec, system, x, config);
    };
}

std::optional<PackingSpec> packing_of(const ConstraintSystem& system)
{
    if (!system.options().packing_radius) {
        return std::nullopt;
    }
    PackingSpec spec;
    spec.radius = *system.options().packing_radius;
    spec.centers = as_columns(system.realization(), system.dim());
    return spec;
}

std::vector<Edge> polytope_edges(const std::vector<std::vector<std::size_t>>& faces)
{
    std::set<Edge> edges;
    for (std::size_t a = 0; a < faces.size(); ++a) {
        const std::set<std::size_t> fa(faces[a].begin(), faces[a].end());
        for (std::size_t b = a + 1; b < faces.size(); ++b) {
            std::vector<std::size_t> common;
            for (std::size_t v : faces[b]) {
                if (fa.count(v) != 0) {
                    common.push_back(v);
                }
            }
            if (common.size() > 2) {
                throw InvalidSystem("faces " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                                    " share more than two vertices");
            }
            if (common.size() == 2) {
                edges.insert(ordered(common[0], common[1]));
            }
        }
    }
    return {edges.begin(), edges.end()};
}

PolytopeSpec make_polytope_spec(std::vector<std::vector<std::size_t>> faces, const Mat& vertex_coords)
{
    const int d = static_cast<int>(vertex_coords.rows());
    const auto n = static_cast<std::size_t>(vertex_coords.cols());
    for (const auto& f : faces) {
        if (f.size() < 3) {
            throw InvalidSystem("faces need at least 3 vertices");
        }
        std::set<std::size_t> distinct(f.begin(), f.end());
        if (distinct.size() != f.size() || *distinct.rbegin() >= n) {
            throw InvalidSystem("face lists repeated or missing vertices");
        }
    }
    const auto edges = polytope_edges(faces);
    if (d == 3) {
        const long euler = static_cast<long>(n) - static_cast<long>(edges.size()) + static_cast<long>(faces.size());
        if (euler != 2) {
            throw InvalidSystem("Euler count |V|-|E|+|F| is " + std::to_string(euler) + ", expected 2");
        }
    }
    PolytopeSpec spec;
    spec.faces = std::move(faces);
    spec.vertex_coords = vertex_coords;
    spec.normals_init.resize(d, static_cast<Eigen::Index>(spec.faces.size()));
    const Vec center = vertex_coords.rowwise().mean();
    for (std::size_t f = 0; f < spec.faces.size(); ++f) {
        const auto& face = spec.faces[f];
        Mat P(d, static_cast<Eigen::Index>(face.size()));
        for (std::size_t i = 0; i < face.size(); ++i) {
            P.col(static_cast<Eigen::Index>(i)) = vertex_coords.col(static_cast<Eigen::Index>(face[i]));
        }
        const Vec c = P.rowwise().mean();
        P.colwise() -= c;
        Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeFullU);
        Vec normal = svd.matrixU().col(d - 1);
        if (normal.dot(c - center) < 0.0) {
            normal = -normal;
        }
        const double off = (normal.transpose() * P).cwiseAbs().maxCoeff();
        if (off > 1e-8) {
            throw InvalidSystem("face " + std::to_string(f + 1) + " is not planar");
        }
        spec.normals_init.col(static_cast<Eigen::Index>(f)) = normal;
    }
    return spec;
}

ConstraintSystem polytope(const PolytopeSpec& spec, const std::vector<std::size_t>& pins, const std::string& name)
{
    const int d = static_cast<int>(spec.vertex_coords.rows());
    const auto n = static_cast<std::size_t>(spec.vertex_coords.cols());
    const std::size_t F = spec.faces.size();
    const std::size_t total = n + F;
    Mat all(d, static_cast<Eigen::Index>(total));
    all << spec.vertex_coords, spec.normals_init;
    std::vector<QuadraticConstraint> cons;
    for (const Edge& e : polytope_edges(spec.faces)) {
        cons.push_back(distance_constraint(d, total, e.first, e.second, squared_distance(spec.vertex_coords,
                                                                                          e.first, e.second)));
    }
    for (std::size_t f = 0; f < F; ++f) {
        const auto& face = spec.faces[f];
        for (std::size_t i = 1; i < face.size(); ++i) {
            cons.push_back(planarity_constraint(d, total, n + f, face[i], face[0]));
        }
    }
    for (std::size_t f = 0; f < F; ++f) {
        cons.push_back(unit_norm_constraint(d, total, n + f));
    }
    SystemOptions opts;
    opts.name = name;
    for (std::size_t f = 0; f < F; ++f) {
        opts.normal_vertices.push_back(n + f);
    }
    for (std::size_t p : pins) {
        if (p >= n) {
            throw InvalidSystem("only polytope vertices can be pinned");
        }
    }
    return ConstraintSystem(d, total, flatten_columns(all), cons, pins, TrivialKind::Euclidean, opts);
}

DeformationPath edge_contraction_path(const ConstraintSystem& system, Edge edge, double gamma, int steps,
                                      const TrackerConfig& config)
{
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw InputError("contraction fraction must lie in (0, 1]");
    }
    if (steps < 0) {
        throw InputError("step count must be non-negative");
    }
    const Edge key = ordered(edge.first, edge.second);
    std::optional<std::size_t> index;
    for (std::size_t i = 0; i < system.n_constraints(); ++i) {
        const auto& c = system.constraints()[i];
        if (c.kind == ConstraintKind::Distance && c.vertices.size() == 2 &&
            ordered(c.vertices[0], c.vertices[1]) == key) {
            index = i;
            break;
        }
    }
    if (!index) {
        throw InputError("edge " + std::to_string(edge.first + 1) + "-" + std::to_string(edge.second + 1) +
                         " is not a bar of the system");
    }
    const double start = -system.constraints()[*index].const_term;
    const double finish = gamma * gamma * start;

    DeformationPath path;
    Vec x = system.realization();
    path.realizations.push_back(x);
    path.tangents.push_back(Vec::Zero(x.size()));
    path.residual_log.push_back(residual_norm(system, x));
    std::optional<ConstraintSystem> current;
    double previous_target = start;
    for (int j = 1; j <= steps; ++j) {
        const double target = start + (finish - start) * static_cast<double>(j) / steps;
        QuadraticConstraint c = distance_constraint(system.dim(), system.n_vertices(), key.first, key.second, target);
        std::vector<QuadraticConstraint> all = system.constraints();
        all[*index] = c;
        const QuadraticMap modified(system.ambient_dim(), all);
        CorrectorResult corr = project_point(modified, x, x, config);
        if (!corr.converged) {
            path.complete = false;
            path.error = "corrector failed at contraction step " + std::to_string(j);
            break;
        }
        try {
            current = system.with_replaced_constraint(*index, std::move(c), corr.state.x);
        } catch (const Error& e) {
            path.complete = false;
            path.error = e.what();
            break;
        }
        const Vec chord = corr.state.x - x;
        const double len = chord.norm();
        Vec tangent = len > 0.0 ? Vec(chord / len) : Vec(Vec::Zero(x.size()));
        if (j == 1) {
            path.tangents[0] = tangent;
        }
        x = corr.state.x;
        path.realizations.push_back(x);
        path.tangents.push_back(tangent);
        path.step_sizes.push_back(std::abs(target - previous_target));
        path.curve_lengths.push_back(len);
        path.residual_log.push_back(residual_norm(*current, x));
        previous_target = target;
    }
    if (current) {
        path.final_system = *current;
    } else {
        path.final_system = system;
    }
    return path;
}

ConstraintSystem body_hinge(const std::vector<std::vector<std::size_t>>& panels, const Mat& coords,
                            const std::string& name)
{
    return framework(panel_edges(panels, coords), coords, {}, name);
}

ConstraintSystem body_bar(const std::vector<Edge>& bars, const std::vector<std::vector<std::size_t>>& panels,
                          const Mat& coords, const std::string& name)
{
    std::vector<Edge> edges = panel_edges(panels, coords);
    std::set<Edge> seen(edges.begin(), edges.end());
    for (const Edge& b : bars) {
        if (seen.insert(ordered(b.first, b.second)).second) {
            edges.push_back(ordered(b.first, b.second));
        }
    }
    return framework(edges, coords, {}, name);
}

ConstraintSystem volume_hypergraph(const std::vector<std::vector<std::size_t>>& triangles, const Mat& coords,
                                   const std::vector<std::size_t>& pins, const std::string& name)
{
    if (coords.rows() != 2) {
        throw InvalidSystem("volume constraints are supported in the plane only (degree exceeds 2 otherwise)");
    }
    const auto n = static_cast<std::size_t>(coords.cols());
    std::vector<QuadraticConstraint> cons;
    for (const auto& t : triangles) {
        if (t.size() != 3) {
            throw InvalidSystem("volume hyperedges in the plane are triangles");
        }
        for (std::size_t v : t) {
            if (v >= n) {
                throw InvalidSystem("triangle refers to a missing vertex");
            }
        }
        const Vec a = coords.col(static_cast<Eigen::Index>(t[0]));
        const Vec b = coords.col(static_cast<Eigen::Index>(t[1]));
        const Vec c = coords.col(static_cast<Eigen::Index>(t[2]));
        const double det = a(0) * (b(1) - c(1)) - b(0) * (a(1) - c(1)) + c(0) * (a(1) - b(1));
        cons.push_back(volume2d_constraint(n, t[0], t[1], t[2], det));
    }
    SystemOptions opts;
    opts.name = name;
    return ConstraintSystem(2, n, flatten_columns(coords), cons, pins, TrivialKind::VolumePreserving, opts);
}

PolytopeSpec cube_spec()
{
    const Mat coords = columns({{0, 1, 1, 0, 0, 1, 1, 0}, {0, 0, 1, 1, 0, 0, 1, 1}, {0, 0, 0, 0, 1, 1, 1, 1}});
    return make_polytope_spec(
        one_based_lists({{1, 2, 3, 4}, {5, 6, 7, 8}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 4, 8, 7}, {4, 1, 5, 8}}),
        coords);
}

PolytopeSpec tetrahedron_spec()
{
    const Mat coords = columns({{1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}});
    return make_polytope_spec(one_based_lists({{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}}), coords);
}

PolytopeSpec triangular_prism_spec()
{
    const double h = std::sqrt(3.0) / 2.0;
    const Mat coords = columns({{0, 1, 0.5, 0, 1, 0.5}, {0, 0, h, 0, 0, h}, {0, 0, 0, 1, 1, 1}});
    return make_polytope_spec(one_based_lists({{1, 2, 3}, {4, 5, 6}, {1, 2, 5, 4}, {2, 3, 6, 5}, {3, 1, 4, 6}}),
                              coords);
}

const std::vector<CatalogEntry>& catalog_entries()
{
    static const std::vector<CatalogEntry> entries{
        {"three_prism", "3-prism bar-joint framework in the plane, vertices 1 and 4 pinned"},
        {"double_watt", "Double Watt linkage, 11 joints and 15 bars, vertices 1, 6 and 11 pinned"},
        {"four_bar", "four-bar linkage on the unit square, vertices 1 and 2 pinned"},
        {"k3_collinear", "triangle graph on three collinear points"},
        {"three_prism_symmetric", "centrally symmetric 3-prism with one flex and one stress"},
        {"disk_packing_4", "sticky packing of four unit disks, vertex 1 pinned"},
        {"octahedral_volume", "octahedral area hypergraph without two faces, vertices 4, 5, 6 pinned"},
        {"cube_polytope", "unit cube as a polytope with edge lengths, planar faces and unit facet normals"},
        {"pentagon_body_hinge", "five triangular panels forming a pentagonal pyramid"},
        {"cube_body_bar", "two square panels joined by four bars"},
    };
    return entries;
}

ConstraintSystem builtin(const std::string& name)
{
    const double s3 = std::sqrt(3.0);
    if (name == "three_prism") {
        const Mat coords = columns({{0, 0, s3 / 2, 1, 1, 1 + s3 / 2}, {0, 1, 0.5, 0, 1, 0.5}});
        return framework(one_based({{1, 2}, {1, 3}, {2, 3}, {4, 5}, {5, 6}, {4, 6}, {1, 4}, {2, 5}, {3, 6}}),
                         coords, {0, 3}, name);
    }
    if (name == "double_watt") {
        const Mat coords = columns({{0, 1, 2, 1, 3, 4, 5, 7, 6, 7, 8}, {0, 0, 1, 2, 2, 2, 2, 2, 1, 0, 0}});
        return framework(one_based({{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 10},
                                    {10, 11}, {2, 4}, {3, 5}, {7, 9}, {8, 10}, {3, 9}}),
                         coords, {0, 5, 10}, name);
    }
    if (name == "four_bar") {
        const Mat coords = columns({{0, 1, 1, 0}, {0, 0, 1, 1}});
        return framework(one_based({{2, 3}, {3, 4}, {4, 1}}), coords, {0, 1}, name);
    }
    if (name == "k3_collinear") {
        const Mat coords = columns({{0, 1, 2}, {0, 0, 0}});
        return framework(one_based({{1, 2}, {2, 3}, {1, 3}}), coords, {}, name);
    }
    if (name == "three_prism_symmetric") {
        const Mat coords = columns({{1, -0.5, -0.5, 2, -1, -1}, {0, s3 / 2, -s3 / 2, 0, s3, -s3}});
        return framework(one_based({{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 5}, {3, 6}, {4, 5}, {4, 6}, {5, 6}}),
                         coords, {}, name);
    }
    if (name == "disk_packing_4") {
        PackingSpec spec;
        spec.radius = 1.0;
        spec.centers = columns({{0, 7.0 / 4, 7.0 / 2, 7.0 / 2 + std::sqrt(2.0)}, {0, -std::sqrt(15.0 / 16), 0,
                                                                               std::sqrt(2.0)}});
        return sphere_packing(spec, {0}, name);
    }
    if (name == "octahedral_volume") {
        const Mat coords = columns({{0, 3, 0, 1, 1, 0.5}, {0, 0, 3, 1, 0.5, 1}});
        return volume_hypergraph(one_based_lists({{1, 3, 6}, {1, 2, 5}, {2, 3, 4}, {1, 5, 6}, {6, 4, 5}}), coords,
                                 {3, 4, 5}, name);
    }
    if (name == "cube_polytope") {
        return polytope(cube_spec(), {}, name);
    }
    if (name == "pentagon_body_hinge") {
        Mat coords(3, 6);
        coords.col(0) << 0, 0, 1;
        for (int j = 1; j <= 5; ++j) {
            const double angle = 2.0 * std::numbers::pi * j / 5.0;
            coords.col(j) << std::cos(angle), std::sin(angle), 0;
        }
        return body_hinge(one_based_lists({{1, 2, 3}, {1, 3, 4}, {1, 4, 5}, {1, 5, 6}, {1, 6, 2}}), coords, name);
    }
    if (name == "cube_body_bar") {
        const Mat coords = columns({{0, 1, 1, 0, 0, 1, 1, 0}, {0, 0, 1, 1, 0, 0, 1, 1}, {0, 0, 0, 0, 1, 1, 1, 1}});
        return body_bar(one_based({{1, 5}, {2, 6}, {3, 7}, {4, 8}}),
                        one_based_lists({{1, 2, 3, 4}, {5, 6, 7, 8}}), coords, name);
    }
    std::ostringstream os;
    os << "unknown system '" << name << "'; available:";
    for (const auto& e : catalog_entries()) {
        os << ' ' << e.name;
    }
    throw InputError(os.str());
}

}  // namespace motionforge
