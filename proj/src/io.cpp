#include "motionforge/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "motionforge/systems_catalog.hpp"

namespace motionforge::io {

namespace {

std::string num(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string fixed(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", value);
    std::string s = buf;
    if (s == "-0.000") {
        s = "0.000";
    }
    return s;
}

[[noreturn]] void field_error(const std::string& field, const std::string& what)
{
    throw InputError(field + ": " + what);
}

const Json& require(const Json& j, const char* key, const std::string& where)
{
    if (!j.is_object()) {
        field_error(where, "expected an object");
    }
    auto it = j.find(key);
    if (it == j.end()) {
        field_error(where.empty() ? key : where + "." + key, "missing field");
    }
    return *it;
}

double as_double(const Json& j, const std::string& field)
{
    if (!j.is_number()) {
        field_error(field, "expected a number");
    }
    const double value = j.get<double>();
    if (!std::isfinite(value)) {
        field_error(field, "expected a finite number");
    }
    return value;
}

long as_int(const Json& j, const std::string& field)
{
    if (!j.is_number_integer()) {
        field_error(field, "expected an integer");
    }
    return j.get<long>();
}

// 1-based index in a file to 0-based.
std::size_t as_index(const Json& j, const std::string& field, std::size_t limit)
{
    const long i = as_int(j, field);
    if (i < 1 || static_cast<std::size_t>(i) > limit) {
        field_error(field, "index " + std::to_string(i) + " out of range 1.." + std::to_string(limit));
    }
    return static_cast<std::size_t>(i - 1);
}

Vec as_vector(const Json& j, const std::string& field)
{
    if (!j.is_array()) {
        field_error(field, "expected an array of numbers");
    }
    Vec out(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = as_double(j[i], field + "[" + std::to_string(i) + "]");
    }
    return out;
}

std::vector<std::size_t> as_indices(const Json& j, const std::string& field, std::size_t limit)
{
    if (!j.is_array()) {
        field_error(field, "expected an array of indices");
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_index(j[i], field + "[" + std::to_string(i) + "]", limit));
    }
    return out;
}

Json vec_json(const Vec& v)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v(i));
    }
    return a;
}

Json indices_json(const std::vector<std::size_t>& idx)
{
    Json a = Json::array();
    for (std::size_t i : idx) {
        a.push_back(i + 1);
    }
    return a;
}

TrivialKind trivial_kind_from(const std::string& s, const std::string& field)
{
    if (s == "euclidean") {
        return TrivialKind::Euclidean;
    }
    if (s == "volume_preserving") {
        return TrivialKind::VolumePreserving;
    }
    if (s == "pins_only") {
        return TrivialKind::PinsOnly;
    }
    field_error(field, "unknown trivial kind '" + s + "'");
}

QuadraticConstraint constraint_from_json(const Json& c, const std::string& where, int dim, std::size_t n)
{
    const Json& type = require(c, "type", where);
    if (!type.is_string()) {
        field_error(where + ".type", "expected a string");
    }
    const std::string t = type.get<std::string>();
    auto idx = [&](const char* key) { return as_index(require(c, key, where), where + "." + key, n); };
    try {
        if (t == "distance") {
            const std::size_t u = idx("u");
            const std::size_t v = idx("v");
            double sq = 0.0;
            if (c.contains("squared_length")) {
                sq = as_double(c["squared_length"], where + ".squared_length");
            } else if (c.contains("length")) {
                const double L = as_double(c["length"], where + ".length");
                sq = L * L;
            } else {
                field_error(where, "distance needs 'length' or 'squared_length'");
            }
            return distance_constraint(dim, n, u, v, sq);
        }
        if (t == "planarity") {
            return planarity_constraint(dim, n, idx("normal"), idx("u"), idx("ref"));
        }
        if (t == "unit_norm") {
            return unit_norm_constraint(dim, n, idx("normal"));
        }
        if (t == "volume2d") {
            if (dim != 2) {
                field_error(where, "volume2d needs dim 2");
            }
            const auto vs = as_indices(require(c, "vertices", where), where + ".vertices", n);
            if (vs.size() != 3) {
                field_error(where + ".vertices", "expected 3 vertices");
            }
            return volume2d_constraint(n, vs[0], vs[1], vs[2], as_double(require(c, "target", where),
                                                                         where + ".target"));
        }
        if (t == "generic") {
            const std::size_t N = static_cast<std::size_t>(dim) * n;
            std::vector<Eigen::Triplet<double>> trip;
            if (c.contains("quad")) {
                const Json& q = c["quad"];
                if (!q.is_array()) {
                    field_error(where + ".quad", "expected [[i, j, value], …]");
                }
                for (std::size_t e = 0; e < q.size(); ++e) {
                    const std::string f = where + ".quad[" + std::to_string(e) + "]";
                    if (!q[e].is_array() || q[e].size() != 3) {
                        field_error(f, "expected [i, j, value]");
                    }
                    const auto i = static_cast<Eigen::Index>(as_index(q[e][0], f + "[0]", N));
                    const auto k = static_cast<Eigen::Index>(as_index(q[e][1], f + "[1]", N));
                    const double value = as_double(q[e][2], f + "[2]");
                    trip.emplace_back(i, k, value);
                    if (i != k) {
                        trip.emplace_back(k, i, value);
                    }
                }
            }
            SparseMat quad(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
            quad.setFromTriplets(trip.begin(), trip.end());
            Vec lin = Vec::Zero(static_cast<Eigen::Index>(N));
            if (c.contains("lin")) {
                const Json& l = c["lin"];
                if (!l.is_array()) {
                    field_error(where + ".lin", "expected [[i, value], …]");
                }
                for (std::size_t e = 0; e < l.size(); ++e) {
                    const std::string f = where + ".lin[" + std::to_string(e) + "]";
                    if (!l[e].is_array() || l[e].size() != 2) {
                        field_error(f, "expected [i, value]");
                    }
                    lin(static_cast<Eigen::Index>(as_index(l[e][0], f + "[0]", N))) += as_double(l[e][1], f + "[1]");
                }
            }
            const double k0 = c.contains("const") ? as_double(c["const"], where + ".const") : 0.0;
            return generic_constraint(quad, lin, k0);
        }
    } catch (const InvalidSystem& e) {
        field_error(where, e.what());
    }
    field_error(where + ".type", "unknown constraint type '" + t + "'");
}

Json constraint_to_json(const QuadraticConstraint& c)
{
    Json j;
    switch (c.kind) {
    case ConstraintKind::Distance:
        j["type"] = "distance";
        j["u"] = c.vertices[0] + 1;
        j["v"] = c.vertices[1] + 1;
        j["squared_length"] = -c.const_term;
        return j;
    case ConstraintKind::Planarity:
        j["type"] = "planarity";
        j["normal"] = c.vertices[0] + 1;
        j["u"] = c.vertices[1] + 1;
        j["ref"] = c.vertices[2] + 1;
        return j;
    case ConstraintKind::UnitNorm:
        j["type"] = "unit_norm";
        j["normal"] = c.vertices[0] + 1;
        return j;
    case ConstraintKind::Volume2D:
        j["type"] = "volume2d";
        j["vertices"] = indices_json(c.vertices);
        j["target"] = -c.const_term;
        return j;
    case ConstraintKind::Pin:
    case ConstraintKind::Generic:
        break;
    }
    j["type"] = "generic";
    Json quad = Json::array();
    for (Eigen::Index col = 0; col < c.quad.outerSize(); ++col) {
        for (SparseMat::InnerIterator it(c.quad, col); it; ++it) {
            if (it.row() <= it.col() && it.value() != 0.0) {
                quad.push_back(Json::array({it.row() + 1, it.col() + 1, it.value()}));
            }
        }
    }
    Json lin = Json::array();
    for (Eigen::Index i = 0; i < c.lin.size(); ++i) {
        if (c.lin(i) != 0.0) {
            lin.push_back(Json::array({i + 1, c.lin(i)}));
        }
    }
    j["quad"] = quad;
    j["lin"] = lin;
    j["const"] = c.const_term;
    return j;
}

std::string line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::map<std::size_t, std::vector<EventKind>> events_by_frame(const std::vector<PathEvent>& events)
{
    std::map<std::size_t, std::vector<EventKind>> out;
    for (const auto& e : events) {
        out[e.step].push_back(e.kind);
    }
    return out;
}

std::string event_flag(const std::map<std::size_t, std::vector<EventKind>>& by_frame, std::size_t frame)
{
    auto it = by_frame.find(frame);
    if (it == by_frame.end()) {
        return "";
    }
    std::string s;
    for (EventKind k : it->second) {
        if (!s.empty()) {
            s += '|';
        }
        s += to_string(k);
    }
    return s;
}

EventKind event_kind_from(const std::string& s, const std::string& field)
{
    for (EventKind k : {EventKind::RankDrop, EventKind::QuadraticEscape, EventKind::CuspFallback,
                        EventKind::StickyContact}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    field_error(field, "unknown event kind '" + s + "'");
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(source + ": malformed JSON at " + line_column(text, e.byte == 0 ? 0 : e.byte - 1));
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    out << contents;
    if (!out) {
        throw InputError("write to '" + path + "' failed");
    }
}

ConstraintSystem system_from_json(const Json& j)
{
    if (!j.is_object()) {
        field_error("(root)", "expected an object");
    }
    const long dim_raw = as_int(require(j, "dim", ""), "dim");
    if (dim_raw < 1) {
        field_error("dim", "must be positive");
    }
    const int dim = static_cast<int>(dim_raw);
    const long n_raw = as_int(require(j, "vertices", ""), "vertices");
    if (n_raw < 1) {
        field_error("vertices", "must be positive");
    }
    const auto n = static_cast<std::size_t>(n_raw);
    const Vec x = as_vector(require(j, "realization", ""), "realization");
    if (static_cast<std::size_t>(x.size()) != n * static_cast<std::size_t>(dim)) {
        field_error("realization", "expected " + std::to_string(n * static_cast<std::size_t>(dim)) +
                                       " coordinates, got " + std::to_string(x.size()));
    }
    std::vector<std::size_t> pinned;
    if (j.contains("pinned")) {
        pinned = as_indices(j["pinned"], "pinned", n);
    }
    const Json& cons = require(j, "constraints", "");
    if (!cons.is_array()) {
        field_error("constraints", "expected an array");
    }
    std::vector<QuadraticConstraint> constraints;
    for (std::size_t i = 0; i < cons.size(); ++i) {
        constraints.push_back(constraint_from_json(cons[i], "constraints[" + std::to_string(i) + "]", dim, n));
    }
    TrivialKind kind = TrivialKind::Euclidean;
    if (j.contains("trivial_kind")) {
        if (!j["trivial_kind"].is_string()) {
            field_error("trivial_kind", "expected a string");
        }
        kind = trivial_kind_from(j["trivial_kind"].get<std::string>(), "trivial_kind");
    }
    SystemOptions opts;
    if (j.contains("normals")) {
        opts.normal_vertices = as_indices(j["normals"], "normals", n);
    }
    if (j.contains("radius")) {
        opts.packing_radius = as_double(j["radius"], "radius");
    }
    if (j.contains("name")) {
        if (!j["name"].is_string()) {
            field_error("name", "expected a string");
        }
        opts.name = j["name"].get<std::string>();
    }
    try {
        return ConstraintSystem(dim, n, x, std::move(constraints), std::move(pinned), kind, opts);
    } catch (const InvalidSystem& e) {
        throw InputError(std::string("system: ") + e.what());
    }
}

Json system_to_json(const ConstraintSystem& system)
{
    Json j;
    if (!system.options().name.empty()) {
        j["name"] = system.options().name;
    }
    j["dim"] = system.dim();
    j["vertices"] = system.n_vertices();
    j["realization"] = vec_json(system.realization());
    j["pinned"] = indices_json(system.pinned());
    Json cons = Json::array();
    for (std::size_t i = 0; i < system.n_free_constraints(); ++i) {
        cons.push_back(constraint_to_json(system.constraints()[i]));
    }
    j["constraints"] = cons;
    j["trivial_kind"] = to_string(system.trivial_kind());
    if (!system.options().normal_vertices.empty()) {
        j["normals"] = indices_json(system.options().normal_vertices);
    }
    if (system.options().packing_radius) {
        j["radius"] = *system.options().packing_radius;
    }
    return j;
}

ConstraintSystem load_system(const std::string& path)
{
    return system_from_json(parse_json(read_file(path), path));
}

void save_system(const std::string& path, const ConstraintSystem& system)
{
    write_file(path, system_to_json(system).dump(2) + "\n");
}

Json report_to_json(const ConstraintSystem& system, const RigidityReport& report, const SecondOrderVerdict& verdict)
{
    Json j;
    if (!system.options().name.empty()) {
        j["system"] = system.options().name;
    }
    j["dim"] = system.dim();
    j["vertices"] = system.n_vertices();
    j["coordinates"] = system.ambient_dim();
    j["constraints"] = system.n_constraints();
    j["rank"] = report.rank;
    j["trivial_dim"] = report.trivial_dim;
    j["flex_dim"] = report.flex_dim();
    j["nontrivial_flex_dim"] = report.nontrivial_dim();
    j["stress_dim"] = report.stress_dim();
    j["affine_span_dim"] = report.affine_span_dim;
    j["inf_rigid"] = report.inf_rigid;
    j["second_order"] = to_string(verdict.status);
    if (verdict.witness_flex) {
        j["witness_flex"] = vec_json(*verdict.witness_flex);
    }
    return j;
}

Json trajectory_to_json(const ConstraintSystem& system, const DeformationPath& path)
{
    Json j;
    j["system"] = system_to_json(system);
    if (path.final_system && path.final_system->n_constraints() != system.n_constraints()) {
        j["final_system"] = system_to_json(*path.final_system);
    }
    Json frames = Json::array();
    for (const Vec& f : path.realizations) {
        frames.push_back(vec_json(f));
    }
    j["frames"] = frames;
    Json tangents = Json::array();
    for (const Vec& t : path.tangents) {
        tangents.push_back(vec_json(t));
    }
    j["tangents"] = tangents;
    j["step_sizes"] = path.step_sizes;
    j["curve_lengths"] = path.curve_lengths;
    Json events = Json::array();
    for (const auto& e : path.events) {
        events.push_back({{"step", e.step}, {"kind", to_string(e.kind)}});
    }
    j["events"] = events;
    j["residuals"] = path.residual_log;
    j["status"] = path.complete ? "complete" : "truncated";
    if (!path.error.empty()) {
        j["error"] = path.error;
    }
    return j;
}

Trajectory trajectory_from_json(const Json& j)
{
    Trajectory t;
    t.system = require(j, "system", "");
    const Json& frames = require(j, "frames", "");
    if (!frames.is_array()) {
        field_error("frames", "expected an array");
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
        t.frames.push_back(as_vector(frames[i], "frames[" + std::to_string(i) + "]"));
        if (t.frames.back().size() != t.frames.front().size()) {
            field_error("frames[" + std::to_string(i) + "]", "frame length differs from frame 1");
        }
    }
    if (j.contains("tangents")) {
        for (std::size_t i = 0; i < j["tangents"].size(); ++i) {
            t.tangents.push_back(as_vector(j["tangents"][i], "tangents[" + std::to_string(i) + "]"));
        }
    }
    auto scalars = [&](const char* key, std::vector<double>& out) {
        if (j.contains(key)) {
            const Vec v = as_vector(j[key], key);
            out.assign(v.data(), v.data() + v.size());
        }
    };
    scalars("step_sizes", t.step_sizes);
    scalars("curve_lengths", t.curve_lengths);
    scalars("residuals", t.residuals);
    if (j.contains("events")) {
        for (std::size_t i = 0; i < j["events"].size(); ++i) {
            const std::string f = "events[" + std::to_string(i) + "]";
            const Json& e = j["events"][i];
            const long step = as_int(require(e, "step", f), f + ".step");
            const Json& kind = require(e, "kind", f);
            if (!kind.is_string() || step < 0) {
                field_error(f, "expected {step, kind}");
            }
            t.events.push_back({static_cast<std::size_t>(step), event_kind_from(kind.get<std::string>(), f + ".kind")});
        }
    }
    if (j.contains("status")) {
        t.complete = j["status"] == "complete";
    }
    if (j.contains("error") && j["error"].is_string()) {
        t.error = j["error"].get<std::string>();
    }
    return t;
}

Trajectory load_trajectory(const std::string& path)
{
    return trajectory_from_json(parse_json(read_file(path), path));
}

std::string trajectory_csv(const Trajectory& trajectory)
{
    std::ostringstream os;
    const auto by_frame = events_by_frame(trajectory.events);
    const int dim = trajectory.system.value("dim", 1);
    if (!trajectory.frames.empty()) {
        const auto N = trajectory.frames.front().size();
        for (Eigen::Index i = 0; i < N; ++i) {
            os << "x_" << i / dim + 1 << "_" << i % dim + 1 << ',';
        }
    }
    os << "residual,event\n";
    for (std::size_t f = 0; f < trajectory.frames.size(); ++f) {
        const Vec& x = trajectory.frames[f];
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            os << num(x(i)) << ',';
        }
        const double res = f < trajectory.residuals.size() ? trajectory.residuals[f] : 0.0;
        os << num(res) << ',' << event_flag(by_frame, f) << '\n';
    }
    return os.str();
}

Mat projection_matrix(std::size_t ambient, std::uint64_t seed)
{
    if (ambient < 2) {
        throw PreconditionError("projection needs at least two coordinates");
    }
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat G(static_cast<Eigen::Index>(ambient), 2);
    for (Eigen::Index j = 0; j < 2; ++j) {
        for (Eigen::Index i = 0; i < G.rows(); ++i) {
            G(i, j) = normal(gen);
        }
    }
    Eigen::HouseholderQR<Mat> qr(G);
    const Mat Q = qr.householderQ() * Mat::Identity(G.rows(), 2);
    return Q.transpose();
}

std::string projection_csv(const Trajectory& trajectory, std::uint64_t seed)
{
    if (trajectory.frames.empty()) {
        throw PreconditionError("trajectory has no frames");
    }
    const Mat P = projection_matrix(static_cast<std::size_t>(trajectory.frames.front().size()), seed);
    const auto by_frame = events_by_frame(trajectory.events);
    std::ostringstream os;
    os << "frame,u,v,event\n";
    for (std::size_t f = 0; f < trajectory.frames.size(); ++f) {
        const Vec y = P * trajectory.frames[f];
        os << f << ',' << num(y(0)) << ',' << num(y(1)) << ',' << event_flag(by_frame, f) << '\n';
    }
    return os.str();
}

std::string render_svg(const ConstraintSystem& system, const Vec& x, const std::optional<Vec>& flex,
                       const RenderOptions& options)
{
    const int d = system.dim();
    if (d != 2 && d != 3) {
        throw PreconditionError("rendering supports dimension 2 or 3 only");
    }
    if (static_cast<std::size_t>(x.size()) != system.ambient_dim()) {
        throw DimensionMismatch("frame length does not match the system");
    }
    if (options.width <= 0 || options.height <= 0) {
        throw InputError("svg size must be positive");
    }
    Mat view(2, d);
    if (d == 2) {
        view.setIdentity();
    } else {
        view << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0, -1.0 / std::sqrt(6.0), -1.0 / std::sqrt(6.0),
            2.0 / std::sqrt(6.0);
    }
    const double radius = system.options().packing_radius.value_or(0.0);
    std::vector<std::size_t> drawn;
    for (std::size_t j = 0; j < system.n_vertices(); ++j) {
        if (!system.is_normal_vertex(j)) {
            drawn.push_back(j);
        }
    }
    std::vector<Eigen::Vector2d> pos(system.n_vertices(), Eigen::Vector2d::Zero());
    std::vector<Eigen::Vector2d> tip(system.n_vertices(), Eigen::Vector2d::Zero());
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    for (std::size_t j : drawn) {
        pos[j] = view * vertex_position(x, d, j);
        lo = lo.cwiseMin(pos[j] - Eigen::Vector2d::Constant(radius));
        hi = hi.cwiseMax(pos[j] + Eigen::Vector2d::Constant(radius));
    }
    if (flex) {
        double max_disp = 0.0;
        for (std::size_t j : drawn) {
            max_disp = std::max(max_disp, (view * vertex_position(*flex, d, j)).norm());
        }
        const double extent = std::max((hi - lo).maxCoeff(), 1e-9);
        const double scale = max_disp > 0.0 ? 0.25 * extent / max_disp : 0.0;
        for (std::size_t j : drawn) {
            tip[j] = pos[j] + scale * (view * vertex_position(*flex, d, j));
            lo = lo.cwiseMin(tip[j]);
            hi = hi.cwiseMax(tip[j]);
        }
    }
    const double margin = 20.0;
    const Eigen::Vector2d span = (hi - lo).cwiseMax(1e-9);
    const double s = std::min((options.width - 2 * margin) / span(0), (options.height - 2 * margin) / span(1));
    auto px = [&](const Eigen::Vector2d& p) {
        return Eigen::Vector2d(margin + (p(0) - lo(0)) * s, options.height - margin - (p(1) - lo(1)) * s);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
       << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\">\n";
    os << "<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"4\" "
          "orient=\"auto\"><path d=\"M0,0 L8,4 L0,8 z\" fill=\"coral\"/></marker></defs>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < system.n_free_constraints(); ++i) {
        const auto& c = system.constraints()[i];
        if (c.kind != ConstraintKind::Distance) {
            continue;
        }
        const Eigen::Vector2d a = px(pos[c.vertices[0]]);
        const Eigen::Vector2d b = px(pos[c.vertices[1]]);
        os << "<line class=\"edge\" x1=\"" << fixed(a(0)) << "\" y1=\"" << fixed(a(1)) << "\" x2=\"" << fixed(b(0))
           << "\" y2=\"" << fixed(b(1)) << "\" stroke=\"teal\" stroke-width=\"2\"/>\n";
    }
    const std::set<std::size_t> pinned(system.pinned().begin(), system.pinned().end());
    for (std::size_t j : drawn) {
        const Eigen::Vector2d c = px(pos[j]);
        const double r = radius > 0.0 ? radius * s : 4.0;
        os << "<circle class=\"vertex\" cx=\"" << fixed(c(0)) << "\" cy=\"" << fixed(c(1)) << "\" r=\"" << fixed(r)
           << "\" fill=\"" << (radius > 0.0 ? "none" : (pinned.count(j) ? "black" : "gray"))
           << "\" stroke=\"black\"/>\n";
    }
    if (flex) {
        for (std::size_t j : drawn) {
            const Eigen::Vector2d a = px(pos[j]);
            const Eigen::Vector2d b = px(tip[j]);
            os << "<line class=\"flex\" x1=\"" << fixed(a(0)) << "\" y1=\"" << fixed(a(1)) << "\" x2=\""
               << fixed(b(0)) << "\" y2=\"" << fixed(b(1))
               << "\" stroke=\"coral\" stroke-width=\"2\" marker-end=\"url(#arrow)\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace motionforge::io
