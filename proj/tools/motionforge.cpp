#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "motionforge/io.hpp"
#include "motionforge/systems_catalog.hpp"

using namespace motionforge;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kTruncated = 3;
constexpr int kSemanticError = 4;

struct Options {
    std::string builtin;
    std::string input;
    std::string output;
    std::string csv;
    std::string trajectory;
    int steps = 30;
    double step_size = 0.01;
    std::string flex = "auto";
    std::uint64_t seed = 0;
    int restarts = 64;
    std::string svg_size = "640x480";
    std::string edge;
    double gamma = 0.9;
    std::optional<std::string> frames;
    bool flexes = false;
    TrackerConfig tracker;
};

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("motionforge");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("MOTIONFORGE_LOG")) {
        const std::string level = env;
        if (level == "error") {
            spdlog::set_level(spdlog::level::err);
        } else if (level == "info") {
            spdlog::set_level(spdlog::level::info);
        } else if (level == "debug") {
            spdlog::set_level(spdlog::level::debug);
        }
    }
}

void emit(const std::string& path, const std::string& contents)
{
    if (path.empty() || path == "-") {
        std::cout << contents;
    } else {
        io::write_file(path, contents);
    }
}

ConstraintSystem load(const Options& o)
{
    if (!o.builtin.empty() && !o.input.empty()) {
        throw InputError("give either --builtin or --input, not both");
    }
    if (!o.builtin.empty()) {
        return builtin(o.builtin);
    }
    if (!o.input.empty()) {
        return io::load_system(o.input);
    }
    throw InputError("a system is required (--builtin NAME or --input FILE)");
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw InputError(what + ": cannot parse '" + item + "'");
        }
    }
    return out;
}

std::vector<std::size_t> parse_indices(const std::string& text, const std::string& what)
{
    std::vector<std::size_t> out;
    for (double v : parse_numbers(text, what)) {
        if (v < 0 || v != static_cast<double>(static_cast<long>(v))) {
            throw InputError(what + ": expected non-negative integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::pair<int, int> parse_size(const std::string& text)
{
    const auto x = text.find('x');
    try {
        if (x != std::string::npos) {
            const int w = std::stoi(text.substr(0, x));
            const int h = std::stoi(text.substr(x + 1));
            if (w > 0 && h > 0) {
                return {w, h};
            }
        }
    } catch (const std::exception&) {
    }
    throw InputError("--svg-size: expected WxH, got '" + text + "'");
}

void add_system_flags(CLI::App* cmd, Options& o)
{
    cmd->add_option("--builtin", o.builtin, "catalog system name");
    cmd->add_option("--input", o.input, "system JSON file");
    cmd->add_option("--output", o.output, "output file (stdout when omitted)");
}

void add_tracker_flags(CLI::App* cmd, Options& o)
{
    TrackerConfig& t = o.tracker;
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--corrector-tol", t.corrector_tol, "corrector residual tolerance");
    cmd->add_option("--rank-tol", t.rank_tol, "relative singular value cutoff");
    cmd->add_option("--max-newton-iters", t.max_newton_iters);
    cmd->add_option("--armijo-shrink", t.armijo_shrink);
    cmd->add_option("--armijo-slope", t.armijo_slope);
    cmd->add_option("--t-step-init", t.t_step_init);
    cmd->add_option("--t-step-min", t.t_step_min);
    cmd->add_option("--t-step-grow", t.t_step_grow);
    cmd->add_option("--t-step-shrink", t.t_step_shrink);
    cmd->add_option("--max-corrector-failures", t.max_corrector_failures);
    cmd->add_option("--singular-tol", t.singular_tol, "relative singular value level flagged as singular");
}

int cmd_analyze(const Options& o)
{
    const ConstraintSystem sys = load(o);
    const RigidityReport rep = analyze(sys, o.tracker.rank_tol);
    const SecondOrderVerdict verdict = second_order_verdict(sys, rep, o.restarts, o.seed);
    emit(o.output, io::report_to_json(sys, rep, verdict).dump(2) + "\n");
    return kOk;
}

int cmd_deform(const Options& o)
{
    o.tracker.validate();
    const ConstraintSystem sys = load(o);
    const RigidityReport rep = analyze(sys, o.tracker.rank_tol);
    if (rep.nontrivial_dim() == 0) {
        spdlog::error("no nontrivial flex: the system is infinitesimally rigid");
        return kSemanticError;
    }
    FlexChoice flex;
    if (o.flex == "auto") {
        auto found = find_unblocked_flex(sys, rep, o.restarts, o.seed);
        if (!found) {
            spdlog::error("no unblocked nontrivial flex found in {} restarts", o.restarts);
            return kSemanticError;
        }
        flex = *found;
    } else {
        const auto c = parse_numbers(o.flex, "--flex");
        flex = select_flex(rep, Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size())));
    }
    ContactHook hook;
    if (auto packing = packing_of(sys)) {
        hook = sticky_hook(*packing, o.tracker);
    }
    const DeformationPath path = track_path(sys, flex, o.steps, o.step_size, o.tracker, o.seed, hook);
    const io::Json j = io::trajectory_to_json(sys, path);
    emit(o.output, j.dump(2) + "\n");
    if (!o.csv.empty()) {
        io::write_file(o.csv, io::trajectory_csv(io::trajectory_from_json(j)));
    }
    if (!path.complete) {
        spdlog::error("path truncated after {} frames: {}", path.realizations.size(), path.error);
        return kTruncated;
    }
    return kOk;
}

int cmd_contract(const Options& o)
{
    o.tracker.validate();
    const ConstraintSystem sys = load(o);
    const auto e = parse_indices(o.edge, "--edge");
    if (e.size() != 2 || e[0] < 1 || e[1] < 1) {
        throw InputError("--edge: expected two 1-based vertex indices u,v");
    }
    const DeformationPath path = edge_contraction_path(sys, {e[0] - 1, e[1] - 1}, o.gamma, o.steps, o.tracker);
    const io::Json j = io::trajectory_to_json(sys, path);
    emit(o.output, j.dump(2) + "\n");
    if (!o.csv.empty()) {
        io::write_file(o.csv, io::trajectory_csv(io::trajectory_from_json(j)));
    }
    if (!path.complete) {
        spdlog::error("contraction truncated: {}", path.error);
        return kTruncated;
    }
    return kOk;
}

int cmd_project(const Options& o)
{
    const std::string file = !o.trajectory.empty() ? o.trajectory : o.input;
    if (file.empty()) {
        throw InputError("a trajectory file is required (--trajectory FILE)");
    }
    const io::Trajectory t = io::load_trajectory(file);
    emit(o.output, io::projection_csv(t, o.seed));
    return kOk;
}

std::string frame_path(const std::string& output, std::size_t frame, bool several)
{
    if (!several) {
        return output;
    }
    const auto dot = output.rfind('.');
    const std::string stem = dot == std::string::npos ? output : output.substr(0, dot);
    const std::string ext = dot == std::string::npos ? ".svg" : output.substr(dot);
    return stem + "_frame" + std::to_string(frame) + ext;
}

int cmd_render(const Options& o)
{
    io::RenderOptions ro;
    std::tie(ro.width, ro.height) = parse_size(o.svg_size);
    ro.draw_flexes = o.flexes;
    const std::vector<std::size_t> frames =
        o.frames ? (o.frames->empty() ? std::vector<std::size_t>{} : parse_indices(*o.frames, "--frames"))
                 : std::vector<std::size_t>{0};
    if (frames.empty()) {
        return kOk;
    }
    if (frames.size() > 1 && (o.output.empty() || o.output == "-")) {
        throw InputError("several frames need --output");
    }
    if (!o.trajectory.empty()) {
        const io::Trajectory t = io::load_trajectory(o.trajectory);
        const ConstraintSystem sys = io::system_from_json(t.system);
        for (std::size_t f : frames) {
            if (f >= t.frames.size()) {
                throw InputError("--frames: frame " + std::to_string(f) + " out of range");
            }
            std::optional<Vec> flex;
            if (o.flexes && f < t.tangents.size()) {
                flex = t.tangents[f];
            }
            emit(frame_path(o.output, f, frames.size() > 1), io::render_svg(sys, t.frames[f], flex, ro));
        }
        return kOk;
    }
    const ConstraintSystem sys = load(o);
    for (std::size_t f : frames) {
        if (f != 0) {
            throw InputError("--frames: a system has frame 0 only");
        }
    }
    std::optional<Vec> flex;
    if (o.flexes) {
        const RigidityReport rep = analyze(sys, o.tracker.rank_tol);
        if (rep.nontrivial_dim() > 0) {
            flex = rep.nontrivial_flex_basis.col(0);
        }
    }
    emit(o.output, io::render_svg(sys, sys.realization(), flex, ro));
    return kOk;
}

int cmd_catalog(const Options& o, const std::string& show)
{
    if (show.empty()) {
        std::ostringstream os;
        for (const auto& e : catalog_entries()) {
            os << e.name << "\t" << e.description << "\n";
        }
        emit(o.output, os.str());
        return kOk;
    }
    emit(o.output, io::system_to_json(builtin(show)).dump(2) + "\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    setup_logging();
    CLI::App app{"motionforge: rigidity analysis and continuous motions of geometric constraint systems"};
    app.require_subcommand(1);
    Options o;

    auto* analyze_cmd = app.add_subcommand("analyze", "rank, flexes, stresses and second-order verdict");
    add_system_flags(analyze_cmd, o);
    add_tracker_flags(analyze_cmd, o);
    analyze_cmd->add_option("--restarts", o.restarts, "restarts of the unblocked-flex search");

    auto* deform_cmd = app.add_subcommand("deform", "track a continuous motion");
    add_system_flags(deform_cmd, o);
    add_tracker_flags(deform_cmd, o);
    deform_cmd->add_option("--steps", o.steps, "number of steps");
    deform_cmd->add_option("--step-size", o.step_size, "initial step size");
    deform_cmd->add_option("--flex", o.flex, "auto or comma-separated flex coefficients");
    deform_cmd->add_option("--restarts", o.restarts, "restarts of the unblocked-flex search");
    deform_cmd->add_option("--csv", o.csv, "also write the trajectory as CSV");

    auto* contract_cmd = app.add_subcommand("contract", "continuation shrinking one bar");
    add_system_flags(contract_cmd, o);
    add_tracker_flags(contract_cmd, o);
    contract_cmd->add_option("--edge", o.edge, "bar u,v (1-based)")->required();
    contract_cmd->add_option("--gamma", o.gamma, "final length fraction in (0, 1]");
    contract_cmd->add_option("--steps", o.steps, "number of continuation steps");
    contract_cmd->add_option("--csv", o.csv, "also write the trajectory as CSV");

    auto* project_cmd = app.add_subcommand("project", "seeded random 2D projection of a trajectory");
    project_cmd->add_option("--trajectory,--input", o.trajectory, "trajectory JSON file");
    project_cmd->add_option("--output", o.output, "CSV output (stdout when omitted)");
    project_cmd->add_option("--seed", o.seed, "random seed");

    auto* render_cmd = app.add_subcommand("render", "SVG drawing of a system or trajectory frames");
    add_system_flags(render_cmd, o);
    render_cmd->add_option("--trajectory", o.trajectory, "trajectory JSON file");
    render_cmd->add_option("--frames", o.frames, "comma-separated 0-based frame indices");
    render_cmd->add_option("--svg-size", o.svg_size, "WxH in pixels");
    render_cmd->add_option("--seed", o.seed, "random seed (unused, accepted for uniformity)");
    render_cmd->add_option("--rank-tol", o.tracker.rank_tol, "relative singular value cutoff");
    render_cmd->add_flag("--flexes", o.flexes, "draw flex arrows");

    auto* catalog_cmd = app.add_subcommand("catalog", "list or show built-in systems");
    std::string show;
    catalog_cmd->add_option("--output", o.output, "output file (stdout when omitted)");
    catalog_cmd->add_option("--seed", o.seed, "random seed (unused, accepted for uniformity)");
    auto* list_cmd = catalog_cmd->add_subcommand("list", "names and descriptions");
    auto* show_cmd = catalog_cmd->add_subcommand("show", "system JSON of one entry");
    show_cmd->add_option("name", show, "catalog name")->required();
    catalog_cmd->require_subcommand(1);
    (void)list_cmd;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (analyze_cmd->parsed()) {
            return cmd_analyze(o);
        }
        if (deform_cmd->parsed()) {
            return cmd_deform(o);
        }
        if (contract_cmd->parsed()) {
            return cmd_contract(o);
        }
        if (project_cmd->parsed()) {
            return cmd_project(o);
        }
        if (render_cmd->parsed()) {
            return cmd_render(o);
        }
        if (catalog_cmd->parsed()) {
            return cmd_catalog(o, show);
        }
    } catch (const InputError& e) {
        spdlog::error("{}", e.what());
        return kInputError;
    } catch (const DimensionMismatch& e) {
        spdlog::error("{}", e.what());
        return kInputError;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kSemanticError;
    }
    return kInputError;
}
