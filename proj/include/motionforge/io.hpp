#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "motionforge/path_tracker.hpp"
#include "motionforge/rigidity_analysis.hpp"

namespace motionforge::io {

using Json = nlohmann::json;

// Vertex indices are 1-based in every file.
ConstraintSystem system_from_json(const Json& j);
Json system_to_json(const ConstraintSystem& system);

// Parses text; syntax errors report line and column.
Json parse_json(const std::string& text, const std::string& source);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

ConstraintSystem load_system(const std::string& path);
void save_system(const std::string& path, const ConstraintSystem& system);

Json report_to_json(const ConstraintSystem& system, const RigidityReport& report, const SecondOrderVerdict& verdict);

struct Trajectory {
    Json system;
    std::vector<Vec> frames;
    std::vector<Vec> tangents;
    std::vector<double> step_sizes;
    std::vector<double> curve_lengths;
    std::vector<PathEvent> events;
    std::vector<double> residuals;
    bool complete = true;
    std::string error;
};

Json trajectory_to_json(const ConstraintSystem& system, const DeformationPath& path);
Trajectory trajectory_from_json(const Json& j);
Trajectory load_trajectory(const std::string& path);

// One row per frame: coordinates, residual, event kinds joined by '|'.
std::string trajectory_csv(const Trajectory& trajectory);

// 2×N matrix with orthonormal rows from the QR factor of a seeded Gaussian N×2 matrix.
Mat projection_matrix(std::size_t ambient, std::uint64_t seed);

std::string projection_csv(const Trajectory& trajectory, std::uint64_t seed);

struct RenderOptions {
    int width = 640;
    int height = 480;
    bool draw_flexes = false;
};

/**
 * @brief SVG drawing of one frame: vertices as circles, distance constraints as segments.
 *
 * Polytope normal vertices are not drawn. 3D frames use a fixed orthographic view.
 * `flex`, when present, adds one arrow per drawn vertex.
 */
std::string render_svg(const ConstraintSystem& system, const Vec& x, const std::optional<Vec>& flex,
                       const RenderOptions& options);

}  // namespace motionforge::io
