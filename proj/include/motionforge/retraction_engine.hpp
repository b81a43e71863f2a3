#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "motionforge/constraint_model.hpp"

namespace motionforge {

struct TrackerConfig {
    double corrector_tol = 1e-10;
    int max_newton_iters = 50;
    double armijo_shrink = 0.5;
    double armijo_slope = 0.5;
    double t_step_init = 0.1;
    double t_step_min = 1e-6;
    double t_step_grow = 1.25;
    double t_step_shrink = 0.5;
    int max_corrector_failures = 40;
    double rank_tol = 1e-10;
    // Relative singular-value level below which a tracked point counts as rank deficient.
    double singular_tol = 1e-3;

    void validate() const;
};

struct LagrangeState {
    Vec x;
    Vec lambda;
};

struct CorrectorResult {
    LagrangeState state;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
    double contraction = 0.0;
};

struct RetractionResult {
    Vec endpoint;
    std::vector<Vec> polyline;
    double curve_length = 0.0;
    bool randomized = false;
    double final_residual = 0.0;
    int t_steps_used = 0;
};

struct RandomizedView {
    QuadraticMap map;
    Mat mix;
};

/** @brief Residual F(z) and, when requested, its Jacobian. */
using ResidualFunction = std::function<void(const Vec& z, Vec& F, Mat* J)>;

struct GaussNewtonResult {
    Vec z;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
    double contraction = 0.0;
};

/**
 * @brief Damped Gauss-Newton with minimum-norm steps and Armijo backtracking.
 *
 * With `want_contraction`, an iterate below `tol` is refined further while the last
 * residual ratio is at least 0.5 and a descent step still exists.
 */
GaussNewtonResult damped_gauss_newton(const ResidualFunction& fn, Vec z0, double tol, int max_iters,
                                      const TrackerConfig& config, bool want_contraction);

Vec lagrange_residual(const QuadraticMap& map, const LagrangeState& state, const Vec& u);
Vec lagrange_residual(const ConstraintSystem& system, const LagrangeState& state, const Vec& u);
Mat lagrange_jacobian(const QuadraticMap& map, const LagrangeState& state);

int stress_dimension(const QuadraticMap& map, const Vec& x, double rank_tol);

RandomizedView randomize(const ConstraintSystem& system, const Vec& p, std::uint64_t seed, double rank_tol = 1e-10);

CorrectorResult newton_correct(const QuadraticMap& map, LagrangeState state, const Vec& u,
                               const TrackerConfig& config);

// Multipliers solving J(x)ᵀλ = u − x in the least-squares sense.
Vec fit_multipliers(const QuadraticMap& map, const Vec& x, const Vec& u, double rank_tol);

// Critical point of the distance to u on the constraint set, started from x0.
CorrectorResult project_point(const QuadraticMap& map, const Vec& x0, const Vec& u, const TrackerConfig& config);

RetractionResult retract(const ConstraintSystem& system, const Vec& p, const Vec& v, double step_scale,
                         const TrackerConfig& config, std::uint64_t seed = 0);

}  // namespace motionforge
