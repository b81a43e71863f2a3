#include "motionforge/retraction_engine.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

namespace motionforge {

void TrackerConfig::validate() const
{
    const bool positive = corrector_tol > 0 && max_newton_iters > 0 && armijo_shrink > 0 && armijo_slope > 0 &&
                          t_step_init > 0 && t_step_min > 0 && t_step_grow > 0 && t_step_shrink > 0 &&
                          max_corrector_failures > 0 && rank_tol > 0 && singular_tol > 0;
    if (!positive) {
        throw InputError("tracker settings must be positive");
    }
    if (!(t_step_shrink < 1.0 && 1.0 < t_step_grow) || !(armijo_shrink < 1.0)) {
        throw InputError("tracker settings need shrink < 1 < grow");
    }
}

GaussNewtonResult damped_gauss_newton(const ResidualFunction& fn, Vec z0, double tol, int max_iters,
                                      const TrackerConfig& config, bool want_contraction)
{
    GaussNewtonResult out;
    out.z = std::move(z0);
    Vec F;
    Mat J;
    fn(out.z, F, &J);
    double nF = F.norm();
    double ratio = 0.0;
    int iters = 0;
    while (std::isfinite(nF)) {
        if (nF <= tol && (!want_contraction || iters == 0 || ratio < 0.5)) {
            break;
        }
        if (iters >= max_iters) {
            break;
        }
        const Vec step = -min_norm_solve(J, F, config.rank_tol);
        const double slope = F.dot(J * step) / nF;
        if (!(slope < 0.0)) {
            break;
        }
        double alpha = 1.0;
        bool accepted = false;
        Vec trial;
        Vec Ft;
        double nFt = 0.0;
        while (alpha >= 1e-8) {
            trial = out.z + alpha * step;
            fn(trial, Ft, nullptr);
            nFt = Ft.norm();
            if (nFt <= nF + config.armijo_slope * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= config.armijo_shrink;
        }
        if (!accepted) {
            break;
        }
        ratio = nFt / nF;
        out.z = trial;
        fn(out.z, F, &J);
        nF = F.norm();
        ++iters;
    }
    out.iterations = iters;
    out.residual = nF;
    out.contraction = ratio;
    out.converged = std::isfinite(nF) && nF <= tol;
    return out;
}

Vec lagrange_residual(const QuadraticMap& map, const LagrangeState& state, const Vec& u)
{
    const auto N = static_cast<Eigen::Index>(map.ambient_dim());
    const auto m = static_cast<Eigen::Index>(map.size());
    if (state.x.size() != N || u.size() != N || state.lambda.size() != m) {
        throw DimensionMismatch("lagrange_residual: inconsistent shapes");
    }
    Vec F(N + m);
    const Mat J = map.jacobian(state.x);
    F.head(N) = state.x - u + J.transpose() * state.lambda;
    F.tail(m) = map.evaluate(state.x);
    return F;
}

Vec lagrange_residual(const ConstraintSystem& system, const LagrangeState& state, const Vec& u)
{
    return lagrange_residual(system.map(), state, u);
}

Mat lagrange_jacobian(const QuadraticMap& map, const LagrangeState& state)
{
    const auto N = static_cast<Eigen::Index>(map.ambient_dim());
    const auto m = static_cast<Eigen::Index>(map.size());
    const Mat J = map.jacobian(state.x);
    Mat out = Mat::Zero(N + m, N + m);
    out.topLeftCorner(N, N) = Mat::Identity(N, N) + 2.0 * map.weighted_quad(state.lambda);
    out.topRightCorner(N, m) = J.transpose();
    out.bottomLeftCorner(m, N) = J;
    return out;
}

int stress_dimension(const QuadraticMap& map, const Vec& x, double rank_tol)
{
    const Mat J = map.jacobian(x);
    return static_cast<int>(J.rows()) - numerical_rank(J, rank_tol);
}

RandomizedView randomize(const ConstraintSystem& system, const Vec& p, std::uint64_t seed, double rank_tol)
{
    const Mat R = rigidity_matrix(system, p);
    const int m = static_cast<int>(R.rows());
    const int rank = numerical_rank(R, rank_tol);
    const int k = m - rank;
    if (k == 0) {
        throw RandomizationError("randomization not needed: no equilibrium stresses at the point");
    }
    const int rows = m - k;
    for (int attempt = 0; attempt < 5; ++attempt) {
        std::mt19937_64 gen(seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL);
        std::normal_distribution<double> normal(0.0, 1.0);
        Mat mix(rows, m);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < m; ++j) {
                mix(i, j) = normal(gen);
            }
        }
        const int mixed_rank = numerical_rank(mix * R, rank_tol);
        if (mixed_rank == rows) {
            return RandomizedView{system.map().mixed(mix), mix};
        }
        spdlog::debug("randomization attempt {} lost rank ({} < {})", attempt, mixed_rank, rows);
    }
    throw RandomizationError("randomization failed to remove stresses after 5 attempts");
}

CorrectorResult newton_correct(const QuadraticMap& map, LagrangeState state, const Vec& u,
                               const TrackerConfig& config)
{
    const auto N = static_cast<Eigen::Index>(map.ambient_dim());
    const auto m = static_cast<Eigen::Index>(map.size());
    if (state.x.size() != N || state.lambda.size() != m || u.size() != N) {
        throw DimensionMismatch("newton_correct: inconsistent shapes");
    }
    Vec z(N + m);
    z << state.x, state.lambda;
    auto fn = [&](const Vec& zz, Vec& F, Mat* J) {
        LagrangeState s{zz.head(N), zz.tail(m)};
        F = lagrange_residual(map, s, u);
        if (J != nullptr) {
            *J = lagrange_jacobian(map, s);
        }
    };
    GaussNewtonResult gn = damped_gauss_newton(fn, std::move(z), config.corrector_tol, config.max_newton_iters,
                                               config, true);
    CorrectorResult out;
    out.state = LagrangeState{gn.z.head(N), gn.z.tail(m)};
    out.iterations = gn.iterations;
    out.converged = gn.converged;
    out.residual = gn.residual;
    out.contraction = gn.contraction;
    return out;
}

Vec fit_multipliers(const QuadraticMap& map, const Vec& x, const Vec& u, double rank_tol)
{
    if (map.size() == 0) {
        return Vec::Zero(0);
    }
    return min_norm_solve(map.jacobian(x).transpose(), u - x, rank_tol);
}

CorrectorResult project_point(const QuadraticMap& map, const Vec& x0, const Vec& u, const TrackerConfig& config)
{
    LagrangeState st{x0, fit_multipliers(map, x0, u, config.rank_tol)};
    return newton_correct(map, std::move(st), u, config);
}

RetractionResult retract(const ConstraintSystem& system, const Vec& p, const Vec& v, double step_scale,
                         const TrackerConfig& config, std::uint64_t seed)
{
    config.validate();
    const auto N = static_cast<Eigen::Index>(system.ambient_dim());
    if (p.size() != N || v.size() != N) {
        throw DimensionMismatch("retract: point and direction must have the coordinate count");
    }
    const QuadraticMap& orig = system.map();
    RetractionResult res;
    res.polyline.push_back(p);
    const Vec w = step_scale * v;
    if (w.norm() == 0.0) {
        res.endpoint = p;
        res.final_residual = orig.evaluate(p).norm();
        return res;
    }

    QuadraticMap view = orig;
    if (stress_dimension(orig, p, config.rank_tol) > 0) {
        view = randomize(system, p, seed, config.rank_tol).map;
        res.randomized = true;
    }
    const auto m = static_cast<Eigen::Index>(view.size());

    LagrangeState st{p, Vec::Zero(m)};
    double t = 0.0;
    double dt = config.t_step_init;
    int failures = 0;
    Vec rhs = Vec::Zero(N + m);
    rhs.head(N) = w;
    while (t < 1.0) {
        const double h = std::min(dt, 1.0 - t);
        const Vec zdot = min_norm_solve(lagrange_jacobian(view, st), rhs, config.rank_tol);
        LagrangeState pred{st.x + h * zdot.head(N), st.lambda + h * zdot.tail(m)};
        const double t_next = (h == 1.0 - t) ? 1.0 : t + h;
        const Vec u = p + t_next * w;
        CorrectorResult corr = newton_correct(view, pred, u, config);
        const double pred_step = h * zdot.head(N).norm();
        const bool ok = corr.converged && (corr.state.x - pred.x).norm() <= 10.0 * pred_step + 1e-14;
        if (ok) {
            if (orig.evaluate(corr.state.x).norm() > config.corrector_tol) {
                LagrangeState back{corr.state.x, fit_multipliers(orig, corr.state.x, u, config.rank_tol)};
                CorrectorResult re = newton_correct(orig, back, u, config);
                if (!re.converged || orig.evaluate(re.state.x).norm() > config.corrector_tol) {
                    throw ComponentEscape("tracked point left the solution set of the original constraints");
                }
                corr.state = LagrangeState{re.state.x, fit_multipliers(view, re.state.x, u, config.rank_tol)};
            }
            st = corr.state;
            t = t_next;
            res.polyline.push_back(st.x);
            ++res.t_steps_used;
            if (corr.iterations <= 3) {
                dt = h * config.t_step_grow;
            }
        } else {
            ++failures;
            dt = h * config.t_step_shrink;
            if (dt < config.t_step_min || failures > config.max_corrector_failures) {
                std::ostringstream os;
                os << "retraction stalled at t = " << t << " after " << failures << " corrector failures";
                throw PathFailure(os.str(), st.x, st.lambda, t);
            }
        }
    }
    res.endpoint = st.x;
    for (std::size_t i = 1; i < res.polyline.size(); ++i) {
        res.curve_length += (res.polyline[i] - res.polyline[i - 1]).norm();
    }
    res.final_residual = orig.evaluate(res.endpoint).norm();
    return res;
}

}  // namespace motionforge
