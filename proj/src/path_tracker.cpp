#include "motionforge/path_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <spdlog/spdlog.h>

#include "motionforge/rigidity_analysis.hpp"

namespace motionforge {

namespace {

double sigma_ratio(const Vec& singular_values, int reference_rank)
{
    if (reference_rank <= 0 || singular_values.size() == 0 || singular_values(0) <= 0.0) {
        return 1.0;
    }
    if (reference_rank > singular_values.size()) {
        return 0.0;
    }
    return singular_values(reference_rank - 1) / singular_values(0);
}

Vec unit_or_zero(const Vec& v)
{
    const double n = v.norm();
    return n > 0.0 ? Vec(v / n) : Vec(Vec::Zero(v.size()));
}

std::optional<Vec> correct_onto(const ConstraintSystem& system, const Vec& q, const TrackerConfig& config)
{
    CorrectorResult c = project_point(system.map(), q, q, config);
    if (!c.converged || residual_norm(system, c.state.x) > config.corrector_tol) {
        return std::nullopt;
    }
    return c.state.x;
}

}  // namespace

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::RankDrop: return "RankDrop";
    case EventKind::QuadraticEscape: return "QuadraticEscape";
    case EventKind::CuspFallback: return "CuspFallback";
    case EventKind::StickyContact: return "StickyContact";
    }
    return "RankDrop";
}

bool DeformationPath::has_event(std::size_t step) const
{
    return std::any_of(events.begin(), events.end(), [&](const PathEvent& e) { return e.step == step; });
}

std::size_t DeformationPath::count(EventKind kind) const
{
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const PathEvent& e) { return e.kind == kind; }));
}

Mat procrustes(const Mat& T_prev, const Mat& T_next)
{
    if (T_prev.cols() != T_next.cols()) {
        throw RankChange("tangent spaces have different dimensions");
    }
    if (T_prev.cols() == 0) {
        return Mat::Zero(0, 0);
    }
    Eigen::JacobiSVD<Mat> svd(T_next.transpose() * T_prev, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

Vec transport(const Mat& T_prev, const Mat& T_next, const Vec& v_prev)
{
    if (T_prev.cols() != T_next.cols()) {
        throw RankChange("tangent spaces have different dimensions");
    }
    if (max_orthonormality_error(T_prev) > 1e-8 || max_orthonormality_error(T_next) > 1e-8) {
        throw PreconditionError("transport: bases must be orthonormal");
    }
    const Mat O = procrustes(T_prev, T_next);
    Vec out = T_next * (O * (T_prev.transpose() * v_prev));
    const double n = out.norm();
    if (n > 0.0) {
        out *= v_prev.norm() / n;
    }
    return out;
}

bool detect_singularity(const ConstraintSystem& system, const Vec& x, int reference_rank, double rank_tol)
{
    return numerical_rank(rigidity_matrix(system, x), rank_tol) < reference_rank;
}

Mat nontrivial_tangent_basis(const ConstraintSystem& system, const Vec& x, double rank_tol)
{
    return analyze_at(system, x, rank_tol).nontrivial_flex_basis;
}

Vec solve_stacked(const Mat& R, const Mat& T, const Vec& rhs)
{
    if (R.rows() != rhs.size() || R.cols() != T.rows()) {
        throw DimensionMismatch("solve_stacked: inconsistent shapes");
    }
    Mat A(R.rows() + T.cols(), R.cols());
    A << R, T.transpose();
    Vec b = Vec::Zero(A.rows());
    b.head(rhs.size()) = rhs;
    const Vec a = min_norm_solve(A, b, 1e-12);
    const double scale = std::max(1.0, b.norm());
    if ((A * a - b).norm() > 1e-6 * scale) {
        throw NoAcceleration("second-order obstruction: the acceleration system is inconsistent");
    }
    return a;
}

Vec acceleration(const ConstraintSystem& system, const Vec& x, const Vec& v, double rank_tol)
{
    const Mat R = rigidity_matrix(system, x);
    const SvdInfo svd = full_svd(R, rank_tol);
    if ((R * v).norm() > 1e-6 * std::max(1.0, svd.sigma_max) * std::max(1.0, v.norm())) {
        throw PreconditionError("acceleration: velocity is not tangent");
    }
    const Mat T = svd.V.rightCols(R.cols() - svd.rank);
    return solve_stacked(R, T, -2.0 * hessian_form(system, v));
}

Resolution resolve_singularity(const ConstraintSystem& system, const SingularState& state,
                               const TrackerConfig& config)
{
    const Vec& x = state.x_sing;
    if (!detect_singularity(system, x, state.reference_rank, config.singular_tol)) {
        throw PreconditionError("resolve_singularity: point is not singular");
    }
    const double alpha = state.step;
    const double eps = 10.0 * std::sqrt(config.corrector_tol) * alpha;
    const double min_progress = std::max(eps, 0.25 * alpha);
    const Vec vhat = unit_or_zero(state.v);
    const Vec a = state.a_prev ? *state.a_prev : Vec(Vec::Zero(x.size()));

    auto leaves_incoming = [&](const Vec& y) {
        if (!state.x_prev) {
            return true;
        }
        const Vec out = unit_or_zero(y - x);
        const Vec back = unit_or_zero(*state.x_prev - x);
        return out.dot(back) < 0.99;
    };

    // Quadratic predictor from the singular point.
    {
        const Vec q = x + alpha * vhat + 0.5 * alpha * alpha * a;
        if (auto y = correct_onto(system, q, config)) {
            if ((*y - x).norm() >= min_progress && leaves_incoming(*y)) {
                return {*y, EventKind::QuadraticEscape};
            }
        }
    }

    if (!state.x_prev) {
        // Start point: no incoming branch, so fan out around ±v within the kernel.
        std::vector<Vec> dirs;
        const Mat K = nontrivial_tangent_basis(system, x, config.rank_tol);
        std::vector<Vec> others;
        for (Eigen::Index c = 0; c < K.cols(); ++c) {
            const Vec w = unit_or_zero(K.col(c) - vhat * vhat.dot(K.col(c)));
            if (w.norm() > 1e-8) {
                others.push_back(w);
            }
        }
        for (double sign : {1.0, -1.0}) {
            dirs.push_back(sign * vhat);
            for (double deg : {10.0, 20.0, 30.0, 45.0, 60.0}) {
                const double th = deg * std::numbers::pi / 180.0;
                for (const Vec& w : others) {
                    dirs.push_back(std::cos(th) * sign * vhat + std::sin(th) * w);
                    dirs.push_back(std::cos(th) * sign * vhat - std::sin(th) * w);
                }
            }
        }
        for (double scale : {1.0, 0.25}) {
            for (const Vec& dvec : dirs) {
                if (auto y = correct_onto(system, x + scale * alpha * dvec, config)) {
                    if ((*y - x).norm() >= std::max(eps, 0.25 * scale * alpha)) {
                        return {*y, EventKind::QuadraticEscape};
                    }
                }
            }
        }
        throw StuckAtSingularity("no branch found leaving the singular start point");
    }

    // Cusp fallback: step off the previous point across the incoming tangent line.
    const Vec& xp = *state.x_prev;
    Vec ahat = unit_or_zero(a);
    try {
        const Mat Kp = nontrivial_tangent_basis(system, xp, config.rank_tol);
        const Vec vp = unit_or_zero(Kp * (Kp.transpose() * vhat));
        if (vp.norm() > 0.0) {
            const Vec fresh = unit_or_zero(acceleration(system, xp, vp, config.rank_tol));
            if (fresh.norm() > 0.0) {
                ahat = fresh;
            }
        }
    } catch (const Error&) {
    }
    const Vec chord_dir = unit_or_zero(x - xp);
    auto off_incoming_line = [&](const Vec& y) {
        const Vec r = y - x;
        const Vec perp = r - chord_dir * chord_dir.dot(r);
        return perp.norm() > 0.25 * r.norm();
    };
    if (ahat.norm() > 0.0) {
        for (double s = alpha; s >= alpha * std::ldexp(1.0, -10); s *= 0.5) {
            for (double sign : {-1.0, 1.0}) {
                const Vec q = xp + sign * s * ahat;
                auto y = correct_onto(system, q, config);
                if (!y) {
                    continue;
                }
                const bool distinct = (*y - xp).norm() >= eps && (*y - x).norm() >= eps;
                const bool far_side = (*y - xp).dot(ahat) < 0.0;
                if (distinct && far_side && off_incoming_line(*y)) {
                    return {*y, EventKind::CuspFallback};
                }
            }
        }
    }
    throw StuckAtSingularity("quadratic predictor and cusp fallback both failed");
}

bool congruent(const Vec& a, const Vec& b, int dim, double tol)
{
    const auto n = a.size() / dim;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double da = (a.segment(i * dim, dim) - a.segment(j * dim, dim)).norm();
            const double db = (b.segment(i * dim, dim) - b.segment(j * dim, dim)).norm();
            if (std::abs(da - db) > tol) {
                return false;
            }
        }
    }
    return true;
}

DeformationPath track_path(const ConstraintSystem& system, const FlexChoice& flex, int num_steps, double step_size,
                           const TrackerConfig& config, std::uint64_t seed, const ContactHook& hook)
{
    config.validate();
    if (num_steps < 0 || !(step_size > 0.0)) {
        throw InputError("steps must be non-negative and the step size positive");
    }
    DeformationPath path;
    ConstraintSystem sys = system;
    Vec x = sys.realization();
    RigidityReport rep = analyze_at(sys, x, config.rank_tol);
    if (rep.nontrivial_dim() == 0) {
        throw PreconditionError("system is infinitesimally rigid");
    }
    if (flex.flex.size() != x.size()) {
        throw DimensionMismatch("flex has the wrong length");
    }
    Mat T = rep.nontrivial_flex_basis;
    Vec v = T * (T.transpose() * flex.flex);
    if (v.norm() < 1e-8) {
        throw PreconditionError("flex has no nontrivial component");
    }
    v.normalize();

    path.realizations.push_back(x);
    path.tangents.push_back(v);
    path.residual_log.push_back(residual_norm(sys, x));

    int ref_rank = rep.rank;
    double ratio = sigma_ratio(rep.singular_values, ref_rank);
    std::optional<Vec> accel;
    try {
        accel = acceleration(sys, x, v, config.rank_tol);
    } catch (const Error&) {
    }
    double alpha = step_size;
    std::optional<double> L0;
    bool singular = false;
    bool approach = false;
    bool rearm = true;
    bool leaving = false;
    double approach_alpha = alpha;

    for (int k = 1; k <= num_steps; ++k) {
        Vec x_new;
        double used_alpha = alpha;
        double L = 0.0;
        std::set<EventKind> kinds;
        bool resolved = false;
        bool approach_step = false;
        try {
            auto previous = [&]() -> std::optional<Vec> {
                if (path.realizations.size() >= 2) {
                    return path.realizations[path.realizations.size() - 2];
                }
                return std::nullopt;
            };
            if (singular) {
                SingularState ss{x, previous(), v, accel, alpha, ref_rank};
                Resolution res = resolve_singularity(sys, ss, config);
                x_new = res.x_next;
                kinds.insert(res.kind);
                resolved = true;
            } else {
                const double a_try = approach ? approach_alpha : alpha;
                std::optional<RetractionResult> rr;
                try {
                    rr = retract(sys, x, v, a_try, config, seed);
                } catch (const PathFailure& e) {
                    spdlog::debug("step {}: retraction failed: {}", k, e.what());
                } catch (const ComponentEscape& e) {
                    spdlog::debug("step {}: {}", k, e.what());
                }
                if (!rr || rr->curve_length < std::max(1e-12, 1e-2 * a_try)) {
                    int ref = ref_rank;
                    const int here = numerical_rank(rigidity_matrix(sys, x), config.singular_tol);
                    if (path.realizations.size() == 1 && here >= ref_rank) {
                        // The start cannot be left by retraction: treat it as a rank-deficient point of the motion.
                        ref = here + 1;
                    }
                    SingularState ss{x, previous(), v, accel, alpha, ref};
                    Resolution res = resolve_singularity(sys, ss, config);
                    x_new = res.x_next;
                    kinds.insert(res.kind);
                    resolved = true;
                } else if (approach) {
                    x_new = rr->endpoint;
                    L = rr->curve_length;
                    used_alpha = a_try;
                    approach_step = true;
                    kinds.insert(EventKind::RankDrop);
                } else if (!L0) {
                    L0 = rr->curve_length;
                    x_new = rr->endpoint;
                    L = *L0;
                } else {
                    const double rescaled = std::clamp(alpha * (*L0) / rr->curve_length, 0.25 * alpha, 4.0 * alpha);
                    RetractionResult r2 = retract(sys, x, v, rescaled, config, seed);
                    alpha = rescaled;
                    used_alpha = rescaled;
                    x_new = r2.endpoint;
                    L = r2.curve_length;
                }
            }
        } catch (const Error& e) {
            path.complete = false;
            path.error = e.what();
            spdlog::info("path truncated at step {}: {}", k, e.what());
            break;
        }
        if (resolved) {
            L = (x_new - x).norm();
        }

        bool sticky = false;
        if (hook) {
            try {
                if (auto ns = hook(sys, x_new)) {
                    sys = *ns;
                    x_new = sys.realization();
                    sticky = true;
                    kinds.insert(EventKind::StickyContact);
                }
            } catch (const Error& e) {
                path.complete = false;
                path.error = e.what();
                break;
            }
        }

        const double res_new = residual_norm(sys, x_new);
        if (!(res_new <= 1e-8)) {
            path.complete = false;
            path.error = "feasibility lost at step " + std::to_string(k);
            break;
        }

        RigidityReport rep_new = analyze_at(sys, x_new, config.rank_tol);
        if (sticky || rep_new.rank > ref_rank) {
            ref_rank = rep_new.rank;
        }
        const double ratio_new = sigma_ratio(rep_new.singular_values, ref_rank);
        if (resolved) {
            leaving = true;
        } else if (ratio_new < ratio || ratio_new >= config.singular_tol) {
            leaving = false;
        }
        // Moving away from a resolved singularity, a small but growing ratio is not flagged.
        const bool low_ratio = ratio_new < config.singular_tol && !(leaving && ratio_new >= ratio);
        bool sing_new = rep_new.rank < ref_rank || low_ratio;
        const Mat& T_new = rep_new.nontrivial_flex_basis;
        const Vec chord = x_new - x;
        const double chord_len = chord.norm();

        if (!resolved && !sticky && !sing_new) {
            if (ratio_new < ratio && chord_len > 0.0) {
                const double d_pred = ratio_new * chord_len / (ratio - ratio_new);
                const double nominal = L0 ? *L0 : chord_len;
                if (rearm && d_pred < 1.5 * nominal) {
                    approach = true;
                    approach_alpha = alpha * std::min(1.0, 0.5 * d_pred / nominal);
                    kinds.insert(EventKind::RankDrop);
                    if (approach_step && chord_len < 1e-4) {
                        // Steps have collapsed without a measurable rank drop: a near-singular point.
                        approach = false;
                        rearm = false;
                    }
                }
            } else if (ratio_new > ratio) {
                approach = false;
                rearm = true;
            }
        } else {
            approach = false;
            rearm = false;
        }

        Vec v_new;
        if (T_new.cols() == 0 && !sing_new) {
            for (EventKind kind : kinds) {
                path.events.push_back({static_cast<std::size_t>(k), kind});
            }
            path.realizations.push_back(x_new);
            path.tangents.push_back(Vec::Zero(x_new.size()));
            path.step_sizes.push_back(used_alpha);
            path.curve_lengths.push_back(L);
            path.residual_log.push_back(res_new);
            path.complete = false;
            path.error = "no nontrivial flex remains at step " + std::to_string(k);
            spdlog::info("path truncated at step {}: {}", k, path.error);
            break;
        }
        if (sing_new) {
            v_new = v;
            kinds.insert(EventKind::RankDrop);
        } else if (resolved || sticky || T_new.cols() != T.cols()) {
            const Vec base = resolved ? chord : v;
            v_new = T_new * (T_new.transpose() * base);
            if (v_new.norm() < 1e-10) {
                v_new = T_new * (T_new.transpose() * v);
            }
            if (v_new.norm() < 1e-10) {
                v_new = T_new.col(0);
            }
            v_new.normalize();
            if (resolved && v_new.dot(chord) < 0.0) {
                v_new = -v_new;
            }
        } else {
            v_new = transport(T, T_new, v);
            v_new.normalize();
            if (v_new.dot(chord) < 0.0) {
                v_new = -v_new;
            }
        }

        if (!sing_new) {
            try {
                accel = acceleration(sys, x_new, v_new, config.rank_tol);
            } catch (const Error&) {
            }
        }

        for (EventKind kind : kinds) {
            path.events.push_back({static_cast<std::size_t>(k), kind});
            spdlog::debug("step {}: {}", k, to_string(kind));
        }
        path.realizations.push_back(x_new);
        path.tangents.push_back(v_new);
        path.step_sizes.push_back(used_alpha);
        path.curve_lengths.push_back(L);
        path.residual_log.push_back(res_new);

        x = x_new;
        v = v_new;
        T = T_new;
        ratio = ratio_new;
        singular = sing_new;
    }
    path.final_system = sys;
    return path;
}

}  // namespace motionforge
