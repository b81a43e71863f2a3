#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "motionforge/flex_selector.hpp"
#include "motionforge/retraction_engine.hpp"

namespace motionforge {

enum class EventKind { RankDrop, QuadraticEscape, CuspFallback, StickyContact };

const char* to_string(EventKind kind);

struct PathEvent {
    std::size_t step = 0;
    EventKind kind = EventKind::RankDrop;
};

struct DeformationPath {
    std::vector<Vec> realizations;
    std::vector<Vec> tangents;
    std::vector<double> step_sizes;
    std::vector<double> curve_lengths;
    std::vector<PathEvent> events;
    std::vector<double> residual_log;
    bool complete = true;
    std::string error;
    // System in force at the last frame (differs from the input after sticky contacts).
    std::optional<ConstraintSystem> final_system;

    bool has_event(std::size_t step) const;
    std::size_t count(EventKind kind) const;
};

// Orthogonal r×r matrix best aligning T_prevᵀ with T_nextᵀ.
Mat procrustes(const Mat& T_prev, const Mat& T_next);

Vec transport(const Mat& T_prev, const Mat& T_next, const Vec& v_prev);

bool detect_singularity(const ConstraintSystem& system, const Vec& x, int reference_rank, double rank_tol);

// Orthonormal basis of the nontrivial tangent directions at x.
Mat nontrivial_tangent_basis(const ConstraintSystem& system, const Vec& x, double rank_tol);

// Least-squares solve of [R; Tᵀ]·a = [rhs; 0]; throws NoAcceleration when inconsistent.
Vec solve_stacked(const Mat& R, const Mat& T, const Vec& rhs);

// Normal acceleration of the motion through x with velocity v.
Vec acceleration(const ConstraintSystem& system, const Vec& x, const Vec& v, double rank_tol = 1e-10);

struct SingularState {
    Vec x_sing;
    std::optional<Vec> x_prev;
    Vec v;
    std::optional<Vec> a_prev;
    double step = 0.0;
    int reference_rank = 0;
};

struct Resolution {
    Vec x_next;
    EventKind kind = EventKind::QuadraticEscape;
};

Resolution resolve_singularity(const ConstraintSystem& system, const SingularState& state,
                               const TrackerConfig& config);

// Returns a replacement system (realized at the projected point) when a new contact forms.
using ContactHook = std::function<std::optional<ConstraintSystem>(const ConstraintSystem&, const Vec&)>;

DeformationPath track_path(const ConstraintSystem& system, const FlexChoice& flex, int num_steps, double step_size,
                           const TrackerConfig& config, std::uint64_t seed = 0, const ContactHook& hook = {});

bool congruent(const Vec& a, const Vec& b, int dim, double tol = 1e-4);

}  // namespace motionforge
