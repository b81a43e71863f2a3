#pragma once

#include <cstdint>
#include <optional>

#include "motionforge/rigidity_analysis.hpp"

namespace motionforge {

enum class FlexSource { UserCoefficients, SolvedUnblocked, SoleFlex };

const char* to_string(FlexSource source);

struct FlexChoice {
    Vec coefficients;
    Vec flex;
    FlexSource source = FlexSource::UserCoefficients;
};

// Unit-norm combination of the nontrivial flex basis.
FlexChoice select_flex(const RigidityReport& report, const Vec& coefficients);

/**
 * @brief Searches for λ on the unit sphere with Q_i(λ) = 0 for every stress.
 *
 * Seeded random restarts; the lowest successful restart wins. The sign is fixed so the first
 * nonzero coefficient is positive.
 */
std::optional<FlexChoice> find_unblocked_flex(const ConstraintSystem& system, const RigidityReport& report,
                                              int restarts = 64, std::uint64_t seed = 0);

}  // namespace motionforge
