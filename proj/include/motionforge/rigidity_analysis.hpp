#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "motionforge/constraint_model.hpp"

namespace motionforge {

/** @brief Rank data, flex and stress bases of the rigidity matrix at one point. */
struct RigidityReport {
    Vec point;
    int rank = 0;
    int trivial_dim = 0;
    Mat trivial_basis;
    Mat flex_basis;
    Mat nontrivial_flex_basis;
    Mat stress_basis;
    bool inf_rigid = false;
    int affine_span_dim = 0;
    double sigma_max = 0.0;
    Vec singular_values;

    int flex_dim() const { return static_cast<int>(flex_basis.cols()); }
    int nontrivial_dim() const { return static_cast<int>(nontrivial_flex_basis.cols()); }
    int stress_dim() const { return static_cast<int>(stress_basis.cols()); }
};

/** @brief Dense s×r×r tensor of the quadratic forms Q_i(λ). */
class QTensor {
public:
    QTensor() = default;
    QTensor(int s, int r) : s_(s), r_(r), data_(static_cast<std::size_t>(s * r * r), 0.0) {}

    int stresses() const { return s_; }
    int flexes() const { return r_; }
    bool empty() const { return data_.empty(); }
    double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
    // Q_i as an r×r symmetric matrix.
    Mat slice(int i) const;
    // (Q_1(λ), …, Q_s(λ)).
    Vec evaluate(const Vec& lambda) const;

private:
    std::size_t index(int i, int j, int k) const
    {
        return static_cast<std::size_t>((i * r_ + j) * r_ + k);
    }
    int s_ = 0;
    int r_ = 0;
    std::vector<double> data_;
};

enum class SecondOrderStatus { SecondOrderRigid, FlexibleWitness, Unknown };

const char* to_string(SecondOrderStatus status);

struct SecondOrderVerdict {
    SecondOrderStatus status = SecondOrderStatus::Unknown;
    std::optional<Vec> witness_flex;
    QTensor q_coeffs;
};

int affine_span_dim(const ConstraintSystem& system, const Vec& x);

// Generators of trivial motions at x, intersected with the pinned motions.
Mat trivial_flex_basis(const ConstraintSystem& system, const Vec& x);
Mat trivial_flex_basis(const ConstraintSystem& system);

RigidityReport analyze_at(const ConstraintSystem& system, const Vec& x, double rank_tol = 1e-10);
RigidityReport analyze(const ConstraintSystem& system, double rank_tol = 1e-10);

bool is_blocked(const ConstraintSystem& system, const RigidityReport& report, const Vec& v);

QTensor q_system(const ConstraintSystem& system, const RigidityReport& report);

SecondOrderVerdict second_order_verdict(const ConstraintSystem& system, const RigidityReport& report,
                                        int restarts = 64, std::uint64_t seed = 0);

}  // namespace motionforge
