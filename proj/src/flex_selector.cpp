#include "motionforge/flex_selector.hpp"

#include <cmath>
#include <random>

#include "motionforge/retraction_engine.hpp"

namespace motionforge {

namespace {

constexpr double kAcceptResidual = 1e-10;
constexpr int kSolverIterations = 200;

void canonicalize_sign(Vec& lambda)
{
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda(i)) > 1e-12) {
            if (lambda(i) < 0.0) {
                lambda = -lambda;
            }
            return;
        }
    }
}

}  // namespace

const char* to_string(FlexSource source)
{
    switch (source) {
    case FlexSource::UserCoefficients: return "UserCoefficients";
    case FlexSource::SolvedUnblocked: return "SolvedUnblocked";
    case FlexSource::SoleFlex: return "SoleFlex";
    }
    return "UserCoefficients";
}

FlexChoice select_flex(const RigidityReport& report, const Vec& coefficients)
{
    const int r = report.nontrivial_dim();
    if (r == 0) {
        throw PreconditionError("system is infinitesimally rigid");
    }
    if (coefficients.size() != r) {
        throw InputError("expected " + std::to_string(r) + " flex coefficients, got " +
                         std::to_string(coefficients.size()));
    }
    const double nrm = coefficients.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        throw InputError("flex coefficients must not all be zero");
    }
    FlexChoice out;
    out.coefficients = coefficients / nrm;
    out.flex = report.nontrivial_flex_basis * out.coefficients;
    out.source = FlexSource::UserCoefficients;
    return out;
}

std::optional<FlexChoice> find_unblocked_flex(const ConstraintSystem& system, const RigidityReport& report,
                                              int restarts, std::uint64_t seed)
{
    const int r = report.nontrivial_dim();
    if (r == 0) {
        throw PreconditionError("system is infinitesimally rigid");
    }
    if (report.stress_dim() == 0) {
        FlexChoice out;
        out.coefficients = Vec::Unit(r, 0);
        out.flex = report.nontrivial_flex_basis.col(0);
        out.source = FlexSource::SoleFlex;
        return out;
    }
    const QTensor q = q_system(system, report);
    const int s = q.stresses();
    std::vector<Mat> slices;
    for (int i = 0; i < s; ++i) {
        slices.push_back(q.slice(i));
    }
    auto fn = [&](const Vec& lambda, Vec& F, Mat* J) {
        F.resize(s + 1);
        if (J != nullptr) {
            J->resize(s + 1, r);
        }
        for (int i = 0; i < s; ++i) {
            const Vec ql = slices[static_cast<std::size_t>(i)] * lambda;
            F(i) = lambda.dot(ql);
            if (J != nullptr) {
                J->row(i) = 2.0 * ql.transpose();
            }
        }
        F(s) = 1.0 - lambda.squaredNorm();
        if (J != nullptr) {
            J->row(s) = -2.0 * lambda.transpose();
        }
    };

    TrackerConfig cfg;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0; attempt < restarts; ++attempt) {
        Vec start(r);
        for (int i = 0; i < r; ++i) {
            start(i) = normal(gen);
        }
        if (start.norm() == 0.0) {
            continue;
        }
        start.normalize();
        GaussNewtonResult gn = damped_gauss_newton(fn, start, kAcceptResidual, kSolverIterations, cfg, false);
        Vec F;
        fn(gn.z, F, nullptr);
        if (F.cwiseAbs().maxCoeff() <= kAcceptResidual) {
            FlexChoice out;
            out.coefficients = gn.z / gn.z.norm();
            canonicalize_sign(out.coefficients);
            out.flex = report.nontrivial_flex_basis * out.coefficients;
            out.source = FlexSource::SolvedUnblocked;
            return out;
        }
    }
    return std::nullopt;
}

}  // namespace motionforge
