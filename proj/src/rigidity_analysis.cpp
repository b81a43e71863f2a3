#include "motionforge/rigidity_analysis.hpp"

#include <cmath>

#include "motionforge/flex_selector.hpp"

namespace motionforge {

namespace {

Mat normalized_columns(const Mat& G)
{
    Mat out = G;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const double nrm = out.col(c).norm();
        if (nrm > 0.0) {
            out.col(c) /= nrm;
        }
    }
    return out;
}

// Columns are the blockwise images M·p_j of the given d×d matrices plus translations.
Mat generators(const ConstraintSystem& system, const Vec& x, const std::vector<Mat>& linear_maps)
{
    const int d = system.dim();
    const std::size_t n = system.n_vertices();
    const auto N = static_cast<Eigen::Index>(system.ambient_dim());
    Mat G = Mat::Zero(N, static_cast<Eigen::Index>(d + static_cast<int>(linear_maps.size())));
    for (int i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!system.is_normal_vertex(j)) {
                G(static_cast<Eigen::Index>(j) * d + i, i) = 1.0;
            }
        }
    }
    for (std::size_t k = 0; k < linear_maps.size(); ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            G.block(static_cast<Eigen::Index>(j) * d, d + static_cast<Eigen::Index>(k), d, 1) =
                linear_maps[k] * vertex_position(x, d, j);
        }
    }
    return G;
}

std::vector<Mat> skew_basis(int d)
{
    std::vector<Mat> out;
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            Mat S = Mat::Zero(d, d);
            S(a, b) = 1.0;
            S(b, a) = -1.0;
            out.push_back(S);
        }
    }
    return out;
}

std::vector<Mat> traceless_basis(int d)
{
    std::vector<Mat> out;
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            if (a != b) {
                Mat E = Mat::Zero(d, d);
                E(a, b) = 1.0;
                out.push_back(E);
            }
        }
    }
    for (int a = 0; a + 1 < d; ++a) {
        Mat E = Mat::Zero(d, d);
        E(a, a) = 1.0;
        E(d - 1, d - 1) = -1.0;
        out.push_back(E);
    }
    return out;
}

}  // namespace

const char* to_string(SecondOrderStatus status)
{
    switch (status) {
    case SecondOrderStatus::SecondOrderRigid: return "SecondOrderRigid";
    case SecondOrderStatus::FlexibleWitness: return "FlexibleWitness";
    case SecondOrderStatus::Unknown: return "Unknown";
    }
    return "Unknown";
}

Mat QTensor::slice(int i) const
{
    Mat out(r_, r_);
    for (int j = 0; j < r_; ++j) {
        for (int k = 0; k < r_; ++k) {
            out(j, k) = (*this)(i, j, k);
        }
    }
    return out;
}

Vec QTensor::evaluate(const Vec& lambda) const
{
    Vec out(s_);
    for (int i = 0; i < s_; ++i) {
        out(i) = lambda.dot(slice(i) * lambda);
    }
    return out;
}

int affine_span_dim(const ConstraintSystem& system, const Vec& x)
{
    const int d = system.dim();
    std::vector<std::size_t> points;
    for (std::size_t j = 0; j < system.n_vertices(); ++j) {
        if (!system.is_normal_vertex(j)) {
            points.push_back(j);
        }
    }
    if (points.size() < 2) {
        return 0;
    }
    Mat P(d, static_cast<Eigen::Index>(points.size()));
    for (std::size_t c = 0; c < points.size(); ++c) {
        P.col(static_cast<Eigen::Index>(c)) = vertex_position(x, d, points[c]);
    }
    Vec centroid = P.rowwise().mean();
    P.colwise() -= centroid;
    return numerical_rank(P, 1e-10);
}

Mat trivial_flex_basis(const ConstraintSystem& system, const Vec& x)
{
    const auto N = static_cast<Eigen::Index>(system.ambient_dim());
    if (system.trivial_kind() == TrivialKind::PinsOnly) {
        return Mat::Zero(N, 0);
    }
    const int d = system.dim();
    const std::vector<Mat> maps =
        system.trivial_kind() == TrivialKind::Euclidean ? skew_basis(d) : traceless_basis(d);
    Mat G = normalized_columns(generators(system, x, maps));
    if (!system.pinned().empty()) {
        // Exact intersection with the motions that keep pinned coordinates fixed.
        Mat P(static_cast<Eigen::Index>(system.pinned().size()) * d, G.cols());
        Eigen::Index row = 0;
        for (std::size_t j : system.pinned()) {
            for (int k = 0; k < d; ++k) {
                P.row(row++) = G.row(static_cast<Eigen::Index>(j) * d + k);
            }
        }
        Mat C = null_space(P, 1e-10);
        G = G * C;
    }
    return orthonormal_span(G, 1e-8);
}

Mat trivial_flex_basis(const ConstraintSystem& system)
{
    return trivial_flex_basis(system, system.realization());
}

RigidityReport analyze_at(const ConstraintSystem& system, const Vec& x, double rank_tol)
{
    RigidityReport rep;
    rep.point = x;
    const Mat R = rigidity_matrix(system, x);
    const SvdInfo svd = full_svd(R, rank_tol);
    const auto N = R.cols();
    const auto m = R.rows();
    rep.rank = svd.rank;
    rep.sigma_max = svd.sigma_max;
    rep.singular_values = svd.singular_values;
    rep.flex_basis = svd.V.rightCols(N - svd.rank);
    rep.stress_basis = svd.U.rightCols(m - svd.rank);
    rep.trivial_basis = trivial_flex_basis(system, x);
    rep.trivial_dim = static_cast<int>(rep.trivial_basis.cols());
    const Mat proj = rep.flex_basis - rep.trivial_basis * (rep.trivial_basis.transpose() * rep.flex_basis);
    rep.nontrivial_flex_basis = orthonormal_span(proj, 1e-6);
    rep.inf_rigid = rep.rank == static_cast<int>(N) - rep.trivial_dim;
    rep.affine_span_dim = affine_span_dim(system, x);
    return rep;
}

RigidityReport analyze(const ConstraintSystem& system, double rank_tol)
{
    return analyze_at(system, system.realization(), rank_tol);
}

bool is_blocked(const ConstraintSystem& system, const RigidityReport& report, const Vec& v)
{
    const double nv = v.norm();
    if (nv == 0.0) {
        return false;
    }
    const Vec in_span = report.flex_basis * (report.flex_basis.transpose() * v);
    if ((v - in_span).norm() > 1e-8 * nv) {
        throw PreconditionError("is_blocked: vector is not an infinitesimal flex");
    }
    if (report.stress_dim() == 0) {
        return false;
    }
    const Vec u = v / nv;
    const Vec second = 2.0 * hessian_form(system, u);
    const Vec pairing = report.stress_basis.transpose() * second;
    return pairing.cwiseAbs().maxCoeff() > 1e-8 * (1.0 + u.squaredNorm());
}

QTensor q_system(const ConstraintSystem& system, const RigidityReport& report)
{
    const int s = report.stress_dim();
    const int r = report.nontrivial_dim();
    QTensor q(s, r);
    if (s == 0 || r == 0) {
        return q;
    }
    const Mat& B = report.nontrivial_flex_basis;
    const Mat& W = report.stress_basis;
    for (int j = 0; j < r; ++j) {
        for (int k = j; k < r; ++k) {
            const Vec b = 2.0 * system.map().bilinear_form(B.col(j), B.col(k));
            const Vec w = W.transpose() * b;
            for (int i = 0; i < s; ++i) {
                q(i, j, k) = w(i);
                q(i, k, j) = w(i);
            }
        }
    }
    return q;
}

SecondOrderVerdict second_order_verdict(const ConstraintSystem& system, const RigidityReport& report, int restarts,
                                        std::uint64_t seed)
{
    SecondOrderVerdict out;
    out.q_coeffs = q_system(system, report);
    const int r = report.nontrivial_dim();
    const int s = report.stress_dim();
    if (r == 0) {
        out.status = SecondOrderStatus::SecondOrderRigid;
        return out;
    }
    if (s == 0) {
        out.status = SecondOrderStatus::FlexibleWitness;
        out.witness_flex = report.nontrivial_flex_basis.col(0);
        return out;
    }
    if (r == 1) {
        bool all_zero = true;
        for (int i = 0; i < s; ++i) {
            if (std::abs(out.q_coeffs(i, 0, 0)) > 1e-10) {
                all_zero = false;
            }
        }
        if (all_zero) {
            out.status = SecondOrderStatus::FlexibleWitness;
            out.witness_flex = report.nontrivial_flex_basis.col(0);
        } else {
            out.status = SecondOrderStatus::SecondOrderRigid;
        }
        return out;
    }
    auto found = find_unblocked_flex(system, report, restarts, seed);
    if (found) {
        out.status = SecondOrderStatus::FlexibleWitness;
        out.witness_flex = found->flex;
    } else {
        out.status = SecondOrderStatus::Unknown;
    }
    return out;
}

}  // namespace motionforge
