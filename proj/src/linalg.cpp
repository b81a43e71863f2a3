#include "motionforge/linalg.hpp"

#include <algorithm>

namespace motionforge {

SvdInfo full_svd(const Mat& M, double rel_tol)
{
    SvdInfo out;
    const auto rows = M.rows();
    const auto cols = M.cols();
    if (rows == 0 || cols == 0) {
        out.singular_values = Vec::Zero(0);
        out.U = Mat::Identity(rows, rows);
        out.V = Mat::Identity(cols, cols);
        return out;
    }
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.singular_values = svd.singularValues();
    out.U = svd.matrixU();
    out.V = svd.matrixV();
    out.sigma_max = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
    if (out.sigma_max > 0.0) {
        for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
            if (out.singular_values(i) > rel_tol * out.sigma_max) {
                ++out.rank;
            }
        }
    }
    return out;
}

int numerical_rank(const Mat& M, double rel_tol)
{
    if (M.rows() == 0 || M.cols() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Mat> svd(M);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) {
        return 0;
    }
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_tol * s(0)) {
            ++r;
        }
    }
    return r;
}

Mat null_space(const Mat& M, double rel_tol)
{
    SvdInfo s = full_svd(M, rel_tol);
    const auto n = M.cols();
    return s.V.rightCols(n - s.rank);
}

Mat left_null_space(const Mat& M, double rel_tol)
{
    SvdInfo s = full_svd(M, rel_tol);
    const auto m = M.rows();
    return s.U.rightCols(m - s.rank);
}

Mat orthonormal_span(const Mat& M, double abs_tol)
{
    if (M.cols() == 0 || M.rows() == 0) {
        return Mat::Zero(M.rows(), 0);
    }
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU);
    const Vec& s = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > abs_tol) {
        ++keep;
    }
    return svd.matrixU().leftCols(keep);
}

Vec min_norm_solve(const Mat& A, const Vec& b, double rel_tol)
{
    if (A.cols() == 0) {
        return Vec::Zero(0);
    }
    if (A.rows() == 0) {
        return Vec::Zero(A.cols());
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod;
    cod.setThreshold(rel_tol);
    cod.compute(A);
    return cod.solve(b);
}

double max_orthonormality_error(const Mat& B)
{
    if (B.cols() == 0) {
        return 0.0;
    }
    Mat G = B.transpose() * B - Mat::Identity(B.cols(), B.cols());
    return G.cwiseAbs().maxCoeff();
}

}  // namespace motionforge
