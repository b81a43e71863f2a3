#pragma once

#include <Eigen/Dense>

namespace motionforge {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/** @brief Singular value decomposition with a relative rank cut. */
struct SvdInfo {
    Vec singular_values;
    Mat U;  // full left factor
    Mat V;  // full right factor
    int rank = 0;
    double sigma_max = 0.0;
};

SvdInfo full_svd(const Mat& M, double rel_tol);

int numerical_rank(const Mat& M, double rel_tol);

// Orthonormal basis of ker M. A matrix with zero rows has the identity as kernel.
Mat null_space(const Mat& M, double rel_tol);

// Orthonormal basis of ker Mᵀ.
Mat left_null_space(const Mat& M, double rel_tol);

// Orthonormal basis of the column span; columns with singular value below abs_tol are dropped.
Mat orthonormal_span(const Mat& M, double abs_tol);

// Minimum-norm least-squares solution of A·x = b.
Vec min_norm_solve(const Mat& A, const Vec& b, double rel_tol);

double max_orthonormality_error(const Mat& B);

}  // namespace motionforge
