#pragma once

#include <random>
#include <vector>

#include "motionforge/systems_catalog.hpp"

namespace mf_test {

using motionforge::Edge;
using motionforge::Mat;
using motionforge::Vec;

inline Mat random_coords(int d, int n, std::mt19937_64& gen)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat c(d, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < d; ++i) {
            c(i, j) = normal(gen);
        }
    }
    return c;
}

// n points whose affine span has dimension ell.
inline Mat coords_with_span(int d, int n, int ell, std::mt19937_64& gen)
{
    const Mat frame = random_coords(d, ell + 1, gen);
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat c(d, n);
    for (int j = 0; j < n; ++j) {
        if (j <= ell) {
            c.col(j) = frame.col(j);
            continue;
        }
        Vec w(ell + 1);
        for (int k = 0; k <= ell; ++k) {
            w(k) = normal(gen);
        }
        w /= w.sum();
        c.col(j) = frame * w;
    }
    return c;
}

inline std::vector<Edge> complete_edges(std::size_t n)
{
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            e.emplace_back(i, j);
        }
    }
    return e;
}

inline motionforge::ConstraintSystem circle_system()
{
    using namespace motionforge;
    SparseMat A(2, 2);
    A.insert(0, 0) = 1.0;
    A.insert(1, 1) = 1.0;
    return ConstraintSystem(2, 1, Vec::Unit(2, 0), {generic_constraint(A, Vec::Zero(2), -1.0)}, {},
                            TrivialKind::PinsOnly);
}

inline motionforge::ConstraintSystem sphere_system(const Vec& p)
{
    using namespace motionforge;
    SparseMat A(3, 3);
    for (int i = 0; i < 3; ++i) {
        A.insert(i, i) = 1.0;
    }
    return ConstraintSystem(3, 1, p, {generic_constraint(A, Vec::Zero(3), -1.0)}, {}, TrivialKind::PinsOnly);
}

}  // namespace mf_test
