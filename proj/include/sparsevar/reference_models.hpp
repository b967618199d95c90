#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sparsevar/testing.hpp"
#include "sparsevar/varmodel.hpp"

// Benchmark models used by the simulation studies. "Example 1" is a sparse
// six-dimensional VAR(1); "Example 2" is a twenty-dimensional VAR(1) with a
// block lower-triangular coefficient matrix whose diagonal 6 x 6 block is the
// Example 1 matrix.
namespace sparsevar::reference {

inline MatrixXd example1_coefficients() {
    MatrixXd a(6, 6);
    a << 0.8, 0.0, 0.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 0.0, 0.3, 0.0, 0.0,
         0.0, 0.0, 0.0, 0.0, -0.3, 0.0,
         0.6, 0.0, 0.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 0.6, 0.0, 0.0, 0.0,
         0.0, 0.0, 0.0, 0.0, 0.0, 0.8;
    return a;
}

inline MatrixXd example1_sigma() {
    MatrixXd s(6, 6);
    s << 1.00, 0.25, 0.17, 0.12, 0.10, 0.08,
         0.25, 1.00, 0.00, 0.00, 0.00, 0.00,
         0.17, 0.00, 1.00, 0.00, 0.00, 0.00,
         0.12, 0.00, 0.00, 1.00, 0.00, 0.00,
         0.10, 0.00, 0.00, 0.00, 1.00, 0.00,
         0.08, 0.00, 0.00, 0.00, 0.00, 1.00;
    return s;
}

/// Example 1 as specified (used for the coverage study).
inline VarModel example1() {
    return VarModel({example1_coefficients()}, example1_sigma());
}

/// Example 1 testing variant: A_{6,1} = delta_a and Sigma_{6,1} = Sigma_{1,6} = delta_c.
/// delta_a = delta_c = 0 is the null model.
inline VarModel example1_testing(double delta_a, double delta_c) {
    MatrixXd a = example1_coefficients();
    a(5, 0) = delta_a;
    MatrixXd s = example1_sigma();
    s(5, 0) = s(0, 5) = delta_c;
    return VarModel({a}, s);
}

/// Null group for Example 1: A_{6,r} = 0 for r = 1..5 and Sigma_{1,6} = 0.
inline GroupSpec example1_group() {
    GroupSpec g;
    for (int r = 0; r < 5; ++r) g.g_a.push_back({5, r, 0});
    g.g_sigma.push_back({0, 5});
    return g;
}

inline MatrixXd example2_coefficients() {
    const double diag[14] = {0.8, -0.7, 0.8, -0.6, 0.6, 0.0, 0.0, 0.0, 0.0, 0.2, 0.5, -0.8, 0.0, 0.0};
    MatrixXd b(6, 14);
    b << 0.8, 0.2, -0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
         0.0, 0.6, -0.7, 0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 0.0, -0.9, 0.0, 0.0, 0.0, 0.0, 0.0, -0.6, 0.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 0.0, 0.8, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
         0.0, 0.7, 0.0, 0.0, 0.0, -0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.7,
         0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.9, 0.0, 0.0, 0.0, 0.0, 0.0;
    MatrixXd a = MatrixXd::Zero(20, 20);
    for (int i = 0; i < 14; ++i) a(i, i) = diag[i];
    a.block(14, 0, 6, 14) = b;
    a.block(14, 14, 6, 6) = example1_coefficients();
    return a;
}

inline MatrixXd example2_sigma() {
    MatrixXd s = MatrixXd::Zero(20, 20);
    MatrixXd s11 = MatrixXd::Identity(14, 14);
    for (int i = 0; i < 4; ++i) s11(i, i + 1) = s11(i + 1, i) = 0.5;
    for (int i = 9; i < 11; ++i) s11(i, i + 1) = s11(i + 1, i) = -0.5;
    s.topLeftCorner(14, 14) = s11;
    s.bottomRightCorner(6, 6) = example1_sigma();
    return s;
}

inline VarModel example2() {
    return VarModel({example2_coefficients()}, example2_sigma());
}

/// Alternative with a single non-zero entry of the null block: A_{6,15} = delta.
inline VarModel example2_single(double delta) {
    MatrixXd a = example2_coefficients();
    a(5, 14) = delta;
    return VarModel({a}, example2_sigma());
}

/// Alternative with five non-zero entries of the null block.
inline VarModel example2_multiple(double delta) {
    MatrixXd a = example2_coefficients();
    a(5, 14) = delta;  // A_{6,15}
    a(2, 17) = delta;  // A_{3,18}
    a(3, 13) = delta;  // A_{4,14}
    a(0, 10) = delta;  // A_{1,11}
    a(2, 12) = delta;  // A_{3,13}
    return VarModel({a}, example2_sigma());
}

/// Null group for Example 2: A_{i,j} = 0 for i = 1..6, j = 7..20 (84 entries).
inline GroupSpec example2_group() {
    GroupSpec g;
    for (int i = 0; i < 6; ++i)
        for (int j = 6; j < 20; ++j) g.g_a.push_back({i, j, 0});
    return g;
}

} // namespace sparsevar::reference
