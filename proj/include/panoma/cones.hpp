#pragma once

// Euclidean projections onto the cones the solver supports.
//
// Conventions:
//  - second-order cone: (t, x) with ||x|| <= t
//  - PSD cone: a symmetric n x n matrix stored as the scaled lower triangle
//    (column-major, off-diagonals multiplied by sqrt(2)) so the vector inner
//    product equals the trace inner product
//  - exponential cone: closure of {(x, y, z) : y > 0, y exp(x / y) <= z}

#include <span>

#include <Eigen/Dense>

namespace panoma::conic {

void project_nonneg(std::span<double> v);
void project_soc(std::span<double> v);
void project_psd(std::span<double> v, int n);
void project_exp(std::span<double> v);

/// Projection onto the dual exponential cone via Moreau: v + P_K(-v).
void project_exp_dual(std::span<double> v);

/// Membership tests with an absolute tolerance.
bool in_exp_cone(const double *v, double tol);
bool in_exp_dual_cone(const double *v, double tol);

int svec_size(int n);
Eigen::VectorXd svec(const Eigen::MatrixXd &m);
Eigen::MatrixXd smat(std::span<const double> v, int n);

} // namespace panoma::conic
