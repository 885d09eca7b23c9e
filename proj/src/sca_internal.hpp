#pragma once

// Pieces shared by the precoder and placement subproblems.

#include <functional>

#include "panoma/sca.hpp"

namespace panoma::detail {

/// Gain of message k at decoder m as an affine expression, in units of the
/// decoder's noise power.
using GainExpr = std::function<conic::LinExpr(int m, int k)>;

int xi_count(int K);
int xi_index(int K, int k, int m);

/// Adds xi / r / t blocks and the SIC rate rows (signal bound, interference
/// bound, single-user rate for the strongest user, minimum rate) and returns
/// the surrogate objective sum_k log2 r_k.
///
/// The variables are normalised by the reference point: xi_hat = xi / xi_ref
/// and r_hat = r / r_ref, so the bilinear term xi * r is split around (1, 1).
conic::LinExpr add_rate_surrogate(conic::ProgramBuilder &pb, int K, const Sub1State &ref,
                                  const std::vector<double> &sigma2, double r_min,
                                  const GainExpr &signal_lower, const GainExpr &gain_upper);

bool usable(const conic::SolveResult &res, double residual);

void fill_solver_info(IterationRecord &rec, const conic::SolveResult &res);

/// |h_m^H W_k h_m| table for fixed precoder matrices.
Eigen::MatrixXd matrix_gain_table(const ChannelMatrix &h, const std::vector<Eigen::MatrixXcd> &W);

PrecoderSet precoders_from_matrices(const std::vector<Eigen::MatrixXcd> &W, std::vector<double> budget);

} // namespace panoma::detail
