// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <Eigen/Dense>

#include "cfisac/scenario.hpp"

namespace cfisac
{

    /// Denominator values at or below this are treated as a singular FIM.
    constexpr double kSingularFimEps = 1e-30;

    /// Geometry matrices of the multistatic position CRLB.  Row index is the
    /// TX AP, column index the RX AP.
    struct GMatrices
    {
        Eigen::MatrixXd g_a; ///< x-direction information weights
        Eigen::MatrixXd g_b; ///< y-direction information weights
        Eigen::MatrixXd g_c; ///< cross term, may be negative
        Eigen::MatrixXd alpha; ///< bistatic channel gains 1 / (R_m^2 R_n^2)
        double xi = 0.0;       ///< 8 pi^2 B_s^2 / (L^2 c^2 sigma_zeta^2)
    };

    /// 2x2 Fisher information for the planar target position.
    struct FisherInfo
    {
        double f_xx = 0.0;
        double f_yy = 0.0;
        double f_xy = 0.0;

        double det() const { return f_xx * f_yy - f_xy * f_xy; }
        /// tr(F^-1); +inf when the determinant is at the singular floor.
        double inverse_trace() const;
    };

    /// Bistatic propagation delay (R_m + R_n) / c.
    double propagation_delay(double range_m_tx, double range_m_rx);

    /// Builds the G matrices from scenario geometry, RCS and radio constants.
    /// When xi_active_l_override > 0 it replaces the deployed-AP count L in
    /// the xi normalization (see README).
    GMatrices geometry_matrices(const Scenario &s, int xi_l_override = 0);

    /// Trace of the position CRLB for binary TX vector a and RX vector b,
    /// evaluated in the quadratic A = a a^T, B = b b^T form.  Returns +inf
    /// when the FIM is singular.  Requires a_l * b_l = 0 for all l.
    double crlb_trace(const GMatrices &g, const Eigen::VectorXi &a,
                      const Eigen::VectorXi &b, double p_s);

    /// Independent route to the same bound: assemble the 2x2 FIM entrywise
    /// and invert it.  crlb_trace must match fim_oracle(...).inverse_trace().
    FisherInfo fim_oracle(const GMatrices &g, const Eigen::VectorXi &a,
                          const Eigen::VectorXi &b, double p_s);

    /// Cross-multiplied linear form of the CRLB constraint for one fixed side.
    /// The free side is an L x L matrix M (A or B, entries in [0,1]):
    ///
    ///   sum_ij main_coeff(i,j) * M(i,j)  <=  0          (CRLB <= eta)
    ///   sum_ij denom_coeff(i,j) * M(i,j) >=  denom_floor (FIM nonsingular)
    struct SensingRows
    {
        Eigen::MatrixXd main_coeff;
        Eigen::MatrixXd denom_coeff;
        double denom_floor = kSingularFimEps;
    };

    enum class FixedSide
    {
        RxFixed, ///< b given, A is the free matrix
        TxFixed  ///< a given, B is the free matrix
    };

    SensingRows linear_sensing_constraint(const GMatrices &g, FixedSide side,
                                          const Eigen::VectorXi &fixed, double eta,
                                          double p_s);

    /// Structured-text export of a GMatrices fixture, and its inverse.
    std::string gmatrices_to_json(const GMatrices &g);
    GMatrices gmatrices_from_json(const std::string &text);

} // namespace cfisac
