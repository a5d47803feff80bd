// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "cfisac/bnb.hpp"
#include "cfisac/comm.hpp"
#include "cfisac/sensing.hpp"

namespace cfisac
{

    /// Variable layouts used by the subproblem builders.  The stacked power
    /// variable rho comes first (index k*L + l), followed by the binary block.
    struct SubproblemLayout
    {
        int n_ues = 0;
        int n_aps = 0;
        int rho(int k, int l) const { return k * n_aps + l; }
        int n_rho() const { return n_ues * n_aps; }
        /// Activation matrix entry (TX problem: A, RX problem: B).
        int mat(int i, int j) const { return n_rho() + i * n_aps + j; }
        /// Activation vector entry of the communication-only problem.
        int act(int l) const { return n_rho() + l; }
    };

    /// Minimum total transmit power for a fixed TX set: min sum p_{lk}
    /// subject to per-AP power caps and the per-UE SOC SINR constraints.
    struct P1Result
    {
        SolveOutcome outcome;
        Eigen::MatrixXd powers; ///< L x K, p_{lk}; empty unless Optimal
        Eigen::MatrixXd rho;    ///< K x L
    };

    P1Result min_power_p1(const CommStats &stats, const Eigen::VectorXi &a,
                          double gamma_c, double p_max,
                          const SolveOptions &opts = {});

    /// TX-selection MISOCP for a fixed RX set (free matrix A with McCormick
    /// product rows, power-cap cones and the cross-multiplied sensing row).
    MipProblem build_tx_subproblem(const CommStats &stats, const GMatrices &g,
                                   const Eigen::VectorXi &b_fixed, double gamma_c,
                                   double eta, double p_s, double p_max);

    /// RX-selection MILP for a fixed TX set (free matrix B).
    MipProblem build_rx_subproblem(const GMatrices &g, const Eigen::VectorXi &a_fixed,
                                   double eta, double p_s);

    /// Communication-only TX minimization (activation vector a, no sensing).
    MipProblem build_comm_only_problem(const CommStats &stats, double gamma_c,
                                       double p_max);

    /// Layout helper matching the problem built for `stats`.
    SubproblemLayout layout_for(const CommStats &stats);

    /// Extracts diag of the activation matrix from a solved TX/RX subproblem.
    Eigen::VectorXi extract_diag(const SubproblemLayout &lay, const Eigen::VectorXd &x,
                                 bool has_rho);

    /// Extracts rho (K x L) from a solved problem that contains power variables.
    Eigen::MatrixXd extract_rho(const SubproblemLayout &lay, const Eigen::VectorXd &x);

} // namespace cfisac
