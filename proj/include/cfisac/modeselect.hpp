// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfisac/subproblems.hpp"

namespace cfisac
{

    /// One complete network operating mode: TX vector a, RX vector b and the
    /// per-AP, per-UE transmit powers p_{lk}.
    struct ModeAssignment
    {
        Eigen::VectorXi a;      ///< length L, 1 = ISAC transmitter
        Eigen::VectorXi b;      ///< length L, 1 = sensing receiver
        Eigen::MatrixXd powers; ///< L x K, zero rows for inactive APs

        int n_tx() const { return a.size() > 0 ? a.sum() : 0; }
        int n_rx() const { return b.size() > 0 ? b.sum() : 0; }
        int total() const { return n_tx() + n_rx(); }
    };

    /// Per-constraint feasibility report of a full assignment.
    struct ConstraintReport
    {
        struct Row
        {
            std::string name;
            bool ok = false;
            double value = 0.0;
            double limit = 0.0;
        };
        std::vector<Row> rows;
        bool ok = false;
        bool comm_ok = false;
        bool sensing_ok = false;
    };

    ConstraintReport validate(const ModeAssignment &assign, const CommStats &stats,
                              const GMatrices &g, double gamma_c, double eta,
                              double p_s, double p_max);

    /// Shared inputs of all selection algorithms.
    struct SelectionInputs
    {
        CommStats stats;
        GMatrices g;
        Eigen::VectorXd ap_gain;     ///< aggregate channel gain g_l (heuristic sort)
        Eigen::VectorXd target_dist; ///< AP-target distance (heuristic sort)
        double gamma_c = 0.0;        ///< linear SINR threshold
        double eta = 0.0;            ///< CRLB threshold
        double p_s = 1.0;
        double p_max = 1.0;
        BnbOptions bnb;
    };

    struct TxSolveResult
    {
        SolveOutcome outcome;
        Eigen::VectorXi a;      ///< empty unless a feasible incumbent exists
        Eigen::MatrixXd powers; ///< L x K
    };

    struct RxSolveResult
    {
        SolveOutcome outcome;
        Eigen::VectorXi b;
    };

    /// Minimum-cardinality TX set for a fixed RX set (branch and bound on the
    /// activation-matrix program).
    TxSolveResult solve_tx_subproblem(const SelectionInputs &in,
                                      const Eigen::VectorXi &b_fixed);

    /// Minimum-cardinality RX set for a fixed TX set.
    RxSolveResult solve_rx_subproblem(const SelectionInputs &in,
                                      const Eigen::VectorXi &a_fixed);

    struct AlgoReport
    {
        ModeAssignment assignment;
        SolveStatus status = SolveStatus::NumericalFailure;
        bool feasible = false;
        bool comm_ok = false;
        bool sensing_ok = false;
        int n_tx = 0, n_rx = 0, total = 0;
        int iterations = 0;
        int restarts = 0;       ///< alternating only
        bool converged = false; ///< alternating only
        double seconds = 0.0;
        std::string message;
    };

    /// Alternating TX/RX optimization from a random initial RX draw.
    /// Throws ExhaustedRestarts after max_restarts infeasible redraws.
    AlgoReport alternating(const SelectionInputs &in, std::uint64_t seed,
                           int max_iter = 20, int max_restarts = 50);

    /// Two-stage scheme: communication-only TX minimization, then the RX
    /// subproblem for that TX set.
    AlgoReport sequential(const SelectionInputs &in);

    /// Sorted-list heuristic: gain-ordered TX growth, distance-ordered RX
    /// seeding/growth, then farthest-RX pruning.  r_init <= 0 selects the
    /// default seed size max(2, ceil(L/4)).
    AlgoReport heuristic(const SelectionInputs &in, int r_init = 0);

    /// Ground truth by full 3^L enumeration (TX / RX / off per AP); ties are
    /// broken toward the lexicographically smallest (a, b).  Throws TooLarge
    /// beyond l_cap.
    AlgoReport exhaustive_oracle(const SelectionInputs &in, int l_cap = 10);

    std::string algo_report_to_json(const AlgoReport &r);

} // namespace cfisac
