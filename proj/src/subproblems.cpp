// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfisac/subproblems.hpp"

#include <cmath>

namespace cfisac
{

    namespace
    {
        constexpr double kDropTol = 0.0; // keep exact zeros out, nothing else

        /// Appends a per-UE SINR cone (built over the stacked rho variable,
        /// which occupies indices 0 .. K*L-1 of every problem with powers).
        void add_sinr_cones(ConicProblem &prob, const CommStats &stats,
                            double gamma_c)
        {
            for (int k = 0; k < stats.n_ues(); ++k)
            {
                const ConeConstraint cc = soc_constraint(stats, gamma_c, k);
                SocBlock blk;
                blk.dim = static_cast<int>(cc.f_mat.rows());
                blk.g = cc.g_vec;
                blk.h0 = cc.h0;
                for (Eigen::Index r = 0; r < cc.f_mat.rows(); ++r)
                    for (Eigen::Index c = 0; c < cc.f_mat.cols(); ++c)
                        if (std::abs(cc.f_mat(r, c)) > kDropTol)
                            blk.f_entries.emplace_back(static_cast<int>(r),
                                                       static_cast<int>(c),
                                                       cc.f_mat(r, c));
                for (Eigen::Index j = 0; j < cc.f_lin.size(); ++j)
                    if (std::abs(cc.f_lin(j)) > kDropTol)
                        blk.lin.emplace_back(static_cast<int>(j), cc.f_lin(j));
                prob.add_soc(std::move(blk));
            }
        }

        /// Per-link linear activation bounds rho_{kl} <= sqrt(p_max) * act.
        /// Valid for binary act and tighter than the power-cap cone at
        /// fractional act (the cone only forces act >= sum_k rho^2 / p_max),
        /// so relaxation bounds improve and the search tree shrinks.
        void add_activation_link_rows(ConicProblem &prob,
                                      const SubproblemLayout &lay, int l,
                                      int act_var, double p_max)
        {
            const double rho_cap = std::sqrt(p_max);
            for (int k = 0; k < lay.n_ues; ++k)
                prob.add_le({{lay.rho(k, l), 1.0}, {act_var, -rho_cap}}, 0.0);
        }

        /// sum_k rho_{kl}^2 <= act * p_max as the rotated cone
        /// || [2 rho_.l ; act*p_max - 1] || <= act*p_max + 1.
        void add_power_cap_cone(ConicProblem &prob, const SubproblemLayout &lay,
                                int l, int act_var, double p_max)
        {
            SocBlock blk;
            blk.dim = lay.n_ues + 1;
            blk.g = Eigen::VectorXd::Zero(blk.dim);
            blk.g(lay.n_ues) = -1.0;
            for (int k = 0; k < lay.n_ues; ++k)
                blk.f_entries.emplace_back(k, lay.rho(k, l), 2.0);
            blk.f_entries.emplace_back(lay.n_ues, act_var, p_max);
            blk.lin.emplace_back(act_var, p_max);
            blk.h0 = 1.0;
            prob.add_soc(std::move(blk));
        }

        /// McCormick product rows forcing M_ij = M_ii * M_jj for binary
        /// diagonals, plus the two sensing rows, the >=1-active row and the
        /// objective over the diagonal.  `fixed_zero(l)` marks diagonals that
        /// are pinned to zero (the other mode's APs).  Only the diagonal
        /// enters the branch list; the off-diagonal entries are registered as
        /// products of their diagonals, so bound propagation turns them into
        /// constants the moment both factors are pinned.
        void add_activation_matrix(MipProblem &mip, const SubproblemLayout &lay,
                                   const Eigen::VectorXi &fixed_zero,
                                   const SensingRows &rows)
        {
            ConicProblem &prob = mip.base;
            const int L = lay.n_aps;
            for (int i = 0; i < L; ++i)
                for (int j = 0; j < L; ++j)
                {
                    const bool zero = fixed_zero(i) != 0 || fixed_zero(j) != 0;
                    const int v = prob.add_variable(0.0, zero ? 0.0 : 1.0,
                                                    i == j ? 1.0 : 0.0);
                    if (v != lay.mat(i, j))
                        throw InvalidConfig("activation layout mismatch");
                    if (i == j)
                        mip.binary.push_back(v);
                    else if (!zero)
                        mip.products.push_back(
                            {v, lay.mat(i, i), lay.mat(j, j)});
                }
            for (int i = 0; i < L; ++i)
                for (int j = 0; j < L; ++j)
                {
                    if (i == j || fixed_zero(i) != 0 || fixed_zero(j) != 0)
                        continue;
                    prob.add_le({{lay.mat(i, j), 1.0}, {lay.mat(j, j), -1.0}}, 0.0);
                    prob.add_le({{lay.mat(i, j), 1.0}, {lay.mat(i, i), -1.0}}, 0.0);
                    prob.add_le({{lay.mat(i, i), 1.0},
                                 {lay.mat(j, j), 1.0},
                                 {lay.mat(i, j), -1.0}},
                                1.0);
                }

            const double den_scale = rows.denom_coeff.cwiseAbs().maxCoeff();
            if (!(den_scale > 0.0))
            {
                // The fixed side annihilates the information matrix for every
                // choice of the free side: the problem is infeasible.
                prob.add_le({}, -1.0);
                return;
            }
            std::vector<std::pair<int, double>> main_row, den_row;
            for (int i = 0; i < L; ++i)
                for (int j = 0; j < L; ++j)
                {
                    if (fixed_zero(i) != 0 || fixed_zero(j) != 0)
                        continue;
                    if (rows.main_coeff(i, j) != 0.0)
                        main_row.emplace_back(lay.mat(i, j), rows.main_coeff(i, j));
                    if (rows.denom_coeff(i, j) != 0.0)
                        den_row.emplace_back(lay.mat(i, j), rows.denom_coeff(i, j));
                }
            prob.add_le(std::move(main_row), 0.0);
            prob.add_ge(std::move(den_row), rows.denom_floor);

            std::vector<std::pair<int, double>> at_least_one;
            for (int l = 0; l < L; ++l)
                if (fixed_zero(l) == 0)
                    at_least_one.emplace_back(lay.mat(l, l), 1.0);
            if (at_least_one.empty())
                prob.add_le({}, -1.0);
            else
                prob.add_ge(std::move(at_least_one), 1.0);
        }

        void check_mode_inputs(const Eigen::VectorXi &v, Eigen::Index L,
                               const char *what)
        {
            if (v.size() != L)
                throw InvalidConfig(std::string(what) + " has wrong length");
            for (Eigen::Index l = 0; l < L; ++l)
                if (v(l) != 0 && v(l) != 1)
                    throw InvalidConfig(std::string(what) + " must be binary");
        }
    } // namespace

    SubproblemLayout layout_for(const CommStats &stats)
    {
        return SubproblemLayout{stats.n_ues(), stats.n_aps()};
    }

    P1Result min_power_p1(const CommStats &stats, const Eigen::VectorXi &a,
                          double gamma_c, double p_max, const SolveOptions &opts)
    {
        const SubproblemLayout lay = layout_for(stats);
        check_mode_inputs(a, lay.n_aps, "TX vector");
        if (p_max <= 0.0)
            throw InvalidConfig("power budget must be positive");

        ConicProblem prob;
        const double rho_cap = std::sqrt(p_max);
        for (int k = 0; k < lay.n_ues; ++k)
            for (int l = 0; l < lay.n_aps; ++l)
                prob.add_variable(0.0, a(l) != 0 ? rho_cap : 0.0);
        std::vector<int> t_var(lay.n_aps, -1);
        for (int l = 0; l < lay.n_aps; ++l)
            t_var[l] = prob.add_variable(0.0, a(l) != 0 ? p_max : 0.0, 1.0);
        for (int l = 0; l < lay.n_aps; ++l)
            if (a(l) != 0)
                add_power_cap_cone(prob, lay, l, t_var[l], 1.0);
        add_sinr_cones(prob, stats, gamma_c);

        P1Result res;
        res.outcome = solve_conic(prob, opts);
        if (res.outcome.status == SolveStatus::Optimal)
        {
            res.rho = extract_rho(lay, res.outcome.x);
            res.powers = res.rho.array().square().matrix().transpose();
            res.outcome.objective = res.powers.sum();
        }
        return res;
    }

    MipProblem build_tx_subproblem(const CommStats &stats, const GMatrices &g,
                                   const Eigen::VectorXi &b_fixed, double gamma_c,
                                   double eta, double p_s, double p_max)
    {
        const SubproblemLayout lay = layout_for(stats);
        if (g.g_a.rows() != lay.n_aps)
            throw InvalidConfig("G matrices do not match the channel statistics");
        check_mode_inputs(b_fixed, lay.n_aps, "RX vector");
        if (p_max <= 0.0)
            throw InvalidConfig("power budget must be positive");

        MipProblem mip;
        ConicProblem &prob = mip.base;
        const double rho_cap = std::sqrt(p_max);
        for (int k = 0; k < lay.n_ues; ++k)
            for (int l = 0; l < lay.n_aps; ++l)
                prob.add_variable(0.0, b_fixed(l) != 0 ? 0.0 : rho_cap);
        const SensingRows rows =
            linear_sensing_constraint(g, FixedSide::RxFixed, b_fixed, eta, p_s);
        add_activation_matrix(mip, lay, b_fixed, rows);
        for (int l = 0; l < lay.n_aps; ++l)
            if (b_fixed(l) == 0)
            {
                add_power_cap_cone(prob, lay, l, lay.mat(l, l), p_max);
                add_activation_link_rows(prob, lay, l, lay.mat(l, l), p_max);
            }
        add_sinr_cones(prob, stats, gamma_c);
        return mip;
    }

    MipProblem build_rx_subproblem(const GMatrices &g, const Eigen::VectorXi &a_fixed,
                                   double eta, double p_s)
    {
        const int L = static_cast<int>(g.g_a.rows());
        check_mode_inputs(a_fixed, L, "TX vector");
        SubproblemLayout lay{0, L};
        MipProblem mip;
        const SensingRows rows =
            linear_sensing_constraint(g, FixedSide::TxFixed, a_fixed, eta, p_s);
        add_activation_matrix(mip, lay, a_fixed, rows);
        return mip;
    }

    MipProblem build_comm_only_problem(const CommStats &stats, double gamma_c,
                                       double p_max)
    {
        const SubproblemLayout lay = layout_for(stats);
        if (p_max <= 0.0)
            throw InvalidConfig("power budget must be positive");
        MipProblem mip;
        ConicProblem &prob = mip.base;
        const double rho_cap = std::sqrt(p_max);
        for (int k = 0; k < lay.n_ues; ++k)
            for (int l = 0; l < lay.n_aps; ++l)
                prob.add_variable(0.0, rho_cap);
        for (int l = 0; l < lay.n_aps; ++l)
        {
            const int v = prob.add_variable(0.0, 1.0, 1.0);
            if (v != lay.act(l))
                throw InvalidConfig("activation layout mismatch");
            mip.binary.push_back(v);
        }
        for (int l = 0; l < lay.n_aps; ++l)
        {
            add_power_cap_cone(prob, lay, l, lay.act(l), p_max);
            add_activation_link_rows(prob, lay, l, lay.act(l), p_max);
        }
        add_sinr_cones(prob, stats, gamma_c);
        return mip;
    }

    Eigen::VectorXi extract_diag(const SubproblemLayout &lay, const Eigen::VectorXd &x,
                                 bool has_rho)
    {
        const int off = has_rho ? lay.n_rho() : 0;
        Eigen::VectorXi d(lay.n_aps);
        for (int l = 0; l < lay.n_aps; ++l)
            d(l) = static_cast<int>(
                std::lround(x(off + l * lay.n_aps + l)));
        return d;
    }

    Eigen::MatrixXd extract_rho(const SubproblemLayout &lay, const Eigen::VectorXd &x)
    {
        Eigen::MatrixXd rho(lay.n_ues, lay.n_aps);
        for (int k = 0; k < lay.n_ues; ++k)
            for (int l = 0; l < lay.n_aps; ++l)
                rho(k, l) = std::max(0.0, x(lay.rho(k, l)));
        return rho;
    }

} // namespace cfisac
