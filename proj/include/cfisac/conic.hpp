// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cfisac/errors.hpp"

namespace cfisac
{

    constexpr double kInf = std::numeric_limits<double>::infinity();

    /// One second-order cone block ||F x + g|| <= f^T x + h0 with F stored as
    /// triplets over the problem's variable indices.
    struct SocBlock
    {
        int dim = 0; ///< rows of F
        std::vector<Eigen::Triplet<double>> f_entries;
        Eigen::VectorXd g;
        std::vector<std::pair<int, double>> lin; ///< f
        double h0 = 0.0;
    };

    /// Sparse linear row sum_j coeff_j x_j (<=|=) rhs.
    struct LinearRow
    {
        std::vector<std::pair<int, double>> coeffs;
        double rhs = 0.0;
    };

    /// A conic program over a stacked real variable vector: linear objective,
    /// SOC constraints, linear inequalities/equalities and variable boxes.
    struct ConicProblem
    {
        Eigen::VectorXd c;
        Eigen::VectorXd lb, ub;
        std::vector<LinearRow> le_rows; ///< a^T x <= rhs
        std::vector<LinearRow> eq_rows; ///< a^T x  = rhs
        std::vector<SocBlock> cones;

        int n_vars() const { return static_cast<int>(c.size()); }

        int add_variable(double lower, double upper, double obj = 0.0)
        {
            const int i = n_vars();
            c.conservativeResize(i + 1);
            lb.conservativeResize(i + 1);
            ub.conservativeResize(i + 1);
            c(i) = obj;
            lb(i) = lower;
            ub(i) = upper;
            return i;
        }

        void add_le(std::vector<std::pair<int, double>> coeffs, double rhs)
        {
            le_rows.push_back({std::move(coeffs), rhs});
        }

        void add_ge(std::vector<std::pair<int, double>> coeffs, double rhs)
        {
            for (auto &cf : coeffs)
                cf.second = -cf.second;
            le_rows.push_back({std::move(coeffs), -rhs});
        }

        void add_eq(std::vector<std::pair<int, double>> coeffs, double rhs)
        {
            eq_rows.push_back({std::move(coeffs), rhs});
        }

        void add_soc(SocBlock block) { cones.push_back(std::move(block)); }

        void validate() const;
    };

    /// A conic problem plus the indices that must end up in {0, 1}.
    struct MipProblem
    {
        ConicProblem base;
        std::vector<int> binary;
        /// var = x * y over binary x, y.  Branch and bound propagates box
        /// bounds onto `var` whenever x or y gets pinned, so products of
        /// decided binaries become constants without being branched on.
        struct Product
        {
            int var = -1;
            int x = -1;
            int y = -1;
        };
        std::vector<Product> products;
        /// Objective takes integer values on every feasible integral point;
        /// enables exact bound-based pruning in branch and bound.
        bool integral_objective = true;
    };

    enum class SolveStatus
    {
        Optimal,
        Infeasible,
        NodeLimit,
        NumericalFailure
    };

    std::string to_string(SolveStatus s);

    struct SolveOutcome
    {
        SolveStatus status = SolveStatus::NumericalFailure;
        Eigen::VectorXd x;
        double objective = 0.0;

        // Convergence report of the continuous solve.
        double primal_residual = 0.0;
        double dual_residual = 0.0;
        double rel_gap = 0.0;
        int iterations = 0;

        // Infeasibility certificate (dual ray), populated when Infeasible.
        Eigen::VectorXd certificate;
        double certificate_residual = 0.0;

        // Branch-and-bound bookkeeping.
        double best_bound = -kInf;
        long nodes = 0;

        double seconds = 0.0;
        std::string message;
    };

    /// ECOS-style standard form  min c'x  s.t.  Ax = b,  Gx + s = h,
    /// s in (R+^n_lin) x SOC(q_1) x ... produced from a ConicProblem after
    /// eliminating fixed variables and equilibrating rows.
    struct StandardConic
    {
        int n = 0, p = 0, m = 0, n_lin = 0;
        Eigen::VectorXd c;
        Eigen::SparseMatrix<double> A, G;
        Eigen::VectorXd b, h;
        std::vector<int> soc_dims;
        double obj_offset = 0.0;

        bool trivially_infeasible = false;
        bool trivially_solved = false; ///< all variables fixed, constraints hold
        std::string note;

        std::vector<int> free_to_orig;
        Eigen::VectorXd x_fixed;    ///< full-length template holding fixed values
        Eigen::VectorXd col_scale;  ///< column equilibration factors (size n)

        /// Expands a solution over the free variables to the original layout,
        /// undoing the column equilibration.
        Eigen::VectorXd recover(const Eigen::VectorXd &x_free) const;
    };

    StandardConic to_standard_form(const ConicProblem &p);

    /// Independent constraint checker (never trusts solver internals).
    struct FeasibilityReport
    {
        bool ok = false;
        double worst_violation = 0.0;
        std::string worst_constraint;
    };

    FeasibilityReport check_feasible(const ConicProblem &p, const Eigen::VectorXd &x,
                                     double tol = 1e-7);

    /// Fixture format for solver regression tests.
    std::string conic_problem_to_json(const ConicProblem &p);
    ConicProblem conic_problem_from_json(const std::string &text);

} // namespace cfisac
