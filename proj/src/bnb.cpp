// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfisac/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace cfisac
{

    namespace
    {
        struct Node
        {
            Eigen::VectorXd lb, ub;
            double bound = -kInf; ///< parent relaxation objective
        };

        struct NodeOrder
        {
            bool operator()(const Node &a, const Node &b) const
            {
                return a.bound > b.bound; // min-heap on the bound
            }
        };
    } // namespace

    SolveOutcome branch_and_bound(const MipProblem &m, const BnbOptions &opts)
    {
        const auto t_start = std::chrono::steady_clock::now();
        m.base.validate();
        for (int i : m.binary)
        {
            if (i < 0 || i >= m.base.n_vars())
                throw InvalidConfig("binary index out of range");
            if (m.base.lb(i) < 0.0 || m.base.ub(i) > 1.0)
                throw InvalidConfig("binary variable " + std::to_string(i) +
                                    " must be boxed inside [0, 1]");
        }

        for (const auto &p : m.products)
            if (p.var < 0 || p.var >= m.base.n_vars() || p.x < 0 ||
                p.x >= m.base.n_vars() || p.y < 0 || p.y >= m.base.n_vars())
                throw InvalidConfig("product index out of range");

        ConicProblem relax = m.base;
        const double improve =
            m.integral_objective ? 1.0 - 1e-9 : 1e-9;

        // Tightens product boxes from their factors' boxes: v = x*y over
        // binaries obeys max(0, lb_x + lb_y - 1) <= v <= min(ub_x, ub_y).
        // Returns false when some box empties, i.e. the node is infeasible.
        auto propagate = [&m](Node &n) {
            for (const auto &p : m.products)
            {
                n.lb(p.var) = std::max(n.lb(p.var),
                                       n.lb(p.x) + n.lb(p.y) - 1.0);
                n.ub(p.var) = std::min({n.ub(p.var), n.ub(p.x), n.ub(p.y)});
                if (n.lb(p.var) > n.ub(p.var))
                    return false;
            }
            return true;
        };

        std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
        {
            Node root{m.base.lb, m.base.ub, -kInf};
            if (propagate(root))
                open.push(std::move(root));
        }

        SolveOutcome best;
        bool have_incumbent = false;
        bool had_failure = false;
        long nodes = 0;
        bool out_of_nodes = false;

        while (!open.empty())
        {
            Node node = open.top();
            open.pop();
            if (have_incumbent && node.bound >= best.objective - improve)
                continue;
            if (nodes >= opts.max_nodes)
            {
                out_of_nodes = true;
                break;
            }
            ++nodes;

            relax.lb = node.lb;
            relax.ub = node.ub;
            SolveOutcome r = solve_conic(relax, opts.conic);
            if (r.status == SolveStatus::NumericalFailure)
            {
                // One retry with heavier regularization before giving up on the node.
                SolveOptions retry = opts.conic;
                retry.static_reg *= 100.0;
                r = solve_conic(relax, retry);
            }
            auto first_unfixed = [&]() {
                for (int i : m.binary)
                    if (node.lb(i) < node.ub(i))
                        return i;
                return -1;
            };

            if (r.status == SolveStatus::Infeasible)
                continue;
            if (r.status != SolveStatus::Optimal)
            {
                // Undecided relaxation: split the node rather than giving up.
                // Children have one more binary pinned through its bounds, so
                // they are strictly easier; a fully pinned leaf is decided
                // exactly during presolve.
                const int bv = first_unfixed();
                if (bv < 0)
                {
                    had_failure = true;
                    continue;
                }
                Node down = node, up = node;
                down.lb(bv) = 0.0;
                down.ub(bv) = 0.0;
                up.lb(bv) = 1.0;
                up.ub(bv) = 1.0;
                if (propagate(down))
                    open.push(std::move(down));
                if (propagate(up))
                    open.push(std::move(up));
                continue;
            }
            // The relaxation objective is only as accurate as the conic solve;
            // slacken it before trusting it as a lower bound, otherwise a
            // reduced-accuracy solve that lands a hair above the true optimum
            // can prune the subtree that contains it.
            const double bound =
                r.objective - 1e-6 * (1.0 + std::abs(r.objective));
            if (have_incumbent && bound >= best.objective - improve)
                continue;

            // Most fractional binary, if any.
            int branch_var = -1;
            double worst_frac = opts.int_tol;
            for (int i : m.binary)
            {
                const double frac = std::abs(r.x(i) - std::round(r.x(i)));
                if (frac > worst_frac)
                {
                    worst_frac = frac;
                    branch_var = i;
                }
            }
            if (branch_var < 0)
            {
                // Integral within tolerance: snap the binaries to exact 0/1
                // and revalidate against the original constraints (sub-tol
                // fractional parts can be load-bearing when coefficients are
                // large, and the solver is never trusted alone).
                Eigen::VectorXd xr = r.x;
                for (int i : m.binary)
                    xr(i) = std::round(xr(i));
                const FeasibilityReport rep =
                    check_feasible(m.base, xr, opts.feas_tol);
                if (rep.ok)
                {
                    best = r;
                    best.x = std::move(xr);
                    best.objective = m.base.c.dot(best.x);
                    have_incumbent = true;
                    continue;
                }
                // The snapped point is infeasible, so the near-integral
                // relaxation was misleading; pin one of the still-free
                // binaries so the children resolve it exactly.
                branch_var = first_unfixed();
                if (branch_var < 0)
                {
                    had_failure = true;
                    continue;
                }
            }
            Node down = node, up = node;
            down.lb(branch_var) = 0.0;
            down.ub(branch_var) = 0.0;
            up.lb(branch_var) = 1.0;
            up.ub(branch_var) = 1.0;
            down.bound = bound;
            up.bound = bound;
            if (propagate(down))
                open.push(std::move(down));
            if (propagate(up))
                open.push(std::move(up));
        }

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                .count();
        SolveOutcome out;
        if (have_incumbent)
        {
            out = best;
            out.status = out_of_nodes ? SolveStatus::NodeLimit : SolveStatus::Optimal;
            out.best_bound = out_of_nodes || had_failure
                                 ? (open.empty() ? best.objective : open.top().bound)
                                 : best.objective;
            if (had_failure && !out_of_nodes)
            {
                out.status = SolveStatus::NodeLimit;
                out.message = "subproblem numerical failures; optimality not proven";
            }
        }
        else if (out_of_nodes || had_failure)
        {
            out.status = out_of_nodes ? SolveStatus::NodeLimit
                                      : SolveStatus::NumericalFailure;
            out.message = out_of_nodes ? "node limit reached without incumbent"
                                       : "relaxation failures prevented a conclusion";
            out.best_bound = open.empty() ? kInf : open.top().bound;
        }
        else
        {
            out.status = SolveStatus::Infeasible;
            out.best_bound = kInf;
        }
        out.nodes = nodes;
        out.seconds = seconds;
        return out;
    }

} // namespace cfisac
