// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfisac/conic.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace cfisac
{

    std::string to_string(SolveStatus s)
    {
        switch (s)
        {
        case SolveStatus::Optimal:
            return "Optimal";
        case SolveStatus::Infeasible:
            return "Infeasible";
        case SolveStatus::NodeLimit:
            return "NodeLimit";
        case SolveStatus::NumericalFailure:
            return "NumericalFailure";
        }
        return "?";
    }

    void ConicProblem::validate() const
    {
        const int n = n_vars();
        if (lb.size() != n || ub.size() != n)
            throw InvalidConfig("bound vectors do not match variable count");
        for (int i = 0; i < n; ++i)
            if (lb(i) > ub(i))
                throw InvalidConfig("variable " + std::to_string(i) +
                                    " has lower bound above upper bound");
        auto check_idx = [&](int i) {
            if (i < 0 || i >= n)
                throw InvalidConfig("constraint references variable " +
                                    std::to_string(i) + " out of range");
        };
        for (const auto &r : le_rows)
            for (const auto &[i, v] : r.coeffs)
                check_idx(i);
        for (const auto &r : eq_rows)
            for (const auto &[i, v] : r.coeffs)
                check_idx(i);
        for (const auto &cone : cones)
        {
            if (cone.g.size() != cone.dim)
                throw InvalidConfig("SOC block offset size does not match its dimension");
            for (const auto &t : cone.f_entries)
            {
                check_idx(t.col());
                if (t.row() < 0 || t.row() >= cone.dim)
                    throw InvalidConfig("SOC block entry row out of range");
            }
            for (const auto &[i, v] : cone.lin)
                check_idx(i);
        }
    }

    Eigen::VectorXd StandardConic::recover(const Eigen::VectorXd &x_free) const
    {
        Eigen::VectorXd full = x_fixed;
        for (std::size_t j = 0; j < free_to_orig.size(); ++j)
        {
            const auto jj = static_cast<Eigen::Index>(j);
            const double d = col_scale.size() == n ? col_scale(jj) : 1.0;
            full(free_to_orig[j]) = d * x_free(jj);
        }
        return full;
    }

    StandardConic to_standard_form(const ConicProblem &p)
    {
        p.validate();
        const int n_orig = p.n_vars();
        constexpr double kFeasSlack = 1e-9;

        StandardConic sf;
        sf.x_fixed = Eigen::VectorXd::Zero(n_orig);
        std::vector<int> orig_to_free(n_orig, -1);
        for (int i = 0; i < n_orig; ++i)
        {
            if (p.lb(i) == p.ub(i))
            {
                sf.x_fixed(i) = p.lb(i);
            }
            else
            {
                orig_to_free[i] = static_cast<int>(sf.free_to_orig.size());
                sf.free_to_orig.push_back(i);
            }
        }
        sf.n = static_cast<int>(sf.free_to_orig.size());

        sf.c = Eigen::VectorXd::Zero(sf.n);
        for (int i = 0; i < n_orig; ++i)
        {
            if (orig_to_free[i] >= 0)
                sf.c(orig_to_free[i]) = p.c(i);
            else
                sf.obj_offset += p.c(i) * sf.x_fixed(i);
        }

        auto mark_infeasible = [&](const std::string &why) {
            if (!sf.trivially_infeasible)
            {
                sf.trivially_infeasible = true;
                sf.note = why;
            }
        };

        // Split a row into free-variable coefficients and a fixed-part constant.
        auto split_row = [&](const LinearRow &r,
                             std::vector<std::pair<int, double>> &free_coeffs) {
            double fixed_part = 0.0;
            free_coeffs.clear();
            for (const auto &[i, v] : r.coeffs)
            {
                if (orig_to_free[i] >= 0)
                    free_coeffs.emplace_back(orig_to_free[i], v);
                else
                    fixed_part += v * sf.x_fixed(i);
            }
            return fixed_part;
        };

        std::vector<Eigen::Triplet<double>> g_trip, a_trip;
        std::vector<double> h_vals, b_vals;
        std::vector<std::pair<int, double>> coeffs;

        auto push_ineq = [&](const std::vector<std::pair<int, double>> &cf, double rhs) {
            double scale = 0.0;
            for (const auto &[i, v] : cf)
                scale = std::max(scale, std::abs(v));
            if (scale == 0.0)
            {
                if (rhs < -kFeasSlack * (1.0 + std::abs(rhs)))
                    mark_infeasible("constant inequality violated");
                return;
            }
            const int row = static_cast<int>(h_vals.size());
            for (const auto &[i, v] : cf)
                g_trip.emplace_back(row, i, v / scale);
            h_vals.push_back(rhs / scale);
        };

        for (const auto &r : p.le_rows)
        {
            const double fixed_part = split_row(r, coeffs);
            push_ineq(coeffs, r.rhs - fixed_part);
        }
        // Finite boxes become plain inequality rows.
        for (int j = 0; j < sf.n; ++j)
        {
            const int i = sf.free_to_orig[static_cast<std::size_t>(j)];
            if (p.lb(i) > -kInf)
                push_ineq({{j, -1.0}}, -p.lb(i));
            if (p.ub(i) < kInf)
                push_ineq({{j, 1.0}}, p.ub(i));
        }
        sf.n_lin = static_cast<int>(h_vals.size());

        for (const auto &r : p.eq_rows)
        {
            const double fixed_part = split_row(r, coeffs);
            const double rhs = r.rhs - fixed_part;
            double scale = 0.0;
            for (const auto &[i, v] : coeffs)
                scale = std::max(scale, std::abs(v));
            if (scale == 0.0)
            {
                if (std::abs(rhs) > kFeasSlack * (1.0 + std::abs(rhs)))
                    mark_infeasible("constant equality violated");
                continue;
            }
            const int row = static_cast<int>(b_vals.size());
            for (const auto &[i, v] : coeffs)
                a_trip.emplace_back(row, i, v / scale);
            b_vals.push_back(rhs / scale);
        }

        for (const auto &cone : p.cones)
        {
            // Substitute fixed variables into F x + g and f^T x + h0.
            Eigen::VectorXd g_eff = cone.g;
            std::vector<std::vector<std::pair<int, double>>> rows_free(
                static_cast<std::size_t>(cone.dim));
            bool any_free = false;
            for (const auto &t : cone.f_entries)
            {
                if (orig_to_free[t.col()] >= 0)
                {
                    rows_free[static_cast<std::size_t>(t.row())].emplace_back(
                        orig_to_free[t.col()], t.value());
                    any_free = true;
                }
                else
                    g_eff(t.row()) += t.value() * sf.x_fixed(t.col());
            }
            double h0_eff = cone.h0;
            std::vector<std::pair<int, double>> top_free;
            for (const auto &[i, v] : cone.lin)
            {
                if (orig_to_free[i] >= 0)
                {
                    top_free.emplace_back(orig_to_free[i], v);
                    any_free = true;
                }
                else
                    h0_eff += v * sf.x_fixed(i);
            }
            if (!any_free)
            {
                if (g_eff.norm() > h0_eff + kFeasSlack * (1.0 + std::abs(h0_eff)))
                    mark_infeasible("constant SOC block violated");
                continue;
            }
            double scale = std::max(std::abs(h0_eff), g_eff.cwiseAbs().maxCoeff());
            for (const auto &rf : rows_free)
                for (const auto &[i, v] : rf)
                    scale = std::max(scale, std::abs(v));
            for (const auto &[i, v] : top_free)
                scale = std::max(scale, std::abs(v));
            if (scale == 0.0)
                scale = 1.0;

            // Cone slack layout: s0 = f^T x + h0, s1 = -(F x + g).
            const int base = static_cast<int>(h_vals.size());
            for (const auto &[i, v] : top_free)
                g_trip.emplace_back(base, i, -v / scale);
            h_vals.push_back(h0_eff / scale);
            for (int r = 0; r < cone.dim; ++r)
            {
                for (const auto &[i, v] : rows_free[static_cast<std::size_t>(r)])
                    g_trip.emplace_back(base + 1 + r, i, v / scale);
                h_vals.push_back(-g_eff(r) / scale);
            }
            sf.soc_dims.push_back(cone.dim + 1);
        }

        sf.m = static_cast<int>(h_vals.size());
        sf.p = static_cast<int>(b_vals.size());
        sf.G.resize(sf.m, sf.n);
        sf.G.setFromTriplets(g_trip.begin(), g_trip.end());
        sf.A.resize(sf.p, sf.n);
        sf.A.setFromTriplets(a_trip.begin(), a_trip.end());
        sf.h = Eigen::Map<Eigen::VectorXd>(h_vals.data(), sf.m);
        sf.b = Eigen::Map<Eigen::VectorXd>(b_vals.data(), sf.p);
        sf.trivially_solved = (sf.n == 0) && !sf.trivially_infeasible;

        // Ruiz equilibration: alternate row and column sqrt-max scalings.
        // Rows belonging to one SOC block share a single factor so the cone
        // structure survives; the accumulated column factors are undone in
        // recover().
        sf.col_scale = Eigen::VectorXd::Ones(sf.n);
        if (sf.n > 0 && !sf.trivially_infeasible)
        {
            for (int pass = 0; pass < 8; ++pass)
            {
                Eigen::VectorXd cmax = Eigen::VectorXd::Zero(sf.n);
                for (int j = 0; j < sf.n; ++j)
                {
                    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, j); it; ++it)
                        cmax(j) = std::max(cmax(j), std::abs(it.value()));
                    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, j); it; ++it)
                        cmax(j) = std::max(cmax(j), std::abs(it.value()));
                }
                Eigen::VectorXd dc(sf.n);
                for (int j = 0; j < sf.n; ++j)
                    dc(j) = cmax(j) > 0.0 ? 1.0 / std::sqrt(cmax(j)) : 1.0;
                for (int j = 0; j < sf.n; ++j)
                {
                    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, j); it; ++it)
                        it.valueRef() *= dc(j);
                    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, j); it; ++it)
                        it.valueRef() *= dc(j);
                }
                sf.col_scale.array() *= dc.array();

                Eigen::VectorXd rmax = Eigen::VectorXd::Zero(sf.m);
                Eigen::VectorXd amax = Eigen::VectorXd::Zero(sf.p);
                for (int j = 0; j < sf.n; ++j)
                {
                    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, j); it; ++it)
                        rmax(it.row()) = std::max(rmax(it.row()), std::abs(it.value()));
                    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, j); it; ++it)
                        amax(it.row()) = std::max(amax(it.row()), std::abs(it.value()));
                }
                // One factor per SOC block: use the block's max entry.
                Eigen::VectorXd dr(sf.m);
                for (int i = 0; i < sf.n_lin; ++i)
                    dr(i) = rmax(i) > 0.0 ? 1.0 / std::sqrt(rmax(i)) : 1.0;
                int at = sf.n_lin;
                for (int q : sf.soc_dims)
                {
                    const double blk = rmax.segment(at, q).maxCoeff();
                    const double f = blk > 0.0 ? 1.0 / std::sqrt(blk) : 1.0;
                    dr.segment(at, q).setConstant(f);
                    at += q;
                }
                Eigen::VectorXd da(sf.p);
                for (int i = 0; i < sf.p; ++i)
                    da(i) = amax(i) > 0.0 ? 1.0 / std::sqrt(amax(i)) : 1.0;
                for (int j = 0; j < sf.n; ++j)
                {
                    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, j); it; ++it)
                        it.valueRef() *= dr(it.row());
                    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, j); it; ++it)
                        it.valueRef() *= da(it.row());
                }
                sf.h.array() *= dr.array();
                if (sf.p > 0)
                    sf.b.array() *= da.array();
            }
            sf.c.array() *= sf.col_scale.array();
        }
        return sf;
    }

    FeasibilityReport check_feasible(const ConicProblem &p, const Eigen::VectorXd &x,
                                     double tol)
    {
        p.validate();
        if (x.size() != p.n_vars())
            throw InvalidConfig("solution vector length does not match problem");

        FeasibilityReport rep;
        rep.worst_violation = 0.0;
        auto consider = [&](double viol, const std::string &name) {
            if (viol > rep.worst_violation)
            {
                rep.worst_violation = viol;
                rep.worst_constraint = name;
            }
        };

        for (int i = 0; i < p.n_vars(); ++i)
        {
            consider((p.lb(i) - x(i)) / (1.0 + std::abs(p.lb(i))),
                     "lb[" + std::to_string(i) + "]");
            consider((x(i) - p.ub(i)) / (1.0 + std::abs(p.ub(i))),
                     "ub[" + std::to_string(i) + "]");
        }
        auto row_value = [&](const LinearRow &r) {
            double v = 0.0;
            for (const auto &[i, cf] : r.coeffs)
                v += cf * x(i);
            return v;
        };
        for (std::size_t j = 0; j < p.le_rows.size(); ++j)
        {
            const auto &r = p.le_rows[j];
            consider((row_value(r) - r.rhs) / (1.0 + std::abs(r.rhs)),
                     "le[" + std::to_string(j) + "]");
        }
        for (std::size_t j = 0; j < p.eq_rows.size(); ++j)
        {
            const auto &r = p.eq_rows[j];
            consider(std::abs(row_value(r) - r.rhs) / (1.0 + std::abs(r.rhs)),
                     "eq[" + std::to_string(j) + "]");
        }
        for (std::size_t j = 0; j < p.cones.size(); ++j)
        {
            const auto &cone = p.cones[j];
            Eigen::VectorXd v = cone.g;
            for (const auto &t : cone.f_entries)
                v(t.row()) += t.value() * x(t.col());
            double rhs = cone.h0;
            for (const auto &[i, cf] : cone.lin)
                rhs += cf * x(i);
            consider((v.norm() - rhs) / (1.0 + std::abs(rhs)),
                     "soc[" + std::to_string(j) + "]");
        }
        rep.ok = rep.worst_violation <= tol;
        return rep;
    }

    // ---------------------------------------------------------------------
    // Fixture serialization

    std::string conic_problem_to_json(const ConicProblem &p)
    {
        using nlohmann::json;
        json j;
        j["format"] = "cfisac-conic/1";
        j["c"] = std::vector<double>(p.c.data(), p.c.data() + p.c.size());
        auto bound_list = [](const Eigen::VectorXd &v) {
            json out = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i)
            {
                if (v(i) == kInf)
                    out.push_back("inf");
                else if (v(i) == -kInf)
                    out.push_back("-inf");
                else
                    out.push_back(v(i));
            }
            return out;
        };
        j["lb"] = bound_list(p.lb);
        j["ub"] = bound_list(p.ub);
        auto row_list = [](const std::vector<LinearRow> &rows) {
            json out = json::array();
            for (const auto &r : rows)
            {
                json jr;
                jr["rhs"] = r.rhs;
                json cf = json::array();
                for (const auto &[i, v] : r.coeffs)
                    cf.push_back({i, v});
                jr["coeffs"] = cf;
                out.push_back(jr);
            }
            return out;
        };
        j["le_rows"] = row_list(p.le_rows);
        j["eq_rows"] = row_list(p.eq_rows);
        json cones = json::array();
        for (const auto &cone : p.cones)
        {
            json jc;
            jc["dim"] = cone.dim;
            jc["h0"] = cone.h0;
            jc["g"] = std::vector<double>(cone.g.data(), cone.g.data() + cone.g.size());
            json fe = json::array();
            for (const auto &t : cone.f_entries)
                fe.push_back({t.row(), t.col(), t.value()});
            jc["F"] = fe;
            json lin = json::array();
            for (const auto &[i, v] : cone.lin)
                lin.push_back({i, v});
            jc["f"] = lin;
            cones.push_back(jc);
        }
        j["cones"] = cones;
        return j.dump();
    }

    ConicProblem conic_problem_from_json(const std::string &text)
    {
        using nlohmann::json;
        const json j = json::parse(text);
        if (j.value("format", "") != std::string("cfisac-conic/1"))
            throw InvalidConfig("unsupported conic fixture format");
        ConicProblem p;
        const auto &c = j.at("c");
        const int n = static_cast<int>(c.size());
        p.c.resize(n);
        p.lb.resize(n);
        p.ub.resize(n);
        for (int i = 0; i < n; ++i)
            p.c(i) = c.at(i).get<double>();
        auto bound = [&](const json &v) {
            if (v.is_string())
                return v.get<std::string>() == "inf" ? kInf : -kInf;
            return v.get<double>();
        };
        for (int i = 0; i < n; ++i)
        {
            p.lb(i) = bound(j.at("lb").at(i));
            p.ub(i) = bound(j.at("ub").at(i));
        }
        auto read_rows = [](const json &rows, std::vector<LinearRow> &out) {
            for (const auto &jr : rows)
            {
                LinearRow r;
                r.rhs = jr.at("rhs").get<double>();
                for (const auto &cf : jr.at("coeffs"))
                    r.coeffs.emplace_back(cf.at(0).get<int>(), cf.at(1).get<double>());
                out.push_back(std::move(r));
            }
        };
        read_rows(j.at("le_rows"), p.le_rows);
        read_rows(j.at("eq_rows"), p.eq_rows);
        for (const auto &jc : j.at("cones"))
        {
            SocBlock cone;
            cone.dim = jc.at("dim").get<int>();
            cone.h0 = jc.at("h0").get<double>();
            cone.g.resize(cone.dim);
            for (int r = 0; r < cone.dim; ++r)
                cone.g(r) = jc.at("g").at(r).get<double>();
            for (const auto &fe : jc.at("F"))
                cone.f_entries.emplace_back(fe.at(0).get<int>(), fe.at(1).get<int>(),
                                            fe.at(2).get<double>());
            for (const auto &lin : jc.at("f"))
                cone.lin.emplace_back(lin.at(0).get<int>(), lin.at(1).get<double>());
            p.cones.push_back(std::move(cone));
        }
        return p;
    }

} // namespace cfisac
