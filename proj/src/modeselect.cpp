// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfisac/modeselect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace cfisac
{

    namespace
    {
        constexpr double kRelTol = 1e-6;

        double elapsed(const std::chrono::steady_clock::time_point &t0)
        {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                 t0)
                .count();
        }

        Eigen::MatrixXd rho_from_powers(const Eigen::MatrixXd &powers)
        {
            return powers.cwiseMax(0.0).cwiseSqrt().transpose(); // K x L
        }

        bool same_vec(const Eigen::VectorXi &a, const Eigen::VectorXi &b)
        {
            return a.size() == b.size() && (a.array() == b.array()).all();
        }

        /// True when the outcome carries a usable (possibly suboptimal) point.
        bool has_point(const SolveOutcome &r)
        {
            return (r.status == SolveStatus::Optimal ||
                    r.status == SolveStatus::NodeLimit) &&
                   r.x.size() > 0;
        }

        void finish_report(AlgoReport &rep, const SelectionInputs &in)
        {
            const ConstraintReport cr =
                validate(rep.assignment, in.stats, in.g, in.gamma_c, in.eta,
                         in.p_s, in.p_max);
            rep.feasible = cr.ok;
            rep.comm_ok = cr.comm_ok;
            rep.sensing_ok = cr.sensing_ok;
            rep.n_tx = rep.assignment.n_tx();
            rep.n_rx = rep.assignment.n_rx();
            rep.total = rep.assignment.total();
        }

        /// Clears the solver-noise residual powers of inactive APs; their rows
        /// are exact zeros in the model and only carry round-off.
        void zero_inactive_rows(Eigen::MatrixXd &powers, const Eigen::VectorXi &a)
        {
            for (Eigen::Index l = 0; l < powers.rows(); ++l)
                if (a(static_cast<int>(l)) == 0)
                    powers.row(l).setZero();
        }

        std::vector<int> sorted_indices(const Eigen::VectorXd &key, bool descending)
        {
            std::vector<int> idx(static_cast<std::size_t>(key.size()));
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
                return descending ? key(i) > key(j) : key(i) < key(j);
            });
            return idx;
        }
    } // namespace

    ConstraintReport validate(const ModeAssignment &assign, const CommStats &stats,
                              const GMatrices &g, double gamma_c, double eta,
                              double p_s, double p_max)
    {
        ConstraintReport rep;
        const int L = stats.n_aps();
        const int K = stats.n_ues();
        auto push = [&rep](std::string name, bool ok, double value, double limit) {
            rep.rows.push_back({std::move(name), ok, value, limit});
        };

        bool shapes_ok = assign.a.size() == L && assign.b.size() == L &&
                         assign.powers.rows() == L && assign.powers.cols() == K;
        push("shapes", shapes_ok, 0.0, 0.0);
        if (!shapes_ok)
        {
            rep.ok = rep.comm_ok = rep.sensing_ok = false;
            return rep;
        }

        bool binaries_ok = true, exclusive_ok = true;
        for (int l = 0; l < L; ++l)
        {
            if ((assign.a(l) != 0 && assign.a(l) != 1) ||
                (assign.b(l) != 0 && assign.b(l) != 1))
                binaries_ok = false;
            if (assign.a(l) + assign.b(l) > 1)
                exclusive_ok = false;
        }
        push("binary_modes", binaries_ok, 0.0, 0.0);
        push("mode_exclusivity", exclusive_ok, 0.0, 1.0);

        bool power_ok = true;
        for (int l = 0; l < L; ++l)
        {
            const double used = assign.powers.row(l).sum();
            const double cap = (assign.a(l) == 1 ? p_max : 0.0);
            const bool row_ok = assign.powers.row(l).minCoeff() >= -1e-12 &&
                                used <= cap * (1.0 + kRelTol) + 1e-12;
            if (!row_ok)
                power_ok = false;
            push("power_cap[" + std::to_string(l) + "]", row_ok, used, cap);
        }

        const Eigen::MatrixXd rho = rho_from_powers(assign.powers);
        bool sinr_ok = true;
        for (int k = 0; k < K; ++k)
        {
            const double s = sinr(stats, PowerVector{rho}, k);
            const bool row_ok = s >= gamma_c * (1.0 - kRelTol);
            if (!row_ok)
                sinr_ok = false;
            push("sinr[" + std::to_string(k) + "]", row_ok, s, gamma_c);
        }

        double crlb = kInf;
        if (binaries_ok && exclusive_ok)
            crlb = crlb_trace(g, assign.a, assign.b, p_s);
        const bool crlb_ok = crlb <= eta * (1.0 + kRelTol);
        push("crlb", crlb_ok, crlb, eta);

        rep.comm_ok = sinr_ok && power_ok;
        rep.sensing_ok = crlb_ok;
        rep.ok = shapes_ok && binaries_ok && exclusive_ok && power_ok && sinr_ok &&
                 crlb_ok;
        return rep;
    }

    TxSolveResult solve_tx_subproblem(const SelectionInputs &in,
                                      const Eigen::VectorXi &b_fixed)
    {
        const SubproblemLayout lay = layout_for(in.stats);
        MipProblem mip = build_tx_subproblem(in.stats, in.g, b_fixed, in.gamma_c,
                                             in.eta, in.p_s, in.p_max);
        TxSolveResult res;
        res.outcome = branch_and_bound(mip, in.bnb);
        if (has_point(res.outcome))
        {
            res.a = extract_diag(lay, res.outcome.x, true);
            res.powers = extract_rho(lay, res.outcome.x)
                             .array()
                             .square()
                             .matrix()
                             .transpose();
            zero_inactive_rows(res.powers, res.a);
        }
        return res;
    }

    RxSolveResult solve_rx_subproblem(const SelectionInputs &in,
                                      const Eigen::VectorXi &a_fixed)
    {
        const int L = in.stats.n_aps();
        MipProblem mip = build_rx_subproblem(in.g, a_fixed, in.eta, in.p_s);
        RxSolveResult res;
        res.outcome = branch_and_bound(mip, in.bnb);
        if (has_point(res.outcome))
        {
            const SubproblemLayout lay{0, L};
            res.b = extract_diag(lay, res.outcome.x, false);
        }
        return res;
    }

    AlgoReport alternating(const SelectionInputs &in, std::uint64_t seed,
                           int max_iter, int max_restarts)
    {
        if (max_iter < 1)
            throw InvalidConfig("alternating needs at least one iteration");
        const auto t0 = std::chrono::steady_clock::now();
        const int L = in.stats.n_aps();
        std::seed_seq seq{seed, static_cast<std::uint64_t>(0x616c7465726eULL)};
        std::mt19937_64 rng(seq);

        auto draw_rx = [&rng, L]() {
            Eigen::VectorXi b = Eigen::VectorXi::Zero(L);
            do
            {
                for (int l = 0; l < L; ++l)
                    b(l) = static_cast<int>(rng() >> 63);
            } while (b.sum() == 0);
            return b;
        };

        AlgoReport rep;
        Eigen::VectorXi b = draw_rx();
        Eigen::VectorXi prev_a, prev_b;
        bool have_prev = false, have_assign = false;
        TxSolveResult last_tx;

        auto restart = [&](const char *why) {
            ++rep.restarts;
            if (rep.restarts > max_restarts)
                throw ExhaustedRestarts(std::string("alternating: ") + why +
                                        " after " + std::to_string(rep.restarts) +
                                        " restarts");
            b = draw_rx();
            have_prev = false;
        };

        for (int i = 1; i <= max_iter; ++i)
        {
            rep.iterations = i;
            TxSolveResult tx = solve_tx_subproblem(in, b);
            if (tx.a.size() == 0)
            {
                restart("TX stage infeasible");
                continue;
            }
            RxSolveResult rx = solve_rx_subproblem(in, tx.a);
            if (rx.b.size() == 0)
            {
                restart("RX stage infeasible");
                continue;
            }
            have_assign = true;
            last_tx = tx;
            b = rx.b;
            if (have_prev && same_vec(prev_a, tx.a) && same_vec(prev_b, rx.b))
            {
                rep.converged = true;
                break;
            }
            prev_a = tx.a;
            prev_b = rx.b;
            have_prev = true;
        }

        if (!have_assign)
        {
            rep.status = SolveStatus::Infeasible;
            rep.message = "no feasible iterate within the iteration budget";
            rep.seconds = elapsed(t0);
            return rep;
        }
        rep.assignment = {last_tx.a, b, last_tx.powers};
        rep.status = SolveStatus::Optimal;
        finish_report(rep, in);
        rep.seconds = elapsed(t0);
        return rep;
    }

    AlgoReport sequential(const SelectionInputs &in)
    {
        const auto t0 = std::chrono::steady_clock::now();
        AlgoReport rep;
        rep.iterations = 2;

        MipProblem stage1 =
            build_comm_only_problem(in.stats, in.gamma_c, in.p_max);
        const SolveOutcome r1 = branch_and_bound(stage1, in.bnb);
        if (!has_point(r1))
        {
            rep.status = r1.status;
            rep.message = "communication stage: " + to_string(r1.status);
            rep.seconds = elapsed(t0);
            return rep;
        }
        const SubproblemLayout lay = layout_for(in.stats);
        Eigen::VectorXi a(in.stats.n_aps());
        for (int l = 0; l < in.stats.n_aps(); ++l)
            a(l) = static_cast<int>(std::lround(r1.x(lay.act(l))));
        Eigen::MatrixXd powers =
            extract_rho(lay, r1.x).array().square().matrix().transpose();
        zero_inactive_rows(powers, a);

        const RxSolveResult rx = solve_rx_subproblem(in, a);
        if (rx.b.size() == 0)
        {
            rep.status = rx.outcome.status;
            rep.message = "sensing stage: " + to_string(rx.outcome.status);
            rep.seconds = elapsed(t0);
            return rep;
        }
        rep.assignment = {a, rx.b, powers};
        rep.status = SolveStatus::Optimal;
        finish_report(rep, in);
        rep.seconds = elapsed(t0);
        return rep;
    }

    AlgoReport heuristic(const SelectionInputs &in, int r_init)
    {
        const auto t0 = std::chrono::steady_clock::now();
        const int L = in.stats.n_aps();
        if (in.ap_gain.size() != L || in.target_dist.size() != L)
            throw InvalidConfig("heuristic needs ap_gain and target_dist of length L");
        const int r_seed =
            r_init > 0 ? r_init : std::max(2, (L + 3) / 4);

        const std::vector<int> tx_order = sorted_indices(in.ap_gain, true);
        const std::vector<int> rx_order = sorted_indices(in.target_dist, false);

        AlgoReport rep;
        Eigen::VectorXi a = Eigen::VectorXi::Zero(L);
        Eigen::VectorXi b = Eigen::VectorXi::Zero(L);
        std::size_t tx_pos = 0;

        auto fail = [&](const char *why) {
            rep.status = SolveStatus::Infeasible;
            rep.message = why;
            rep.seconds = elapsed(t0);
            return rep;
        };
        auto add_next_tx = [&]() {
            while (tx_pos < tx_order.size() && b(tx_order[tx_pos]) == 1)
                ++tx_pos;
            if (tx_pos >= tx_order.size())
                return false;
            a(tx_order[tx_pos++]) = 1;
            return true;
        };

        // Grow the TX prefix until the minimum-power problem turns feasible.
        P1Result p1;
        do
        {
            if (!add_next_tx())
                return fail("SINR targets unreachable with every AP transmitting");
            ++rep.iterations;
            p1 = min_power_p1(in.stats, a, in.gamma_c, in.p_max, in.bnb.conic);
        } while (p1.outcome.status != SolveStatus::Optimal);

        // Seed the RX set with the closest non-TX APs.
        int seeded = 0;
        for (int idx : rx_order)
            if (a(idx) == 0 && seeded < r_seed)
            {
                b(idx) = 1;
                ++seeded;
            }

        // Grow until the sensing bound holds: more TX power on the target
        // first, extra receivers once the TX list runs out.
        while (crlb_trace(in.g, a, b, in.p_s) > in.eta)
        {
            ++rep.iterations;
            if (add_next_tx())
                continue;
            bool added_rx = false;
            for (int idx : rx_order)
                if (a(idx) == 0 && b(idx) == 0)
                {
                    b(idx) = 1;
                    added_rx = true;
                    break;
                }
            if (!added_rx)
                return fail("sensing threshold unreachable with every AP active");
        }

        // Prune receivers farthest from the target while the bound survives,
        // then roll back the removal that broke it.
        int last_removed = -1;
        while (true)
        {
            if (crlb_trace(in.g, a, b, in.p_s) > in.eta)
            {
                if (last_removed >= 0)
                    b(last_removed) = 1;
                break;
            }
            int farthest = -1;
            for (auto it = rx_order.rbegin(); it != rx_order.rend(); ++it)
                if (b(*it) == 1)
                {
                    farthest = *it;
                    break;
                }
            if (farthest < 0)
                break; // nothing left to remove and the bound still holds
            b(farthest) = 0;
            last_removed = farthest;
        }

        // Final power allocation for the settled TX set.
        p1 = min_power_p1(in.stats, a, in.gamma_c, in.p_max, in.bnb.conic);
        if (p1.outcome.status != SolveStatus::Optimal)
            return fail("power allocation failed for the final TX set");

        rep.assignment = {a, b, p1.powers};
        rep.status = SolveStatus::Optimal;
        finish_report(rep, in);
        rep.seconds = elapsed(t0);
        return rep;
    }

    AlgoReport exhaustive_oracle(const SelectionInputs &in, int l_cap)
    {
        const auto t0 = std::chrono::steady_clock::now();
        const int L = in.stats.n_aps();
        if (L > l_cap)
            throw TooLarge("exhaustive oracle limited to " + std::to_string(l_cap) +
                           " APs, got " + std::to_string(L));

        // Feasible minimum transmit powers per TX set, memoized by bitmask.
        std::unordered_map<std::uint32_t, Eigen::MatrixXd> p1_cache;
        std::unordered_map<std::uint32_t, bool> p1_ok;
        auto p1_feasible = [&](const Eigen::VectorXi &a, std::uint32_t mask) {
            auto it = p1_ok.find(mask);
            if (it != p1_ok.end())
                return it->second;
            const P1Result r =
                min_power_p1(in.stats, a, in.gamma_c, in.p_max, in.bnb.conic);
            const bool ok = r.outcome.status == SolveStatus::Optimal;
            p1_ok.emplace(mask, ok);
            if (ok)
                p1_cache.emplace(mask, r.powers);
            return ok;
        };

        auto lex_less = [](const Eigen::VectorXi &a1, const Eigen::VectorXi &b1,
                           const Eigen::VectorXi &a2, const Eigen::VectorXi &b2) {
            for (int l = 0; l < a1.size(); ++l)
                if (a1(l) != a2(l))
                    return a1(l) < a2(l);
            for (int l = 0; l < b1.size(); ++l)
                if (b1(l) != b2(l))
                    return b1(l) < b2(l);
            return false;
        };

        AlgoReport rep;
        bool found = false;
        int best_count = L + L + 1;
        Eigen::VectorXi best_a, best_b;
        std::uint32_t best_mask = 0;

        std::uint64_t n_codes = 1;
        for (int l = 0; l < L; ++l)
            n_codes *= 3;
        Eigen::VectorXi a(L), b(L);
        for (std::uint64_t code = 0; code < n_codes; ++code)
        {
            std::uint64_t rem = code;
            int count = 0;
            std::uint32_t mask = 0;
            for (int l = 0; l < L; ++l)
            {
                const int trit = static_cast<int>(rem % 3);
                rem /= 3;
                a(l) = trit == 1 ? 1 : 0;
                b(l) = trit == 2 ? 1 : 0;
                count += a(l) + b(l);
                if (a(l) == 1)
                    mask |= 1u << l;
            }
            if (found && (count > best_count ||
                          (count == best_count &&
                           !lex_less(a, b, best_a, best_b))))
                continue;
            ++rep.iterations;
            if (crlb_trace(in.g, a, b, in.p_s) > in.eta)
                continue;
            if (!p1_feasible(a, mask))
                continue;
            found = true;
            best_count = count;
            best_a = a;
            best_b = b;
            best_mask = mask;
        }

        if (!found)
        {
            rep.status = SolveStatus::Infeasible;
            rep.message = "no mode assignment meets both constraints";
            rep.seconds = elapsed(t0);
            return rep;
        }
        rep.assignment = {best_a, best_b, p1_cache.at(best_mask)};
        rep.status = SolveStatus::Optimal;
        finish_report(rep, in);
        rep.seconds = elapsed(t0);
        return rep;
    }

    std::string algo_report_to_json(const AlgoReport &r)
    {
        using nlohmann::json;
        auto vec = [](const Eigen::VectorXi &v) {
            return std::vector<int>(v.data(), v.data() + v.size());
        };
        json j;
        j["format"] = "cfisac-report/1";
        j["status"] = to_string(r.status);
        j["feasible"] = r.feasible;
        j["comm_ok"] = r.comm_ok;
        j["sensing_ok"] = r.sensing_ok;
        j["n_tx"] = r.n_tx;
        j["n_rx"] = r.n_rx;
        j["total"] = r.total;
        j["iterations"] = r.iterations;
        j["restarts"] = r.restarts;
        j["converged"] = r.converged;
        j["seconds"] = r.seconds;
        j["message"] = r.message;
        if (r.assignment.a.size() > 0)
        {
            j["a"] = vec(r.assignment.a);
            j["b"] = vec(r.assignment.b);
            json pw = json::array();
            for (Eigen::Index l = 0; l < r.assignment.powers.rows(); ++l)
            {
                json row = json::array();
                for (Eigen::Index k = 0; k < r.assignment.powers.cols(); ++k)
                    row.push_back(r.assignment.powers(l, k));
                pw.push_back(row);
            }
            j["powers"] = pw;
        }
        return j.dump(2);
    }

} // namespace cfisac
