// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "cfisac/modeselect.hpp"
#include "helpers.hpp"

using namespace cfisac;

namespace
{
    /// Smallest feasible TX cardinality by direct subset enumeration of the
    /// communication-only problem; -1 when no subset works.
    int comm_only_optimum(const SelectionInputs &in)
    {
        const int L = in.stats.n_aps();
        int best = -1;
        for (std::uint32_t mask = 1; mask < (1u << L); ++mask)
        {
            Eigen::VectorXi a = Eigen::VectorXi::Zero(L);
            for (int l = 0; l < L; ++l)
                if (mask & (1u << l))
                    a(l) = 1;
            if (best >= 0 && a.sum() >= best)
                continue;
            if (min_power_p1(in.stats, a, in.gamma_c, in.p_max).outcome.status ==
                SolveStatus::Optimal)
                best = a.sum();
        }
        return best;
    }

    /// Full ternary enumeration of the joint problem, written independently
    /// of the library's oracle: returns the minimum total active count.
    int joint_optimum(const SelectionInputs &in)
    {
        const int L = in.stats.n_aps();
        std::uint64_t n_codes = 1;
        for (int l = 0; l < L; ++l)
            n_codes *= 3;
        int best = -1;
        Eigen::VectorXi a(L), b(L);
        for (std::uint64_t code = 0; code < n_codes; ++code)
        {
            std::uint64_t rem = code;
            for (int l = 0; l < L; ++l)
            {
                const int trit = static_cast<int>(rem % 3);
                rem /= 3;
                a(l) = trit == 1 ? 1 : 0;
                b(l) = trit == 2 ? 1 : 0;
            }
            const int count = a.sum() + b.sum();
            if (best >= 0 && count >= best)
                continue;
            if (crlb_trace(in.g, a, b, in.p_s) > in.eta)
                continue;
            if (min_power_p1(in.stats, a, in.gamma_c, in.p_max).outcome.status !=
                SolveStatus::Optimal)
                continue;
            best = count;
        }
        return best;
    }

    /// A solvable medium-difficulty instance used by several cases.
    SelectionInputs solvable_inputs(std::uint64_t seed, int n_aps = 6,
                                    int n_ues = 2, double gamma_db = 8.0,
                                    double eta_mult = 100.0)
    {
        std::mt19937_64 rng(seed);
        const Scenario s = testutil::make_random_scenario(rng, n_aps, n_ues);
        return testutil::make_inputs(s, gamma_db, eta_mult, 150);
    }
} // namespace

TEST_CASE("validate flags the all-off assignment and accepts a good one")
{
    const SelectionInputs in = solvable_inputs(31);
    const int L = in.stats.n_aps();
    const int K = in.stats.n_ues();

    ModeAssignment off;
    off.a = Eigen::VectorXi::Zero(L);
    off.b = Eigen::VectorXi::Zero(L);
    off.powers = Eigen::MatrixXd::Zero(L, K);
    const ConstraintReport r_off =
        validate(off, in.stats, in.g, in.gamma_c, in.eta, in.p_s, in.p_max);
    CHECK_FALSE(r_off.ok);
    CHECK_FALSE(r_off.comm_ok);    // zero power cannot meet the SINR targets
    CHECK_FALSE(r_off.sensing_ok); // no TX/RX pair: CRLB is infinite

    // A feasible assignment from the heuristic must validate cleanly.
    const AlgoReport h = heuristic(in);
    REQUIRE(h.status == SolveStatus::Optimal);
    const ConstraintReport r_ok = validate(h.assignment, in.stats, in.g,
                                           in.gamma_c, in.eta, in.p_s, in.p_max);
    CHECK(r_ok.ok);
    for (const auto &row : r_ok.rows)
        CHECK(row.ok);
}

TEST_CASE("validate pinpoints a power-budget violation to its row")
{
    const SelectionInputs in = solvable_inputs(32);
    AlgoReport h = heuristic(in);
    REQUIRE(h.status == SolveStatus::Optimal);
    REQUIRE(h.feasible);

    // Overload the first active transmitter only.
    int tx = -1;
    for (int l = 0; l < in.stats.n_aps(); ++l)
        if (h.assignment.a(l) == 1)
        {
            tx = l;
            break;
        }
    REQUIRE(tx >= 0);
    h.assignment.powers(tx, 0) += 2.0 * in.p_max;
    const ConstraintReport r = validate(h.assignment, in.stats, in.g,
                                        in.gamma_c, in.eta, in.p_s, in.p_max);
    CHECK_FALSE(r.ok);
    const std::string bad = "power_cap[" + std::to_string(tx) + "]";
    for (const auto &row : r.rows)
        if (row.name.rfind("power_cap", 0) == 0)
            CHECK(row.ok == (row.name != bad));
}

TEST_CASE("validate rejects malformed shapes and overlapping modes")
{
    const SelectionInputs in = solvable_inputs(33);
    const int L = in.stats.n_aps();
    const int K = in.stats.n_ues();

    ModeAssignment bad;
    bad.a = Eigen::VectorXi::Zero(L - 1); // wrong length
    bad.b = Eigen::VectorXi::Zero(L);
    bad.powers = Eigen::MatrixXd::Zero(L, K);
    CHECK_FALSE(validate(bad, in.stats, in.g, in.gamma_c, in.eta, in.p_s,
                         in.p_max)
                    .ok);

    ModeAssignment overlap;
    overlap.a = Eigen::VectorXi::Zero(L);
    overlap.b = Eigen::VectorXi::Zero(L);
    overlap.powers = Eigen::MatrixXd::Zero(L, K);
    overlap.a(0) = 1;
    overlap.b(0) = 1; // same AP in both modes
    const ConstraintReport r = validate(overlap, in.stats, in.g, in.gamma_c,
                                        in.eta, in.p_s, in.p_max);
    CHECK_FALSE(r.ok);
    bool excl_found = false;
    for (const auto &row : r.rows)
        if (row.name == "mode_exclusivity")
        {
            excl_found = true;
            CHECK_FALSE(row.ok);
        }
    CHECK(excl_found);
}

TEST_CASE("sequential stage one is the communication-only optimum")
{
    for (std::uint64_t seed : {41, 42, 43})
    {
        const SelectionInputs in = solvable_inputs(seed, 5, 2);
        const int expected = comm_only_optimum(in);
        const AlgoReport rep = sequential(in);
        if (expected < 0)
        {
            CHECK(rep.status != SolveStatus::Optimal);
            continue;
        }
        REQUIRE(rep.status == SolveStatus::Optimal);
        CHECK(rep.n_tx == expected);
        CHECK(rep.feasible);
        CHECK(rep.n_rx >= 1);
    }
}

TEST_CASE("alternating is deterministic in the seed and validates")
{
    const SelectionInputs in = solvable_inputs(51);
    const AlgoReport r1 = alternating(in, 7);
    const AlgoReport r2 = alternating(in, 7);
    REQUIRE(r1.status == SolveStatus::Optimal);
    CHECK(r1.feasible);
    CHECK((r1.assignment.a.array() == r2.assignment.a.array()).all());
    CHECK((r1.assignment.b.array() == r2.assignment.b.array()).all());
    CHECK(r1.n_tx == r2.n_tx);
    CHECK(r1.n_rx == r2.n_rx);
    CHECK(r1.iterations == r2.iterations);
    CHECK(r1.restarts == r2.restarts);
}

TEST_CASE("alternating throws after exhausting restarts on a hopeless target")
{
    SelectionInputs in = solvable_inputs(52, 5, 2);
    in.gamma_c = 1e9; // far beyond any power budget
    CHECK_THROWS_AS(alternating(in, 1, 5, 3), ExhaustedRestarts);
}

TEST_CASE("alternating rejects a nonpositive iteration budget")
{
    const SelectionInputs in = solvable_inputs(53, 5, 1);
    CHECK_THROWS_AS(alternating(in, 1, 0), InvalidConfig);
}

TEST_CASE("heuristic returns a feasible assignment and respects exclusivity")
{
    for (std::uint64_t seed : {61, 62, 63})
    {
        const SelectionInputs in = solvable_inputs(seed);
        const AlgoReport rep = heuristic(in);
        REQUIRE(rep.status == SolveStatus::Optimal);
        CHECK(rep.feasible);
        for (int l = 0; l < in.stats.n_aps(); ++l)
            CHECK(rep.assignment.a(l) + rep.assignment.b(l) <= 1);
        // TX growth stops at the first prefix meeting the SINR targets, so
        // it can never beat the communication-only minimum.
        const int comm_min = comm_only_optimum(in);
        REQUIRE(comm_min >= 1);
        CHECK(rep.n_tx >= comm_min);
    }
}

TEST_CASE("heuristic respects an explicit receiver seed size")
{
    const SelectionInputs in = solvable_inputs(64);
    const AlgoReport rep = heuristic(in, 3);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.feasible);
    CHECK(rep.n_rx <= 3); // pruning only removes receivers from the seed
}

TEST_CASE("heuristic reports infeasibility when no TX prefix meets the SINR")
{
    SelectionInputs in = solvable_inputs(65, 5, 2);
    in.gamma_c = 1e9;
    const AlgoReport rep = heuristic(in);
    CHECK(rep.status == SolveStatus::Infeasible);
    CHECK_FALSE(rep.feasible);
}

TEST_CASE("exhaustive oracle agrees with an independent ternary enumeration")
{
    for (std::uint64_t seed : {71, 72})
    {
        const SelectionInputs in = solvable_inputs(seed, 4, 1, 5.0, 50.0);
        const int expected = joint_optimum(in);
        const AlgoReport rep = exhaustive_oracle(in);
        if (expected < 0)
        {
            CHECK(rep.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(rep.status == SolveStatus::Optimal);
        CHECK(rep.total == expected);
        CHECK(rep.feasible);
    }
}

TEST_CASE("exhaustive oracle refuses networks beyond its cap")
{
    const SelectionInputs in = solvable_inputs(73, 5, 1);
    CHECK_THROWS_AS(exhaustive_oracle(in, 4), TooLarge);
}

TEST_CASE("no algorithm beats the oracle")
{
    for (std::uint64_t seed : {81, 82, 83})
    {
        const SelectionInputs in = solvable_inputs(seed, 5, 2);
        const AlgoReport oracle = exhaustive_oracle(in);
        if (oracle.status != SolveStatus::Optimal)
            continue;
        const AlgoReport seq = sequential(in);
        const AlgoReport alt = alternating(in, seed);
        const AlgoReport heu = heuristic(in);
        if (seq.status == SolveStatus::Optimal && seq.feasible)
            CHECK(seq.total >= oracle.total);
        if (alt.status == SolveStatus::Optimal && alt.feasible)
            CHECK(alt.total >= oracle.total);
        if (heu.status == SolveStatus::Optimal && heu.feasible)
            CHECK(heu.total >= oracle.total);
    }
}

TEST_CASE("algorithm report serializes to the versioned JSON layout")
{
    const SelectionInputs in = solvable_inputs(91, 5, 1);
    const AlgoReport rep = heuristic(in);
    REQUIRE(rep.status == SolveStatus::Optimal);
    const std::string j = algo_report_to_json(rep);
    CHECK(j.find("cfisac-report/1") != std::string::npos);
    CHECK(j.find("\"a\"") != std::string::npos);
    CHECK(j.find("\"b\"") != std::string::npos);
    CHECK(j.find("\"powers\"") != std::string::npos);
    CHECK(j.find("\"feasible\": true") != std::string::npos);
}
