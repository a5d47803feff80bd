// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <random>

#include "cfisac/socp.hpp"
#include "oracles.hpp"

using namespace cfisac;

namespace
{
    SocBlock ball_around(const Eigen::VectorXd &z, double r, int first_var)
    {
        // || x - z || <= r
        SocBlock blk;
        blk.dim = static_cast<int>(z.size());
        blk.g = -z;
        blk.h0 = r;
        for (int i = 0; i < blk.dim; ++i)
            blk.f_entries.emplace_back(i, first_var + i, 1.0);
        return blk;
    }
} // namespace

TEST_CASE("linear objective over a ball has the closed-form optimum c'z - r|c|")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep)
    {
        const int n = 2 + static_cast<int>(rng() % 6);
        ConicProblem p;
        Eigen::VectorXd z(n), c(n);
        for (int i = 0; i < n; ++i)
        {
            z(i) = gauss(rng);
            c(i) = gauss(rng);
        }
        const double r = 0.1 + std::abs(gauss(rng));
        for (int i = 0; i < n; ++i)
            p.add_variable(-kInf, kInf, c(i));
        p.add_soc(ball_around(z, r, 0));

        const SolveOutcome out = solve_conic(p);
        REQUIRE(out.status == SolveStatus::Optimal);
        const double expected = c.dot(z) - r * c.norm();
        CHECK(out.objective ==
              doctest::Approx(expected).epsilon(1e-6));
        CHECK((out.x - (z - r * c / c.norm())).norm() < 1e-5 * (1.0 + z.norm()));
    }
}

TEST_CASE("scalar power problem: rho >= 5 via cone, minimum power 25")
{
    // minimize t subject to ||[2 rho; t - 1]|| <= t + 1  (rho^2 <= t)
    // and rho >= 5: optimum rho = 5, t = 25.
    ConicProblem p;
    const int rho = p.add_variable(5.0, kInf, 0.0);
    const int t = p.add_variable(0.0, kInf, 1.0);
    SocBlock blk;
    blk.dim = 2;
    blk.g = Eigen::VectorXd::Zero(2);
    blk.g(1) = -1.0;
    blk.f_entries.emplace_back(0, rho, 2.0);
    blk.f_entries.emplace_back(1, t, 1.0);
    blk.lin.emplace_back(t, 1.0);
    blk.h0 = 1.0;
    p.add_soc(blk);

    const SolveOutcome out = solve_conic(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(25.0).epsilon(1e-7));
    CHECK(out.x(0) == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("random LPs match the vertex-enumeration oracle")
{
    std::mt19937_64 rng(11);
    int solved = 0;
    for (int rep = 0; rep < 60; ++rep)
    {
        const ConicProblem p = testutil::random_lp(rng);
        const auto oracle = testutil::lp_vertex_oracle(p);
        const SolveOutcome out = solve_conic(p);
        if (!oracle.feasible)
        {
            CHECK(out.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.objective ==
              doctest::Approx(oracle.objective).epsilon(1e-6));
        CHECK(check_feasible(p, out.x, 1e-6).ok);
        ++solved;
    }
    CHECK(solved > 10); // the generator must produce plenty of feasible cases
}

TEST_CASE("random SOCPs agree with the projected-subgradient reference")
{
    std::mt19937_64 rng(23);
    int compared = 0;
    for (int rep = 0; rep < 25; ++rep)
    {
        const ConicProblem p = testutil::random_socp(rng);
        const SolveOutcome out = solve_conic(p);
        if (out.status == SolveStatus::Infeasible)
        {
            // The reference must not find a clearly feasible point.
            const auto ref = testutil::subgradient_reference(p, 1e-10);
            CHECK(!ref.feasible);
            continue;
        }
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(check_feasible(p, out.x, 1e-6).ok);
        const auto ref = testutil::subgradient_reference(p, 1e-7);
        if (ref.feasible)
        {
            // Reference points are feasible up to its tolerance, so its value
            // can undershoot only by a constraint-slack-sized amount.
            CHECK(out.objective <= ref.objective + 1e-4 * (1.0 + std::abs(ref.objective)));
            ++compared;
        }
    }
    CHECK(compared > 5);
}

TEST_CASE("infeasible box-contradicting rows are reported infeasible")
{
    ConicProblem p;
    p.add_variable(0.0, 1.0, 1.0);
    p.add_variable(0.0, 1.0, 1.0);
    p.add_ge({{0, 1.0}, {1, 1.0}}, 3.0); // impossible inside the unit box
    const SolveOutcome out = solve_conic(p);
    CHECK(out.status == SolveStatus::Infeasible);
}

TEST_CASE("equalities are honored exactly")
{
    ConicProblem p;
    p.add_variable(-kInf, kInf, 1.0);
    p.add_variable(-kInf, kInf, 2.0);
    p.add_eq({{0, 1.0}, {1, 1.0}}, 4.0);
    p.add_le({{0, -1.0}}, 0.0); // x0 >= 0
    p.add_le({{1, -1.0}}, 0.0); // x1 >= 0
    const SolveOutcome out = solve_conic(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    // cheapest way to reach the sum is all mass on x0
    CHECK(out.objective == doctest::Approx(4.0).epsilon(1e-7));
    CHECK(out.x(0) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("fixed variables are eliminated and recovered")
{
    ConicProblem p;
    p.add_variable(2.0, 2.0, 1.0);      // pinned
    p.add_variable(0.0, kInf, 1.0);
    p.add_ge({{0, 1.0}, {1, 1.0}}, 5.0);
    const SolveOutcome out = solve_conic(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.x(0) == doctest::Approx(2.0));
    CHECK(out.x(1) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(out.objective == doctest::Approx(5.0).epsilon(1e-7));
}
