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

#include "cfisac/sensing.hpp"
#include "helpers.hpp"

using namespace cfisac;

TEST_CASE("propagation delay is the bistatic range over the speed of light")
{
    CHECK(propagation_delay(299792458.0, 2.0 * 299792458.0) ==
          doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(propagation_delay(0.0, 10.0), DegenerateGeometry);
}

TEST_CASE("quadratic-form trace equals the entrywise Fisher-matrix inverse")
{
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 200; ++rep)
    {
        const Scenario s = testutil::make_random_scenario(rng);
        const GMatrices g = geometry_matrices(s);
        const auto [a, b] = testutil::random_modes(s.n_aps(), rng);
        const double direct = crlb_trace(g, a, b, s.p_s_watts);
        const double via_fim = fim_oracle(g, a, b, s.p_s_watts).inverse_trace();
        if (std::isinf(direct) || std::isinf(via_fim))
        {
            CHECK(std::isinf(direct));
            CHECK(std::isinf(via_fim));
            continue;
        }
        CHECK(direct == doctest::Approx(via_fim).epsilon(1e-9));
    }
}

TEST_CASE("symmetric cross layout has the closed-form bound d^4/(2 P xi N^2)")
{
    const double d = 120.0;
    const Scenario s = testutil::make_cross_scenario(d);
    const GMatrices g = geometry_matrices(s);
    Eigen::VectorXi a(4), b(4);
    a << 1, 1, 0, 0; // the two x-axis APs transmit
    b << 0, 0, 1, 1; // the two y-axis APs receive

    const double n2 = static_cast<double>(s.n_antennas) * s.n_antennas;
    const double expected = std::pow(d, 4) / (2.0 * s.p_s_watts * g.xi * n2);
    CHECK(crlb_trace(g, a, b, s.p_s_watts) ==
          doctest::Approx(expected).epsilon(1e-9));

    // and the cross-information term cancels by symmetry
    const FisherInfo f = fim_oracle(g, a, b, s.p_s_watts);
    CHECK(f.f_xy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.f_xx == doctest::Approx(f.f_yy).epsilon(1e-12));
}

TEST_CASE("xi uses the deployed AP count unless overridden")
{
    const Scenario s = testutil::make_cross_scenario();
    const GMatrices g4 = geometry_matrices(s);
    const GMatrices g2 = geometry_matrices(s, 2);
    CHECK(g2.xi == doctest::Approx(4.0 * g4.xi).epsilon(1e-12));
}

TEST_CASE("collinear geometry yields a singular information matrix")
{
    Scenario s = testutil::make_cross_scenario();
    // Everything on the x-axis: no y information at all.
    s.ap_positions = {{100.0, 0.0, 10.0},
                      {-100.0, 0.0, 10.0},
                      {200.0, 0.0, 10.0},
                      {-200.0, 0.0, 10.0}};
    const GMatrices g = geometry_matrices(s);
    Eigen::VectorXi a(4), b(4);
    a << 1, 1, 0, 0;
    b << 0, 0, 1, 1;
    CHECK(std::isinf(crlb_trace(g, a, b, s.p_s_watts)));
    CHECK(std::isinf(fim_oracle(g, a, b, s.p_s_watts).inverse_trace()));
}

TEST_CASE("sensing-power scale law is exactly 1/t")
{
    std::mt19937_64 rng(202);
    const Scenario s = testutil::make_random_scenario(rng, 8);
    const GMatrices g = geometry_matrices(s);
    const auto [a, b] = testutil::random_modes(8, rng);
    const double base = crlb_trace(g, a, b, 1.0);
    if (std::isfinite(base))
        for (double t : {0.5, 2.0, 7.0})
            CHECK(crlb_trace(g, a, b, t) == doctest::Approx(base / t).epsilon(1e-12));
}

TEST_CASE("adding receivers or transmitters never worsens the bound")
{
    std::mt19937_64 rng(303);
    int checked = 0;
    while (checked < 100)
    {
        const Scenario s = testutil::make_random_scenario(rng);
        const int L = s.n_aps();
        const GMatrices g = geometry_matrices(s);
        auto [a, b] = testutil::random_modes(L, rng);
        const double before = crlb_trace(g, a, b, 1.0);
        int free_l = -1;
        for (int l = 0; l < L; ++l)
            if (a(l) == 0 && b(l) == 0)
                free_l = l;
        if (free_l < 0)
            continue;
        Eigen::VectorXi b2 = b, a2 = a;
        b2(free_l) = 1;
        a2(free_l) = 1;
        CHECK(crlb_trace(g, a, b2, 1.0) <= before * (1.0 + 1e-12));
        CHECK(crlb_trace(g, a2, b, 1.0) <= before * (1.0 + 1e-12));
        ++checked;
    }
}

TEST_CASE("mode vector validation")
{
    const Scenario s = testutil::make_cross_scenario();
    const GMatrices g = geometry_matrices(s);
    Eigen::VectorXi a = Eigen::VectorXi::Zero(4), b = Eigen::VectorXi::Zero(4);
    a(0) = 1;
    b(0) = 1; // same AP both modes
    CHECK_THROWS_AS(crlb_trace(g, a, b, 1.0), InvalidConfig);
    b(0) = 2; // not binary
    CHECK_THROWS_AS(crlb_trace(g, a, b, 1.0), InvalidConfig);
    CHECK_THROWS_AS(crlb_trace(g, Eigen::VectorXi::Zero(3), b, 1.0), InvalidConfig);
    b(0) = 0;
    b(1) = 1;
    CHECK_THROWS_AS(crlb_trace(g, a, b, 0.0), InvalidConfig);
}

TEST_CASE("linearized sensing rows agree with the quadratic forms")
{
    // For any binary (a, b): plugging A = a a^T into the fixed-RX rows must
    // reproduce the sign of (CRLB - eta) and the denominator value.
    std::mt19937_64 rng(404);
    for (int rep = 0; rep < 50; ++rep)
    {
        const Scenario s = testutil::make_random_scenario(rng, 7);
        const GMatrices g = geometry_matrices(s);
        const auto [a, b] = testutil::random_modes(7, rng);
        const double p_s = s.p_s_watts;
        const double crlb = crlb_trace(g, a, b, p_s);
        if (!std::isfinite(crlb))
            continue;
        const double eta = crlb * (rep % 2 == 0 ? 1.1 : 0.9);

        for (FixedSide side : {FixedSide::RxFixed, FixedSide::TxFixed})
        {
            const Eigen::VectorXi &fixed = side == FixedSide::RxFixed ? b : a;
            const Eigen::VectorXi &free_vec = side == FixedSide::RxFixed ? a : b;
            const SensingRows rows = linear_sensing_constraint(g, side, fixed,
                                                               eta, p_s);
            const Eigen::MatrixXd m =
                free_vec.cast<double>() * free_vec.cast<double>().transpose();
            const double main_val = (rows.main_coeff.array() * m.array()).sum();
            const double den_val = (rows.denom_coeff.array() * m.array()).sum();
            // main row <= 0  <=>  CRLB <= eta (denominator positive here)
            CHECK((main_val <= 0.0) == (crlb <= eta));
            CHECK(den_val > 0.0);
            const FisherInfo f = fim_oracle(g, a, b, p_s);
            CHECK(den_val * p_s * p_s == doctest::Approx(f.det()).epsilon(1e-9));
        }
    }
}

TEST_CASE("fixed side of zeros cannot produce any information")
{
    const Scenario s = testutil::make_cross_scenario();
    const GMatrices g = geometry_matrices(s);
    const SensingRows rows = linear_sensing_constraint(
        g, FixedSide::RxFixed, Eigen::VectorXi::Zero(4), 1e-5, 1.0);
    CHECK(rows.denom_coeff.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK_THROWS_AS(
        linear_sensing_constraint(g, FixedSide::RxFixed,
                                  Eigen::VectorXi::Zero(4), -1.0, 1.0),
        InvalidConfig);
}

TEST_CASE("G-matrices JSON round trip")
{
    const Scenario s = testutil::make_cross_scenario();
    const GMatrices g = geometry_matrices(s);
    const GMatrices back = gmatrices_from_json(gmatrices_to_json(g));
    CHECK((back.g_a - g.g_a).norm() < 1e-12 * g.g_a.norm());
    CHECK((back.g_c - g.g_c).norm() < 1e-12 * g.g_c.norm());
    CHECK(back.xi == doctest::Approx(g.xi));
}
