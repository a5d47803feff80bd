// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Shared fixtures for the unit and acceptance suites.

#pragma once

#include <random>

#include "cfisac/modeselect.hpp"

namespace testutil
{

    /// Synthetic, well-conditioned channel statistics with positive expected
    /// effective gains; not tied to any scenario.
    inline cfisac::CommStats make_random_stats(int n_ues, int n_aps,
                                               std::mt19937_64 &rng,
                                               double interference_scale = 0.05)
    {
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        cfisac::CommStats stats;
        stats.sigma2 = 0.2 + unif(rng);
        stats.d.resize(n_ues, n_aps);
        for (int k = 0; k < n_ues; ++k)
            for (int l = 0; l < n_aps; ++l)
                stats.d(k, l) = 0.2 + std::abs(gauss(rng));
        stats.c_mats.assign(
            static_cast<std::size_t>(n_ues),
            std::vector<Eigen::MatrixXcd>(static_cast<std::size_t>(n_ues)));
        for (int k = 0; k < n_ues; ++k)
            for (int i = 0; i < n_ues; ++i)
            {
                Eigen::MatrixXcd m(n_aps, n_aps);
                for (int r = 0; r < n_aps; ++r)
                    for (int c = 0; c < n_aps; ++c)
                        m(r, c) = cfisac::cdouble(gauss(rng), gauss(rng));
                stats.c_mats[static_cast<std::size_t>(k)]
                            [static_cast<std::size_t>(i)] =
                    interference_scale * (m * m.adjoint()) /
                    static_cast<double>(n_aps);
            }
        return stats;
    }

    /// Hand-built scenario: TX-friendly APs on the x-axis at (+-d, 0) and
    /// RX-friendly APs on the y-axis at (0, +-d), unit-magnitude RCS, target
    /// at the origin.  All bistatic geometry terms are then closed-form.
    inline cfisac::Scenario make_cross_scenario(double d = 100.0, int n_antennas = 8)
    {
        cfisac::Scenario s;
        s.ap_positions = {{d, 0.0, 10.0},
                          {-d, 0.0, 10.0},
                          {0.0, d, 10.0},
                          {0.0, -d, 10.0}};
        s.ue_positions = {{10.0, 20.0, 1.5}};
        s.target_position = cfisac::Vec2(0.0, 0.0);
        s.n_antennas = n_antennas;
        s.carrier_freq_hz = 28e9;
        s.comm_bandwidth_hz = 100e6;
        s.sensing_bandwidth_hz = 100e6;
        s.noise_power_comm = 1e-12;
        s.noise_power_sensing = 1e-12;
        s.p_max_watts = 1.0;
        s.p_s_watts = 1.0;
        s.tau_c = 200;
        s.tau_d = 190;
        s.rcs = Eigen::MatrixXcd::Ones(4, 4);
        s.rng_seed = 0;
        return s;
    }

    /// Small randomized deployment through the real construction path.
    inline cfisac::Scenario make_random_scenario(std::mt19937_64 &rng,
                                                 int n_aps = 0, int n_ues = 2)
    {
        cfisac::ScenarioConfig cfg;
        cfg.n_aps = n_aps > 0 ? n_aps : 4 + static_cast<int>(rng() % 9);
        cfg.n_ues = n_ues;
        cfg.n_antennas = 4;
        // keep clear of grid points (an AP on top of the target is degenerate)
        cfg.target_position = cfisac::Vec2(cfg.area_size_m / 2.0 + 13.7,
                                           cfg.area_size_m / 2.0 - 21.3);
        cfg.rng_seed = rng();
        return cfisac::build_scenario(cfg);
    }

    /// Random disjoint binary (a, b) with at least one of each mode.
    inline std::pair<Eigen::VectorXi, Eigen::VectorXi>
    random_modes(int n_aps, std::mt19937_64 &rng)
    {
        Eigen::VectorXi a = Eigen::VectorXi::Zero(n_aps);
        Eigen::VectorXi b = Eigen::VectorXi::Zero(n_aps);
        while (a.sum() == 0 || b.sum() == 0)
        {
            for (int l = 0; l < n_aps; ++l)
            {
                const auto trit = rng() % 3;
                a(l) = trit == 1 ? 1 : 0;
                b(l) = trit == 2 ? 1 : 0;
            }
        }
        return {a, b};
    }

    /// CRLB of the deterministic even-TX/odd-RX split; anchor for thresholds.
    inline double reference_crlb(const cfisac::Scenario &s)
    {
        const int L = s.n_aps();
        Eigen::VectorXi a = Eigen::VectorXi::Zero(L), b = Eigen::VectorXi::Zero(L);
        for (int l = 0; l < L; ++l)
            (l % 2 == 0 ? a(l) : b(l)) = 1;
        return cfisac::crlb_trace(cfisac::geometry_matrices(s), a, b, s.p_s_watts);
    }

    /// Full algorithm inputs from a scenario: estimated statistics over
    /// `t_real` channel draws, geometry matrices, and a CRLB threshold set to
    /// `eta_mult` times the reference split's bound.
    inline cfisac::SelectionInputs make_inputs(
        const cfisac::Scenario &s, double gamma_db, double eta_mult,
        int t_real = 200,
        cfisac::PrecoderKind kind = cfisac::PrecoderKind::LocalMmse)
    {
        const cfisac::ChannelEnsemble e = cfisac::generate_channels(s, t_real);
        const double delta = kind == cfisac::PrecoderKind::LocalMmse
                                 ? s.noise_power_comm * s.n_ues() / s.p_max_watts
                                 : 0.0;
        const cfisac::PrecoderSet w =
            cfisac::compute_precoders(e, s.n_ues(), kind, delta);
        cfisac::SelectionInputs in;
        in.stats = cfisac::estimate_stats(e, w, s.noise_power_comm);
        in.g = cfisac::geometry_matrices(s);
        in.ap_gain = e.ap_gain;
        const auto ranges = cfisac::ap_target_ranges(s);
        in.target_dist = Eigen::Map<const Eigen::VectorXd>(
            ranges.data(), static_cast<Eigen::Index>(ranges.size()));
        in.gamma_c = std::pow(10.0, gamma_db / 10.0);
        in.eta = eta_mult * reference_crlb(s);
        in.p_s = s.p_s_watts;
        in.p_max = s.p_max_watts;
        return in;
    }

} // namespace testutil
