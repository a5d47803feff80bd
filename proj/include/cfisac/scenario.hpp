// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfisac/errors.hpp"

namespace cfisac
{

    using Vec3 = Eigen::Vector3d;
    using Vec2 = Eigen::Vector2d;
    using cdouble = std::complex<double>;

    /// Everything needed to construct a deployment.  Positions may be given
    /// explicitly; otherwise APs go on a jittered grid and UEs are drawn
    /// uniformly over the area, both from rng_seed.
    struct ScenarioConfig
    {
        int n_aps = 12;
        int n_ues = 6;
        int n_antennas = 8;

        /// Side length of the square deployment area.  The default is a dense
        /// small-cell layout: at 28 GHz with per-AP power of 1 W, links beyond
        /// ~100 m cannot sustain high SINR targets.
        double area_size_m = 75.0;
        double ap_height_m = 10.0;
        double ue_height_m = 1.5;

        std::optional<std::vector<Vec3>> ap_positions;
        std::optional<std::vector<Vec3>> ue_positions;
        std::optional<Vec2> target_position; ///< default: area center

        double carrier_freq_hz = 28e9;
        double comm_bandwidth_hz = 100e6;
        double sensing_bandwidth_hz = 100e6;
        double noise_figure_db = 7.0; ///< over -174 dBm/Hz thermal density

        double p_max_watts = 1.0;
        double p_s_watts = 1.0;
        int tau_c = 200;
        int tau_d = 190;

        // Synthetic channel model (stand-in for ray-traced data).
        double pathloss_exponent = 3.0;
        double rician_kappa = 10.0;       ///< may be +inf for pure LOS
        double blockage_probability = 0.0;
        double blockage_extra_loss_db = 20.0;
        bool unit_pathloss = false;       ///< test mode: force PL(d) = 1

        std::uint64_t rng_seed = 1;
    };

    /// Immutable deployment: geometry, radio constants and the per-scenario
    /// RCS draw.  Safe to share across threads once built.
    struct Scenario
    {
        std::vector<Vec3> ap_positions; ///< L entries
        std::vector<Vec3> ue_positions; ///< K entries
        Vec2 target_position;
        int n_antennas = 0;

        double carrier_freq_hz = 0.0;
        double comm_bandwidth_hz = 0.0;
        double sensing_bandwidth_hz = 0.0;
        double noise_power_comm = 0.0;    ///< sigma^2, watts
        double noise_power_sensing = 0.0; ///< sigma_zeta^2, watts
        double p_max_watts = 0.0;
        double p_s_watts = 0.0;
        int tau_c = 0;
        int tau_d = 0;

        Eigen::MatrixXcd rcs; ///< L x L symmetric RCS coefficients beta_{m,n}

        ScenarioConfig config; ///< the config this scenario was built from
        std::uint64_t rng_seed = 0;

        int n_aps() const { return static_cast<int>(ap_positions.size()); }
        int n_ues() const { return static_cast<int>(ue_positions.size()); }
    };

    /// Monte Carlo channel draws plus the per-link mean gains derived from them.
    struct ChannelEnsemble
    {
        // realizations[t] is an L x K array of length-N channel vectors,
        // stored as an N x (L*K) matrix with column l*K + k.
        std::vector<Eigen::MatrixXcd> realizations;
        Eigen::MatrixXd link_gain; ///< L x K, g_{lk} = mean ||h_{kl}||^2 / N
        Eigen::VectorXd ap_gain;   ///< length L, g_l = sum_k g_{lk}
        int n_antennas = 0;

        int n_realizations() const { return static_cast<int>(realizations.size()); }
        /// Channel vector h_{kl} of realization t.
        Eigen::VectorXcd channel(int t, int l, int k, int n_ues) const
        {
            return realizations[static_cast<std::size_t>(t)].col(l * n_ues + k);
        }
    };

    /// Builds and validates a Scenario.  Deterministic in (config, seed):
    /// the same config yields a bit-identical scenario, RCS matrix included.
    Scenario build_scenario(const ScenarioConfig &config);

    /// Draws t_realizations i.i.d. channel realizations of the synthetic
    /// Rician model and fills in the empirical link gains.
    ChannelEnsemble generate_channels(const Scenario &s, int t_realizations);

    /// Horizontal (x, y) distance from each AP to the target.
    std::vector<double> ap_target_ranges(const Scenario &s);

    /// Free-space path gain at 1 m for the given carrier, (lambda / 4 pi)^2.
    double reference_path_gain(double carrier_freq_hz);

    /// Log-distance path gain of the synthetic model at distance d (meters).
    double path_gain(const Scenario &s, double distance_m);

    /// Versioned JSON snapshot of a scenario, and its inverse.
    std::string scenario_to_json(const Scenario &s);
    Scenario scenario_from_json(const std::string &text);

    /// Reads a ScenarioConfig from a JSON config file/text (keys in README).
    ScenarioConfig scenario_config_from_json(const std::string &text);
    std::string scenario_config_to_json(const ScenarioConfig &c);

} // namespace cfisac
