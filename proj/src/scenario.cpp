// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfisac/scenario.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

namespace cfisac
{

    namespace
    {
        constexpr double kSpeedOfLight = 299'792'458.0;

        // Independent engines per purpose so that e.g. requesting more channel
        // realizations never perturbs the RCS draw.
        std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream)
        {
            std::seed_seq seq{seed, stream};
            return std::mt19937_64(seq);
        }

        double thermal_noise_watts(double bandwidth_hz, double noise_figure_db)
        {
            // -174 dBm/Hz thermal density plus receiver noise figure.
            const double dbm = -174.0 + noise_figure_db + 10.0 * std::log10(bandwidth_hz);
            return std::pow(10.0, dbm / 10.0) * 1e-3;
        }

        void validate_config(const ScenarioConfig &c)
        {
            if (c.n_aps < 2)
                throw InvalidConfig("need at least 2 APs (one TX and one RX)");
            if (c.n_ues < 1)
                throw InvalidConfig("need at least 1 UE");
            if (c.n_antennas < 1)
                throw InvalidConfig("need at least 1 antenna per AP");
            if (c.tau_c < 1 || c.tau_d < 1 || c.tau_d > c.tau_c)
                throw InvalidConfig("coherence block sizes must satisfy 1 <= tau_d <= tau_c");
            if (c.p_max_watts <= 0.0 || c.p_s_watts <= 0.0)
                throw InvalidConfig("transmit powers must be positive");
            if (c.comm_bandwidth_hz <= 0.0 || c.sensing_bandwidth_hz <= 0.0 || c.carrier_freq_hz <= 0.0)
                throw InvalidConfig("bandwidths and carrier frequency must be positive");
            if (c.area_size_m <= 0.0)
                throw InvalidConfig("area size must be positive");
            if (c.pathloss_exponent <= 0.0)
                throw InvalidConfig("path loss exponent must be positive");
            if (c.rician_kappa < 0.0)
                throw InvalidConfig("Rician factor must be nonnegative");
            if (c.blockage_probability < 0.0 || c.blockage_probability > 1.0)
                throw InvalidConfig("blockage probability must be in [0, 1]");
            if (c.ap_positions && static_cast<int>(c.ap_positions->size()) != c.n_aps)
                throw InvalidConfig("ap_positions size does not match n_aps");
            if (c.ue_positions && static_cast<int>(c.ue_positions->size()) != c.n_ues)
                throw InvalidConfig("ue_positions size does not match n_ues");
        }

        std::vector<Vec3> default_ap_grid(const ScenarioConfig &c)
        {
            // Square grid covering the area, row-major, truncated to n_aps.
            const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(c.n_aps))));
            std::vector<Vec3> pos;
            pos.reserve(c.n_aps);
            for (int i = 0; i < side && static_cast<int>(pos.size()) < c.n_aps; ++i)
                for (int j = 0; j < side && static_cast<int>(pos.size()) < c.n_aps; ++j)
                {
                    const double x = (i + 0.5) * c.area_size_m / side;
                    const double y = (j + 0.5) * c.area_size_m / side;
                    pos.emplace_back(x, y, c.ap_height_m);
                }
            return pos;
        }

        std::vector<Vec3> random_ue_positions(const ScenarioConfig &c)
        {
            auto rng = seeded_engine(c.rng_seed, 0x75657'73);
            std::uniform_real_distribution<double> u(0.0, c.area_size_m);
            std::vector<Vec3> pos;
            pos.reserve(c.n_ues);
            for (int k = 0; k < c.n_ues; ++k)
            {
                const double x = u(rng);
                const double y = u(rng);
                pos.emplace_back(x, y, c.ue_height_m);
            }
            return pos;
        }

        Eigen::MatrixXcd draw_rcs(int L, std::uint64_t seed)
        {
            // Swerling-I: unit-variance circular Gaussian, symmetric in (m, n).
            auto rng = seeded_engine(seed, 0x726373);
            std::normal_distribution<double> g(0.0, std::sqrt(0.5));
            Eigen::MatrixXcd beta(L, L);
            for (int m = 0; m < L; ++m)
                for (int n = m; n < L; ++n)
                {
                    const cdouble v(g(rng), g(rng));
                    beta(m, n) = v;
                    beta(n, m) = v;
                }
            return beta;
        }
    } // namespace

    double reference_path_gain(double carrier_freq_hz)
    {
        const double lambda = kSpeedOfLight / carrier_freq_hz;
        const double r = lambda / (4.0 * M_PI);
        return r * r;
    }

    double path_gain(const Scenario &s, double distance_m)
    {
        if (s.config.unit_pathloss)
            return 1.0;
        // Log-distance model anchored at free space, d0 = 1 m; clamped below
        // d0 so near-field placements cannot exceed the reference gain.
        const double d = std::max(distance_m, 1.0);
        return reference_path_gain(s.carrier_freq_hz) *
               std::pow(d, -s.config.pathloss_exponent);
    }

    Scenario build_scenario(const ScenarioConfig &config)
    {
        validate_config(config);

        Scenario s;
        s.config = config;
        s.rng_seed = config.rng_seed;
        s.ap_positions = config.ap_positions ? *config.ap_positions : default_ap_grid(config);
        s.ue_positions = config.ue_positions ? *config.ue_positions : random_ue_positions(config);
        s.target_position = config.target_position
                                ? *config.target_position
                                : Vec2(config.area_size_m / 2.0, config.area_size_m / 2.0);
        s.n_antennas = config.n_antennas;
        s.carrier_freq_hz = config.carrier_freq_hz;
        s.comm_bandwidth_hz = config.comm_bandwidth_hz;
        s.sensing_bandwidth_hz = config.sensing_bandwidth_hz;
        s.noise_power_comm = thermal_noise_watts(config.comm_bandwidth_hz, config.noise_figure_db);
        s.noise_power_sensing = thermal_noise_watts(config.sensing_bandwidth_hz, config.noise_figure_db);
        s.p_max_watts = config.p_max_watts;
        s.p_s_watts = config.p_s_watts;
        s.tau_c = config.tau_c;
        s.tau_d = config.tau_d;
        s.rcs = draw_rcs(config.n_aps, config.rng_seed);

        // Every AP must have a nonzero horizontal range to the target.
        for (std::size_t l = 0; l < s.ap_positions.size(); ++l)
        {
            const double dx = s.ap_positions[l].x() - s.target_position.x();
            const double dy = s.ap_positions[l].y() - s.target_position.y();
            if (dx * dx + dy * dy == 0.0)
                throw InvalidConfig("AP " + std::to_string(l) + " coincides with the target");
        }
        return s;
    }

    std::vector<double> ap_target_ranges(const Scenario &s)
    {
        // Planar distance: the position CRLB tracks (x, y) only.
        std::vector<double> ranges;
        ranges.reserve(s.ap_positions.size());
        for (std::size_t l = 0; l < s.ap_positions.size(); ++l)
        {
            const double dx = s.ap_positions[l].x() - s.target_position.x();
            const double dy = s.ap_positions[l].y() - s.target_position.y();
            const double r = std::hypot(dx, dy);
            if (r == 0.0)
                throw DegenerateGeometry("AP " + std::to_string(l) + " is at the target position");
            ranges.push_back(r);
        }
        return ranges;
    }

    ChannelEnsemble generate_channels(const Scenario &s, int t_realizations)
    {
        if (t_realizations < 1)
            throw InvalidConfig("need at least one channel realization");

        const int L = s.n_aps();
        const int K = s.n_ues();
        const int N = s.n_antennas;
        const double kappa = s.config.rician_kappa;
        const bool pure_los = std::isinf(kappa);
        const double los_w = pure_los ? 1.0 : std::sqrt(kappa / (1.0 + kappa));
        const double nlos_w = pure_los ? 0.0 : std::sqrt(1.0 / (1.0 + kappa));
        const double block_lin = std::pow(10.0, -s.config.blockage_extra_loss_db / 10.0);

        auto rng = seeded_engine(s.rng_seed, 0x6368616e);
        std::normal_distribution<double> g(0.0, std::sqrt(0.5));
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        ChannelEnsemble e;
        e.n_antennas = N;
        e.realizations.reserve(t_realizations);
        e.link_gain = Eigen::MatrixXd::Zero(L, K);

        for (int t = 0; t < t_realizations; ++t)
        {
            Eigen::MatrixXcd real(N, L * K);
            for (int l = 0; l < L; ++l)
                for (int k = 0; k < K; ++k)
                {
                    const Vec3 d3 = s.ue_positions[k] - s.ap_positions[l];
                    const double dist = d3.norm();
                    double pl = path_gain(s, dist);
                    if (s.config.blockage_probability > 0.0 &&
                        u01(rng) < s.config.blockage_probability)
                        pl *= block_lin;

                    // Half-wavelength ULA steering towards the UE azimuth.
                    const double phi = std::atan2(d3.y(), d3.x());
                    const double psi = M_PI * std::sin(phi);
                    Eigen::VectorXcd h(N);
                    for (int n = 0; n < N; ++n)
                        h(n) = los_w * std::polar(1.0, psi * n);
                    if (!pure_los)
                        for (int n = 0; n < N; ++n)
                            h(n) += nlos_w * cdouble(g(rng), g(rng));
                    h *= std::sqrt(pl);
                    real.col(l * K + k) = h;
                    e.link_gain(l, k) += h.squaredNorm() / N;
                }
            e.realizations.push_back(std::move(real));
        }
        e.link_gain /= static_cast<double>(t_realizations);
        e.ap_gain = e.link_gain.rowwise().sum();
        return e;
    }

    // ---------------------------------------------------------------------
    // Serialization

    namespace
    {
        using nlohmann::json;

        json vec3_list(const std::vector<Vec3> &v)
        {
            json out = json::array();
            for (const auto &p : v)
                out.push_back({p.x(), p.y(), p.z()});
            return out;
        }

        std::vector<Vec3> vec3_list_from(const json &j)
        {
            std::vector<Vec3> out;
            for (const auto &p : j)
                out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(),
                                 p.at(2).get<double>());
            return out;
        }

        json config_to_jsonobj(const ScenarioConfig &c)
        {
            json j;
            j["n_aps"] = c.n_aps;
            j["n_ues"] = c.n_ues;
            j["n_antennas"] = c.n_antennas;
            j["area_size_m"] = c.area_size_m;
            j["ap_height_m"] = c.ap_height_m;
            j["ue_height_m"] = c.ue_height_m;
            if (c.ap_positions)
                j["ap_positions"] = vec3_list(*c.ap_positions);
            if (c.ue_positions)
                j["ue_positions"] = vec3_list(*c.ue_positions);
            if (c.target_position)
                j["target_position"] = {c.target_position->x(), c.target_position->y()};
            j["carrier_freq_hz"] = c.carrier_freq_hz;
            j["comm_bandwidth_hz"] = c.comm_bandwidth_hz;
            j["sensing_bandwidth_hz"] = c.sensing_bandwidth_hz;
            j["noise_figure_db"] = c.noise_figure_db;
            j["p_max_watts"] = c.p_max_watts;
            j["p_s_watts"] = c.p_s_watts;
            j["tau_c"] = c.tau_c;
            j["tau_d"] = c.tau_d;
            j["pathloss_exponent"] = c.pathloss_exponent;
            j["rician_kappa"] = std::isinf(c.rician_kappa) ? json("inf") : json(c.rician_kappa);
            j["blockage_probability"] = c.blockage_probability;
            j["blockage_extra_loss_db"] = c.blockage_extra_loss_db;
            j["unit_pathloss"] = c.unit_pathloss;
            j["rng_seed"] = c.rng_seed;
            return j;
        }

        ScenarioConfig config_from_jsonobj(const json &j)
        {
            ScenarioConfig c;
            auto get = [&](const char *key, auto &field) {
                if (j.contains(key))
                    field = j.at(key).template get<std::decay_t<decltype(field)>>();
            };
            get("n_aps", c.n_aps);
            get("n_ues", c.n_ues);
            get("n_antennas", c.n_antennas);
            get("area_size_m", c.area_size_m);
            get("ap_height_m", c.ap_height_m);
            get("ue_height_m", c.ue_height_m);
            if (j.contains("ap_positions"))
                c.ap_positions = vec3_list_from(j.at("ap_positions"));
            if (j.contains("ue_positions"))
                c.ue_positions = vec3_list_from(j.at("ue_positions"));
            if (j.contains("target_position"))
                c.target_position = Vec2(j.at("target_position").at(0).get<double>(),
                                         j.at("target_position").at(1).get<double>());
            get("carrier_freq_hz", c.carrier_freq_hz);
            get("comm_bandwidth_hz", c.comm_bandwidth_hz);
            get("sensing_bandwidth_hz", c.sensing_bandwidth_hz);
            get("noise_figure_db", c.noise_figure_db);
            get("p_max_watts", c.p_max_watts);
            get("p_s_watts", c.p_s_watts);
            get("tau_c", c.tau_c);
            get("tau_d", c.tau_d);
            get("pathloss_exponent", c.pathloss_exponent);
            if (j.contains("rician_kappa"))
            {
                if (j.at("rician_kappa").is_string())
                    c.rician_kappa = std::numeric_limits<double>::infinity();
                else
                    c.rician_kappa = j.at("rician_kappa").get<double>();
            }
            get("blockage_probability", c.blockage_probability);
            get("blockage_extra_loss_db", c.blockage_extra_loss_db);
            get("unit_pathloss", c.unit_pathloss);
            get("rng_seed", c.rng_seed);
            return c;
        }
    } // namespace

    std::string scenario_config_to_json(const ScenarioConfig &c)
    {
        json j = config_to_jsonobj(c);
        j["format"] = "cfisac-config/1";
        return j.dump(2);
    }

    ScenarioConfig scenario_config_from_json(const std::string &text)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::exception &e)
        {
            throw InvalidConfig(std::string("config parse error: ") + e.what());
        }
        try
        {
            return config_from_jsonobj(j);
        }
        catch (const json::exception &e)
        {
            throw InvalidConfig(std::string("config field error: ") + e.what());
        }
    }

    std::string scenario_to_json(const Scenario &s)
    {
        json j;
        j["format"] = "cfisac-scenario/1";
        j["config"] = config_to_jsonobj(s.config);
        j["ap_positions"] = vec3_list(s.ap_positions);
        j["ue_positions"] = vec3_list(s.ue_positions);
        j["target_position"] = {s.target_position.x(), s.target_position.y()};
        j["n_antennas"] = s.n_antennas;
        j["noise_power_comm"] = s.noise_power_comm;
        j["noise_power_sensing"] = s.noise_power_sensing;
        j["rng_seed"] = s.rng_seed;
        json rcs = json::array();
        for (int m = 0; m < s.rcs.rows(); ++m)
        {
            json row = json::array();
            for (int n = 0; n < s.rcs.cols(); ++n)
                row.push_back({s.rcs(m, n).real(), s.rcs(m, n).imag()});
            rcs.push_back(row);
        }
        j["rcs"] = rcs;
        return j.dump(2);
    }

    Scenario scenario_from_json(const std::string &text)
    {
        json j = json::parse(text);
        if (j.value("format", "") != std::string("cfisac-scenario/1"))
            throw InvalidConfig("unsupported scenario snapshot format");
        ScenarioConfig cfg = config_from_jsonobj(j.at("config"));
        cfg.ap_positions = vec3_list_from(j.at("ap_positions"));
        cfg.ue_positions = vec3_list_from(j.at("ue_positions"));
        cfg.target_position = Vec2(j.at("target_position").at(0).get<double>(),
                                   j.at("target_position").at(1).get<double>());
        Scenario s = build_scenario(cfg);
        // Restore the exact RCS draw from the snapshot.
        const auto &rcs = j.at("rcs");
        for (int m = 0; m < s.rcs.rows(); ++m)
            for (int n = 0; n < s.rcs.cols(); ++n)
                s.rcs(m, n) = cdouble(rcs.at(m).at(n).at(0).get<double>(),
                                      rcs.at(m).at(n).at(1).get<double>());
        return s;
    }

} // namespace cfisac
