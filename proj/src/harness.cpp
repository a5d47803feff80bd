// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfisac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cfisac
{

    namespace
    {
        const std::set<std::string> kKnownAlgorithms{"alternating", "sequential",
                                                     "heuristic", "oracle"};
        const std::set<std::string> kKnownPrecoders{"max_ratio", "local_mmse"};

        std::string fmt_g(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.9g", v);
            return buf;
        }

        /// CRLB samples of random all-on TX/RX splits (every AP is either a
        /// transmitter or a receiver).  The spread over splits covers both
        /// well-balanced and lopsided partitions, so quantiles of this
        /// distribution make usable threshold anchors.
        void all_on_split_crlbs(const Scenario &s, std::uint64_t seed,
                                int n_splits, std::vector<double> &out)
        {
            const GMatrices g = geometry_matrices(s);
            const int L = s.n_aps();
            std::seed_seq sq{seed, static_cast<std::uint64_t>(0x63616c6962ULL)};
            std::mt19937_64 rng(sq);
            Eigen::VectorXi a(L), b(L);
            for (int r = 0; r < n_splits; ++r)
            {
                do
                {
                    for (int l = 0; l < L; ++l)
                    {
                        a(l) = static_cast<int>(rng() >> 63);
                        b(l) = 1 - a(l);
                    }
                } while (a.sum() == 0 || b.sum() == 0);
                const double c = crlb_trace(g, a, b, s.p_s_watts);
                if (std::isfinite(c))
                    out.push_back(c);
            }
        }

        ScenarioConfig trial_scenario_config(const ExperimentConfig &cfg, int k,
                                             std::uint64_t seed)
        {
            ScenarioConfig sc = cfg.scenario;
            sc.n_ues = k;
            sc.ue_positions.reset(); // resampled from the trial seed
            sc.rng_seed = seed;
            return sc;
        }

        ResultRecord base_record(const ExperimentConfig &cfg, int trial,
                                 std::uint64_t seed, const std::string &algo, int k,
                                 double eta)
        {
            ResultRecord r;
            r.trial = trial;
            r.seed = seed;
            r.algorithm = algo;
            r.k = k;
            r.eta = eta;
            r.gamma_c_db = cfg.gamma_c_db;
            return r;
        }

        ResultRecord run_one(const ExperimentConfig &cfg, const SelectionInputs &in,
                             int trial, std::uint64_t seed,
                             const std::string &algo, int k, double eta,
                             AlgoReport &report_out)
        {
            ResultRecord rec = base_record(cfg, trial, seed, algo, k, eta);
            try
            {
                AlgoReport rep;
                if (algo == "alternating")
                    rep = alternating(in, seed, cfg.alt_max_iter,
                                      cfg.alt_max_restarts);
                else if (algo == "sequential")
                    rep = sequential(in);
                else if (algo == "heuristic")
                    rep = heuristic(in, cfg.heuristic_r_init);
                else if (algo == "oracle")
                    rep = exhaustive_oracle(in, cfg.oracle_l_cap);
                else
                    throw InvalidConfig("unknown algorithm: " + algo);
                report_out = rep;
                rec.n_tx = rep.n_tx;
                rec.n_rx = rep.n_rx;
                rec.total = rep.total;
                rec.feasible = rep.feasible;
                rec.iterations = rep.iterations;
                rec.restarts = rep.restarts;
                rec.seconds = rep.seconds;
                rec.status = to_string(rep.status);
                if (cfg.per_trial_time_limit_s > 0.0 &&
                    rep.seconds > cfg.per_trial_time_limit_s)
                {
                    rec.status = "timeout";
                    rec.feasible = false;
                }
            }
            catch (const ExhaustedRestarts &)
            {
                rec.status = "exhausted_restarts";
            }
            catch (const std::exception &e)
            {
                rec.status = std::string("error: ") + e.what();
            }
            return rec;
        }
    } // namespace

    void ExperimentConfig::check() const
    {
        if (trials < 1)
            throw InvalidConfig("trials must be >= 1");
        if (algorithms.empty())
            throw InvalidConfig("at least one algorithm is required");
        for (const auto &a : algorithms)
            if (kKnownAlgorithms.count(a) == 0)
                throw InvalidConfig("unknown algorithm: " + a);
        if (kKnownPrecoders.count(precoder) == 0)
            throw InvalidConfig("unknown precoder: " + precoder);
        for (double e : eta)
            if (!(e > 0.0))
                throw InvalidConfig("eta thresholds must be positive");
        if (!(eta_quantile > 0.0 && eta_quantile < 1.0))
            throw InvalidConfig("eta_quantile must lie in (0, 1)");
        if (!(eta_pair_ratio >= 1.0))
            throw InvalidConfig("eta_pair_ratio must be >= 1");
        if (calibration_trials < 1)
            throw InvalidConfig("calibration_trials must be >= 1");
        if (channel_realizations < 1)
            throw InvalidConfig("channel_realizations must be >= 1");
        for (int k : k_list)
            if (k < 1)
                throw InvalidConfig("UE counts must be >= 1");
    }

    std::pair<double, double> auto_calibrate_eta(const ExperimentConfig &cfg, int k)
    {
        const int n_cal = std::min(cfg.calibration_trials, cfg.trials);
        constexpr int kSplitsPerTrial = 40;
        std::vector<double> ref;
        ref.reserve(static_cast<std::size_t>(n_cal * kSplitsPerTrial));
        for (int t = 0; t < n_cal; ++t)
        {
            const std::uint64_t seed =
                cfg.base_seed + static_cast<std::uint64_t>(t);
            const Scenario s =
                build_scenario(trial_scenario_config(cfg, k, seed));
            all_on_split_crlbs(s, seed, kSplitsPerTrial, ref);
        }
        if (ref.empty())
            throw DegenerateGeometry(
                "threshold calibration: every sampled split is singular");
        std::sort(ref.begin(), ref.end());
        const auto idx = static_cast<std::size_t>(
            std::floor(cfg.eta_quantile * static_cast<double>(ref.size() - 1)));
        const double tight = ref[idx];
        return {tight, tight * cfg.eta_pair_ratio};
    }

    SelectionInputs build_trial_inputs(const ExperimentConfig &cfg, int k,
                                       std::uint64_t seed, double eta)
    {
        const Scenario s = build_scenario(trial_scenario_config(cfg, k, seed));
        const ChannelEnsemble e = generate_channels(s, cfg.channel_realizations);
        const PrecoderKind kind = cfg.precoder == "max_ratio"
                                      ? PrecoderKind::MaximumRatio
                                      : PrecoderKind::LocalMmse;
        // Ridge term: noise power over the per-UE share of the AP power budget.
        const double delta =
            s.noise_power_comm * static_cast<double>(k) / s.p_max_watts;
        const PrecoderSet w = compute_precoders(e, k, kind, delta);

        SelectionInputs in;
        in.stats = estimate_stats(e, w, s.noise_power_comm);
        in.g = geometry_matrices(s);
        in.ap_gain = e.ap_gain;
        const std::vector<double> ranges = ap_target_ranges(s);
        in.target_dist =
            Eigen::Map<const Eigen::VectorXd>(ranges.data(),
                                              static_cast<Eigen::Index>(ranges.size()));
        in.gamma_c = std::pow(10.0, cfg.gamma_c_db / 10.0);
        in.eta = eta;
        in.p_s = s.p_s_watts;
        in.p_max = s.p_max_watts;
        in.bnb.max_nodes = cfg.bnb_max_nodes;
        return in;
    }

    std::vector<ResultRecord> run_experiment(const ExperimentConfig &cfg,
                                             const RecordHook &hook)
    {
        cfg.check();
        std::vector<int> k_list =
            cfg.k_list.empty() ? std::vector<int>{cfg.scenario.n_ues} : cfg.k_list;

        std::vector<ResultRecord> records;
        for (int k : k_list)
        {
            std::vector<double> etas = cfg.eta;
            if (etas.empty())
            {
                const auto [tight, loose] = auto_calibrate_eta(cfg, k);
                etas = {tight, loose};
            }
            for (int trial = 0; trial < cfg.trials; ++trial)
            {
                const std::uint64_t seed =
                    cfg.base_seed + static_cast<std::uint64_t>(trial);
                bool inputs_ok = true;
                SelectionInputs in;
                std::string build_error;
                try
                {
                    in = build_trial_inputs(cfg, k, seed, etas.front());
                }
                catch (const std::exception &e)
                {
                    inputs_ok = false;
                    build_error = e.what();
                }
                for (double eta : etas)
                {
                    in.eta = eta;
                    for (const auto &algo : cfg.algorithms)
                    {
                        AlgoReport report;
                        if (!inputs_ok)
                        {
                            ResultRecord rec =
                                base_record(cfg, trial, seed, algo, k, eta);
                            rec.status = "error: " + build_error;
                            if (hook)
                                hook(rec, report);
                            records.push_back(std::move(rec));
                            continue;
                        }
                        records.push_back(
                            run_one(cfg, in, trial, seed, algo, k, eta, report));
                        if (hook)
                            hook(records.back(), report);
                    }
                }
            }
        }
        return records;
    }

    std::vector<SummaryRow> summarize(const std::vector<ResultRecord> &records)
    {
        if (records.empty())
            throw EmptyInput("summarize needs at least one record");
        std::vector<SummaryRow> rows;
        auto find_row = [&rows](const ResultRecord &r) -> SummaryRow & {
            for (auto &row : rows)
                if (row.algorithm == r.algorithm && row.k == r.k && row.eta == r.eta)
                    return row;
            rows.push_back({r.algorithm, r.k, r.eta});
            return rows.back();
        };
        // First pass: means.
        for (const auto &r : records)
        {
            SummaryRow &row = find_row(r);
            ++row.n_records;
            row.mean_tx += r.n_tx;
            row.mean_rx += r.n_rx;
            row.mean_total += r.total;
            row.mean_seconds += r.seconds;
            row.feasible_rate += r.feasible ? 1.0 : 0.0;
        }
        for (auto &row : rows)
        {
            row.mean_tx /= row.n_records;
            row.mean_rx /= row.n_records;
            row.mean_total /= row.n_records;
            row.mean_seconds /= row.n_records;
            row.feasible_rate /= row.n_records;
        }
        // Second pass: population standard deviations.
        for (const auto &r : records)
        {
            SummaryRow &row = find_row(r);
            row.sd_total += (r.total - row.mean_total) * (r.total - row.mean_total);
            row.sd_seconds +=
                (r.seconds - row.mean_seconds) * (r.seconds - row.mean_seconds);
        }
        for (auto &row : rows)
        {
            row.sd_total = std::sqrt(row.sd_total / row.n_records);
            row.sd_seconds = std::sqrt(row.sd_seconds / row.n_records);
        }
        return rows;
    }

    std::string records_to_csv(const std::vector<ResultRecord> &records,
                               bool include_timing)
    {
        std::ostringstream out;
        out << "# cfisac-results v1\n";
        out << "trial,seed,algorithm,k,eta,gamma_c_db,n_tx,n_rx,total,feasible,"
               "iterations,restarts,status";
        if (include_timing)
            out << ",seconds";
        out << "\n";
        for (const auto &r : records)
        {
            std::string status = r.status;
            std::replace(status.begin(), status.end(), ',', ';');
            out << r.trial << ',' << r.seed << ',' << r.algorithm << ',' << r.k
                << ',' << fmt_g(r.eta) << ',' << fmt_g(r.gamma_c_db) << ','
                << r.n_tx << ',' << r.n_rx << ',' << r.total << ','
                << (r.feasible ? 1 : 0) << ',' << r.iterations << ','
                << r.restarts << ',' << status;
            if (include_timing)
                out << ',' << fmt_g(r.seconds);
            out << "\n";
        }
        return out.str();
    }

    std::string summary_to_text(const std::vector<SummaryRow> &rows)
    {
        std::ostringstream out;
        out << "# cfisac-summary v1\n";
        out << "algorithm,k,eta,n,mean_tx,mean_rx,mean_total,sd_total,"
               "mean_seconds,sd_seconds,feasible_rate\n";
        for (const auto &s : rows)
            out << s.algorithm << ',' << s.k << ',' << fmt_g(s.eta) << ','
                << s.n_records << ',' << fmt_g(s.mean_tx) << ','
                << fmt_g(s.mean_rx) << ',' << fmt_g(s.mean_total) << ','
                << fmt_g(s.sd_total) << ',' << fmt_g(s.mean_seconds) << ','
                << fmt_g(s.sd_seconds) << ',' << fmt_g(s.feasible_rate) << "\n";
        return out.str();
    }

    ExperimentConfig experiment_config_from_json(const std::string &text)
    {
        using nlohmann::json;
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::exception &e)
        {
            throw InvalidConfig(std::string("experiment config parse error: ") +
                                e.what());
        }
        ExperimentConfig cfg;
        try
        {
            if (j.contains("scenario"))
                cfg.scenario = scenario_config_from_json(j.at("scenario").dump());
            auto get = [&](const char *key, auto &field) {
                if (j.contains(key))
                    field = j.at(key).template get<std::decay_t<decltype(field)>>();
            };
            get("algorithms", cfg.algorithms);
            get("precoder", cfg.precoder);
            get("gamma_c_db", cfg.gamma_c_db);
            get("eta", cfg.eta);
            get("eta_quantile", cfg.eta_quantile);
            get("eta_pair_ratio", cfg.eta_pair_ratio);
            get("calibration_trials", cfg.calibration_trials);
            get("k_list", cfg.k_list);
            get("trials", cfg.trials);
            get("base_seed", cfg.base_seed);
            get("channel_realizations", cfg.channel_realizations);
            get("output_path", cfg.output_path);
            get("per_trial_time_limit_s", cfg.per_trial_time_limit_s);
            get("alt_max_iter", cfg.alt_max_iter);
            get("alt_max_restarts", cfg.alt_max_restarts);
            get("heuristic_r_init", cfg.heuristic_r_init);
            get("oracle_l_cap", cfg.oracle_l_cap);
            get("bnb_max_nodes", cfg.bnb_max_nodes);
        }
        catch (const json::exception &e)
        {
            throw InvalidConfig(std::string("experiment config field error: ") +
                                e.what());
        }
        cfg.check();
        return cfg;
    }

    std::string experiment_config_to_json(const ExperimentConfig &cfg)
    {
        using nlohmann::json;
        json j;
        j["format"] = "cfisac-experiment/1";
        j["scenario"] = json::parse(scenario_config_to_json(cfg.scenario));
        j["algorithms"] = cfg.algorithms;
        j["precoder"] = cfg.precoder;
        j["gamma_c_db"] = cfg.gamma_c_db;
        j["eta"] = cfg.eta;
        j["eta_quantile"] = cfg.eta_quantile;
        j["eta_pair_ratio"] = cfg.eta_pair_ratio;
        j["calibration_trials"] = cfg.calibration_trials;
        j["k_list"] = cfg.k_list;
        j["trials"] = cfg.trials;
        j["base_seed"] = cfg.base_seed;
        j["channel_realizations"] = cfg.channel_realizations;
        j["output_path"] = cfg.output_path;
        j["per_trial_time_limit_s"] = cfg.per_trial_time_limit_s;
        j["alt_max_iter"] = cfg.alt_max_iter;
        j["alt_max_restarts"] = cfg.alt_max_restarts;
        j["heuristic_r_init"] = cfg.heuristic_r_init;
        j["oracle_l_cap"] = cfg.oracle_l_cap;
        j["bnb_max_nodes"] = cfg.bnb_max_nodes;
        return j.dump(2);
    }

} // namespace cfisac
