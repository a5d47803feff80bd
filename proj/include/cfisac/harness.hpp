// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cfisac/modeselect.hpp"

namespace cfisac
{

    /// Full description of a Monte Carlo sweep: scenario, algorithms,
    /// thresholds, UE-count list and seeding.
    struct ExperimentConfig
    {
        ScenarioConfig scenario;
        std::vector<std::string> algorithms{"heuristic"};
        /// "local_mmse" (default; interference-suppressing, supports high SINR
        /// targets) or "max_ratio".
        std::string precoder = "local_mmse";
        double gamma_c_db = 20.0;
        std::vector<double> eta;     ///< explicit CRLB thresholds; empty = auto
        double eta_quantile = 0.9;   ///< calibration quantile when eta is empty
        double eta_pair_ratio = 2.0; ///< loose threshold = ratio * tight
        int calibration_trials = 30;
        std::vector<int> k_list; ///< UE counts; empty = scenario default
        int trials = 1;
        std::uint64_t base_seed = 1;
        int channel_realizations = 1000;
        std::string output_path;
        double per_trial_time_limit_s = 0.0; ///< 0 disables the limit

        int alt_max_iter = 20;
        int alt_max_restarts = 50;
        int heuristic_r_init = 0;
        int oracle_l_cap = 10;
        long bnb_max_nodes = 100'000;

        void check() const; ///< throws InvalidConfig on bad fields
    };

    /// One algorithm run on one trial at one threshold.
    struct ResultRecord
    {
        int trial = 0;
        std::uint64_t seed = 0;
        std::string algorithm;
        int k = 0;
        double eta = 0.0;
        double gamma_c_db = 0.0;
        int n_tx = 0, n_rx = 0, total = 0;
        bool feasible = false;
        int iterations = 0;
        int restarts = 0;
        double seconds = 0.0;
        std::string status;
    };

    struct SummaryRow
    {
        std::string algorithm;
        int k = 0;
        double eta = 0.0;
        int n_records = 0;
        double mean_tx = 0.0, mean_rx = 0.0;
        double mean_total = 0.0, sd_total = 0.0;
        double mean_seconds = 0.0, sd_seconds = 0.0;
        double feasible_rate = 0.0;
    };

    /// Tight/loose threshold pair derived from the scenario itself: a quantile
    /// of the per-trial reference CRLB (strongest even/odd AP split), times 1
    /// and times `ratio`.
    std::pair<double, double> auto_calibrate_eta(const ExperimentConfig &cfg, int k);

    /// Called once per record with the full algorithm report (empty report on
    /// build errors); used by the CLI to dump assignment files.
    using RecordHook = std::function<void(const ResultRecord &, const AlgoReport &)>;

    /// Runs the full sweep.  Deterministic in the config; per-trial failures
    /// become records, never aborts.
    std::vector<ResultRecord> run_experiment(const ExperimentConfig &cfg,
                                             const RecordHook &hook = {});

    /// Per-(algorithm, K, eta) aggregation.  Throws EmptyInput.
    std::vector<SummaryRow> summarize(const std::vector<ResultRecord> &records);

    /// Versioned CSV of the records.  Wall-clock seconds are excluded unless
    /// `include_timing` is set, so default output is byte-reproducible.
    std::string records_to_csv(const std::vector<ResultRecord> &records,
                               bool include_timing = false);

    std::string summary_to_text(const std::vector<SummaryRow> &rows);

    ExperimentConfig experiment_config_from_json(const std::string &text);
    std::string experiment_config_to_json(const ExperimentConfig &cfg);

    /// Builds the per-trial algorithm inputs (scenario with resampled UEs,
    /// channel statistics, geometry matrices).  Exposed for tests.
    SelectionInputs build_trial_inputs(const ExperimentConfig &cfg, int k,
                                       std::uint64_t seed, double eta);

} // namespace cfisac
