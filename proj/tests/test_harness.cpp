// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfisac/harness.hpp"

#ifndef CFISAC_CLI_PATH
#define CFISAC_CLI_PATH "./cfisac_cli"
#endif

using namespace cfisac;

namespace
{
    /// Small, fast experiment: 5 APs, 2 UEs, explicit thresholds.
    ExperimentConfig small_config()
    {
        ExperimentConfig cfg;
        cfg.scenario.n_aps = 5;
        cfg.scenario.n_ues = 2;
        cfg.scenario.n_antennas = 4;
        // keep the target away from possible AP grid points
        cfg.scenario.target_position =
            Vec2(cfg.scenario.area_size_m / 2.0 + 13.7,
                 cfg.scenario.area_size_m / 2.0 - 21.3);
        cfg.algorithms = {"heuristic", "sequential"};
        cfg.gamma_c_db = 5.0;
        cfg.eta = {1e-5, 1e-4};
        cfg.trials = 2;
        cfg.base_seed = 11;
        cfg.channel_realizations = 50;
        return cfg;
    }

    std::string slurp(const std::filesystem::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int run_cli(const std::string &args)
    {
        const std::string cmd = std::string(CFISAC_CLI_PATH) + " " + args;
        const int status = std::system(cmd.c_str());
        return status < 0 ? status : WEXITSTATUS(status);
    }

    std::filesystem::path tmp_dir()
    {
        const auto d =
            std::filesystem::temp_directory_path() / "cfisac_harness_test";
        std::filesystem::create_directories(d);
        return d;
    }
} // namespace

TEST_CASE("experiment produces one record per (k, trial, eta, algorithm)")
{
    const ExperimentConfig cfg = small_config();
    int hook_calls = 0;
    const auto records = run_experiment(
        cfg, [&hook_calls](const ResultRecord &, const AlgoReport &) {
            ++hook_calls;
        });
    const std::size_t expected = 1u * 2u * 2u * 2u; // k x trials x etas x algos
    CHECK(records.size() == expected);
    CHECK(hook_calls == static_cast<int>(expected));
    for (const auto &r : records)
    {
        CHECK(r.k == 2);
        CHECK((r.eta == 1e-5 || r.eta == 1e-4));
        CHECK((r.algorithm == "heuristic" || r.algorithm == "sequential"));
        CHECK(r.total == r.n_tx + r.n_rx);
        CHECK(r.gamma_c_db == 5.0);
        CHECK_FALSE(r.status.empty());
        if (r.feasible)
            CHECK(r.total >= 2); // at least one TX and one RX
    }
}

TEST_CASE("experiment reruns are byte-identical in the default CSV")
{
    const ExperimentConfig cfg = small_config();
    const std::string csv1 = records_to_csv(run_experiment(cfg));
    const std::string csv2 = records_to_csv(run_experiment(cfg));
    CHECK(csv1 == csv2);
    CHECK(csv1.rfind("# cfisac-results v1\n", 0) == 0);
    CHECK(csv1.find("seconds") == std::string::npos);

    // The timing variant appends a seconds column and is allowed to differ.
    const std::string timed = records_to_csv(run_experiment(cfg), true);
    CHECK(timed.find("seconds") != std::string::npos);
}

TEST_CASE("summarize aggregates by (algorithm, k, eta)")
{
    std::vector<ResultRecord> records;
    for (int trial = 0; trial < 3; ++trial)
    {
        ResultRecord r;
        r.trial = trial;
        r.algorithm = "heuristic";
        r.k = 4;
        r.eta = 0.5;
        r.n_tx = 2 + trial; // totals 3, 4, 5
        r.n_rx = 1;
        r.total = r.n_tx + r.n_rx;
        r.feasible = trial < 2;
        r.seconds = 1.0;
        records.push_back(r);
    }
    const auto rows = summarize(records);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].algorithm == "heuristic");
    CHECK(rows[0].n_records == 3);
    CHECK(rows[0].mean_total == doctest::Approx(4.0));
    // population standard deviation of {3, 4, 5}
    CHECK(rows[0].sd_total == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(rows[0].sd_seconds == doctest::Approx(0.0));
    CHECK(rows[0].feasible_rate == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(summarize({}), EmptyInput);

    const std::string text = summary_to_text(rows);
    CHECK(text.rfind("# cfisac-summary v1\n", 0) == 0);
    CHECK(text.find("heuristic,4,0.5,3,") != std::string::npos);
}

TEST_CASE("experiment config JSON round trip preserves every field")
{
    ExperimentConfig cfg = small_config();
    cfg.precoder = "max_ratio";
    cfg.k_list = {2, 3};
    cfg.eta_pair_ratio = 3.0;
    cfg.oracle_l_cap = 6;
    cfg.bnb_max_nodes = 1234;
    const ExperimentConfig back =
        experiment_config_from_json(experiment_config_to_json(cfg));
    CHECK(back.scenario.n_aps == 5);
    CHECK(back.algorithms == cfg.algorithms);
    CHECK(back.precoder == "max_ratio");
    CHECK(back.gamma_c_db == 5.0);
    CHECK(back.eta == cfg.eta);
    CHECK(back.eta_pair_ratio == 3.0);
    CHECK(back.k_list == cfg.k_list);
    CHECK(back.trials == 2);
    CHECK(back.base_seed == 11);
    CHECK(back.channel_realizations == 50);
    CHECK(back.oracle_l_cap == 6);
    CHECK(back.bnb_max_nodes == 1234);

    CHECK_THROWS_AS(experiment_config_from_json("not json"), InvalidConfig);
}

TEST_CASE("config validation rejects bad fields")
{
    ExperimentConfig cfg = small_config();
    cfg.algorithms = {"simulated_annealing"};
    CHECK_THROWS_AS(cfg.check(), InvalidConfig);

    cfg = small_config();
    cfg.precoder = "zero_forcing";
    CHECK_THROWS_AS(cfg.check(), InvalidConfig);

    cfg = small_config();
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.check(), InvalidConfig);

    cfg = small_config();
    cfg.eta = {0.0};
    CHECK_THROWS_AS(cfg.check(), InvalidConfig);

    cfg = small_config();
    cfg.eta_quantile = 1.0;
    CHECK_THROWS_AS(cfg.check(), InvalidConfig);

    cfg = small_config();
    cfg.k_list = {0};
    CHECK_THROWS_AS(cfg.check(), InvalidConfig);
}

TEST_CASE("threshold auto-calibration yields a tight/loose pair")
{
    ExperimentConfig cfg = small_config();
    cfg.eta.clear();
    cfg.calibration_trials = 5;
    cfg.eta_pair_ratio = 2.5;
    const auto [tight, loose] = auto_calibrate_eta(cfg, 2);
    CHECK(tight > 0.0);
    CHECK(std::isfinite(tight));
    CHECK(loose == doctest::Approx(2.5 * tight));

    // Deterministic in the config.
    const auto [tight2, loose2] = auto_calibrate_eta(cfg, 2);
    CHECK(tight == tight2);
    CHECK(loose == loose2);
}

TEST_CASE("trial inputs carry the requested UE count and thresholds")
{
    const ExperimentConfig cfg = small_config();
    const SelectionInputs in = build_trial_inputs(cfg, 3, 99, 2e-5);
    CHECK(in.stats.n_ues() == 3);
    CHECK(in.stats.n_aps() == 5);
    CHECK(in.ap_gain.size() == 5);
    CHECK(in.target_dist.size() == 5);
    CHECK(in.eta == 2e-5);
    CHECK(in.gamma_c == doctest::Approx(std::pow(10.0, 0.5)));
    CHECK(in.p_s == 1.0);
    CHECK(in.p_max == 1.0);
}

TEST_CASE("command line runs an experiment end to end")
{
    const auto dir = tmp_dir();
    const auto cfg_path = dir / "config.json";
    const auto out_path = dir / "results.csv";
    const auto dump_dir = dir / "assignments";
    std::filesystem::remove_all(dump_dir);

    ExperimentConfig cfg = small_config();
    cfg.algorithms = {"heuristic"};
    cfg.trials = 1;
    cfg.eta = {1e-4};
    cfg.output_path = out_path.string();
    {
        std::ofstream out(cfg_path);
        out << experiment_config_to_json(cfg);
    }

    // Missing --config is a usage error.
    CHECK(run_cli("> /dev/null 2>&1") == 1);

    CHECK(run_cli("--config " + cfg_path.string() + " --dump-assignments " +
                  dump_dir.string() + " > /dev/null 2>&1") == 0);
    const std::string csv = slurp(out_path);
    CHECK(csv == records_to_csv(run_experiment(cfg)));

    // Exactly one assignment dump; re-validating it succeeds.
    int n_dumps = 0;
    std::filesystem::path dump_file;
    for (const auto &e : std::filesystem::directory_iterator(dump_dir))
    {
        ++n_dumps;
        dump_file = e.path();
    }
    REQUIRE(n_dumps == 1);
    const auto log_path = dir / "validate.log";
    CHECK(run_cli("--validate " + dump_file.string() + " > " +
                  log_path.string() + " 2>&1") == 0);
    const std::string log = slurp(log_path);
    const bool has_verdict =
        log.find("assignment satisfies all constraints") != std::string::npos ||
        log.find("no feasible assignment") != std::string::npos;
    CHECK(has_verdict);
}
