// SPDX-License-Identifier: Apache-2.0
//
// cfisac -- AP mode selection for cell-free massive MIMO ISAC networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line front end: runs Monte Carlo experiments from a JSON config,
// writes the result CSV, optionally dumps per-run assignment files and
// re-validates previously dumped assignments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cfisac/harness.hpp"

namespace
{

    std::string read_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw cfisac::InvalidConfig("cannot open file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_file(const std::string &path, const std::string &text)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write file: " + path);
        out << text;
    }

    std::vector<std::string> split_csv_list(const std::string &s)
    {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty())
                out.push_back(item);
        return out;
    }

    /// Self-contained assignment snapshot: experiment config + trial identity
    /// + the chosen modes and powers, enough to re-derive the constraints.
    std::string assignment_file_text(const cfisac::ExperimentConfig &cfg,
                                     const cfisac::ResultRecord &rec,
                                     const cfisac::AlgoReport &rep)
    {
        nlohmann::json j;
        j["format"] = "cfisac-assignment/1";
        j["experiment"] =
            nlohmann::json::parse(cfisac::experiment_config_to_json(cfg));
        j["trial"] = rec.trial;
        j["seed"] = rec.seed;
        j["algorithm"] = rec.algorithm;
        j["k"] = rec.k;
        j["eta"] = rec.eta;
        j["report"] = nlohmann::json::parse(cfisac::algo_report_to_json(rep));
        return j.dump(2);
    }

    int validate_assignment_file(const std::string &path)
    {
        const nlohmann::json j = nlohmann::json::parse(read_file(path));
        if (j.value("format", "") != std::string("cfisac-assignment/1"))
            throw cfisac::InvalidConfig("unsupported assignment file format");
        const cfisac::ExperimentConfig cfg =
            cfisac::experiment_config_from_json(j.at("experiment").dump());
        const auto seed = j.at("seed").get<std::uint64_t>();
        const int k = j.at("k").get<int>();
        const double eta = j.at("eta").get<double>();
        const nlohmann::json &rep = j.at("report");
        if (!rep.contains("a"))
        {
            std::cout << "assignment file has no feasible assignment (status "
                      << rep.value("status", "?") << ")\n";
            return 0;
        }

        cfisac::ModeAssignment assign;
        const auto av = rep.at("a").get<std::vector<int>>();
        const auto bv = rep.at("b").get<std::vector<int>>();
        assign.a = Eigen::Map<const Eigen::VectorXi>(
            av.data(), static_cast<Eigen::Index>(av.size()));
        assign.b = Eigen::Map<const Eigen::VectorXi>(
            bv.data(), static_cast<Eigen::Index>(bv.size()));
        const auto &pw = rep.at("powers");
        assign.powers.resize(static_cast<Eigen::Index>(pw.size()),
                             static_cast<Eigen::Index>(pw.at(0).size()));
        for (Eigen::Index l = 0; l < assign.powers.rows(); ++l)
            for (Eigen::Index c = 0; c < assign.powers.cols(); ++c)
                assign.powers(l, c) =
                    pw.at(static_cast<std::size_t>(l)).at(static_cast<std::size_t>(c)).get<double>();

        const cfisac::SelectionInputs in =
            cfisac::build_trial_inputs(cfg, k, seed, eta);
        const cfisac::ConstraintReport report = cfisac::validate(
            assign, in.stats, in.g, in.gamma_c, in.eta, in.p_s, in.p_max);
        for (const auto &row : report.rows)
            std::cout << (row.ok ? "pass" : "FAIL") << "  " << row.name
                      << "  value=" << row.value << "  limit=" << row.limit
                      << "\n";
        std::cout << (report.ok ? "assignment satisfies all constraints"
                                : "assignment violates constraints")
                  << "\n";
        return 0;
    }

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"cfisac: AP mode selection experiments for cell-free "
                 "massive MIMO ISAC networks"};
    std::string config_path, algo_list, out_path, validate_path, dump_dir,
        timing_path;
    long long trials = -1;
    long long seed = -1;
    bool want_summary = false;

    app.add_option("--config", config_path, "experiment config JSON");
    app.add_option("--algo", algo_list,
                   "comma-separated algorithm list (overrides config): "
                   "alternating,sequential,heuristic,oracle");
    app.add_option("--trials", trials, "number of Monte Carlo trials (override)");
    app.add_option("--seed", seed, "base RNG seed (override)");
    app.add_option("--out", out_path, "result CSV path (override)");
    app.add_option("--timing", timing_path,
                   "also write a CSV that includes wall-clock seconds");
    app.add_flag("--summary", want_summary, "print an aggregate summary");
    app.add_option("--validate", validate_path,
                   "re-check a dumped assignment file instead of running");
    app.add_option("--dump-assignments", dump_dir,
                   "directory for per-run assignment JSON files");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 1;
    }

    try
    {
        if (!validate_path.empty())
            return validate_assignment_file(validate_path);

        if (config_path.empty())
        {
            std::cerr << "error: --config is required (or use --validate)\n"
                      << app.help();
            return 1;
        }
        cfisac::ExperimentConfig cfg;
        try
        {
            cfg = cfisac::experiment_config_from_json(read_file(config_path));
            if (!algo_list.empty())
                cfg.algorithms = split_csv_list(algo_list);
            if (trials >= 1)
                cfg.trials = static_cast<int>(trials);
            if (seed >= 0)
                cfg.base_seed = static_cast<std::uint64_t>(seed);
            if (!out_path.empty())
                cfg.output_path = out_path;
            cfg.check();
        }
        catch (const cfisac::InvalidConfig &e)
        {
            std::cerr << "config error: " << e.what() << "\n";
            return 1;
        }

        cfisac::RecordHook hook;
        if (!dump_dir.empty())
        {
            std::filesystem::create_directories(dump_dir);
            hook = [&cfg, &dump_dir](const cfisac::ResultRecord &rec,
                                     const cfisac::AlgoReport &rep) {
                std::ostringstream name;
                name << "assign_k" << rec.k << "_trial" << rec.trial << "_"
                     << rec.algorithm << "_eta" << rec.eta << ".json";
                write_file((std::filesystem::path(dump_dir) / name.str()).string(),
                           assignment_file_text(cfg, rec, rep));
            };
        }

        const std::vector<cfisac::ResultRecord> records =
            cfisac::run_experiment(cfg, hook);
        const std::string csv = cfisac::records_to_csv(records);
        if (!cfg.output_path.empty())
            write_file(cfg.output_path, csv);
        else
            std::cout << csv;
        if (!timing_path.empty())
            write_file(timing_path, cfisac::records_to_csv(records, true));
        if (want_summary)
            std::cout << cfisac::summary_to_text(cfisac::summarize(records));
        return 0;
    }
    catch (const cfisac::InvalidConfig &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
