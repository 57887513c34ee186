// SPDX-License-Identifier: Apache-2.0
//
// ccrw - channel charting in real-world coordinates
// Copyright (C) 2026 The ccrw authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Command-line front end. Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ccrw/config.hpp"
#include "ccrw/errors.hpp"
#include "ccrw/features.hpp"
#include "ccrw/gradcheck.hpp"
#include "ccrw/io.hpp"
#include "ccrw/metrics.hpp"
#include "ccrw/pipeline.hpp"
#include "ccrw/presets.hpp"
#include "ccrw/train.hpp"

namespace
{
    namespace fs = std::filesystem;
    using namespace ccrw;

    constexpr int exit_usage = 1;
    constexpr int exit_data = 2;
    constexpr int exit_numerical = 3;

    double parse_db(const std::string &text)
    {
        if (text == "-inf")
            return -std::numeric_limits<double>::infinity();
        if (text == "inf")
            return std::numeric_limits<double>::infinity();
        try
        {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used == text.size())
                return v;
        }
        catch (const std::exception &)
        {
        }
        throw CLI::ValidationError("expected a number in dB or -inf, got '" + text + "'");
    }

    FeatureSet features_for(const CsiDataset &ds, const std::string &features_path, int taps, double p_thr, double m_p)
    {
        if (!features_path.empty())
        {
            FeatureSet f = load_features(features_path);
            if (f.p_thr != p_thr || f.m_p != m_p)
                relabel(f, p_thr, m_p);
            return f;
        }
        FeatureParams fp;
        fp.taps = ds.domain == CsiDomain::delay ? ds.tap_count : taps;
        fp.p_thr = p_thr;
        fp.m_p = m_p;
        return build_features(ds, fp);
    }

    struct Options
    {
        // simulate
        std::string scenario_path, preset, out;
        // features / power-trace
        std::string dataset, features;
        int taps = 8;
        std::string p_thr = "-inf";
        double m_p = 3.0;
        int ap = -1;
        // train
        std::string variant, run_config;
        int seeds = 0;
        std::optional<int> epochs;
        // eval / export
        std::vector<std::string> models;
        bool force = false;
        std::string json_out;
        // ingest
        std::string descriptor;
        // gradcheck
        int instances = 50;
    };

    int cmd_simulate(const Options &o)
    {
        ScenarioConfig cfg;
        if (!o.preset.empty())
            cfg = make_preset(o.preset).scenario;
        else if (!o.scenario_path.empty())
            cfg = load_scenario_config(o.scenario_path);
        else
            throw CLI::ValidationError("simulate needs --config or --preset");
        const CsiDataset ds = simulate_scenario(cfg);
        save_dataset(ds, o.out);
        std::cout << "wrote " << ds.size() << " samples (" << ds.train_indices().size() << " train) to " << o.out
                  << "\n";
        return 0;
    }

    int cmd_features(const Options &o)
    {
        const CsiDataset ds = load_dataset(o.dataset);
        const FeatureSet f = features_for(ds, "", o.taps, parse_db(o.p_thr), o.m_p);
        save_features(f, o.out);
        const auto d = diagnose_features(f, ds);
        std::cout << "wrote features N=" << f.size() << " D'=" << f.dimension() << " to " << o.out << "\n"
                  << "mean AP pairs per sample: " << d.mean_pair_count << "\n";
        if (!ds.los.empty())
            std::cout << "LoS agreement with ground truth: " << d.los_agreement << "\n";
        return 0;
    }

    int cmd_power_trace(const Options &o)
    {
        FeatureSet f;
        if (!o.features.empty())
            f = load_features(o.features);
        else if (!o.dataset.empty())
            f = features_for(load_dataset(o.dataset), "", o.taps, -std::numeric_limits<double>::infinity(), 3.0);
        else
            throw CLI::ValidationError("power-trace needs --dataset or --features");
        Matrix powers = f.powers;
        if (o.ap >= 0)
        {
            if (o.ap >= f.ap_count())
                throw data_error("AP index " + std::to_string(o.ap) + " out of range");
            powers = f.powers.col(o.ap);
        }
        export_power_trace(powers, f.timestamps, o.out);
        return 0;
    }

    int cmd_train(const Options &o)
    {
        RunConfig run = load_run_config(o.run_config);
        if (!o.variant.empty() && o.variant != variant_name(run.variant))
        {
            run.variant = parse_variant(o.variant);
            apply_variant_weights(run);
        }
        if (o.epochs)
            run.epochs = *o.epochs;
        if (o.seeds > 0)
        {
            if (static_cast<std::size_t>(o.seeds) > run.seeds.size())
                throw data_error("run configuration lists only " + std::to_string(run.seeds.size()) + " seeds");
            run.seeds.resize(static_cast<std::size_t>(o.seeds));
        }
        run.validate();

        const CsiDataset ds = load_dataset(o.dataset);
        const double p_thr = run.p_thr.value_or(-std::numeric_limits<double>::infinity());
        const FeatureSet f = features_for(ds, o.features, o.taps, p_thr, run.loss.margin_p);
        fs::create_directories(o.out);
        const std::string hash = run_config_hash(run);
        const auto test = ds.test_indices();
        for (std::uint64_t seed : run.seeds)
        {
            const TrainResult tr = train_variant(run, f, ds, seed);
            const std::string stem = std::string(variant_name(run.variant)) + "_seed" + std::to_string(seed);
            save_checkpoint(Checkpoint{tr.model, tr.affine, std::string(variant_name(run.variant)), hash,
                                       ds.config_hash, p_thr, run.loss.margin_p},
                            (fs::path(o.out) / (stem + ".ccm")).string());
            write_training_log(tr.log, (fs::path(o.out) / (stem + "_log.csv")).string());
            export_chart(test, predict(tr.model, tr.affine, f, test), (fs::path(o.out) / (stem + "_chart.csv")).string());
            std::cout << "trained " << stem << "\n";
        }
        return 0;
    }

    Checkpoint checked_checkpoint(const std::string &path, const CsiDataset &ds, bool force)
    {
        Checkpoint c = load_checkpoint(path);
        if (c.dataset_hash != ds.config_hash)
        {
            if (!force)
                throw data_error("model " + path + " was trained on dataset " + c.dataset_hash + ", not " +
                                 ds.config_hash + " (use --force to evaluate anyway)");
            spdlog::warn("evaluating {} on a different dataset than it was trained on", path);
        }
        return c;
    }

    int cmd_eval(const Options &o)
    {
        const CsiDataset ds = load_dataset(o.dataset);
        std::vector<MetricValues> per_model;
        std::string variant;
        for (const auto &path : o.models)
        {
            const Checkpoint c = checked_checkpoint(path, ds, o.force);
            if (!variant.empty() && variant != c.variant)
                throw data_error("eval: all models must belong to the same variant");
            variant = c.variant;
            const FeatureSet f = features_for(ds, o.features, o.taps, c.p_thr, c.m_p);
            if (f.dimension() != c.model.input_dim())
                throw data_error("eval: model input dimension does not match the features");
            per_model.push_back(evaluate_model(c.model, c.affine, f, ds));
        }
        VariantOutcome outcome;
        outcome.variant = parse_variant(variant);
        outcome.report = aggregate(per_model, default_neighbor_count(ds.test_indices().size()), 20);
        std::cout << format_table({outcome});
        const std::string js = metrics_json(outcome.report);
        if (!o.json_out.empty())
            write_text(o.json_out, js + "\n");
        else
            std::cout << js << "\n";
        return 0;
    }

    int cmd_export(const Options &o)
    {
        const CsiDataset ds = load_dataset(o.dataset);
        const Checkpoint c = checked_checkpoint(o.models.front(), ds, o.force);
        const FeatureSet f = features_for(ds, o.features, o.taps, c.p_thr, c.m_p);
        const auto test = ds.test_indices();
        export_chart(test, predict(c.model, c.affine, f, test), o.out);
        return 0;
    }

    int cmd_ingest(const Options &o)
    {
        const CsiDataset ds = ingest_external(o.descriptor);
        save_dataset(ds, o.out);
        std::cout << "ingested " << ds.size() << " samples" << (ds.has_positions ? "" : " (label-free)") << "\n";
        return 0;
    }

    int cmd_reproduce(const Options &o)
    {
        ReproduceOptions ro;
        ro.preset = o.preset;
        ro.seeds = o.seeds > 0 ? o.seeds : 3;
        ro.out_dir = o.out;
        ro.epochs = o.epochs;
        const auto r = reproduce(ro);
        std::cout << "preset " << r.preset.name << ": " << r.dataset.size() << " samples, area diagonal "
                  << r.area_diagonal << " m\n"
                  << r.table;
        return 0;
    }

    int cmd_gradcheck(const Options &o)
    {
        GradcheckSettings s;
        s.instances = o.instances;
        const auto report = run_gradcheck(s);
        for (const auto &c : report.cases)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.loss << ": max relative error " << c.max_relative_error
                      << " (worst single parameter " << c.max_component_error << ") over " << c.instances
                      << " instances\n";
        std::cout << "elapsed " << report.seconds << " s\n";
        return report.passed() ? 0 : exit_numerical;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"ccrw: channel charting in real-world coordinates"};
    app.require_subcommand(1);
    Options o;
    const std::vector<std::string> variants{"P1", "P2", "B1", "B2", "B3", "B4"};
    const std::vector<std::string> presets = preset_names();

    auto *simulate = app.add_subcommand("simulate", "simulate a scenario into a dataset directory");
    simulate->add_option("--config", o.scenario_path, "scenario YAML file")->check(CLI::ExistingFile);
    simulate->add_option("--preset", o.preset, "named scenario preset")->check(CLI::IsMember(presets));
    simulate->add_option("--out", o.out, "output dataset directory")->required();

    auto *features = app.add_subcommand("features", "extract features, LoS sets and AP pairs");
    features->add_option("--dataset", o.dataset, "dataset directory")->required();
    features->add_option("--taps", o.taps, "delay taps C")->check(CLI::PositiveNumber);
    features->add_option("--p-thr", o.p_thr, "LoS power threshold in dB, or -inf");
    features->add_option("--m-p", o.m_p, "AP pair power margin in dB")->check(CLI::NonNegativeNumber);
    features->add_option("--out", o.out, "output feature file")->required();

    auto *trace = app.add_subcommand("power-trace", "export per-AP receive power over time as CSV");
    trace->add_option("--dataset", o.dataset, "dataset directory");
    trace->add_option("--features", o.features, "feature file");
    trace->add_option("--taps", o.taps, "delay taps C")->check(CLI::PositiveNumber);
    trace->add_option("--ap", o.ap, "only this AP (0-based)")->check(CLI::NonNegativeNumber);
    trace->add_option("--out", o.out, "output CSV")->required();

    auto *train = app.add_subcommand("train", "train one variant for one or more seeds");
    train->add_option("--variant", o.variant, "P1, P2, B1, B2, B3 or B4")->check(CLI::IsMember(variants));
    train->add_option("--config", o.run_config, "run YAML file")->required()->check(CLI::ExistingFile);
    train->add_option("--dataset", o.dataset, "dataset directory")->required();
    train->add_option("--features", o.features, "feature file (built from the dataset when absent)");
    train->add_option("--taps", o.taps, "delay taps C when building features")->check(CLI::PositiveNumber);
    train->add_option("--seeds", o.seeds, "use the first k seeds of the run configuration")
        ->check(CLI::PositiveNumber);
    train->add_option("--epochs", o.epochs, "override the epoch budget")->check(CLI::NonNegativeNumber);
    train->add_option("--out", o.out, "output directory")->required();

    auto *eval = app.add_subcommand("eval", "evaluate checkpoints on the test split of a dataset");
    eval->add_option("--model", o.models, "checkpoint file(s); several are aggregated as seeds")->required();
    eval->add_option("--dataset", o.dataset, "dataset directory")->required();
    eval->add_option("--features", o.features, "feature file (built from the dataset when absent)");
    eval->add_option("--taps", o.taps, "delay taps C when building features")->check(CLI::PositiveNumber);
    eval->add_option("--json", o.json_out, "write metrics JSON here instead of stdout");
    eval->add_flag("--force", o.force, "evaluate even if the model was trained on another dataset");

    auto *exp = app.add_subcommand("export", "write the chart of the test split as CSV");
    exp->add_option("--model", o.models, "checkpoint file")->required()->expected(1);
    exp->add_option("--dataset", o.dataset, "dataset directory")->required();
    exp->add_option("--features", o.features, "feature file (built from the dataset when absent)");
    exp->add_option("--taps", o.taps, "delay taps C when building features")->check(CLI::PositiveNumber);
    exp->add_option("--out", o.out, "output CSV")->required();
    exp->add_flag("--force", o.force, "export even if the model was trained on another dataset");

    auto *ingest = app.add_subcommand("ingest", "import an external CSI dataset from a JSON descriptor");
    ingest->add_option("--descriptor", o.descriptor, "descriptor JSON")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", o.out, "output dataset directory")->required();

    auto *repro = app.add_subcommand("reproduce", "run a preset through every variant and print a metrics table");
    repro->add_option("--preset", o.preset, "indoor-lite or outdoor-lite")->required()->check(CLI::IsMember(presets));
    repro->add_option("--seeds", o.seeds, "number of seeds (default 3)")->check(CLI::PositiveNumber);
    repro->add_option("--epochs", o.epochs, "override the epoch budget")->check(CLI::NonNegativeNumber);
    repro->add_option("--out", o.out, "output directory")->required();

    auto *grad = app.add_subcommand("gradcheck", "finite-difference check of every loss through the network");
    grad->add_option("--instances", o.instances, "random instances per loss")->check(CLI::PositiveNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        if (code == 0)
            return 0;
        std::cerr << app.help();
        return exit_usage;
    }

    try
    {
        if (*simulate) return cmd_simulate(o);
        if (*features) return cmd_features(o);
        if (*trace) return cmd_power_trace(o);
        if (*train) return cmd_train(o);
        if (*eval) return cmd_eval(o);
        if (*exp) return cmd_export(o);
        if (*ingest) return cmd_ingest(o);
        if (*repro) return cmd_reproduce(o);
        if (*grad) return cmd_gradcheck(o);
    }
    catch (const CLI::ValidationError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    catch (const numerical_error &e)
    {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    catch (const data_error &e)
    {
        std::cerr << "data error: " << e.what() << "\n";
        return exit_data;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
    return exit_usage;
}
