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

#include "ccrw/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ccrw/config.hpp"
#include "ccrw/errors.hpp"
#include "ccrw/io.hpp"

namespace ccrw
{
    FeatureDiagnostics diagnose_features(const FeatureSet &fs, const CsiDataset &ds)
    {
        FeatureDiagnostics d;
        if (ds.los.size() == ds.size() && ds.size() > 0)
        {
            std::size_t agree = 0, total = 0;
            for (std::size_t n = 0; n < ds.size(); ++n)
            {
                std::vector<std::uint8_t> est(ds.ap_count, 0);
                for (int a : fs.los_sets[n])
                    est[a] = 1;
                for (int a = 0; a < ds.ap_count; ++a, ++total)
                    agree += est[a] == ds.los[n][a];
            }
            d.los_agreement = static_cast<double>(agree) / static_cast<double>(total);
        }
        std::vector<Vec3> positions, ap_positions;
        for (const auto &s : ds.samples)
            positions.push_back(s.position);
        for (const auto &ap : ds.aps)
            ap_positions.push_back(ap.position);
        d.false_pair_ratio = false_pair_ratio(fs.ap_pairs, positions, ap_positions);
        d.mean_pair_count = mean_pair_count(fs.ap_pairs);
        return d;
    }

    MetricValues evaluate_model(const ChartModel &model, const std::optional<AffineMap> &affine, const FeatureSet &fs,
                                const CsiDataset &ds)
    {
        const auto test = ds.test_indices();
        if (test.size() < 2)
            throw data_error("evaluation needs at least two test samples");
        return evaluate_chart(positions_xy(ds, test), predict(model, affine, fs, test));
    }

    std::string format_table(const std::vector<VariantOutcome> &outcomes)
    {
        std::string out;
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-6s %7s %7s %7s %7s %16s %16s\n", "Method", "TW", "CT", "KS", "RD",
                      "MDE [m]", "e95 [m]");
        out += buf;
        for (const auto &o : outcomes)
        {
            const auto &m = o.report.mean;
            const auto &s = o.report.std;
            std::string mde = "--", e95 = "--";
            // B1 charts live in arbitrary coordinates, so distance errors are not meaningful.
            if (o.variant != Variant::B1)
            {
                std::snprintf(buf, sizeof buf, "%.2f +- %.2f", m.mde, s.mde);
                mde = buf;
                std::snprintf(buf, sizeof buf, "%.2f +- %.2f", m.e95, s.e95);
                e95 = buf;
            }
            std::snprintf(buf, sizeof buf, "%-6s %7.3f %7.3f %7.3f %7.3f %16s %16s\n",
                          std::string(variant_name(o.variant)).c_str(), m.tw, m.ct, m.ks, m.rd, mde.c_str(),
                          e95.c_str());
            out += buf;
        }
        return out;
    }

    ReproduceResult reproduce(const ReproduceOptions &options)
    {
        namespace fs = std::filesystem;
        using json = nlohmann::json;
        if (options.seeds < 1)
            throw data_error("reproduce: seed count must be positive");

        ReproduceResult r;
        r.preset = make_preset(options.preset);
        const Preset &p = r.preset;
        spdlog::info("simulating preset {}", p.name);
        r.dataset = simulate_scenario(p.scenario);
        r.area_diagonal = p.scenario.trajectory.area.diagonal();
        FeatureParams fp;
        fp.taps = p.scenario.taps;
        fp.p_thr = p.p_thr;
        fp.m_p = p.m_p;
        r.features = build_features(r.dataset, fp);
        r.diagnostics = diagnose_features(r.features, r.dataset);

        const bool write = !options.out_dir.empty();
        const fs::path out(options.out_dir);
        if (write)
        {
            for (const char *sub : {"models", "charts", "logs"})
                fs::create_directories(out / sub);
            save_dataset(r.dataset, (out / "dataset").string());
            save_features(r.features, (out / "features.ccf").string());
        }

        const auto test = r.dataset.test_indices();
        const Matrix truth = positions_xy(r.dataset, test);
        json variants = json::object();
        for (Variant v : options.variants)
        {
            RunConfig run = preset_run(p, v);
            if (options.epochs)
                run.epochs = *options.epochs;
            if (static_cast<std::size_t>(options.seeds) > run.seeds.size())
                throw data_error("reproduce: preset defines only " + std::to_string(run.seeds.size()) + " seeds");
            run.seeds.resize(static_cast<std::size_t>(options.seeds));
            const std::string run_hash = run_config_hash(run);

            VariantOutcome outcome;
            outcome.variant = v;
            std::vector<MetricValues> per_seed;
            for (std::uint64_t seed : run.seeds)
            {
                spdlog::info("training {} seed {}", variant_name(v), seed);
                TrainResult tr = train_variant(run, r.features, r.dataset, seed);
                const Matrix chart = predict(tr.model, tr.affine, r.features, test);
                per_seed.push_back(evaluate_chart(truth, chart));
                if (write)
                {
                    const std::string stem = std::string(variant_name(v)) + "_seed" + std::to_string(seed);
                    Checkpoint ck{tr.model, tr.affine, std::string(variant_name(v)), run_hash, r.dataset.config_hash,
                                  run.p_thr.value_or(p.p_thr), run.loss.margin_p};
                    save_checkpoint(ck, (out / "models" / (stem + ".ccm")).string());
                    export_chart(test, chart, (out / "charts" / (stem + ".csv")).string());
                    write_training_log(tr.log, (out / "logs" / (stem + ".csv")).string());
                }
                outcome.runs.push_back(std::move(tr));
            }
            outcome.report = aggregate(per_seed, default_neighbor_count(test.size()), 20);
            json entry = json::parse(metrics_json(outcome.report));
            entry["run_config_hash"] = run_hash;
            entry["seeds"] = run.seeds;
            variants[std::string(variant_name(v))] = entry;
            r.outcomes.push_back(std::move(outcome));
        }

        json doc;
        doc["preset"] = p.name;
        doc["scenario_hash"] = r.dataset.config_hash;
        doc["samples"] = r.dataset.size();
        doc["test_samples"] = test.size();
        doc["area_diagonal_m"] = r.area_diagonal;
        doc["features"] = {{"p_thr", std::isinf(p.p_thr) ? json(p.p_thr > 0 ? "inf" : "-inf") : json(p.p_thr)},
                           {"m_p", p.m_p},
                           {"los_agreement", r.diagnostics.los_agreement},
                           {"false_pair_ratio", r.diagnostics.false_pair_ratio},
                           {"mean_pair_count", r.diagnostics.mean_pair_count}};
        doc["variants"] = variants;
        r.metrics_json = doc.dump(2) + "\n";
        r.table = format_table(r.outcomes);
        if (write)
        {
            write_text((out / "metrics.json").string(), r.metrics_json);
            write_text((out / "table.txt").string(), r.table);
        }
        return r;
    }
}
