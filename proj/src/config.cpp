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

#include "ccrw/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>
#include <zlib.h>

#include "ccrw/errors.hpp"

namespace ccrw
{
    namespace
    {
        using json = nlohmann::json;

        void check_keys(const YAML::Node &node, const std::set<std::string> &allowed, const std::string &where)
        {
            if (!node.IsMap())
                throw data_error(where + ": expected a mapping");
            for (const auto &kv : node)
            {
                const auto key = kv.first.as<std::string>();
                if (!allowed.count(key))
                    throw data_error(where + ": unknown key '" + key + "'");
            }
        }

        template <typename T>
        void read(const YAML::Node &node, const char *key, T &out)
        {
            if (const auto v = node[key])
            {
                try
                {
                    out = v.as<T>();
                }
                catch (const YAML::Exception &)
                {
                    throw data_error(std::string("config: bad value for '") + key + "'");
                }
            }
        }

        // Accepts numbers plus the strings "inf"/"-inf".
        void read_double(const YAML::Node &node, const char *key, double &out)
        {
            const auto v = node[key];
            if (!v)
                return;
            const auto text = v.as<std::string>();
            if (text == "-inf" || text == "-.inf")
                out = -std::numeric_limits<double>::infinity();
            else if (text == "inf" || text == ".inf")
                out = std::numeric_limits<double>::infinity();
            else
                read(node, key, out);
        }

        std::vector<double> read_list(const YAML::Node &node, const char *key, std::size_t expected)
        {
            const auto v = node[key];
            std::vector<double> out;
            try
            {
                out = v.as<std::vector<double>>();
            }
            catch (const YAML::Exception &)
            {
                throw data_error(std::string("config: '") + key + "' must be a list of numbers");
            }
            if (out.size() != expected)
                throw data_error(std::string("config: '") + key + "' must have " + std::to_string(expected) +
                                 " entries");
            return out;
        }

        Rect read_rect(const YAML::Node &node, const char *key)
        {
            const auto v = read_list(node, key, 4);
            return Rect{v[0], v[1], v[2], v[3]};
        }

        MeanderPattern parse_pattern(const std::string &s)
        {
            if (s == "north_south")
                return MeanderPattern::north_south;
            if (s == "east_west")
                return MeanderPattern::east_west;
            if (s == "both")
                return MeanderPattern::both;
            throw data_error("config: unknown trajectory pattern '" + s + "'");
        }

        std::string pattern_name(MeanderPattern p)
        {
            switch (p)
            {
            case MeanderPattern::north_south: return "north_south";
            case MeanderPattern::east_west: return "east_west";
            case MeanderPattern::both: return "both";
            }
            return "?";
        }

        BoxPolicy parse_box_policy(const std::string &s)
        {
            if (s == "strongest_ap")
                return BoxPolicy::strongest_ap;
            if (s == "all_los_aps")
                return BoxPolicy::all_los_aps;
            throw data_error("config: unknown box policy '" + s + "'");
        }

        YAML::Node parse_yaml(std::string_view text)
        {
            try
            {
                return YAML::Load(std::string(text));
            }
            catch (const YAML::Exception &e)
            {
                throw data_error(std::string("config: YAML syntax error: ") + e.what());
            }
        }

        std::string read_file(const std::string &path)
        {
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw data_error("cannot open config file '" + path + "'");
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }

        json number(double v)
        {
            // JSON has no infinities; they are written as strings.
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            return v;
        }

        json rect_json(const Rect &r) { return json::array({r.x_min, r.x_max, r.y_min, r.y_max}); }
    }

    ScenarioConfig parse_scenario_config(std::string_view yaml_text)
    {
        const auto root = parse_yaml(yaml_text);
        check_keys(root,
                   {"name", "seed", "subcarrier_count", "carrier_hz", "bandwidth_hz", "ue_height_m", "max_snr_db",
                    "taps", "train_ratio", "multipath", "trajectory", "aps", "walls"},
                   "scenario");
        ScenarioConfig cfg;
        read(root, "name", cfg.name);
        read(root, "seed", cfg.seed);
        read(root, "subcarrier_count", cfg.subcarrier_count);
        read(root, "carrier_hz", cfg.carrier_hz);
        read(root, "bandwidth_hz", cfg.bandwidth_hz);
        read(root, "ue_height_m", cfg.ue_height_m);
        read_double(root, "max_snr_db", cfg.max_snr_db);
        read(root, "taps", cfg.taps);
        read(root, "train_ratio", cfg.train_ratio);

        if (const auto mp = root["multipath"])
        {
            check_keys(mp,
                       {"scatterers_per_ap", "scatter_loss_min_db", "scatter_loss_max_db", "nlos_loss_db",
                        "random_ap_phase"},
                       "scenario.multipath");
            read(mp, "scatterers_per_ap", cfg.scatterers_per_ap);
            read(mp, "scatter_loss_min_db", cfg.scatter_loss_min_db);
            read(mp, "scatter_loss_max_db", cfg.scatter_loss_max_db);
            read(mp, "nlos_loss_db", cfg.nlos_loss_db);
            read(mp, "random_ap_phase", cfg.random_ap_phase);
        }

        const auto tr = root["trajectory"];
        if (!tr)
            throw data_error("scenario: missing 'trajectory'");
        check_keys(tr, {"area", "step_m", "lane_spacing_m", "pattern", "sample_period_s"}, "scenario.trajectory");
        cfg.trajectory.area = read_rect(tr, "area");
        read(tr, "step_m", cfg.trajectory.step_m);
        read(tr, "lane_spacing_m", cfg.trajectory.lane_spacing_m);
        read(tr, "sample_period_s", cfg.trajectory.sample_period_s);
        if (tr["pattern"])
            cfg.trajectory.pattern = parse_pattern(tr["pattern"].as<std::string>());

        const auto aps = root["aps"];
        if (!aps || !aps.IsSequence())
            throw data_error("scenario: 'aps' must be a list");
        for (const auto &node : aps)
        {
            check_keys(node, {"position", "antennas", "los_box", "orientation"}, "scenario.aps[]");
            ApConfig ap;
            const auto p = read_list(node, "position", 3);
            ap.position = Vec3(p[0], p[1], p[2]);
            read(node, "antennas", ap.antenna_count);
            ap.los_box = read_rect(node, "los_box");
            if (node["orientation"])
            {
                const auto o = read_list(node, "orientation", 2);
                ap.array_orientation = Vec2(o[0], o[1]);
            }
            cfg.aps.push_back(ap);
        }

        if (const auto walls = root["walls"])
        {
            if (!walls.IsSequence())
                throw data_error("scenario: 'walls' must be a list");
            for (const auto &node : walls)
            {
                std::vector<double> w;
                try
                {
                    w = node.as<std::vector<double>>();
                }
                catch (const YAML::Exception &)
                {
                    throw data_error("scenario: each wall is [x1, y1, x2, y2]");
                }
                if (w.size() != 4)
                    throw data_error("scenario: each wall is [x1, y1, x2, y2]");
                cfg.walls.push_back(Wall{Vec2(w[0], w[1]), Vec2(w[2], w[3])});
            }
        }
        cfg.validate();
        return cfg;
    }

    ScenarioConfig load_scenario_config(const std::string &path) { return parse_scenario_config(read_file(path)); }

    RunConfig parse_run_config(std::string_view yaml_text)
    {
        const auto root = parse_yaml(yaml_text);
        check_keys(root, {"variant", "epochs", "batch_size", "learning_rate", "label_count", "seeds", "p_thr", "loss"},
                   "run");
        RunConfig cfg;
        if (root["variant"])
            cfg.variant = parse_variant(root["variant"].as<std::string>());
        apply_variant_weights(cfg);
        read(root, "epochs", cfg.epochs);
        read(root, "batch_size", cfg.batch_size);
        read(root, "learning_rate", cfg.adam.learning_rate);
        read(root, "label_count", cfg.label_count);
        read(root, "seeds", cfg.seeds);
        if (root["p_thr"])
        {
            double p = 0.0;
            read_double(root, "p_thr", p);
            cfg.p_thr = p;
        }
        if (const auto loss = root["loss"])
        {
            check_keys(loss,
                       {"coherence_time", "margin_t", "margin_b", "margin_p", "weight_t", "weight_bi", "weight_box",
                        "weight_mse", "box_policy"},
                       "run.loss");
            read(loss, "coherence_time", cfg.loss.coherence_time);
            read(loss, "margin_t", cfg.loss.margin_t);
            read(loss, "margin_b", cfg.loss.margin_b);
            read(loss, "margin_p", cfg.loss.margin_p);
            read(loss, "weight_t", cfg.loss.weight_t);
            read(loss, "weight_bi", cfg.loss.weight_bi);
            read(loss, "weight_box", cfg.loss.weight_box);
            read(loss, "weight_mse", cfg.loss.weight_mse);
            if (loss["box_policy"])
                cfg.loss.box_policy = parse_box_policy(loss["box_policy"].as<std::string>());
        }
        cfg.validate();
        return cfg;
    }

    RunConfig load_run_config(const std::string &path) { return parse_run_config(read_file(path)); }

    std::string scenario_json(const ScenarioConfig &cfg)
    {
        json j;
        j["name"] = cfg.name;
        j["seed"] = cfg.seed;
        j["subcarrier_count"] = cfg.subcarrier_count;
        j["carrier_hz"] = cfg.carrier_hz;
        j["bandwidth_hz"] = cfg.bandwidth_hz;
        j["ue_height_m"] = cfg.ue_height_m;
        j["max_snr_db"] = number(cfg.max_snr_db);
        j["taps"] = cfg.taps;
        j["train_ratio"] = cfg.train_ratio;
        j["multipath"] = {{"scatterers_per_ap", cfg.scatterers_per_ap},
                          {"scatter_loss_min_db", cfg.scatter_loss_min_db},
                          {"scatter_loss_max_db", cfg.scatter_loss_max_db},
                          {"nlos_loss_db", cfg.nlos_loss_db},
                          {"random_ap_phase", cfg.random_ap_phase}};
        j["trajectory"] = {{"area", rect_json(cfg.trajectory.area)},
                           {"step_m", cfg.trajectory.step_m},
                           {"lane_spacing_m", cfg.trajectory.lane_spacing_m},
                           {"pattern", pattern_name(cfg.trajectory.pattern)},
                           {"sample_period_s", cfg.trajectory.sample_period_s}};
        j["aps"] = json::array();
        for (const auto &ap : cfg.aps)
            j["aps"].push_back({{"position", {ap.position.x(), ap.position.y(), ap.position.z()}},
                                {"antennas", ap.antenna_count},
                                {"los_box", rect_json(ap.los_box)},
                                {"orientation", {ap.array_orientation.x(), ap.array_orientation.y()}}});
        j["walls"] = json::array();
        for (const auto &w : cfg.walls)
            j["walls"].push_back({w.a.x(), w.a.y(), w.b.x(), w.b.y()});
        return j.dump();
    }

    std::string run_config_json(const RunConfig &cfg)
    {
        json j;
        j["variant"] = std::string(variant_name(cfg.variant));
        j["epochs"] = cfg.epochs;
        j["batch_size"] = cfg.batch_size;
        j["learning_rate"] = cfg.adam.learning_rate;
        j["label_count"] = cfg.label_count;
        j["seeds"] = cfg.seeds;
        j["p_thr"] = cfg.p_thr ? number(*cfg.p_thr) : json(nullptr);
        j["loss"] = {{"coherence_time", cfg.loss.coherence_time},
                     {"margin_t", cfg.loss.margin_t},
                     {"margin_b", cfg.loss.margin_b},
                     {"margin_p", cfg.loss.margin_p},
                     {"weight_t", cfg.loss.weight_t},
                     {"weight_bi", cfg.loss.weight_bi},
                     {"weight_box", cfg.loss.weight_box},
                     {"weight_mse", cfg.loss.weight_mse},
                     {"box_policy", cfg.loss.box_policy == BoxPolicy::strongest_ap ? "strongest_ap" : "all_los_aps"}};
        return j.dump();
    }

    std::string hash_hex(std::string_view bytes)
    {
        uLong crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, reinterpret_cast<const Bytef *>(bytes.data()), static_cast<uInt>(bytes.size()));
        char buf[9];
        std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
        return buf;
    }

    std::string scenario_hash(const ScenarioConfig &cfg) { return hash_hex(scenario_json(cfg)); }

    std::string run_config_hash(const RunConfig &cfg)
    {
        RunConfig copy = cfg;
        copy.seeds.clear();
        return hash_hex(run_config_json(copy));
    }
}
