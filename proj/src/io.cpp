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

#include "ccrw/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ccrw/config.hpp"
#include "ccrw/errors.hpp"

static_assert(std::endian::native == std::endian::little, "payload formats assume a little-endian host");

namespace ccrw
{
    namespace
    {
        namespace fs = std::filesystem;
        using json = nlohmann::json;

        using Bytes = std::string;

        void write_file(const std::string &path, const Bytes &bytes)
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw data_error("cannot write '" + path + "'");
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out)
                throw data_error("write failed for '" + path + "'");
        }

        Bytes read_file(const std::string &path)
        {
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw data_error("cannot open '" + path + "'");
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }

        template <typename T>
        void append(Bytes &out, const T *data, std::size_t count)
        {
            out.append(reinterpret_cast<const char *>(data), count * sizeof(T));
        }

        template <typename T>
        void append_value(Bytes &out, T v)
        {
            append(out, &v, 1);
        }

        // Reads a fixed-size array out of `bytes` at `offset`, advancing it.
        template <typename T>
        void take(const Bytes &bytes, std::size_t &offset, T *dst, std::size_t count)
        {
            const std::size_t n = count * sizeof(T);
            if (offset + n > bytes.size())
                throw truncated_error("payload ends early");
            std::memcpy(dst, bytes.data() + offset, n);
            offset += n;
        }

        json rect_json(const Rect &r) { return json::array({r.x_min, r.x_max, r.y_min, r.y_max}); }

        Rect rect_from(const json &j)
        {
            if (!j.is_array() || j.size() != 4)
                throw data_error("rectangle must be [x_min, x_max, y_min, y_max]");
            return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
        }

        json aps_json(const std::vector<ApConfig> &aps)
        {
            json arr = json::array();
            for (const auto &ap : aps)
                arr.push_back({{"position", {ap.position.x(), ap.position.y(), ap.position.z()}},
                               {"antennas", ap.antenna_count},
                               {"los_box", rect_json(ap.los_box)},
                               {"orientation", {ap.array_orientation.x(), ap.array_orientation.y()}}});
            return arr;
        }

        std::vector<ApConfig> aps_from(const json &arr, int default_antennas)
        {
            std::vector<ApConfig> out;
            for (const auto &j : arr)
            {
                ApConfig ap;
                const auto p = j.at("position").get<std::vector<double>>();
                if (p.size() != 3)
                    throw data_error("AP position must have three coordinates");
                ap.position = Vec3(p[0], p[1], p[2]);
                ap.antenna_count = j.value("antennas", default_antennas);
                ap.los_box = rect_from(j.at("los_box"));
                if (j.contains("orientation"))
                {
                    const auto o = j.at("orientation").get<std::vector<double>>();
                    if (o.size() != 2)
                        throw data_error("AP orientation must have two components");
                    ap.array_orientation = Vec2(o[0], o[1]);
                }
                out.push_back(ap);
            }
            return out;
        }

        json parse_json(const Bytes &text, const std::string &what)
        {
            try
            {
                return json::parse(text);
            }
            catch (const json::exception &e)
            {
                throw data_error(what + ": malformed JSON: " + e.what());
            }
        }

        // Doubles that JSON cannot hold (infinities) travel as strings.
        json num(double v)
        {
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            return v;
        }

        double num_from(const json &j)
        {
            if (j.is_string())
            {
                const auto s = j.get<std::string>();
                if (s == "inf")
                    return std::numeric_limits<double>::infinity();
                if (s == "-inf")
                    return -std::numeric_limits<double>::infinity();
                throw data_error("expected a number, got '" + s + "'");
            }
            return j.get<double>();
        }

        Bytes csi_payload(const CsiDataset &ds)
        {
            Bytes out;
            out.reserve(ds.size() * static_cast<std::size_t>(ds.rows() * ds.columns()) * 8);
            for (const auto &s : ds.samples)
                append(out, reinterpret_cast<const float *>(s.h.data()), static_cast<std::size_t>(s.h.size()) * 2);
            return out;
        }

        void read_csi(const Bytes &bytes, CsiDataset &ds, std::size_t n)
        {
            const int b = ds.rows();
            const int cols = ds.columns();
            std::size_t offset = 0;
            ds.samples.resize(n);
            for (auto &s : ds.samples)
            {
                s.h.resize(b, cols);
                take(bytes, offset, reinterpret_cast<float *>(s.h.data()), static_cast<std::size_t>(b * cols) * 2);
            }
        }

        std::size_t expected_csi_bytes(const CsiDataset &ds, std::size_t n)
        {
            return n * static_cast<std::size_t>(ds.rows()) * static_cast<std::size_t>(ds.columns()) * 8;
        }

        struct PayloadFile
        {
            std::string name;
            Bytes bytes;
        };

        // Header line + payload container for single-file artifacts.
        void save_container(const std::string &path, json header, const Bytes &payload)
        {
            header["schema_version"] = artifact_schema_version;
            header["payload_bytes"] = payload.size();
            header["payload_crc32"] = hash_hex(payload);
            write_file(path, header.dump() + "\n" + payload);
        }

        std::pair<json, Bytes> load_container(const std::string &path, const std::string &format)
        {
            const Bytes all = read_file(path);
            const auto nl = all.find('\n');
            if (nl == Bytes::npos)
                throw truncated_error(path + ": missing header line");
            json header = parse_json(all.substr(0, nl), path);
            if (header.value("format", std::string()) != format)
                throw data_error(path + ": not a " + format + " file");
            if (header.value("schema_version", -1) != artifact_schema_version)
                throw version_error(path + ": unsupported schema version " +
                                    std::to_string(header.value("schema_version", -1)));
            Bytes payload = all.substr(nl + 1);
            const auto expected = header.at("payload_bytes").get<std::size_t>();
            if (payload.size() < expected)
                throw truncated_error(path + ": payload has " + std::to_string(payload.size()) + " of " +
                                      std::to_string(expected) + " bytes");
            if (payload.size() > expected)
                throw data_error(path + ": trailing bytes after payload");
            if (hash_hex(payload) != header.at("payload_crc32").get<std::string>())
                throw checksum_error(path + ": payload checksum mismatch");
            return {std::move(header), std::move(payload)};
        }

        std::string fmt9(double v)
        {
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.9g", v);
            return buf;
        }
    }

    // ---------------------------------------------------------------- datasets

    void save_dataset(const CsiDataset &ds, const std::string &dir)
    {
        ds.validate();
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw data_error("cannot create directory '" + dir + "': " + ec.message());

        const std::size_t n = ds.size();
        std::vector<PayloadFile> files;
        files.push_back({"csi.bin", csi_payload(ds)});
        Bytes pos, ts;
        for (const auto &s : ds.samples)
        {
            append(pos, s.position.data(), 3);
            append_value(ts, s.timestamp);
        }
        files.push_back({"positions.bin", std::move(pos)});
        files.push_back({"timestamps.bin", std::move(ts)});
        if (!ds.is_train.empty())
            files.push_back({"split.bin", Bytes(ds.is_train.begin(), ds.is_train.end())});
        if (!ds.los.empty())
        {
            Bytes los;
            for (const auto &row : ds.los)
                los.append(row.begin(), row.end());
            files.push_back({"los.bin", std::move(los)});
        }

        json m;
        m["format"] = "ccrw-dataset";
        m["schema_version"] = dataset_schema_version;
        m["N"] = n;
        m["A"] = ds.ap_count;
        m["M_R"] = ds.antennas_per_ap;
        m["W"] = ds.subcarrier_count;
        m["C"] = ds.tap_count;
        m["domain"] = ds.domain == CsiDomain::frequency ? "frequency" : "delay";
        m["seeds"] = {{"simulation", ds.seed}, {"noise", ds.noise_seed}, {"split", ds.split_seed}};
        m["provenance"] = ds.provenance;
        m["config_hash"] = ds.config_hash;
        m["has_positions"] = ds.has_positions;
        m["aps"] = aps_json(ds.aps);
        m["noise_variance"] = ds.noise_variance;
        m["files"] = json::object();
        for (const auto &f : files)
        {
            write_file((fs::path(dir) / f.name).string(), f.bytes);
            m["files"][f.name] = {{"bytes", f.bytes.size()}, {"crc32", hash_hex(f.bytes)}};
        }
        write_file((fs::path(dir) / "manifest.json").string(), m.dump(2) + "\n");
    }

    CsiDataset load_dataset(const std::string &dir)
    {
        const json m = parse_json(read_file((fs::path(dir) / "manifest.json").string()), "manifest");
        if (m.value("format", std::string()) != "ccrw-dataset")
            throw data_error(dir + ": not a dataset manifest");
        const int version = m.value("schema_version", -1);
        if (version != dataset_schema_version)
            throw version_error(dir + ": unsupported dataset schema version " + std::to_string(version));

        CsiDataset ds;
        const auto n = m.at("N").get<std::size_t>();
        ds.ap_count = m.at("A").get<int>();
        ds.antennas_per_ap = m.at("M_R").get<int>();
        ds.subcarrier_count = m.at("W").get<int>();
        ds.tap_count = m.at("C").get<int>();
        const auto domain = m.at("domain").get<std::string>();
        if (domain != "frequency" && domain != "delay")
            throw data_error(dir + ": unknown CSI domain '" + domain + "'");
        ds.domain = domain == "frequency" ? CsiDomain::frequency : CsiDomain::delay;
        ds.seed = m.at("seeds").at("simulation").get<std::uint64_t>();
        ds.noise_seed = m.at("seeds").at("noise").get<std::uint64_t>();
        ds.split_seed = m.at("seeds").at("split").get<std::uint64_t>();
        ds.provenance = m.at("provenance").get<std::string>();
        ds.config_hash = m.at("config_hash").get<std::string>();
        ds.has_positions = m.at("has_positions").get<bool>();
        ds.aps = aps_from(m.at("aps"), ds.antennas_per_ap);
        ds.noise_variance = m.at("noise_variance").get<std::vector<double>>();
        if (ds.ap_count < 1 || ds.antennas_per_ap < 1 || ds.columns() < 1)
            throw data_error(dir + ": manifest dimensions must be positive");

        auto payload = [&](const std::string &name, std::size_t expected) -> std::optional<Bytes> {
            const auto &files = m.at("files");
            if (!files.contains(name))
                return std::nullopt;
            Bytes bytes = read_file((fs::path(dir) / name).string());
            const auto recorded = files.at(name).at("bytes").get<std::size_t>();
            if (recorded != expected)
                throw data_error(dir + ": " + name + " size in manifest disagrees with the dimensions");
            if (bytes.size() < expected)
                throw truncated_error(dir + ": " + name + " has " + std::to_string(bytes.size()) + " of " +
                                      std::to_string(expected) + " bytes");
            if (bytes.size() > expected)
                throw data_error(dir + ": " + name + " is longer than the manifest says");
            if (hash_hex(bytes) != files.at(name).at("crc32").get<std::string>())
                throw checksum_error(dir + ": checksum mismatch in " + name);
            return bytes;
        };

        const auto csi = payload("csi.bin", expected_csi_bytes(ds, n));
        const auto pos = payload("positions.bin", n * 3 * sizeof(double));
        const auto ts = payload("timestamps.bin", n * sizeof(double));
        if (!csi || !pos || !ts)
            throw data_error(dir + ": manifest lacks a required payload");
        read_csi(*csi, ds, n);
        std::size_t po = 0, to = 0;
        for (auto &s : ds.samples)
        {
            take(*pos, po, s.position.data(), 3);
            take(*ts, to, &s.timestamp, 1);
        }
        if (const auto split = payload("split.bin", n))
            ds.is_train.assign(split->begin(), split->end());
        if (const auto los = payload("los.bin", n * static_cast<std::size_t>(ds.ap_count)))
        {
            ds.los.assign(n, std::vector<std::uint8_t>(ds.ap_count));
            for (std::size_t i = 0; i < n; ++i)
                for (int a = 0; a < ds.ap_count; ++a)
                    ds.los[i][a] = static_cast<std::uint8_t>((*los)[i * ds.ap_count + a]);
        }
        ds.validate();
        return ds;
    }

    void export_external(const CsiDataset &ds, const std::string &dir)
    {
        ds.validate();
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw data_error("cannot create directory '" + dir + "': " + ec.message());
        json d;
        d["sample_count"] = ds.size();
        d["ap_count"] = ds.ap_count;
        d["antennas_per_ap"] = ds.antennas_per_ap;
        d["subcarrier_count"] = ds.subcarrier_count;
        d["domain"] = ds.domain == CsiDomain::frequency ? "frequency" : "delay";
        d["tap_count"] = ds.tap_count;
        d["aps"] = aps_json(ds.aps);
        d["csi_file"] = "csi.f32";
        d["timestamps_file"] = "timestamps.f64";
        write_file((fs::path(dir) / "csi.f32").string(), csi_payload(ds));
        Bytes ts, pos;
        for (const auto &s : ds.samples)
        {
            append_value(ts, s.timestamp);
            append(pos, s.position.data(), 3);
        }
        write_file((fs::path(dir) / "timestamps.f64").string(), ts);
        if (ds.has_positions)
        {
            d["positions_file"] = "positions.f64";
            d["position_dims"] = 3;
            write_file((fs::path(dir) / "positions.f64").string(), pos);
        }
        if (!ds.is_train.empty())
        {
            d["split_file"] = "split.u8";
            write_file((fs::path(dir) / "split.u8").string(), Bytes(ds.is_train.begin(), ds.is_train.end()));
        }
        if (!ds.los.empty())
        {
            d["los_file"] = "los.u8";
            Bytes los;
            for (const auto &row : ds.los)
                los.append(row.begin(), row.end());
            write_file((fs::path(dir) / "los.u8").string(), los);
        }
        write_file((fs::path(dir) / "descriptor.json").string(), d.dump(2) + "\n");
    }

    CsiDataset ingest_external(const std::string &descriptor_path)
    {
        const Bytes text = read_file(descriptor_path);
        const json d = parse_json(text, descriptor_path);
        const fs::path base = fs::path(descriptor_path).parent_path();
        auto file = [&](const char *key) { return (base / d.at(key).get<std::string>()).string(); };

        CsiDataset ds;
        try
        {
            const auto n = d.at("sample_count").get<std::size_t>();
            ds.ap_count = d.at("ap_count").get<int>();
            ds.antennas_per_ap = d.at("antennas_per_ap").get<int>();
            ds.subcarrier_count = d.at("subcarrier_count").get<int>();
            const auto domain = d.value("domain", std::string("frequency"));
            if (domain != "frequency" && domain != "delay")
                throw data_error("descriptor: unknown domain '" + domain + "'");
            ds.domain = domain == "frequency" ? CsiDomain::frequency : CsiDomain::delay;
            ds.tap_count = d.value("tap_count", 0);
            if (ds.ap_count < 1 || ds.antennas_per_ap < 1 || ds.subcarrier_count < 1 || ds.columns() < 1)
                throw data_error("descriptor: dimensions must be positive");
            ds.aps = aps_from(d.at("aps"), ds.antennas_per_ap);
            if (static_cast<int>(ds.aps.size()) != ds.ap_count)
                throw data_error("descriptor: dimension mismatch: " + std::to_string(ds.aps.size()) +
                                 " APs listed but ap_count = " + std::to_string(ds.ap_count));
            for (const auto &ap : ds.aps)
                if (ap.antenna_count != ds.antennas_per_ap)
                    throw data_error("descriptor: dimension mismatch in per-AP antenna count");

            const Bytes csi = read_file(file("csi_file"));
            if (csi.size() != expected_csi_bytes(ds, n))
                throw data_error("descriptor: dimension mismatch: CSI file has " + std::to_string(csi.size()) +
                                 " bytes, dimensions imply " + std::to_string(expected_csi_bytes(ds, n)));
            read_csi(csi, ds, n);

            const Bytes ts = read_file(file("timestamps_file"));
            if (ts.size() != n * sizeof(double))
                throw data_error("descriptor: dimension mismatch in timestamps file");
            std::size_t off = 0;
            for (auto &s : ds.samples)
                take(ts, off, &s.timestamp, 1);
            for (std::size_t i = 1; i < n; ++i)
                if (!(ds.samples[i].timestamp > ds.samples[i - 1].timestamp))
                    throw data_error("descriptor: timestamps are not strictly increasing at sample " +
                                     std::to_string(i));

            // Positions (and AP positions) may be rotated about the origin; LoS boxes are given in the rotated frame.
            const double angle = d.value("rotation_deg", 0.0) * std::acos(-1.0) / 180.0;
            const double c = std::cos(angle), s = std::sin(angle);
            auto rotate = [c, s](Vec3 &p) {
                const double x = c * p.x() - s * p.y();
                const double y = s * p.x() + c * p.y();
                p.x() = x;
                p.y() = y;
            };
            if (angle != 0.0)
                for (auto &ap : ds.aps)
                    rotate(ap.position);

            ds.has_positions = d.contains("positions_file");
            if (ds.has_positions)
            {
                const int dims = d.value("position_dims", 3);
                if (dims != 2 && dims != 3)
                    throw data_error("descriptor: position_dims must be 2 or 3");
                const Bytes pos = read_file(file("positions_file"));
                if (pos.size() != n * static_cast<std::size_t>(dims) * sizeof(double))
                    throw data_error("descriptor: dimension mismatch in positions file");
                off = 0;
                for (auto &smp : ds.samples)
                {
                    smp.position.setZero();
                    take(pos, off, smp.position.data(), static_cast<std::size_t>(dims));
                    if (angle != 0.0)
                        rotate(smp.position);
                }
            }

            if (d.contains("split_file"))
            {
                const Bytes split = read_file(file("split_file"));
                if (split.size() != n)
                    throw data_error("descriptor: dimension mismatch in split file");
                ds.is_train.assign(split.begin(), split.end());
            }
            if (d.contains("los_file"))
            {
                const Bytes los = read_file(file("los_file"));
                if (los.size() != n * static_cast<std::size_t>(ds.ap_count))
                    throw data_error("descriptor: dimension mismatch in LoS file");
                ds.los.assign(n, std::vector<std::uint8_t>(ds.ap_count));
                for (std::size_t i = 0; i < n; ++i)
                    for (int a = 0; a < ds.ap_count; ++a)
                        ds.los[i][a] = static_cast<std::uint8_t>(los[i * ds.ap_count + a]);
            }
        }
        catch (const json::exception &e)
        {
            throw data_error(std::string("descriptor: ") + e.what());
        }
        ds.provenance = "ingested";
        ds.config_hash = hash_hex(text);
        if (ds.is_train.empty())
        {
            const auto ratio = d.value("train_ratio", 0.8);
            const auto seed = d.value("split_seed", std::uint64_t{1});
            ds = split_train_test(ds, ratio, seed);
        }
        ds.validate();
        return ds;
    }

    // ---------------------------------------------------------------- features

    void save_features(const FeatureSet &f, const std::string &path)
    {
        Bytes payload;
        const auto n = f.size();
        const auto dim = static_cast<std::size_t>(f.dimension());
        const auto a = static_cast<std::size_t>(f.ap_count());
        // Row-major matrices.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < dim; ++k)
                append_value(payload, f.features(i, k));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < a; ++k)
                append_value(payload, f.powers(i, k));
        append(payload, f.timestamps.data(), f.timestamps.size());

        json h;
        h["format"] = "ccrw-features";
        h["N"] = n;
        h["dimension"] = dim;
        h["A"] = a;
        h["taps"] = f.tap_count;
        h["p_thr"] = num(f.p_thr);
        h["m_p"] = f.m_p;
        h["dataset_hash"] = f.dataset_hash;
        save_container(path, h, payload);
    }

    FeatureSet load_features(const std::string &path)
    {
        const auto [h, payload] = load_container(path, "ccrw-features");
        FeatureSet f;
        const auto n = h.at("N").get<std::size_t>();
        const auto dim = h.at("dimension").get<std::size_t>();
        const auto a = h.at("A").get<std::size_t>();
        if (payload.size() != n * (dim + a + 1) * sizeof(double))
            throw data_error(path + ": payload size disagrees with the header dimensions");
        f.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
        f.powers.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(a));
        f.timestamps.resize(n);
        std::size_t off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < dim; ++k)
                take(payload, off, &f.features(i, k), 1);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < a; ++k)
                take(payload, off, &f.powers(i, k), 1);
        take(payload, off, f.timestamps.data(), n);
        f.tap_count = h.at("taps").get<int>();
        f.dataset_hash = h.at("dataset_hash").get<std::string>();
        relabel(f, num_from(h.at("p_thr")), h.at("m_p").get<double>());
        return f;
    }

    // ---------------------------------------------------------------- checkpoints

    void save_checkpoint(const Checkpoint &c, const std::string &path)
    {
        const auto flat = flatten_parameters(c.model);
        Bytes payload;
        append(payload, flat.data(), flat.size());
        json h;
        h["format"] = "ccrw-model";
        h["dims"] = c.model.dims;
        h["seed"] = c.model.seed;
        h["variant"] = c.variant;
        h["run_config_hash"] = c.run_config_hash;
        h["dataset_hash"] = c.dataset_hash;
        h["p_thr"] = num(c.p_thr);
        h["m_p"] = c.m_p;
        if (c.affine)
            h["affine"] = {{"a", {c.affine->a(0, 0), c.affine->a(0, 1), c.affine->a(1, 0), c.affine->a(1, 1)}},
                           {"b", {c.affine->b(0), c.affine->b(1)}}};
        else
            h["affine"] = nullptr;
        save_container(path, h, payload);
    }

    Checkpoint load_checkpoint(const std::string &path)
    {
        const auto [h, payload] = load_container(path, "ccrw-model");
        Checkpoint c;
        const auto dims = h.at("dims").get<std::vector<int>>();
        if (dims.size() < 2)
            throw data_error(path + ": model needs at least two layer sizes");
        c.model.dims = dims;
        c.model.seed = h.at("seed").get<std::uint64_t>();
        for (std::size_t l = 0; l + 1 < dims.size(); ++l)
            c.model.layers.push_back(DenseLayer{Matrix::Zero(dims[l + 1], dims[l]), Vector::Zero(dims[l + 1])});
        if (payload.size() != c.model.parameter_count() * sizeof(double))
            throw data_error(path + ": parameter payload does not match the layer sizes");
        std::vector<double> flat(c.model.parameter_count());
        std::memcpy(flat.data(), payload.data(), payload.size());
        assign_parameters(c.model, flat);
        c.variant = h.at("variant").get<std::string>();
        c.run_config_hash = h.at("run_config_hash").get<std::string>();
        c.dataset_hash = h.at("dataset_hash").get<std::string>();
        c.p_thr = num_from(h.at("p_thr"));
        c.m_p = h.at("m_p").get<double>();
        if (!h.at("affine").is_null())
        {
            const auto a = h.at("affine").at("a").get<std::vector<double>>();
            const auto b = h.at("affine").at("b").get<std::vector<double>>();
            if (a.size() != 4 || b.size() != 2)
                throw data_error(path + ": malformed affine map");
            AffineMap m;
            m.a << a[0], a[1], a[2], a[3];
            m.b << b[0], b[1];
            c.affine = m;
        }
        return c;
    }

    // ---------------------------------------------------------------- CSV exports

    void export_chart(std::span<const int> sample_ids, const Matrix &points, const std::string &path)
    {
        if (static_cast<Eigen::Index>(sample_ids.size()) != points.rows() || points.cols() != 2)
            throw data_error("export_chart: expected one 2-D point per sample id");
        std::string out = "n,x1,x2\n";
        for (std::size_t k = 0; k < sample_ids.size(); ++k)
        {
            const auto r = static_cast<Eigen::Index>(k);
            out += std::to_string(sample_ids[k]) + "," + fmt9(points(r, 0)) + "," + fmt9(points(r, 1)) + "\n";
        }
        write_file(path, out);
    }

    ChartCsv read_chart_csv(const std::string &path)
    {
        std::istringstream in(read_file(path));
        std::string line;
        if (!std::getline(in, line) || line != "n,x1,x2")
            throw data_error(path + ": expected header 'n,x1,x2'");
        ChartCsv out;
        std::vector<double> xs;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            int id = 0;
            double x = 0.0, y = 0.0;
            if (std::sscanf(line.c_str(), "%d,%lf,%lf", &id, &x, &y) != 3)
                throw data_error(path + ": malformed row '" + line + "'");
            out.sample_ids.push_back(id);
            xs.push_back(x);
            xs.push_back(y);
        }
        out.points.resize(static_cast<Eigen::Index>(out.sample_ids.size()), 2);
        for (std::size_t k = 0; k < out.sample_ids.size(); ++k)
        {
            out.points(static_cast<Eigen::Index>(k), 0) = xs[2 * k];
            out.points(static_cast<Eigen::Index>(k), 1) = xs[2 * k + 1];
        }
        return out;
    }

    void export_power_trace(const Matrix &powers, std::span<const double> timestamps, const std::string &path)
    {
        if (static_cast<Eigen::Index>(timestamps.size()) != powers.rows())
            throw data_error("export_power_trace: one timestamp per row is required");
        std::string out = "t";
        for (Eigen::Index a = 0; a < powers.cols(); ++a)
            out += ",ap" + std::to_string(a);
        out += "\n";
        for (Eigen::Index n = 0; n < powers.rows(); ++n)
        {
            out += fmt9(timestamps[n]);
            for (Eigen::Index a = 0; a < powers.cols(); ++a)
                out += "," + fmt9(powers(n, a));
            out += "\n";
        }
        write_file(path, out);
    }

    void write_training_log(const TrainingLog &log, const std::string &path)
    {
        std::string out;
        for (std::size_t c = 0; c < log.columns.size(); ++c)
            out += (c ? "," : "") + log.columns[c];
        out += "\n";
        for (const auto &row : log.rows)
        {
            for (std::size_t c = 0; c < row.size(); ++c)
                out += (c ? "," : "") + fmt9(row[c]);
            out += "\n";
        }
        write_file(path, out);
    }

    std::string metrics_json(const MetricsReport &report)
    {
        auto values = [](const MetricValues &m) {
            return json{{"tw", m.tw}, {"ct", m.ct}, {"ks", m.ks}, {"rd", m.rd}, {"mde", m.mde}, {"e95", m.e95}};
        };
        json j;
        j["neighbors"] = report.neighbors;
        j["bins"] = report.bins;
        j["mean"] = values(report.mean);
        j["std"] = values(report.std);
        j["per_seed"] = json::array();
        for (const auto &m : report.per_seed)
            j["per_seed"].push_back(values(m));
        return j.dump(2);
    }

    void write_text(const std::string &path, const std::string &text) { write_file(path, text); }
}
