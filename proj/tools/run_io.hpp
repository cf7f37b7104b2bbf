// Copyright 2026 The surfacelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "json.hpp"

#include "surfacelab/errors.hpp"

namespace surfacelab::cli {

inline constexpr const char *kToolName = "surfacelab";
inline constexpr const char *kToolVersion = "1.0.0";
inline constexpr const char *kManifestName = "manifest.json";

inline std::string sha256_hex(const std::string &bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path);
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

/// Writes through a temporary file and renames, so readers never see a
/// partial file.
inline void write_atomic(const std::string &path, const std::string &bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + path);
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw DataError("short write on " + path);
        }
    }
    std::filesystem::rename(tmp, path);
}

inline nlohmann::json read_json(const std::string &path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error &e) {
        throw DataError(path + ": " + e.what());
    }
}

/// Collects inputs and outputs of one command and writes manifest.json last.
class Manifest {
public:
    Manifest(std::string command, std::string out_dir)
        : command_(std::move(command)), dir_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) {
            throw ConfigError("cannot create output directory " + dir_ + ": " + ec.message());
        }
    }

    const std::string &dir() const noexcept { return dir_; }
    std::string path(const std::string &name) const { return (std::filesystem::path(dir_) / name).string(); }

    void set_config(nlohmann::json cfg) { config_ = std::move(cfg); }

    void add_input(const std::string &label, const std::string &path, const std::string &bytes) {
        inputs_.push_back({{"label", label}, {"path", path}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }

    void add_builtin_input(const std::string &label) {
        inputs_.push_back({{"label", label}, {"path", "builtin"}});
    }

    /// Writes `name` in the output directory and records its digest.
    void emit(const std::string &name, const std::string &bytes) {
        write_atomic(path(name), bytes);
        outputs_.push_back({{"file", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }

    void time(const std::string &phase, double seconds) { timings_[phase] = seconds; }

    void set_summary(nlohmann::json s) { summary_ = std::move(s); }

    void finish() {
        timings_["total_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        nlohmann::json m;
        m["tool"] = kToolName;
        m["version"] = kToolVersion;
        m["command"] = command_;
        m["config"] = config_;
        m["inputs"] = inputs_;
        m["outputs"] = outputs_;
        m["timings"] = timings_;
        if (!summary_.is_null()) {
            m["summary"] = summary_;
        }
        write_atomic(path(kManifestName), m.dump(2) + "\n");
    }

private:
    std::string command_;
    std::string dir_;
    std::chrono::steady_clock::time_point start_;
    nlohmann::json config_ = nlohmann::json::object();
    nlohmann::json inputs_ = nlohmann::json::array();
    nlohmann::json outputs_ = nlohmann::json::array();
    nlohmann::json timings_ = nlohmann::json::object();
    nlohmann::json summary_;
};

/// A previous run directory: its manifest and digest-checked access to the
/// files it lists.
class RunDir {
public:
    explicit RunDir(std::string dir) : dir_(std::move(dir)) {
        manifest_ = read_json((std::filesystem::path(dir_) / kManifestName).string());
        if (!manifest_.contains("outputs") || !manifest_.contains("config")) {
            throw DataError(dir_ + ": manifest lacks outputs or config");
        }
    }

    const nlohmann::json &config() const { return manifest_["config"]; }
    const std::string &dir() const noexcept { return dir_; }
    std::string command() const { return manifest_.value("command", ""); }

    /// Reads `name` and checks it against the recorded digest.
    std::string read_verified(const std::string &name) const {
        const std::string p = (std::filesystem::path(dir_) / name).string();
        for (const auto &o : manifest_["outputs"]) {
            if (o.value("file", "") == name) {
                std::string bytes = read_file(p);
                if (sha256_hex(bytes) != o.value("sha256", "")) {
                    throw DataError(p + " does not match the digest in its manifest");
                }
                return bytes;
            }
        }
        throw DataError(dir_ + ": manifest does not list " + name);
    }

private:
    std::string dir_;
    nlohmann::json manifest_;
};

}  // namespace surfacelab::cli
