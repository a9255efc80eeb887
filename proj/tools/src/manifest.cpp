#include "rewind_cli/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#ifndef REWIND_VERSION
#define REWIND_VERSION "0.0.0"
#endif

namespace rewindlab::cli {

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char b[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(b, sizeof b, "%02x", md[i]);
        hex += b;
    }
    return hex;
}

RunManifest::RunManifest(std::string subcommand, std::filesystem::path out_dir)
    : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir)), started_(utc_now()) {
    std::filesystem::create_directories(out_dir_);
}

void RunManifest::write_file(const std::string& name, const std::string& content) {
    const auto path = out_dir_ / name;
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os << content;
    }
    outputs_.push_back({name, sha256_file(path), std::filesystem::file_size(path)});
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : outputs_) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return {{"schema_version", kSchemaVersion},
            {"artifact_version", REWIND_VERSION},
            {"subcommand", subcommand_},
            {"params", params},
            {"seed", seed},
            {"stream", stream},
            {"threads", threads},
            {"started", started_},
            {"finished", finished_},
            {"outputs", files},
            {"failures", failures}};
}

void RunManifest::finish() {
    finished_ = utc_now();
    std::ofstream os(out_dir_ / "manifest.json", std::ios::binary);
    os << to_json().dump(2) << '\n';
}

}  // namespace rewindlab::cli
