// Run manifest: resolved parameters, seeds, timestamps and output digests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace rewindlab::cli {

inline constexpr const char* kSchemaVersion = "1";

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct OutputFile {
    std::string name;  ///< relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

class RunManifest {
public:
    RunManifest(std::string subcommand, std::filesystem::path out_dir);

    nlohmann::json params;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    unsigned threads = 1;
    std::vector<std::string> failures;

    const std::filesystem::path& out_dir() const noexcept { return out_dir_; }

    /// Writes `content` to out_dir/name and records its digest.
    void write_file(const std::string& name, const std::string& content);

    /// Stamps the end time and writes out_dir/manifest.json.
    void finish();

    nlohmann::json to_json() const;

private:
    std::string subcommand_;
    std::filesystem::path out_dir_;
    std::string started_;
    std::string finished_;
    std::vector<OutputFile> outputs_;
};

}  // namespace rewindlab::cli
