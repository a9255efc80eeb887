#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rewind_cli/cli.hpp"
#include "rewind_cli/manifest.hpp"

using namespace rewindlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rewind_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Result {
    int code;
    std::string out, err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("gate specs") {
    const auto id = cli::parse_gate_spec("identity", 3);
    CHECK(id.d() == 3);
    CHECK(std::abs(f_functional(id) - 9.0) < 1e-10);
    CHECK(std::abs(f_functional(cli::parse_gate_spec("strong", 2)) - 2.0) < 1e-10);
    const auto w = cli::parse_gate_spec("weak:0.5", 2);
    CHECK(w.ancilla_dim() == 2);
    CHECK(std::abs(f_functional(w) - f_functional(weak_measurement(2, 0.5))) < 1e-12);

    const fs::path dir = scratch("gate");
    const auto g = weak_measurement(3, 0.25);
    std::ofstream(dir / "g.json") << to_json(g).dump();
    const auto back = cli::parse_gate_spec("file:" + (dir / "g.json").string(), 2);
    CHECK(back.d() == 3);
    CHECK((back.matrix() - g.matrix()).norm() < 1e-14);

    CHECK_THROWS_AS(cli::parse_gate_spec("cnot", 2), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_gate_spec("weak:1.5", 2), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_gate_spec("weak:0.5x", 2), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_gate_spec("file:" + (dir / "missing.json").string(), 2), std::invalid_argument);
}

TEST_CASE("number lists") {
    const auto v = cli::parse_list("2^-6,2^-8,0.25,3");
    REQUIRE(v.size() == 4);
    CHECK(v[0] == 1.0 / 64);
    CHECK(v[1] == 1.0 / 256);
    CHECK(v[2] == 0.25);
    CHECK(v[3] == 3.0);
    CHECK_THROWS(cli::parse_list("2^x"));
    CHECK_THROWS(cli::parse_list("1,abc"));
}

TEST_CASE("config values lose to explicit flags") {
    const fs::path dir = scratch("config");
    std::ofstream(dir / "c.json") << R"({"samples": 7, "gate": "identity", "bath-dim": 8})";
    const std::vector<std::string> args{"haar", "--config", (dir / "c.json").string(), "--samples=3"};
    const auto ex = cli::expand_config(args);
    REQUIRE(ex.front() == "haar");
    CHECK(std::find(ex.begin(), ex.end(), "--samples=7") < std::find(ex.begin(), ex.end(), "--samples=3"));

    const auto r = call({"haar", "--config", (dir / "c.json").string(), "--samples=3", "--out", (dir / "o").string()});
    REQUIRE(r.code == 0);
    const auto m = read_json(dir / "o" / "manifest.json");
    CHECK(m["params"]["samples"] == 3);
    CHECK(m["params"]["gate"] == "identity");
    CHECK(m["params"]["bath_dim"] == 8);

    std::ofstream(dir / "bad.json") << "[1, 2]";
    CHECK(call({"haar", "--config", (dir / "bad.json").string()}).code == 2);
}

TEST_CASE("manifest contents and digests") {
    const fs::path dir = scratch("manifest");
    const auto r = call({"haar", "--gate", "strong", "--bath-dim", "16", "--samples", "5", "--seed", "4", "--out",
                         dir.string()});
    REQUIRE(r.code == 0);
    const auto m = read_json(dir / "manifest.json");
    for (const char* k : {"schema_version", "artifact_version", "subcommand", "params", "seed", "stream", "threads",
                          "started", "finished", "outputs", "failures"}) {
        CHECK(m.contains(k));
    }
    CHECK(m["schema_version"] == cli::kSchemaVersion);
    CHECK(m["subcommand"] == "haar");
    CHECK(m["seed"] == 4);
    CHECK(m["failures"].empty());
    REQUIRE(m["outputs"].size() == 2);
    for (const auto& f : m["outputs"]) {
        const fs::path p = dir / f["name"].get<std::string>();
        REQUIRE(fs::exists(p));
        CHECK(f["sha256"] == cli::sha256_file(p));
        CHECK(f["bytes"].get<std::uintmax_t>() == fs::file_size(p));
    }

    // known digest
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(cli::sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("reruns are byte identical") {
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b"), c = scratch("rerun_c");
    const std::vector<std::string> base{"haar", "--bath-dim", "16", "--samples", "12", "--seed", "9"};
    auto with = [&](const fs::path& out, const std::string& threads) {
        auto v = base;
        v.insert(v.end(), {"--out", out.string(), "--threads", threads});
        return v;
    };
    REQUIRE(call(with(a, "1")).code == 0);
    REQUIRE(call(with(b, "1")).code == 0);
    REQUIRE(call(with(c, "2")).code == 0);
    const std::string first = slurp(a / "haar_samples.csv");
    CHECK(!first.empty());
    CHECK(first == slurp(b / "haar_samples.csv"));
    CHECK(first == slurp(c / "haar_samples.csv"));
    CHECK(slurp(a / "haar_summary.json") == slurp(b / "haar_summary.json"));

    const fs::path r1 = scratch("rerun_r1"), r2 = scratch("rerun_r2");
    for (const auto& p : {r1, r2}) {
        REQUIRE(call({"rotor", "--hbar", "2^-6", "--kicks", "8", "--out", p.string()}).code == 0);
    }
    CHECK(slurp(r1 / "rotor_hbar_2^-6.csv") == slurp(r2 / "rotor_hbar_2^-6.csv"));
}

TEST_CASE("bad input exits with 2") {
    const fs::path dir = scratch("bad");
    CHECK(call({}).code != 0);
    CHECK(call({"haar", "--gate", "nonsense", "--out", dir.string()}).code == 2);
    CHECK(call({"haar", "--scrambler", "other", "--samples", "1", "--bath-dim", "4", "--out", dir.string()}).code == 2);
    CHECK(call({"rotor", "--hbar", "abc", "--out", dir.string()}).code == 2);
    CHECK(call({"rotor", "--state", "x", "--out", dir.string()}).code == 2);
    CHECK(call({"bound", "--mode", "other", "--out", dir.string()}).code == 2);
    CHECK(call({"haar", "--samples", "-3"}).code == 2);
    const auto r = call({"haar", "--gate", "nonsense", "--out", dir.string()});
    CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("haar identity gate") {
    const fs::path dir = scratch("identity");
    const auto r = call({"haar", "--gate", "identity", "--bath-dim", "8", "--samples", "4", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto s = read_json(dir / "haar_summary.json");
    CHECK(std::abs(s["mean_r"].get<double>() - 1.0) < 1e-10);
    CHECK(json::parse(r.out)["mean_r"] == s["mean_r"]);
}

TEST_CASE("bound saturate and figures") {
    const fs::path dir = scratch("saturate");
    const auto r = call({"bound", "--mode", "saturate", "--d", "3", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto s = read_json(dir / "bound_summary.json");
    CHECK(s["max_abs_margin"].get<double>() < 1e-9);
    CHECK(s["max_rho_residual"].get<double>() < 1e-10);
    CHECK(read_json(dir / "manifest.json")["failures"].empty());

    const std::string svg = slurp(dir / "bound_saturation.svg");
    const bool opens = svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0;
    CHECK(opens);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("http://www.w3.org/2000/svg") != std::string::npos);
    CHECK(svg.find("href=\"http") == std::string::npos);
    CHECK(svg.find("<script") == std::string::npos);
    CHECK(svg.size() < 2u * 1024 * 1024);
}

TEST_CASE("out directory from the environment") {
    const fs::path dir = scratch("env");
    ::setenv("REWIND_OUT_DIR", dir.string().c_str(), 1);
    const auto r = call({"haar", "--gate", "identity", "--bath-dim", "4", "--samples", "2"});
    ::unsetenv("REWIND_OUT_DIR");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "manifest.json"));
}
