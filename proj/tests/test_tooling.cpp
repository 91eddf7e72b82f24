#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "vcube/cli.hpp"
#include "vcube/config.hpp"
#include "vcube/error.hpp"
#include "vcube/metrics.hpp"

using namespace vcube;
namespace fs = std::filesystem;

namespace {

// Runs the CLI in-process with stdout/stderr captured.
struct CliResult {
    int code = 0;
    std::string out, err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
    std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
    CliResult r;
    r.code = cli_main(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

ImageU8 erode_mask(ImageU8 m, int passes) {
    for (int p = 0; p < passes; ++p) {
        ImageU8 next = m;
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x) {
                bool keep = m.at(x, y) != 0;
                for (int k = 0; keep && k < 4; ++k) {
                    int nx = x + (k == 0) - (k == 1), ny = y + (k == 2) - (k == 3);
                    keep = m.inside(nx, ny) && m.at(nx, ny) != 0;
                }
                next.at(x, y) = keep ? 255 : 0;
            }
        m = std::move(next);
    }
    return m;
}

}  // namespace

TEST_CASE("config: canonical serialization round-trips stably") {
    ScenarioConfig defaults;
    std::string canon = config_to_json(defaults);
    ScenarioConfig reparsed = config_from_json(canon);
    CHECK(config_to_json(reparsed) == canon);

    // A partial document keeps defaults elsewhere and round-trips too.
    ScenarioConfig c = config_from_json(R"({"pipeline": {"codec_quality": 50},
                                            "session": {"duration_s": 3.5}})");
    CHECK(c.codec_quality == 50);
    CHECK(c.duration_s == 3.5);
    CHECK(c.depth.hypotheses == defaults.depth.hypotheses);
    CHECK(c.stages.network_ms == defaults.stages.network_ms);
    CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));

    // Defaults carry the standard constants end to end.
    CHECK(defaults.cube.cam_res_x == 1280);
    CHECK(defaults.cube.cam_res_y == 960);
    CHECK(defaults.input_views == 4);
    CHECK(defaults.temporal_w == 0.5);
    CHECK(defaults.temporal_border == 10);
    CHECK(defaults.fps == 30.0);
    CHECK(defaults.stages.total_ms() == 270.0);
}

TEST_CASE("config: unknown keys, wrong types, and bad ranges are rejected") {
    CHECK_THROWS_AS(config_from_json("not json"), BadConfig);
    CHECK_THROWS_AS(config_from_json("[1,2]"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"spelling": {}})"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"pipeline": {"quality": 90}})"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"pipeline": {"codec_quality": "hi"}})"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"pipeline": {"codec_quality": 0}})"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"pipeline": {"tau": -1}})"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"assembly": {"topology": "triangle"}})"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"assembly": {"parties": 1}})"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"assembly": {"topology": "face_to_face",
                                                      "parties": 3}})"),
                    BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"noise": {"dropout": 1.5}})"), BadConfig);
    CHECK_THROWS_AS(config_from_json(R"({"run": {"viewpoint": [1, 2]}})"), BadConfig);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("config: hash is stable and content-sensitive") {
    ScenarioConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.codec_quality = 91;
    CHECK(config_hash(a) != config_hash(b));
    // Seed feeds the noise stream, so it must be part of the identity.
    ScenarioConfig c = config_from_json(R"({"run": {"seed": 7}})");
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("config: layouts for every topology") {
    ScenarioConfig c;
    CHECK(make_layout(c).cubes.size() == 2);
    c.topology = "round_table";
    c.parties = 4;
    AssemblyLayout l = make_layout(c);
    CHECK(l.cubes.size() == 4);
    CHECK(l.topology == "round_table");
    CHECK(validate_layout(l).empty());
}

TEST_CASE("cli: validate exit codes and error JSON") {
    CHECK(run_cli({"validate"}).code == 0);

    // Unreadable and malformed configs are config errors (2).
    CHECK(run_cli({"--config", "/nonexistent.json", "validate"}).code == 2);
    fs::path bad = fs::temp_directory_path() / "vcube_bad.json";
    std::ofstream(bad) << "{broken";
    CliResult r = run_cli({"--config", bad.string(), "validate"});
    CHECK(r.code == 2);
    nlohmann::json err = nlohmann::json::parse(r.err);
    CHECK(err.contains("error"));
    CHECK(err.contains("detail"));

    // Geometrically invalid layout: seats overlapping -> validation failure (3).
    fs::path overlap = fs::temp_directory_path() / "vcube_overlap.json";
    std::ofstream(overlap) << R"({"assembly": {"topology": "side_by_side", "overlap": 1.0}})";
    CliResult v = run_cli({"--config", overlap.string(), "validate"});
    CHECK(v.code == 3);
    nlohmann::json verr = nlohmann::json::parse(v.err);
    REQUIRE(verr.contains("violations"));
    CHECK(verr["violations"][0]["rule"] == "seat-overlap");

    // Flag problems: unparsable and out-of-range values (2).
    CHECK(run_cli({"--quality", "abc", "validate"}).code == 2);
    CHECK(run_cli({"--quality", "0", "validate"}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
}

TEST_CASE("cli: simulate writes manifest, trace, and the expected summary") {
    fs::path dir = fresh_dir("vcube_sim");
    CliResult r = run_cli({"-o", dir.string(), "simulate"});
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(dir / "manifest.json"));
    REQUIRE(fs::exists(dir / "trace.jsonl"));
    REQUIRE(fs::exists(dir / "summary.json"));

    nlohmann::json summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    for (const auto& stream : summary["streams"]) {
        CHECK(stream["fps"].get<double>() == doctest::Approx(30.0).epsilon(1e-9));
        CHECK(stream["mean_latency_ms"].get<double>() == doctest::Approx(270.0).epsilon(1e-12));
        CHECK(stream["bitrate_bps"].get<double>() == doctest::Approx(2.4e6).epsilon(1e-12));
    }

    nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["seed"] == 1);
    CHECK(manifest.contains("config_hash"));
    CHECK(manifest.contains("pipeline_version"));
    CHECK(manifest["config"]["session"]["duration_s"] == 10.0);

    // Identical config and seed reproduce the trace byte for byte; the
    // manifests agree on everything but the output location itself.
    fs::path dir2 = fresh_dir("vcube_sim2");
    REQUIRE(run_cli({"-o", dir2.string(), "simulate"}).code == 0);
    CHECK(slurp(dir / "trace.jsonl") == slurp(dir2 / "trace.jsonl"));
    nlohmann::json m1 = nlohmann::json::parse(slurp(dir / "manifest.json"));
    nlohmann::json m2 = nlohmann::json::parse(slurp(dir2 / "manifest.json"));
    CHECK(m1["config_hash"] == m2["config_hash"]);
    m1["config"]["run"].erase("output_dir");
    m2["config"]["run"].erase("output_dir");
    CHECK(m1 == m2);
}

TEST_CASE("cli: output directory precedence is flag over env over config") {
    fs::path env_dir = fresh_dir("vcube_envdir");
    fs::path flag_dir = fresh_dir("vcube_flagdir");
    setenv("VCUBE_OUT", env_dir.string().c_str(), 1);
    REQUIRE(run_cli({"simulate"}).code == 0);
    CHECK(fs::exists(env_dir / "summary.json"));
    REQUIRE(run_cli({"-o", flag_dir.string(), "simulate"}).code == 0);
    CHECK(fs::exists(flag_dir / "summary.json"));
    unsetenv("VCUBE_OUT");
}

TEST_CASE("cli: metrics without render artifacts is a runtime error") {
    fs::path dir = fresh_dir("vcube_nometrics");
    CliResult r = run_cli({"-o", dir.string(), "metrics"});
    CHECK(r.code == 4);
    CHECK(nlohmann::json::parse(r.err)["error"] == "IoError");
}

TEST_CASE("cli: identity render reproduces camera 0 on the foreground") {
    // Virtual view placed exactly at input camera 0 with noiseless capture.
    // Reprojection through the coincident camera lands on the source pixel
    // regardless of the estimated depth, and a near-zero blend temperature
    // hands that camera all the weight, so the portrait must match the
    // input almost perfectly away from the matte feather.
    CubeSpec rig = CubeSpec::standard();
    Vector3d c0 = rig.cameras[0].center();
    fs::path dir = fresh_dir("vcube_identity");
    fs::path cfgp = dir / "config.json";
    {
        nlohmann::json j;
        j["noise"] = {{"depth_std", 0.0}, {"dropout", 0.0}, {"color_std", 0.0}};
        j["pipeline"] = {{"tau", 1e-4}};
        j["run"] = {{"viewpoint", {c0.x(), c0.y(), c0.z()}},
                    {"frames", 1},
                    {"output_dir", dir.string()}};
        std::ofstream(cfgp) << j.dump();
    }
    REQUIRE(run_cli({"--config", cfgp.string(), "capture"}).code == 0);
    REQUIRE(run_cli({"--config", cfgp.string(), "render"}).code == 0);

    ImageU8 input = read_ppm((dir / "capture" / "cam0_f000.ppm").string());
    ImageU8 fg = read_pgm((dir / "capture" / "fg_cam0_f000.pgm").string());
    ImageU8 portrait = read_ppm((dir / "render" / "f000" / "portrait.ppm").string());

    // Interior of the figure only: the matte feather blurs a 2-3 px rim.
    ImageU8 interior = erode_mask(fg, 4);
    long n = 0;
    for (auto p : interior.pixels()) n += p != 0;
    REQUIRE(n > 20000);
    CHECK(psnr(portrait, input, &interior) >= 40.0);

    // The per-frame metric report should agree with the one `metrics` rebuilds
    // from the dumped artifacts.
    REQUIRE(run_cli({"--config", cfgp.string(), "metrics"}).code == 0);
    nlohmann::json from_render =
        nlohmann::json::parse(slurp(dir / "render" / "f000" / "metrics.json"));
    nlohmann::json from_files = nlohmann::json::parse(slurp(dir / "metrics" / "report.json"));
    CHECK(from_render["psnr_full_db"] == from_files["psnr_full_db"]);
    CHECK(from_render["depth_rmse_m"] == from_files["depth_rmse_m"]);
    CHECK(from_render["photometric"] == from_files["photometric"]);
}
