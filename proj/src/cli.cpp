#include "vcube/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "vcube/gaze_track.hpp"
#include "vcube/pipeline.hpp"
#include "vcube/session.hpp"

namespace vcube {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int fail(int code, const std::string& kind, const std::string& detail) {
    json j;
    j["error"] = kind;
    j["detail"] = detail;
    std::cerr << j.dump() << std::endl;
    return code;
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f.good()) throw IoError("cannot write " + path.string());
    f << body;
    if (!f.good()) throw IoError("short write to " + path.string());
}

std::string frame_tag(int f) {
    char b[16];
    std::snprintf(b, sizeof b, "f%03d", f);
    return b;
}

ImageU8 to_u8_scaled(const ImageD& m) {
    ImageU8 out(m.width(), m.height(), 1, 0);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            out.at(x, y) = static_cast<uint8_t>(
                std::lround(255.0 * std::clamp(m.at(x, y), 0.0, 1.0)));
    return out;
}

ImageU8 alpha_to_u8(const ImageF& a) {
    ImageU8 out(a.width(), a.height(), 1, 0);
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            out.at(x, y) = static_cast<uint8_t>(
                std::lround(255.0 * std::clamp(static_cast<double>(a.at(x, y)), 0.0, 1.0)));
    return out;
}

ImageU8 binary_to_u8(const ImageU8& m) {
    ImageU8 out = m;
    for (auto& p : out.pixels()) p = p ? 255 : 0;
    return out;
}

ImageU8 rgba_png(const PortraitFrame& pf) {
    ImageU8 out(pf.color.width(), pf.color.height(), 4, 0);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = pf.color.at(x, y, c);
            out.at(x, y, 3) = static_cast<uint8_t>(std::lround(
                255.0 * std::clamp(static_cast<double>(pf.alpha.at(x, y)), 0.0, 1.0)));
        }
    return out;
}

// --- subcommands -----------------------------------------------------------

int run_validate(const ScenarioConfig& cfg) {
    AssemblyLayout layout = make_layout(cfg);
    std::vector<LayoutViolation> violations = validate_layout(layout);
    if (!violations.empty()) {
        json j;
        j["error"] = "InvalidLayout";
        j["violations"] = json::array();
        for (const LayoutViolation& v : violations)
            j["violations"].push_back(
                {{"cube_a", v.cube_a}, {"cube_b", v.cube_b}, {"rule", v.rule}, {"detail", v.detail}});
        std::cerr << j.dump() << std::endl;
        return 3;
    }
    json ok;
    ok["ok"] = true;
    ok["topology"] = layout.topology;
    ok["cubes"] = layout.cubes.size();
    std::cout << ok.dump() << std::endl;
    return 0;
}

int run_capture(const ScenarioConfig& cfg) {
    fs::path out(cfg.output_dir);
    fs::create_directories(out / "capture");
    write_text(out / "manifest.json", run_manifest_json(cfg));

    CubeSpec spec = CubeSpec::standard(cfg.cube);
    SyntheticScene scene(cfg.scene);
    std::vector<RgbdFrame> background;
    for (size_t c = 0; c < spec.cameras.size(); ++c) {
        background.push_back(render_background(scene, spec.cameras[c], int(c), cfg.noise));
        std::string base = "background_cam" + std::to_string(c);
        write_ppm((out / "capture" / (base + ".ppm")).string(), background[c].color);
        write_pfm((out / "capture" / (base + ".pfm")).string(), background[c].depth);
    }
    for (int f = 0; f < cfg.frames; ++f)
        for (size_t c = 0; c < spec.cameras.size(); ++c) {
            RgbdFrame frame = render_rgbd(scene, spec.cameras[c], int(c), f, cfg.noise);
            std::string base = "cam" + std::to_string(c) + "_" + frame_tag(f);
            write_ppm((out / "capture" / (base + ".ppm")).string(), frame.color);
            write_pfm((out / "capture" / (base + ".pfm")).string(), frame.depth);
            write_pgm((out / "capture" / ("fg_" + base + ".pgm")).string(),
                      segment_foreground(frame, background[c]));
        }
    json j;
    j["dir"] = (out / "capture").string();
    j["frames"] = cfg.frames;
    j["cameras"] = spec.cameras.size();
    std::cout << j.dump() << std::endl;
    return 0;
}

int run_render(const ScenarioConfig& cfg) {
    fs::path out(cfg.output_dir);
    fs::create_directories(out / "render");
    write_text(out / "manifest.json", run_manifest_json(cfg));

    PortraitPipeline pipe(cfg, 0);
    MetricReport last;
    for (int f = 0; f < cfg.frames; ++f) {
        FrameResult res = pipe.process(f, cfg.viewpoint);
        fs::path dir = out / "render" / frame_tag(f);
        fs::create_directories(dir);

        write_png((dir / "portrait.png").string(), rgba_png(res.portrait));
        write_ppm((dir / "portrait.ppm").string(), res.portrait.color);
        ImageU8 straight(res.matte.color.width(), res.matte.color.height(), 3, 0);
        for (int y = 0; y < straight.height(); ++y)
            for (int x = 0; x < straight.width(); ++x)
                for (int c = 0; c < 3; ++c)
                    straight.at(x, y, c) = static_cast<uint8_t>(std::lround(
                        255.0 *
                        std::clamp(static_cast<double>(res.matte.color.at(x, y, c)), 0.0, 1.0)));
        write_ppm((dir / "straight.ppm").string(), straight);
        write_pgm((dir / "alpha.pgm").string(), alpha_to_u8(res.matte.alpha));
        write_pfm((dir / "depth_initial.pfm").string(), res.depth.initial);
        write_pfm((dir / "depth_refined.pfm").string(), res.depth.refined);
        for (size_t i = 0; i < res.weights.full.size(); ++i)
            write_pgm((dir / ("weight_v" + std::to_string(i) + ".pgm")).string(),
                      to_u8_scaled(res.weights.full[i]));
        for (size_t i = 0; i < res.warped_color.size(); ++i) {
            write_ppm((dir / ("warped_v" + std::to_string(i) + ".ppm")).string(),
                      res.warped_color[i]);
            write_pgm((dir / ("warped_mask_v" + std::to_string(i) + ".pgm")).string(),
                      binary_to_u8(res.warped_mask[i]));
        }
        write_ppm((dir / "ref_color.ppm").string(), res.reference.color);
        write_pfm((dir / "ref_depth.pfm").string(), res.reference.depth);

        last = frame_report(res);
        write_text(dir / "metrics.json", last.to_json());
    }
    std::cout << last.to_json() << std::endl;
    return 0;
}

int run_simulate(const ScenarioConfig& cfg, bool dump_screens) {
    fs::path out(cfg.output_dir);
    fs::create_directories(out);
    write_text(out / "manifest.json", run_manifest_json(cfg));

    AssemblyLayout layout = make_layout(cfg);
    SessionTrace trace = schedule(layout, cfg.stages, make_schedule_options(cfg));
    write_trace_jsonl((out / "trace.jsonl").string(), trace);
    write_trace_summary((out / "summary.json").string(), trace);

    if (dump_screens) {
        fs::create_directories(out / "screens");
        const CubeSpec& rspec = layout.cube(0).spec;
        Vector3d vp = cfg.viewpoint;
        Vector3d vp_global = cube_to_global(layout, 0, vp);
        ImageU8 bg(rspec.params.screen_res_x, rspec.params.screen_res_y, 3, 0);

        std::map<int, PortraitPipeline> pipes;
        for (const PlacedCube& pc : layout.cubes)
            if (pc.id != 0) pipes.emplace(pc.id, PortraitPipeline(cfg, pc.id));
        static const char* kScreenName[3] = {"front", "left", "right"};
        for (int f = 0; f < cfg.frames; ++f) {
            std::map<int, PortraitFrame> portraits;
            for (auto& [id, pipe] : pipes) {
                FrameResult res = pipe.process(f, viewpoint_transfer(layout, id, 0, vp));
                PortraitFrame dec = decode_portrait(res.wire);
                dec.viewpoint = vp_global;
                portraits.emplace(id, std::move(dec));
            }
            CompositeResult comp = composite(layout, 0, portraits, bg, vp);
            for (int s = 0; s < 3; ++s)
                write_png((out / "screens" /
                           ("recv0_" + frame_tag(f) + "_" + kScreenName[s] + ".png"))
                              .string(),
                          comp.screens[s]);
        }
    }

    std::ifstream f(out / "summary.json", std::ios::binary);
    std::cout << f.rdbuf() << std::endl;
    return 0;
}

int run_metrics(const ScenarioConfig& cfg, const std::string& dir_flag) {
    fs::path base = dir_flag.empty() ? fs::path(cfg.output_dir) : fs::path(dir_flag);
    fs::path rdir = base / "render";
    if (!fs::is_directory(rdir))
        throw IoError("no render artifacts under " + rdir.string() + "; run `render` first");

    std::vector<fs::path> frames;
    for (const auto& e : fs::directory_iterator(rdir))
        if (e.is_directory()) frames.push_back(e.path());
    std::sort(frames.begin(), frames.end());
    if (frames.empty()) throw IoError("no frame directories under " + rdir.string());

    fs::create_directories(base / "metrics");
    std::ofstream csv(base / "metrics" / "frames.csv");
    csv << kMetricsCsvHeader << "\n";

    MetricReport total;
    int n = 0;
    for (const fs::path& dir : frames) {
        ImageU8 portrait = read_ppm((dir / "portrait.ppm").string());
        ImageU8 straight = read_ppm((dir / "straight.ppm").string());
        ImageU8 alpha_u8 = read_pgm((dir / "alpha.pgm").string());
        ImageF refined = read_pfm((dir / "depth_refined.pfm").string());
        ImageU8 ref_color = read_ppm((dir / "ref_color.ppm").string());
        ImageF ref_depth = read_pfm((dir / "ref_depth.pfm").string());
        std::vector<ImageU8> warped, masks;
        for (int i = 0;; ++i) {
            fs::path wc = dir / ("warped_v" + std::to_string(i) + ".ppm");
            if (!fs::exists(wc)) break;
            warped.push_back(read_ppm(wc.string()));
            masks.push_back(read_pgm((dir / ("warped_mask_v" + std::to_string(i) + ".pgm")).string()));
        }

        const int w = ref_color.width(), h = ref_color.height();
        ImageU8 fg(w, h, 1, 0);
        ImageF ref_alpha(w, h, 1, 0.0f);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                fg.at(x, y) = ref_depth.at(x, y) > 0.0f ? 255 : 0;
                ref_alpha.at(x, y) = fg.at(x, y) ? 1.0f : 0.0f;
            }
        ImageF alpha(w, h, 1, 0.0f);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) alpha.at(x, y) = alpha_u8.at(x, y) / 255.0f;

        MetricReport r;
        int frame = n;
        if (sscanf(dir.filename().string().c_str(), "f%d", &frame) != 1) frame = n;
        r.first_frame = r.last_frame = frame;
        r.psnr_full_db = psnr(portrait, ref_color);
        r.psnr_foreground_db = psnr(portrait, ref_color, &fg);
        r.alpha_mse = alpha_mse(alpha, ref_alpha);
        r.depth_rmse_m = depth_rmse(refined, quarter_depth(ref_depth));
        r.photometric = photometric_discrepancy(straight, warped, masks);
        r.smoothness = smoothness_energy(refined);
        csv << metrics_csv_row(frame, r) << "\n";

        total.psnr_full_db += r.psnr_full_db;
        total.psnr_foreground_db += r.psnr_foreground_db;
        total.alpha_mse += r.alpha_mse;
        total.depth_rmse_m += r.depth_rmse_m;
        total.photometric += r.photometric;
        total.smoothness += r.smoothness;
        if (n == 0) total.first_frame = frame;
        total.last_frame = frame;
        ++n;
    }
    total.psnr_full_db /= n;
    total.psnr_foreground_db /= n;
    total.alpha_mse /= n;
    total.depth_rmse_m /= n;
    total.photometric /= n;
    total.smoothness /= n;
    write_text(base / "metrics" / "report.json", total.to_json());
    std::cout << total.to_json() << std::endl;
    return 0;
}

int run_bench(const ScenarioConfig& cfg) {
    using clock = std::chrono::steady_clock;
    auto ms = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };

    fs::path out(cfg.output_dir);
    fs::create_directories(out);
    write_text(out / "manifest.json", run_manifest_json(cfg));

    PortraitPipeline pipe(cfg, 1);
    auto t0 = clock::now();
    FrameResult res = pipe.process(0, cfg.viewpoint);
    auto t1 = clock::now();
    PortraitFrame dec = decode_portrait(res.wire);
    auto t2 = clock::now();

    double composite_ms = 0.0;
    if (cfg.parties >= 2) {
        AssemblyLayout layout = make_layout(cfg);
        Vector3d vp = cfg.viewpoint;
        dec.viewpoint = cube_to_global(layout, 0, vp);
        ImageU8 bg(cfg.cube.screen_res_x, cfg.cube.screen_res_y, 3, 0);
        auto t3 = clock::now();
        composite(layout, 0, {{1, dec}}, bg, vp);
        composite_ms = ms(t3, clock::now());
    }

    json j;
    j["capture_ms"] = res.timings.capture_ms;
    j["segment_ms"] = res.timings.segment_ms;
    j["depth_ms"] = res.timings.depth_ms;
    j["render_ms"] = res.timings.render_ms;
    j["temporal_ms"] = res.timings.temporal_ms;
    j["encode_ms"] = res.timings.encode_ms;
    j["decode_ms"] = ms(t1, t2);
    j["composite_ms"] = composite_ms;
    j["frame_total_ms"] = ms(t0, t1);
    write_text(out / "bench.json", j.dump(2));
    std::cout << j.dump() << std::endl;
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{
        "Desk-scale telepresence pipeline: synthetic RGBD capture, tracked-viewpoint "
        "portrait rendering, wire codec, and session simulation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, topology, metrics_dir;
    int parties = 0, frames = 0, quality = 0;
    double duration = 0.0, depth_std = 0.0, texture_amp = 0.0;
    uint64_t seed = 0;
    std::vector<double> vp;
    bool dump_screens = false;

    app.add_option("--config,-c", config_path,
                   "JSON scenario config; absent sections keep built-in defaults");
    app.add_option("--output,-o", out_dir,
                   "output directory (beats VCUBE_OUT env var, which beats the config)");
    app.add_option("--topology", topology,
                   "assembly layout: face_to_face, side_by_side, round_table");
    app.add_option("--parties", parties, "number of cubes, round_table only");
    app.add_option("--frames", frames, "frames to capture/render [invented default: 1]");
    app.add_option("--duration", duration,
                   "simulated session length, seconds [invented default: 10]");
    app.add_option("--seed", seed, "deterministic run seed [invented default: 1]");
    app.add_option("--quality", quality, "wire codec quality 1..100 [invented default: 90]");
    app.add_option("--viewpoint", vp,
                   "receiver-local tracked eye x y z [invented default: 0.1 1.25 -0.9]")
        ->expected(3);
    app.add_option("--depth-std", depth_std,
                   "capture depth noise sigma, meters [invented default: 0.02]");
    app.add_option("--texture-amp", texture_amp,
                   "figure texture contrast, 0 disables [invented default: 0.5]");

    CLI::App* c_validate = app.add_subcommand("validate", "check the configured assembly layout");
    CLI::App* c_capture =
        app.add_subcommand("capture", "dump RGBD captures and foreground masks (PPM/PFM/PGM)");
    CLI::App* c_render = app.add_subcommand(
        "render", "synthesize portraits at the configured viewpoint (PNG/PPM/PGM/PFM + metrics)");
    CLI::App* c_simulate =
        app.add_subcommand("simulate", "run the timing simulation; write trace and summary JSON");
    CLI::App* c_metrics =
        app.add_subcommand("metrics", "score dumped render artifacts into a metric report");
    CLI::App* c_bench = app.add_subcommand("bench", "wall-clock per-stage timings on this machine");
    c_simulate->add_flag("--dump-screens", dump_screens,
                         "also render portraits and write composited receiver screens as PNG");
    c_metrics->add_option("--dir", metrics_dir, "artifact directory (default: output dir)");
    for (CLI::App* sub : {c_validate, c_capture, c_render, c_simulate, c_metrics, c_bench})
        sub->fallthrough();

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(2, "cli", e.what());
    }

    ScenarioConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
        if (app.count("--topology")) cfg.topology = topology;
        if (app.count("--parties")) cfg.parties = parties;
        if (app.count("--frames")) cfg.frames = frames;
        if (app.count("--duration")) cfg.duration_s = duration;
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--quality")) cfg.codec_quality = quality;
        if (app.count("--viewpoint")) cfg.viewpoint = Vector3d(vp[0], vp[1], vp[2]);
        if (app.count("--depth-std")) cfg.noise.depth_std = depth_std;
        if (app.count("--texture-amp")) cfg.scene.texture_amp = texture_amp;
        if (app.count("--output")) {
            cfg.output_dir = out_dir;
        } else if (const char* env = std::getenv("VCUBE_OUT")) {
            cfg.output_dir = env;
        }
        // Canonical round trip revalidates the merged configuration.
        cfg = config_from_json(config_to_json(cfg));
    } catch (const BadConfig& e) {
        return fail(2, e.kind(), e.what());
    } catch (const IoError& e) {
        return fail(2, e.kind(), e.what());
    }

    try {
        if (c_validate->parsed()) return run_validate(cfg);
        if (c_capture->parsed()) return run_capture(cfg);
        if (c_render->parsed()) return run_render(cfg);
        if (c_simulate->parsed()) return run_simulate(cfg, dump_screens);
        if (c_metrics->parsed()) return run_metrics(cfg, metrics_dir);
        if (c_bench->parsed()) return run_bench(cfg);
        return fail(2, "cli", "no subcommand given");
    } catch (const BadConfig& e) {
        return fail(2, e.kind(), e.what());
    } catch (const InvalidLayout& e) {
        return fail(3, e.kind(), e.what());
    } catch (const Error& e) {
        return fail(4, e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(4, "runtime", e.what());
    }
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("vcube");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> ptrs;
    for (const std::string& s : full) ptrs.push_back(s.c_str());
    return cli_main(static_cast<int>(ptrs.size()), ptrs.data());
}

}  // namespace vcube
