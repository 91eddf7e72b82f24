#include "vcube/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vcube/error.hpp"

namespace vcube {

namespace {

using nlohmann::json;

// Reads one section object, hands out typed fields, and rejects unknown keys
// so config typos fail loudly instead of silently keeping a default.
class Section {
public:
    Section(const json& parent, const std::string& name) : name_(name) {
        if (!parent.contains(name)) return;
        if (!parent.at(name).is_object())
            throw BadConfig("config section '" + name + "' must be an object");
        obj_ = &parent.at(name);
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!obj_ || !obj_->contains(key)) return;
        try {
            out = obj_->at(key).get<T>();
        } catch (const json::exception&) {
            throw BadConfig("config field '" + name_ + "." + key + "' has the wrong type");
        }
    }

    void read_vec3(const char* key, Vector3d& out) {
        seen_.insert(key);
        if (!obj_ || !obj_->contains(key)) return;
        const json& v = obj_->at(key);
        if (!v.is_array() || v.size() != 3 || !v[0].is_number())
            throw BadConfig("config field '" + name_ + "." + key + "' must be [x, y, z]");
        out = Vector3d(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }

    void finish() const {
        if (!obj_) return;
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (!seen_.count(it.key()))
                throw BadConfig("unknown config key '" + name_ + "." + it.key() + "'");
    }

private:
    std::string name_;
    const json* obj_ = nullptr;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string& what) {
    if (!ok) throw BadConfig("config: " + what);
}

void validate(const ScenarioConfig& c) {
    check(c.topology == "face_to_face" || c.topology == "side_by_side" ||
              c.topology == "round_table",
          "unknown topology '" + c.topology + "'");
    check(c.parties >= 2, "parties must be at least 2");
    check(c.topology == "round_table" || c.parties == 2,
          "topology '" + c.topology + "' seats exactly two parties");
    check(c.seat_radius > 0, "seat_radius must be positive");
    check(c.input_views >= 2 && c.input_views <= 6, "input_views must be in [2, 6]");
    check(c.depth.hypotheses >= 2, "depth.hypotheses must be at least 2");
    check(c.depth.delta_d > 0, "depth.delta_d must be positive");
    check(c.depth.tau > 0, "depth.tau must be positive");
    check(c.render.hole_px >= 0, "render.hole_px must be nonnegative");
    check(c.temporal_w > 0 && c.temporal_w <= 1, "temporal.w must be in (0, 1]");
    check(c.temporal_border >= 0, "temporal.border must be nonnegative");
    check(c.codec_quality >= 1 && c.codec_quality <= 100, "codec.quality must be in [1, 100]");
    check(c.noise.depth_std >= 0 && c.noise.color_std >= 0, "noise stds must be nonnegative");
    check(c.noise.dropout >= 0 && c.noise.dropout <= 1, "noise.dropout must be in [0, 1]");
    check(c.stages.acquisition_ms >= 0 && c.stages.render_ms >= 0 &&
              c.stages.compress_ms >= 0 && c.stages.network_ms >= 0 &&
              c.stages.display_ms >= 0,
          "stage latencies must be nonnegative");
    check(c.stages.render_units >= 1, "stages.render_units must be at least 1");
    check(c.duration_s > 0, "duration_s must be positive");
    check(c.fps > 0, "fps must be positive");
    check(c.frames >= 1, "frames must be at least 1");
    check(c.scene.texture_cell > 0, "scene.texture_cell must be positive");
    check(c.scene.tessellation > 0, "scene.tessellation must be positive");
}

}  // namespace

ScenarioConfig config_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw BadConfig(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw BadConfig("config root must be a JSON object");

    ScenarioConfig c;
    static const std::set<std::string> kSections = {"assembly", "scene",   "noise",
                                                    "pipeline", "session", "run"};
    for (auto it = root.begin(); it != root.end(); ++it)
        if (!kSections.count(it.key()))
            throw BadConfig("unknown config section '" + it.key() + "'");

    {
        Section s(root, "assembly");
        s.read("topology", c.topology);
        s.read("parties", c.parties);
        s.read("seat_radius", c.seat_radius);
        s.read("gap", c.gap);
        s.read("overlap", c.overlap);
        s.read("floor_w", c.cube.floor_w);
        s.read("floor_d", c.cube.floor_d);
        s.read("screen_diag_in", c.cube.screen_diag_in);
        s.read("screen_bottom", c.cube.screen_bottom);
        s.read("eye_height", c.cube.eye_height);
        s.finish();
    }
    {
        Section s(root, "scene");
        s.read("texture_amp", c.scene.texture_amp);
        s.read("texture_cell", c.scene.texture_cell);
        s.read("ramp", c.scene.ramp);
        s.read("tessellation", c.scene.tessellation);
        s.read("anim_amplitude", c.scene.anim_amplitude);
        s.finish();
    }
    {
        Section s(root, "noise");
        s.read("depth_std", c.noise.depth_std);
        s.read("dropout", c.noise.dropout);
        s.read("color_std", c.noise.color_std);
        s.read("extrinsic_rot_mrad", c.noise.extrinsic_rot_mrad);
        s.read("extrinsic_trans_mm", c.noise.extrinsic_trans_mm);
        s.finish();
    }
    {
        Section s(root, "pipeline");
        s.read("input_views", c.input_views);
        s.read("delta_d", c.depth.delta_d);
        s.read("hypotheses", c.depth.hypotheses);
        s.read("tau", c.depth.tau);
        s.read("discontinuity", c.depth.discontinuity);
        s.read("lambda_d", c.render.lambda_d);
        s.read("lambda_a", c.render.lambda_a);
        s.read("occlusion", c.render.occlusion);
        s.read("hole_px", c.render.hole_px);
        s.read("temporal_w", c.temporal_w);
        s.read("temporal_border", c.temporal_border);
        s.read("codec_quality", c.codec_quality);
        s.finish();
    }
    {
        Section s(root, "session");
        s.read("acquisition_ms", c.stages.acquisition_ms);
        s.read("render_ms", c.stages.render_ms);
        s.read("compress_ms", c.stages.compress_ms);
        s.read("network_ms", c.stages.network_ms);
        s.read("display_ms", c.stages.display_ms);
        s.read("render_units", c.stages.render_units);
        s.read("duration_s", c.duration_s);
        s.read("fps", c.fps);
        s.read("bytes_per_frame", c.bytes_per_frame);
        s.finish();
    }
    {
        Section s(root, "run");
        s.read("frames", c.frames);
        s.read_vec3("viewpoint", c.viewpoint);
        s.read("seed", c.seed);
        s.read("output_dir", c.output_dir);
        s.finish();
    }
    c.noise.seed = c.seed;
    validate(c);
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream body;
    body << f.rdbuf();
    return config_from_json(body.str());
}

std::string config_to_json(const ScenarioConfig& c) {
    json root;
    json& a = root["assembly"];
    a["topology"] = c.topology;
    a["parties"] = c.parties;
    a["seat_radius"] = c.seat_radius;
    a["gap"] = c.gap;
    a["overlap"] = c.overlap;
    a["floor_w"] = c.cube.floor_w;
    a["floor_d"] = c.cube.floor_d;
    a["screen_diag_in"] = c.cube.screen_diag_in;
    a["screen_bottom"] = c.cube.screen_bottom;
    a["eye_height"] = c.cube.eye_height;
    json& sc = root["scene"];
    sc["texture_amp"] = c.scene.texture_amp;
    sc["texture_cell"] = c.scene.texture_cell;
    sc["ramp"] = c.scene.ramp;
    sc["tessellation"] = c.scene.tessellation;
    sc["anim_amplitude"] = c.scene.anim_amplitude;
    json& n = root["noise"];
    n["depth_std"] = c.noise.depth_std;
    n["dropout"] = c.noise.dropout;
    n["color_std"] = c.noise.color_std;
    n["extrinsic_rot_mrad"] = c.noise.extrinsic_rot_mrad;
    n["extrinsic_trans_mm"] = c.noise.extrinsic_trans_mm;
    json& p = root["pipeline"];
    p["input_views"] = c.input_views;
    p["delta_d"] = c.depth.delta_d;
    p["hypotheses"] = c.depth.hypotheses;
    p["tau"] = c.depth.tau;
    p["discontinuity"] = c.depth.discontinuity;
    p["lambda_d"] = c.render.lambda_d;
    p["lambda_a"] = c.render.lambda_a;
    p["occlusion"] = c.render.occlusion;
    p["hole_px"] = c.render.hole_px;
    p["temporal_w"] = c.temporal_w;
    p["temporal_border"] = c.temporal_border;
    p["codec_quality"] = c.codec_quality;
    json& st = root["session"];
    st["acquisition_ms"] = c.stages.acquisition_ms;
    st["render_ms"] = c.stages.render_ms;
    st["compress_ms"] = c.stages.compress_ms;
    st["network_ms"] = c.stages.network_ms;
    st["display_ms"] = c.stages.display_ms;
    st["render_units"] = c.stages.render_units;
    st["duration_s"] = c.duration_s;
    st["fps"] = c.fps;
    st["bytes_per_frame"] = c.bytes_per_frame;
    json& r = root["run"];
    r["frames"] = c.frames;
    r["viewpoint"] = {c.viewpoint.x(), c.viewpoint.y(), c.viewpoint.z()};
    r["seed"] = c.seed;
    r["output_dir"] = c.output_dir;
    return root.dump(2);
}

uint64_t config_hash(const ScenarioConfig& c) {
    // The hash identifies the run's parameters; where the artifacts are
    // written is not part of that identity, so two runs that differ only in
    // output_dir hash the same.
    ScenarioConfig keyed = c;
    keyed.output_dir.clear();
    // FNV-1a, 64-bit: stable across platforms, good enough for a manifest tag.
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : config_to_json(keyed)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

AssemblyLayout make_layout(const ScenarioConfig& c) {
    CubeSpec spec = CubeSpec::standard(c.cube);
    if (c.topology == "face_to_face") return AssemblyLayout::face_to_face(spec, c.gap);
    if (c.topology == "side_by_side") return AssemblyLayout::side_by_side(spec, c.overlap);
    if (c.topology == "round_table")
        return AssemblyLayout::round_table(spec, c.parties, c.seat_radius);
    throw BadConfig("config: unknown topology '" + c.topology + "'");
}

ScheduleOptions make_schedule_options(const ScenarioConfig& c) {
    ScheduleOptions o;
    o.duration_s = c.duration_s;
    o.fps = c.fps;
    o.bytes_per_frame = c.bytes_per_frame;
    return o;
}

}  // namespace vcube
