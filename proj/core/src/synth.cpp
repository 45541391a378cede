#include "cntrack/synth.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "cntrack/errors.hpp"

namespace cntrack {

namespace {

using Json = nlohmann::json;

int color_from_json(const Json& j, const char* context) {
    if (!j.is_string()) {
        throw ContractError(std::string("scenario: ") + context + " colors must be names");
    }
    const int idx = base_label_index(j.get<std::string>());
    if (idx < 0) {
        throw ContractError("scenario: unknown color name '" + j.get<std::string>() + "'");
    }
    return idx;
}

BoundingBox box_from_json(const Json& j) {
    return {j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(),
            j.at("h").get<int>()};
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ContractError(std::string("scenario: invalid JSON: ") + e.what());
    }
    ScenarioSpec s;
    try {
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
        s.n_frames = j.at("n_frames").get<int>();
        if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("background")) {
            const Json& bg = j["background"];
            if (bg.contains("gray")) s.background_gray = bg["gray"].get<double>();
            if (bg.contains("noise_sigma")) s.noise_sigma = bg["noise_sigma"].get<double>();
        }
        for (const Json& tj : j.value("targets", Json::array())) {
            TargetSpec t;
            t.bbox = box_from_json(tj);
            t.velocity = {tj.value("vx", 0.0), tj.value("vy", 0.0)};
            t.scale_rate = tj.value("scale_rate", 0.0);
            for (const Json& c : tj.at("colors")) {
                t.colors.push_back(color_from_json(c, "target"));
            }
            s.targets.push_back(std::move(t));
        }
        for (const Json& oj : j.value("occluders", Json::array())) {
            OccluderSpec o;
            o.bbox = box_from_json(oj);
            o.velocity = {oj.value("vx", 0.0), oj.value("vy", 0.0)};
            const int c = color_from_json(oj.at("color"), "occluder");
            o.color = kBasePrototypes[std::size_t(c)];
            o.from = oj.value("from", 0);
            o.to = oj.value("to", s.n_frames - 1);
            s.occluders.push_back(o);
        }
    } catch (const Json::exception& e) {
        throw ContractError(std::string("scenario: ") + e.what());
    }
    s.validate();
    return s;
}

ScenarioSpec ScenarioSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(IoError::Kind::MissingDirectory, path.string(),
                      "cannot open scenario file");
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

std::string ScenarioSpec::to_json() const {
    Json j;
    j["width"] = width;
    j["height"] = height;
    j["n_frames"] = n_frames;
    j["seed"] = seed;
    j["background"] = {{"gray", background_gray}, {"noise_sigma", noise_sigma}};
    j["targets"] = Json::array();
    for (const auto& t : targets) {
        Json tj{{"x", t.bbox.x}, {"y", t.bbox.y}, {"w", t.bbox.w}, {"h", t.bbox.h},
                {"vx", t.velocity.x}, {"vy", t.velocity.y}, {"scale_rate", t.scale_rate}};
        tj["colors"] = Json::array();
        for (int c : t.colors) tj["colors"].push_back(kBaseLabelNames[std::size_t(c)]);
        j["targets"].push_back(tj);
    }
    j["occluders"] = Json::array();
    for (const auto& o : occluders) {
        int color = 0;
        for (int i = 0; i < kNumBaseLabels; ++i) {
            if (kBasePrototypes[std::size_t(i)] == o.color) color = i;
        }
        j["occluders"].push_back(Json{{"x", o.bbox.x}, {"y", o.bbox.y}, {"w", o.bbox.w},
                                      {"h", o.bbox.h}, {"vx", o.velocity.x},
                                      {"vy", o.velocity.y},
                                      {"color", kBaseLabelNames[std::size_t(color)]},
                                      {"from", o.from}, {"to", o.to}});
    }
    return j.dump(2);
}

void ScenarioSpec::validate() const {
    if (width < 8 || height < 8) throw ContractError("scenario: frame too small");
    if (n_frames < 1) throw ContractError("scenario: n_frames must be >= 1");
    if (background_gray < 0 || background_gray > 255 || noise_sigma < 0) {
        throw ContractError("scenario: bad background parameters");
    }
    for (const auto& t : targets) {
        if (t.bbox.w < 1 || t.bbox.h < 1) throw ContractError("scenario: zero-size target");
        if (t.colors.empty()) throw ContractError("scenario: target needs >= 1 color");
        if (t.colors.size() > 4) throw ContractError("scenario: at most 4 target colors");
        if (t.scale_rate <= -1.0) throw ContractError("scenario: scale_rate must be > -1");
    }
    for (const auto& o : occluders) {
        if (o.bbox.w < 1 || o.bbox.h < 1) throw ContractError("scenario: zero-size occluder");
    }
}

BoundingBox ScenarioSpec::target_box(int target, int frame) const {
    const TargetSpec& t = targets[std::size_t(target)];
    const double scale = std::pow(1.0 + t.scale_rate, double(frame));
    const int w = std::max(1, int(std::lround(t.bbox.w * scale)));
    const int h = std::max(1, int(std::lround(t.bbox.h * scale)));
    const Vec2 c = t.bbox.center() + t.velocity * double(frame);
    return BoundingBox::from_center(c, w, h);
}

SynthResult generate(const ScenarioSpec& spec) {
    spec.validate();
    SynthResult out;
    out.frames.reserve(std::size_t(spec.n_frames));

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::uint8_t flat = std::uint8_t(std::clamp(std::lround(spec.background_gray), 0l, 255l));

    for (int t = 0; t < spec.n_frames; ++t) {
        Frame f(spec.width, spec.height, t);
        if (spec.noise_sigma > 0.0) {
            for (int y = 0; y < spec.height; ++y) {
                for (int x = 0; x < spec.width; ++x) {
                    const double v =
                        spec.background_gray + spec.noise_sigma * noise(rng);
                    const std::uint8_t g =
                        std::uint8_t(std::clamp(std::lround(v), 0l, 255l));
                    std::uint8_t* px = f.at(x, y);
                    px[0] = px[1] = px[2] = g;
                }
            }
        } else {
            for (auto& b : f.rgb) b = flat;
        }

        for (std::size_t ti = 0; ti < spec.targets.size(); ++ti) {
            const TargetSpec& ts = spec.targets[ti];
            const BoundingBox box = spec.target_box(int(ti), t);
            const BoundingBox vis = box.clip(f.bounds());
            if (vis.valid()) {
                const int n = int(ts.colors.size());
                for (int y = vis.y; y <= vis.bottom(); ++y) {
                    for (int x = vis.x; x <= vis.right(); ++x) {
                        const int qx = (x - box.x) * 2 / box.w;
                        const int qy = (y - box.y) * 2 / box.h;
                        const int q = std::clamp(qy, 0, 1) * 2 + std::clamp(qx, 0, 1);
                        const int ci = n == 4 ? q : (q % 2 + q / 2) % n;
                        const Rgb& c = kBasePrototypes[std::size_t(ts.colors[std::size_t(ci)])];
                        std::uint8_t* px = f.at(x, y);
                        px[0] = c[0];
                        px[1] = c[1];
                        px[2] = c[2];
                    }
                }
            }
            out.truth[t].emplace_back(int(ti) + 1, box);
        }

        for (const auto& o : spec.occluders) {
            if (t < o.from || t > o.to) continue;
            const Vec2 shift = o.velocity * double(t - o.from);
            BoundingBox pos{o.bbox.x + int(std::lround(shift.x)),
                            o.bbox.y + int(std::lround(shift.y)), o.bbox.w, o.bbox.h};
            pos = pos.clip(f.bounds());
            if (!pos.valid()) continue;
            for (int y = pos.y; y <= pos.bottom(); ++y) {
                for (int x = pos.x; x <= pos.right(); ++x) {
                    std::uint8_t* px = f.at(x, y);
                    px[0] = o.color[0];
                    px[1] = o.color[1];
                    px[2] = o.color[2];
                }
            }
        }
        out.frames.push_back(std::move(f));
    }
    return out;
}

}  // namespace cntrack
