#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cntrack/color_names.hpp"
#include "cntrack/geometry.hpp"
#include "cntrack/image.hpp"
#include "cntrack/sequence_io.hpp"

namespace cntrack {

// Rectangle target filled with up to four color-name quadrants, translating
// at a fixed velocity and optionally growing by scale_rate per frame.
struct TargetSpec {
    BoundingBox bbox;
    Vec2 velocity;
    double scale_rate = 0.0;
    std::vector<int> colors;  // base label indices
};

// Opaque rectangle drawn over the scene for frames [from, to].
struct OccluderSpec {
    BoundingBox bbox;  // position at frame `from`
    Vec2 velocity;
    Rgb color{0, 0, 255};
    int from = 0;
    int to = -1;
};

struct ScenarioSpec {
    int width = 320;
    int height = 240;
    int n_frames = 10;
    double background_gray = 128.0;  // 0..255
    double noise_sigma = 0.0;        // gray levels; 0 = flat background
    std::uint64_t seed = 1;
    std::vector<TargetSpec> targets;
    std::vector<OccluderSpec> occluders;

    static ScenarioSpec from_json(const std::string& text);
    static ScenarioSpec from_json_file(const std::filesystem::path& path);
    std::string to_json() const;
    void validate() const;

    // Exact geometric box of one target at one frame.
    BoundingBox target_box(int target, int frame) const;
};

struct SynthResult {
    std::vector<Frame> frames;
    BoxAnnotations truth;  // track id = target index + 1
};

// Deterministic for a fixed spec (including seed).
SynthResult generate(const ScenarioSpec& spec);

}  // namespace cntrack
