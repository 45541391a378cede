#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cntrack/errors.hpp"
#include "cntrack/image.hpp"

namespace cntrack {

struct ForegroundMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> flags;  // 1 = moving/foreground

    ForegroundMask() = default;
    ForegroundMask(int w, int h) : width(w), height(h), flags(std::size_t(w) * h, 0) {}

    bool at(int x, int y) const { return flags[std::size_t(y) * width + x] != 0; }
    void set(int x, int y, bool v) { flags[std::size_t(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;
};

struct LearningRates {
    float alpha_bg = 0.05f;   // pixels outside moving blocks
    float alpha_fg = 0.005f;  // pixels inside moving blocks; alpha_fg <= alpha_bg
};

// Per-pixel running Gaussian of normalized gray. The variance update uses the
// already-updated mean, so alpha = 1 collapses the variance to zero.
class GaussianBackground {
public:
    int width = 0;
    int height = 0;
    int frames_seen = 0;
    std::vector<float> mu;
    std::vector<float> sigma2;

    // Batch initialization over the first N >= 2 frames: sample mean and
    // population variance per pixel.
    static GaussianBackground init(std::span<const GrayFrame> frames);

    // |g - mu| > k_sigma * max(sqrt(sigma2), sigma_floor) per pixel. The floor
    // keeps static pixels (sigma2 == 0) from flagging on any deviation.
    ForegroundMask classify(const GrayFrame& g, float k_sigma = 2.0f,
                            float sigma_floor = 0.01f) const;

    // Exponential update, learning rate chosen per pixel by moving_region.
    // moving_region may be empty (treated as all-background).
    void update(const GrayFrame& g, const std::vector<std::uint8_t>& moving_region,
                LearningRates rates);
};

// Histogram-guided cleanup of a foreground mask: fills interior holes whose
// gray bin is foreground-dominated and drops flagged pixels whose bin is
// background-dominated. Growth is limited to 8-neighbors of the input mask.
ForegroundMask refine_by_gray_histogram(const ForegroundMask& mask, const GrayFrame& g,
                                        int bins = 32);

}  // namespace cntrack
