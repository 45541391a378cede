#pragma once

#include <cstdint>
#include <vector>

#include "cntrack/geometry.hpp"

namespace cntrack {

// 8-bit RGB image, row-major, 3 bytes per pixel.
struct Frame {
    int width = 0;
    int height = 0;
    int index = 0;
    std::vector<std::uint8_t> rgb;

    Frame() = default;
    Frame(int w, int h, int idx = 0)
        : width(w), height(h), index(idx), rgb(std::size_t(w) * h * 3, 0) {}

    const std::uint8_t* at(int x, int y) const {
        return rgb.data() + (std::size_t(y) * width + x) * 3;
    }
    std::uint8_t* at(int x, int y) {
        return rgb.data() + (std::size_t(y) * width + x) * 3;
    }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    BoundingBox bounds() const { return {0, 0, width, height}; }
};

// Normalized grayscale image, values in [0,1].
struct GrayFrame {
    int width = 0;
    int height = 0;
    int index = 0;
    std::vector<float> values;

    GrayFrame() = default;
    GrayFrame(int w, int h, int idx = 0)
        : width(w), height(h), index(idx), values(std::size_t(w) * h, 0.0f) {}

    float at(int x, int y) const { return values[std::size_t(y) * width + x]; }
    float& at(int x, int y) { return values[std::size_t(y) * width + x]; }
    std::size_t size() const { return values.size(); }
};

// BT.601 luma, scaled to [0,1].
GrayFrame to_gray_normalized(const Frame& f);

}  // namespace cntrack
