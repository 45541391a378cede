#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cntrack/background_model.hpp"
#include "cntrack/errors.hpp"
#include "cntrack/geometry.hpp"
#include "cntrack/image.hpp"

namespace cntrack {

inline constexpr int kNumBaseLabels = 11;
inline constexpr std::uint8_t kNoLabel = 255;

inline constexpr std::array<const char*, kNumBaseLabels> kBaseLabelNames = {
    "black", "blue", "brown", "gray", "green", "orange",
    "pink",  "purple", "red", "white", "yellow"};

using Rgb = std::array<std::uint8_t, 3>;
using Rgb01 = std::array<double, 3>;  // RGB normalized to [0,1]

inline constexpr std::array<Rgb, kNumBaseLabels> kBasePrototypes = {{
    {0, 0, 0},        // black
    {0, 0, 255},      // blue
    {139, 69, 19},    // brown
    {128, 128, 128},  // gray
    {0, 128, 0},      // green
    {255, 165, 0},    // orange
    {255, 192, 203},  // pink
    {128, 0, 128},    // purple
    {255, 0, 0},      // red
    {255, 255, 255},  // white
    {255, 255, 0},    // yellow
}};

int base_label_index(const std::string& name);  // -1 if unknown

// The 11 base prototypes plus an ordered discriminative subset chosen for one
// target. label_weights holds the selection weight of each chosen label.
struct ColorPalette {
    std::array<Rgb, kNumBaseLabels> base = kBasePrototypes;
    std::vector<int> selected;          // indices into base, pick order
    std::vector<double> label_weights;  // per selected label, >= 0
    bool padded = false;                // selection padded with absent labels

    int selected_index_of_base(int base_label) const {
        for (std::size_t i = 0; i < selected.size(); ++i) {
            if (selected[i] == base_label) return int(i);
        }
        return -1;
    }
};

// Replaces prototypes named in a `name,R,G,B` file; other entries keep their
// defaults. Unknown names or malformed lines throw IoError.
ColorPalette load_palette_file(const std::filesystem::path& path);

struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;

    LabelMap() = default;
    LabelMap(int w, int h) : width(w), height(h), labels(std::size_t(w) * h, kNoLabel) {}
    std::uint8_t at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return labels[std::size_t(y) * width + x]; }
};

struct LabelHistogram {
    std::vector<int> counts;
    int total = 0;

    static LabelHistogram from(const LabelMap& labels, int num_labels,
                               const std::vector<std::uint8_t>* valid = nullptr);
};

// Nearest-prototype assignment over the palette's selected subset; labels are
// indices into palette.selected. Ties break toward the lower index.
LabelMap map_rgb_to_labels(const Frame& frame, const BoundingBox& region,
                           const ColorPalette& palette);

// Same, over all 11 base prototypes; labels are base indices.
LabelMap map_rgb_to_base_labels(const Frame& frame, const BoundingBox& region,
                                const ColorPalette& palette);

// Normalized RGB samples of the region grouped by base label; when mask is
// given only flagged pixels contribute.
std::vector<std::vector<Rgb01>> collect_label_samples(const Frame& frame,
                                                      const BoundingBox& region,
                                                      const ColorPalette& palette,
                                                      const ForegroundMask* mask = nullptr);

// Direction maximizing class separation: (S_w + reg*I)^-1 (m1 - m2), unit
// length. Throws ContractError for identical class means or undersized classes.
Rgb01 fisher_projection(std::span<const Rgb01> class1, std::span<const Rgb01> class2,
                        double reg = 1e-6);

// Minimum Fisher-projected mean distance between the candidate label's samples
// and each chosen label's samples; falls back to normalized prototype distance
// when either population has fewer than 2 samples. Zero if candidate is chosen.
double label_separation(const std::vector<std::vector<Rgb01>>& samples_by_label,
                        int candidate, const std::vector<int>& chosen,
                        const ColorPalette& palette);

// Greedy sub-palette selection: frequency seeds the first pick, then
// separation-times-frequency picks the rest.
ColorPalette select_labels(const Frame& frame, const BoundingBox& region, int k,
                           const ColorPalette& base = ColorPalette{},
                           const ForegroundMask* mask = nullptr);

// Self-information weight per label: -C*log(n_j/n), 0 for absent labels.
std::vector<double> entropy_weights(const LabelHistogram& hist, double c = 1.0);

}  // namespace cntrack
