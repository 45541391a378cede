#include "cntrack/color_names.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cntrack {

int base_label_index(const std::string& name) {
    for (int i = 0; i < kNumBaseLabels; ++i) {
        if (name == kBaseLabelNames[std::size_t(i)]) return i;
    }
    return -1;
}

ColorPalette load_palette_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::Kind::BadImage, path.string(), "cannot open palette file");
    ColorPalette p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string name, rs, gs, bs;
        if (!std::getline(ss, name, ',') || !std::getline(ss, rs, ',') ||
            !std::getline(ss, gs, ',') || !std::getline(ss, bs, ',')) {
            throw IoError(IoError::Kind::BadImage, path.string(),
                          "malformed palette line " + std::to_string(lineno));
        }
        int idx = base_label_index(name);
        int r, g, b;
        try {
            r = std::stoi(rs);
            g = std::stoi(gs);
            b = std::stoi(bs);
        } catch (const std::exception&) {
            throw IoError(IoError::Kind::BadImage, path.string(),
                          "malformed palette line " + std::to_string(lineno));
        }
        if (idx < 0 || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
            throw IoError(IoError::Kind::BadImage, path.string(),
                          "bad palette entry at line " + std::to_string(lineno));
        }
        p.base[std::size_t(idx)] = {std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
    }
    return p;
}

LabelHistogram LabelHistogram::from(const LabelMap& labels, int num_labels,
                                    const std::vector<std::uint8_t>* valid) {
    LabelHistogram h;
    h.counts.assign(std::size_t(num_labels), 0);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        if (valid && !(*valid)[i]) continue;
        const std::uint8_t l = labels.labels[i];
        if (l == kNoLabel || int(l) >= num_labels) continue;
        ++h.counts[l];
        ++h.total;
    }
    return h;
}

namespace {

int nearest_prototype(const std::uint8_t* px, const ColorPalette& palette,
                      const std::vector<int>& candidates) {
    int best = 0;
    long best_d = std::numeric_limits<long>::max();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Rgb& proto = palette.base[std::size_t(candidates[i])];
        const long dr = long(px[0]) - proto[0];
        const long dg = long(px[1]) - proto[1];
        const long db = long(px[2]) - proto[2];
        const long d = dr * dr + dg * dg + db * db;
        if (d < best_d) {
            best_d = d;
            best = int(i);
        }
    }
    return best;
}

LabelMap map_region(const Frame& frame, const BoundingBox& region,
                    const ColorPalette& palette, const std::vector<int>& candidates) {
    BoundingBox r = region.clip(frame.bounds());
    if (!r.valid()) throw ContractError("map_rgb_to_labels: region outside frame");
    LabelMap out(r.w, r.h);
    for (int y = 0; y < r.h; ++y) {
        for (int x = 0; x < r.w; ++x) {
            out.at(x, y) =
                std::uint8_t(nearest_prototype(frame.at(r.x + x, r.y + y), palette, candidates));
        }
    }
    return out;
}

std::vector<int> all_base_indices() {
    std::vector<int> v(kNumBaseLabels);
    for (int i = 0; i < kNumBaseLabels; ++i) v[std::size_t(i)] = i;
    return v;
}

Rgb01 normalize_rgb(const std::uint8_t* px) {
    return {px[0] / 255.0, px[1] / 255.0, px[2] / 255.0};
}

Eigen::Vector3d mean_of(std::span<const Rgb01> samples) {
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    for (const auto& s : samples) m += Eigen::Vector3d(s[0], s[1], s[2]);
    return m / double(samples.size());
}

}  // namespace

LabelMap map_rgb_to_labels(const Frame& frame, const BoundingBox& region,
                           const ColorPalette& palette) {
    if (palette.selected.empty()) {
        throw ContractError("map_rgb_to_labels: palette has no selected labels");
    }
    return map_region(frame, region, palette, palette.selected);
}

LabelMap map_rgb_to_base_labels(const Frame& frame, const BoundingBox& region,
                                const ColorPalette& palette) {
    static const std::vector<int> all = all_base_indices();
    return map_region(frame, region, palette, all);
}

std::vector<std::vector<Rgb01>> collect_label_samples(const Frame& frame,
                                                      const BoundingBox& region,
                                                      const ColorPalette& palette,
                                                      const ForegroundMask* mask) {
    BoundingBox r = region.clip(frame.bounds());
    if (!r.valid()) throw ContractError("collect_label_samples: region outside frame");
    const std::size_t n_labels = kNumBaseLabels;
    std::vector<std::vector<Rgb01>> samples(n_labels);
    static const std::vector<int> all = all_base_indices();
    for (int y = r.y; y <= r.bottom(); ++y) {
        for (int x = r.x; x <= r.right(); ++x) {
            if (mask && !mask->at(x, y)) continue;
            const std::uint8_t* px = frame.at(x, y);
            const int l = nearest_prototype(px, palette, all);
            samples[std::size_t(l)].push_back(normalize_rgb(px));
        }
    }
    return samples;
}

Rgb01 fisher_projection(std::span<const Rgb01> class1, std::span<const Rgb01> class2,
                        double reg) {
    if (class1.size() < 2 || class2.size() < 2) {
        throw ContractError("fisher_projection: each class needs >= 2 samples");
    }
    const Eigen::Vector3d m1 = mean_of(class1);
    const Eigen::Vector3d m2 = mean_of(class2);
    if ((m1 - m2).norm() < 1e-12) {
        throw ContractError("fisher_projection: degenerate classes (identical means)");
    }
    Eigen::Matrix3d sw = Eigen::Matrix3d::Zero();
    for (const auto& s : class1) {
        Eigen::Vector3d d = Eigen::Vector3d(s[0], s[1], s[2]) - m1;
        sw += d * d.transpose();
    }
    for (const auto& s : class2) {
        Eigen::Vector3d d = Eigen::Vector3d(s[0], s[1], s[2]) - m2;
        sw += d * d.transpose();
    }
    sw += reg * Eigen::Matrix3d::Identity();
    Eigen::Vector3d a = sw.ldlt().solve(m1 - m2);
    a.normalize();
    return {a.x(), a.y(), a.z()};
}

namespace {

double pair_separation(const std::vector<std::vector<Rgb01>>& samples, int i, int c,
                       const ColorPalette& palette) {
    const auto& si = samples[std::size_t(i)];
    const auto& sc = samples[std::size_t(c)];
    if (si.size() >= 2 && sc.size() >= 2) {
        const Eigen::Vector3d mi = mean_of(si);
        const Eigen::Vector3d mc = mean_of(sc);
        if ((mi - mc).norm() < 1e-12) return 0.0;
        const Rgb01 a = fisher_projection(si, sc);
        return std::fabs(a[0] * (mi.x() - mc.x()) + a[1] * (mi.y() - mc.y()) +
                         a[2] * (mi.z() - mc.z()));
    }
    // Too few samples for scatter: prototype distance in normalized RGB.
    const Rgb& pi = palette.base[std::size_t(i)];
    const Rgb& pc = palette.base[std::size_t(c)];
    double d = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double dk = (double(pi[std::size_t(k)]) - double(pc[std::size_t(k)])) / 255.0;
        d += dk * dk;
    }
    return std::sqrt(d);
}

}  // namespace

double label_separation(const std::vector<std::vector<Rgb01>>& samples_by_label,
                        int candidate, const std::vector<int>& chosen,
                        const ColorPalette& palette) {
    if (chosen.empty()) throw ContractError("label_separation: chosen set is empty");
    if (std::find(chosen.begin(), chosen.end(), candidate) != chosen.end()) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int c : chosen) {
        best = std::min(best, pair_separation(samples_by_label, candidate, c, palette));
    }
    return best;
}

ColorPalette select_labels(const Frame& frame, const BoundingBox& region, int k,
                           const ColorPalette& base, const ForegroundMask* mask) {
    if (k < 1 || k > kNumBaseLabels) {
        throw ContractError("select_labels: k must be in [1,11]");
    }
    const auto samples = collect_label_samples(frame, region, base, mask);
    std::size_t total = 0;
    for (const auto& s : samples) total += s.size();
    if (total == 0) throw ContractError("select_labels: region is empty");

    ColorPalette out = base;
    out.selected.clear();
    out.label_weights.clear();

    auto frequency = [&](int i) { return double(samples[std::size_t(i)].size()) / double(total); };

    // First pick: most frequent occurring label.
    int first = 0;
    for (int i = 1; i < kNumBaseLabels; ++i) {
        if (samples[std::size_t(i)].size() > samples[std::size_t(first)].size()) first = i;
    }
    out.selected.push_back(first);
    out.label_weights.push_back(frequency(first));

    while (int(out.selected.size()) < k) {
        int best = -1;
        double best_w = -1.0;
        for (int i = 0; i < kNumBaseLabels; ++i) {
            if (samples[std::size_t(i)].empty()) continue;
            if (std::find(out.selected.begin(), out.selected.end(), i) != out.selected.end()) {
                continue;
            }
            const double w = label_separation(samples, i, out.selected, base) * frequency(i);
            if (w > best_w) {
                best_w = w;
                best = i;
            }
        }
        if (best < 0) break;  // fewer occurring labels than k
        out.selected.push_back(best);
        out.label_weights.push_back(best_w);
    }

    // Pad with absent labels in index order when the region has too few colors.
    if (int(out.selected.size()) < k) {
        out.padded = true;
        for (int i = 0; i < kNumBaseLabels && int(out.selected.size()) < k; ++i) {
            if (std::find(out.selected.begin(), out.selected.end(), i) == out.selected.end()) {
                out.selected.push_back(i);
                out.label_weights.push_back(0.0);
            }
        }
    }
    return out;
}

std::vector<double> entropy_weights(const LabelHistogram& hist, double c) {
    if (hist.total <= 0) throw ContractError("entropy_weights: empty histogram");
    std::vector<double> w(hist.counts.size(), 0.0);
    for (std::size_t j = 0; j < hist.counts.size(); ++j) {
        if (hist.counts[j] > 0) {
            w[j] = -c * std::log(double(hist.counts[j]) / double(hist.total));
        }
    }
    return w;
}

}  // namespace cntrack
