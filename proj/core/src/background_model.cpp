#include "cntrack/background_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cntrack {

std::size_t ForegroundMask::count() const {
    return std::size_t(std::count(flags.begin(), flags.end(), std::uint8_t(1)));
}

GaussianBackground GaussianBackground::init(std::span<const GrayFrame> frames) {
    if (frames.size() < 2) {
        throw ContractError("background init requires at least 2 frames, got " +
                            std::to_string(frames.size()));
    }
    const int w = frames[0].width, h = frames[0].height;
    for (const auto& f : frames) {
        if (f.width != w || f.height != h) {
            throw ContractError("background init: frame dimensions differ");
        }
    }
    GaussianBackground m;
    m.width = w;
    m.height = h;
    m.frames_seen = int(frames.size());
    const std::size_t n = std::size_t(w) * h;
    m.mu.assign(n, 0.0f);
    m.sigma2.assign(n, 0.0f);

    // Accumulate in double, store in float.
    std::vector<double> acc(n, 0.0);
    for (const auto& f : frames) {
        for (std::size_t i = 0; i < n; ++i) acc[i] += f.values[i];
    }
    const double inv = 1.0 / double(frames.size());
    for (std::size_t i = 0; i < n; ++i) m.mu[i] = float(acc[i] * inv);

    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& f : frames) {
        for (std::size_t i = 0; i < n; ++i) {
            double d = f.values[i] - m.mu[i];
            acc[i] += d * d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) m.sigma2[i] = float(acc[i] * inv);
    return m;
}

ForegroundMask GaussianBackground::classify(const GrayFrame& g, float k_sigma,
                                            float sigma_floor) const {
    if (g.width != width || g.height != height) {
        throw ContractError("classify: frame dimensions do not match model");
    }
    if (k_sigma <= 0.0f) throw ContractError("classify: k_sigma must be positive");
    ForegroundMask mask(width, height);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
        float sd = std::max(std::sqrt(sigma2[i]), sigma_floor);
        mask.flags[i] = std::fabs(g.values[i] - mu[i]) > k_sigma * sd ? 1 : 0;
    }
    return mask;
}

void GaussianBackground::update(const GrayFrame& g,
                                const std::vector<std::uint8_t>& moving_region,
                                LearningRates rates) {
    if (g.width != width || g.height != height) {
        throw ContractError("update: frame dimensions do not match model");
    }
    const std::size_t n = g.size();
    if (!moving_region.empty() && moving_region.size() != n) {
        throw ContractError("update: moving_region size mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const float a = (!moving_region.empty() && moving_region[i]) ? rates.alpha_fg
                                                                     : rates.alpha_bg;
        const float l = g.values[i];
        const float m = (1.0f - a) * mu[i] + a * l;
        const float d = l - m;  // deviation from the updated mean
        mu[i] = m;
        sigma2[i] = (1.0f - a) * sigma2[i] + a * d * d;
    }
    ++frames_seen;
}

ForegroundMask refine_by_gray_histogram(const ForegroundMask& mask, const GrayFrame& g,
                                        int bins) {
    if (mask.width != g.width || mask.height != g.height) {
        throw ContractError("refine: mask and frame dimensions differ");
    }
    if (bins < 2) throw ContractError("refine: need at least 2 bins");

    const std::size_t n = g.size();
    std::vector<std::size_t> fg_hist(std::size_t(bins), 0), bg_hist(std::size_t(bins), 0);
    std::size_t n_fg = 0, n_bg = 0;
    auto bin_of = [&](float v) {
        int b = int(v * float(bins));
        return std::clamp(b, 0, bins - 1);
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (mask.flags[i]) {
            ++fg_hist[std::size_t(bin_of(g.values[i]))];
            ++n_fg;
        } else {
            ++bg_hist[std::size_t(bin_of(g.values[i]))];
            ++n_bg;
        }
    }
    if (n_fg == 0) return mask;  // nothing to support either rule

    auto fg_density = [&](int b) { return double(fg_hist[std::size_t(b)]) / double(n_fg); };
    auto bg_density = [&](int b) {
        return n_bg == 0 ? 0.0 : double(bg_hist[std::size_t(b)]) / double(n_bg);
    };
    auto adjacent_to_flagged = [&](int x, int y) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                int nx = x + dx, ny = y + dy;
                if (nx >= 0 && nx < mask.width && ny >= 0 && ny < mask.height &&
                    mask.at(nx, ny)) {
                    return true;
                }
            }
        }
        return false;
    };

    ForegroundMask out = mask;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const int b = bin_of(g.at(x, y));
            const double fd = fg_density(b), bd = bg_density(b);
            if (mask.at(x, y)) {
                // Suppress flagged pixels in background-dominated bins.
                if (fd < 0.5 * bd) out.set(x, y, false);
            } else {
                // Fill holes: foreground-dominated bin, touching the mask.
                const bool fg_dominated = fd >= 2.0 * bd && fd > 0.0;
                if (fg_dominated && adjacent_to_flagged(x, y)) out.set(x, y, true);
            }
        }
    }
    return out;
}

}  // namespace cntrack
