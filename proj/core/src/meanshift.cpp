#include "cntrack/meanshift.hpp"

#include <cmath>

namespace cntrack {

double kernel_g(KernelProfile profile, double r2) {
    switch (profile) {
        case KernelProfile::Epanechnikov:
            return r2 <= 1.0 ? 1.0 : 0.0;
        case KernelProfile::Gaussian:
            return std::exp(-r2 / 2.0);
    }
    return 0.0;
}

Vec2 meanshift_vector(const Vec2& x, const WeightField& field, const KernelSpec& kernel) {
    if (kernel.bandwidth <= 0.0) throw ContractError("meanshift: bandwidth must be positive");
    const double inv_h2 = 1.0 / (kernel.bandwidth * kernel.bandwidth);
    double num_x = 0.0, num_y = 0.0, den = 0.0;
    const BoundingBox& w = field.window;
    for (int py = 0; py < w.h; ++py) {
        const double cy = w.y + py + 0.5;
        for (int px = 0; px < w.w; ++px) {
            const double weight = field.weights[std::size_t(py) * w.w + px];
            if (weight <= 0.0) continue;
            const double cx = w.x + px + 0.5;
            const double dx = cx - x.x, dy = cy - x.y;
            const double g = kernel_g(kernel.profile, (dx * dx + dy * dy) * inv_h2);
            if (g <= 0.0) continue;
            const double gw = g * weight;
            num_x += gw * dx;
            num_y += gw * dy;
            den += gw;
        }
    }
    if (den <= 0.0) throw EmptySupportError();
    return {num_x / den, num_y / den};
}

MeanShiftResult meanshift_iterate(const Vec2& start, const FieldProvider& provider,
                                  const KernelSpec& kernel, double eps, int max_iters) {
    MeanShiftResult res;
    res.center = start;
    for (int i = 0; i < max_iters; ++i) {
        const WeightField field = provider(res.center);
        const Vec2 m = meanshift_vector(res.center, field, kernel);
        res.center += m;
        ++res.iters;
        if (m.norm() < eps) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace cntrack
