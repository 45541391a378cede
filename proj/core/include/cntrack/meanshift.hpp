#pragma once

#include <functional>
#include <vector>

#include "cntrack/errors.hpp"
#include "cntrack/geometry.hpp"

namespace cntrack {

enum class KernelProfile { Epanechnikov, Gaussian };

struct KernelSpec {
    KernelProfile profile = KernelProfile::Epanechnikov;
    double bandwidth = 1.0;  // pixels, > 0
};

// g(r2) with r2 the squared bandwidth-normalized distance. Epanechnikov is
// constant 1 on support (r2 <= 1), gaussian is exp(-r2/2).
double kernel_g(KernelProfile profile, double r2);

// Nonnegative per-pixel weights over a window; pixel centers are at
// (x + 0.5, y + 0.5) in frame coordinates.
struct WeightField {
    BoundingBox window;
    std::vector<double> weights;

    WeightField() = default;
    explicit WeightField(const BoundingBox& w)
        : window(w), weights(std::size_t(w.w) * w.h, 0.0) {}
    double at(int x, int y) const {  // frame coordinates
        return weights[std::size_t(y - window.y) * window.w + (x - window.x)];
    }
    double& at(int x, int y) {
        return weights[std::size_t(y - window.y) * window.w + (x - window.x)];
    }
};

// One MeanShift step: kernel- and weight-averaged displacement toward the
// local mode. Throws EmptySupportError when no window pixel has positive
// kernel times weight.
Vec2 meanshift_vector(const Vec2& x, const WeightField& field, const KernelSpec& kernel);

struct MeanShiftResult {
    Vec2 center;
    int iters = 0;
    bool converged = false;
};

using FieldProvider = std::function<WeightField(const Vec2&)>;

// Iterates x += m(x) from start until the step norm drops below eps or the
// iteration budget runs out. The provider supplies the weight field around
// each new position.
MeanShiftResult meanshift_iterate(const Vec2& start, const FieldProvider& provider,
                                  const KernelSpec& kernel, double eps = 0.5,
                                  int max_iters = 20);

}  // namespace cntrack
