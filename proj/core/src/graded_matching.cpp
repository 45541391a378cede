#include "cntrack/graded_matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace cntrack {

double TargetTemplate::total_weight() const {
    return std::accumulate(pixel_weights.begin(), pixel_weights.end(), 0.0);
}

double confidence_in_rect(const TargetTemplate& tmpl, const BoundingBox& rect,
                          const LabelMap& frame_labels, Vec2i frame_origin, Vec2i delta) {
    double matched = 0.0, total = 0.0;
    for (int j = rect.y; j <= rect.bottom(); ++j) {
        for (int i = rect.x; i <= rect.right(); ++i) {
            const double w = tmpl.weight_at(i, j);
            if (w <= 0.0) continue;
            total += w;
            const std::uint8_t t = tmpl.labels.at(i, j);
            if (t == kNoLabel) continue;
            const int fx = tmpl.bbox.x + i + delta.x - frame_origin.x;
            const int fy = tmpl.bbox.y + j + delta.y - frame_origin.y;
            if (fx < 0 || fx >= frame_labels.width || fy < 0 || fy >= frame_labels.height) {
                continue;  // off-window counts as a mismatch
            }
            if (frame_labels.at(fx, fy) == t) matched += w;
        }
    }
    if (total <= 0.0) return 0.0;
    return matched / total;
}

double confidence(const TargetTemplate& tmpl, const LabelMap& frame_labels,
                  Vec2i frame_origin, Vec2i delta) {
    if (tmpl.total_weight() <= 0.0) {
        throw ContractError("confidence: template has zero total weight");
    }
    return confidence_in_rect(tmpl, {0, 0, tmpl.bbox.w, tmpl.bbox.h}, frame_labels,
                              frame_origin, delta);
}

Vec2i SearchConstraint::clamp_to_int_box(Vec2i o) const {
    const int xlo = int(std::ceil(dx_lo)), xhi = int(std::floor(dx_hi));
    const int ylo = int(std::ceil(dy_lo)), yhi = int(std::floor(dy_hi));
    return {std::clamp(o.x, xlo, xhi), std::clamp(o.y, ylo, yhi)};
}

SearchConstraint displacement_bounds(const Vec2& delta_hat, double lambda_min,
                                     double lambda_max, double min_radius) {
    if (lambda_min >= lambda_max) {
        throw ContractError("displacement_bounds: lambda_min must be < lambda_max");
    }
    if (min_radius < 1.0) {
        throw ContractError("displacement_bounds: min_radius must be >= 1");
    }
    SearchConstraint c;
    auto axis = [&](double d, double& lo, double& hi) {
        if (std::fabs(d) >= min_radius) {
            lo = std::min(lambda_min * d, lambda_max * d);
            hi = std::max(lambda_min * d, lambda_max * d);
        } else {
            lo = -min_radius;
            hi = min_radius;
        }
    };
    axis(delta_hat.x, c.dx_lo, c.dx_hi);
    axis(delta_hat.y, c.dy_lo, c.dy_hi);
    return c;
}

SearchResult feasible_direction_search(const ScoreFn& score, const SearchConstraint& constraint,
                                       Vec2i start, int step0, int max_evals) {
    const int xlo = int(std::ceil(constraint.dx_lo)), xhi = int(std::floor(constraint.dx_hi));
    const int ylo = int(std::ceil(constraint.dy_lo)), yhi = int(std::floor(constraint.dy_hi));
    if (xlo > xhi || ylo > yhi) {
        throw ContractError("feasible_direction_search: constraint contains no integer offset");
    }
    if (step0 < 1) throw ContractError("feasible_direction_search: step0 must be >= 1");

    std::map<std::pair<int, int>, double> memo;
    int evals = 0;
    auto eval = [&](Vec2i o, bool& budget_hit) {
        auto it = memo.find({o.x, o.y});
        if (it != memo.end()) return it->second;
        if (evals >= max_evals) {
            budget_hit = true;
            return -std::numeric_limits<double>::infinity();
        }
        ++evals;
        const double s = score(o);
        memo.emplace(std::make_pair(o.x, o.y), s);
        return s;
    };

    static constexpr int kDirs[8][2] = {{1, 0}, {1, 1},  {0, 1},  {-1, 1},
                                        {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

    Vec2i cur = constraint.clamp_to_int_box(start);
    bool budget_hit = false;
    double cur_score = eval(cur, budget_hit);

    int step = step0;
    while (step >= 1 && !budget_hit) {
        Vec2i best{};
        double best_score = cur_score;
        bool improved = false;
        for (const auto& d : kDirs) {
            Vec2i cand{cur.x + d[0] * step, cur.y + d[1] * step};
            // Leaving the feasible region redirects onto its boundary.
            cand = constraint.clamp_to_int_box(cand);
            if (cand == cur) continue;
            const double s = eval(cand, budget_hit);
            if (budget_hit) break;
            if (s > best_score) {
                best_score = s;
                best = cand;
                improved = true;
            }
        }
        if (budget_hit) break;
        if (improved) {
            cur = best;
            cur_score = best_score;
        } else {
            step /= 2;
        }
    }
    return {cur, cur_score, evals};
}

MatchResult graded_match(const TargetTemplate& tmpl, const LabelMap& frame_labels,
                         Vec2i frame_origin, const SearchConstraint& constraint,
                         const Vec2& prior_delta, double component_floor, int step0,
                         int max_evals) {
    if (tmpl.components.empty()) {
        throw ContractError("graded_match: template has no components");
    }
    // Descending priority, stable so equal priorities keep build order.
    std::vector<int> order(tmpl.components.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return tmpl.components[std::size_t(a)].priority > tmpl.components[std::size_t(b)].priority;
    });

    MatchResult res;
    res.mode = MatchMode::Graded;
    const Vec2i start = round_vec(prior_delta);

    double wsum = 0.0;
    Vec2 osum{};
    int survivors = 0;
    Vec2 plain_sum{};
    for (int idx : order) {
        const TemplateComponent& comp = tmpl.components[std::size_t(idx)];
        auto comp_score = [&](Vec2i o) {
            return confidence_in_rect(tmpl, comp.rect, frame_labels, frame_origin, o);
        };
        const SearchResult sr =
            feasible_direction_search(comp_score, constraint, start, step0, max_evals);
        ComponentMatch cm;
        cm.component = idx;
        cm.offset = sr.offset;
        cm.score = sr.score;
        cm.occluded = sr.score < component_floor;
        if (!cm.occluded) {
            const double w = comp.priority * sr.score;
            wsum += w;
            osum += sr.offset.to_vec2() * w;
            ++survivors;
            plain_sum += sr.offset.to_vec2();
        }
        res.components.push_back(cm);
    }

    if (wsum > 0.0) {
        res.offset = osum * (1.0 / wsum);
    } else if (survivors > 0) {
        // Survivors whose priorities are all zero: unweighted mean.
        res.offset = plain_sum * (1.0 / survivors);
    } else {
        res.offset = prior_delta;
        res.coasting = true;
    }
    res.score = confidence(tmpl, frame_labels, frame_origin, round_vec(res.offset));
    return res;
}

}  // namespace cntrack
