#pragma once

#include <functional>
#include <vector>

#include "cntrack/color_names.hpp"
#include "cntrack/geometry.hpp"

namespace cntrack {

// Per-block sub-template: a template-local rectangle matched independently
// when the whole-template confidence collapses.
struct TemplateComponent {
    BoundingBox rect;        // template-local coordinates
    double priority = 0.0;   // gray density of the source block, in [0,1]
};

// Label template of one target. bbox anchors the template in the frame it
// was built from; all matching offsets are displacements from that anchor.
struct TargetTemplate {
    BoundingBox bbox;
    LabelMap labels;                    // selected-palette indices, or kNoLabel
    std::vector<double> pixel_weights;  // per template pixel, >= 0
    std::vector<double> label_weights;  // entropy weight per selected label
    LabelHistogram histogram;
    ColorPalette palette;
    std::vector<TemplateComponent> components;

    double total_weight() const;
    double weight_at(int i, int j) const {
        return pixel_weights[std::size_t(j) * bbox.w + i];
    }
};

// Weighted fraction of label-agreeing pixels between the template and the
// candidate window displaced by delta. frame_labels covers a window anchored
// at frame_origin (selected-palette indices); pixels falling outside it count
// as mismatches. Throws ContractError when the template weight sum is zero.
double confidence(const TargetTemplate& tmpl, const LabelMap& frame_labels,
                  Vec2i frame_origin, Vec2i delta);

// Same, restricted to one template-local rectangle. Returns 0 when the
// rectangle carries no weight.
double confidence_in_rect(const TargetTemplate& tmpl, const BoundingBox& rect,
                          const LabelMap& frame_labels, Vec2i frame_origin, Vec2i delta);

// Closed per-axis displacement interval.
struct SearchConstraint {
    double dx_lo = 0, dx_hi = 0;
    double dy_lo = 0, dy_hi = 0;

    bool contains(Vec2i o) const {
        return o.x >= dx_lo && o.x <= dx_hi && o.y >= dy_lo && o.y <= dy_hi;
    }
    Vec2i clamp_to_int_box(Vec2i o) const;
};

// Scales the per-axis displacement estimate into a sign-aware search interval
// [lambda_min*d, lambda_max*d]; axes with |d| below min_radius fall back to
// the symmetric interval [-min_radius, +min_radius].
SearchConstraint displacement_bounds(const Vec2& delta_hat, double lambda_min = 0.5,
                                     double lambda_max = 2.0, double min_radius = 3.0);

struct SearchResult {
    Vec2i offset;
    double score = 0.0;
    int evals = 0;
};

using ScoreFn = std::function<double(Vec2i)>;

// Derivative-free ascent on the integer offsets inside the constraint box:
// 8-neighborhood moves at a halving step size, out-of-box candidates projected
// back onto the box. Score evaluations are memoized and capped at max_evals.
SearchResult feasible_direction_search(const ScoreFn& score, const SearchConstraint& constraint,
                                       Vec2i start, int step0 = 2, int max_evals = 200);

enum class MatchMode { Normal, Graded };

struct ComponentMatch {
    int component = 0;
    Vec2i offset;
    double score = 0.0;
    bool occluded = false;
};

struct MatchResult {
    Vec2 offset;           // displacement from the template anchor
    double score = 0.0;    // whole-template confidence at the fused offset
    MatchMode mode = MatchMode::Normal;
    bool coasting = false; // every component occluded; offset is the prior
    std::vector<ComponentMatch> components;
};

// Re-matches each component independently inside the constraint (descending
// priority), drops components scoring under component_floor as occluded, and
// fuses the survivors by priority-times-score weights. With no survivors the
// prior displacement is returned unchanged (coasting).
MatchResult graded_match(const TargetTemplate& tmpl, const LabelMap& frame_labels,
                         Vec2i frame_origin, const SearchConstraint& constraint,
                         const Vec2& prior_delta, double component_floor = 0.3,
                         int step0 = 2, int max_evals = 200);

}  // namespace cntrack
