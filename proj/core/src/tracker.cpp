#include "cntrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cntrack/errors.hpp"
#include "cntrack/meanshift.hpp"

namespace cntrack {

const char* to_string(TrackMode mode) {
    switch (mode) {
        case TrackMode::Normal: return "NORMAL";
        case TrackMode::Graded: return "GRADED";
        case TrackMode::Coasting: return "COASTING";
    }
    return "NORMAL";
}

std::optional<TrackMode> parse_track_mode(const std::string& s) {
    if (s == "NORMAL") return TrackMode::Normal;
    if (s == "GRADED") return TrackMode::Graded;
    if (s == "COASTING") return TrackMode::Coasting;
    return std::nullopt;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (!cfg_.palette_file.empty()) {
        base_palette_ = load_palette_file(cfg_.palette_file);
    }
}

std::vector<TrackState> Tracker::tracks() const {
    std::vector<TrackState> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.state);
    return out;
}

LabelMap Tracker::selected_labels_window(const Frame& frame, const BoundingBox& window,
                                         const ColorPalette& palette) const {
    LabelMap base = map_rgb_to_base_labels(frame, window, palette);
    for (auto& l : base.labels) {
        const int sel = palette.selected_index_of_base(int(l));
        l = sel >= 0 ? std::uint8_t(sel) : kNoLabel;
    }
    return base;
}

std::optional<TargetTemplate> Tracker::build_template(const Frame& frame,
                                                      const ForegroundMask& mask,
                                                      const BlockGroup& group,
                                                      const BlockGrid& grid,
                                                      const BoundingBox& anchor,
                                                      const ColorPalette* keep_palette) const {
    BoundingBox bbox = anchor.clip(frame.bounds());
    if (bbox.w < 4 || bbox.h < 4) return std::nullopt;

    TargetTemplate t;
    t.bbox = bbox;
    if (keep_palette) {
        t.palette = *keep_palette;
    } else {
        t.palette = select_labels(frame, bbox, cfg_.k_labels, base_palette_, &mask);
    }
    t.labels = selected_labels_window(frame, bbox, t.palette);

    // Histogram over foreground pixels only, so background labels carry no
    // weight in the template.
    std::vector<std::uint8_t> valid(std::size_t(bbox.w) * bbox.h, 0);
    for (int j = 0; j < bbox.h; ++j) {
        for (int i = 0; i < bbox.w; ++i) {
            valid[std::size_t(j) * bbox.w + i] = mask.at(bbox.x + i, bbox.y + j) ? 1 : 0;
        }
    }
    t.histogram = LabelHistogram::from(t.labels, int(t.palette.selected.size()), &valid);
    if (t.histogram.total == 0) return std::nullopt;
    t.label_weights = entropy_weights(t.histogram, cfg_.entropy_c);

    t.pixel_weights.assign(std::size_t(bbox.w) * bbox.h, 0.0);
    double total = 0.0;
    for (int j = 0; j < bbox.h; ++j) {
        for (int i = 0; i < bbox.w; ++i) {
            if (!valid[std::size_t(j) * bbox.w + i]) continue;
            const std::uint8_t l = t.labels.at(i, j);
            if (l == kNoLabel || t.histogram.counts[l] == 0) continue;
            const double w = t.label_weights[l];
            t.pixel_weights[std::size_t(j) * bbox.w + i] = w;
            total += w;
        }
    }
    if (total <= 0.0) {
        // Single-label target: self-information is zero everywhere, so fall
        // back to uniform weights on the foreground pixels.
        for (int j = 0; j < bbox.h; ++j) {
            for (int i = 0; i < bbox.w; ++i) {
                if (!valid[std::size_t(j) * bbox.w + i]) continue;
                if (t.labels.at(i, j) == kNoLabel) continue;
                t.pixel_weights[std::size_t(j) * bbox.w + i] = 1.0;
                total += 1.0;
            }
        }
    }
    if (total <= 0.0) return std::nullopt;

    for (int idx : group.members) {
        BoundingBox local = grid.rect_of(idx).clip(bbox);
        if (!local.valid()) continue;
        local.x -= bbox.x;
        local.y -= bbox.y;
        double wsum = 0.0;
        for (int j = local.y; j <= local.bottom(); ++j) {
            for (int i = local.x; i <= local.right(); ++i) {
                wsum += t.pixel_weights[std::size_t(j) * bbox.w + i];
            }
        }
        if (wsum <= 0.0) continue;
        t.components.push_back({local, gray_density(idx, group, grid)});
    }
    if (t.components.empty()) {
        t.components.push_back({{0, 0, bbox.w, bbox.h}, 1.0});
    }
    return t;
}

namespace {

// Window (clipped to the frame) covering the template box displaced by every
// delta in [lo, hi], with a small rounding margin.
BoundingBox candidate_window(const BoundingBox& tmpl_box, Vec2i lo, Vec2i hi,
                             const BoundingBox& frame_bounds) {
    BoundingBox win{tmpl_box.x + lo.x - 1, tmpl_box.y + lo.y - 1,
                    tmpl_box.w + (hi.x - lo.x) + 2, tmpl_box.h + (hi.y - lo.y) + 2};
    return win.clip(frame_bounds);
}

}  // namespace

void Tracker::step_track(Entry& entry, const Frame& frame, const ForegroundMask& mask,
                         const BlockGrid& grid, const BlockGroup* group) {
    TrackState& st = entry.state;
    TargetTemplate& tmpl = entry.tmpl;
    const Vec2 predicted = st.center + st.velocity;
    const Vec2 prev_center = st.center;

    // MeanShift from the pre-extracted candidate center (not the previous
    // track center), weighted by the template's label entropies.
    const double bandwidth =
        0.5 * std::sqrt(double(st.bbox.w) * st.bbox.w + double(st.bbox.h) * st.bbox.h) *
        cfg_.bandwidth_scale;
    const KernelSpec kernel{cfg_.kernel_profile(), std::max(bandwidth, 1.0)};
    const int half = int(std::ceil(kernel.bandwidth)) + 1;

    auto provider = [&](const Vec2& x) {
        BoundingBox win{int(std::floor(x.x)) - half, int(std::floor(x.y)) - half,
                        2 * half + 1, 2 * half + 1};
        win = win.clip(frame.bounds());
        if (!win.valid()) throw EmptySupportError();
        const LabelMap labels = selected_labels_window(frame, win, tmpl.palette);
        WeightField field(win);
        for (int y = 0; y < win.h; ++y) {
            for (int x2 = 0; x2 < win.w; ++x2) {
                const std::uint8_t l = labels.at(x2, y);
                if (l == kNoLabel || tmpl.histogram.counts[l] == 0) continue;
                field.weights[std::size_t(y) * win.w + x2] = tmpl.label_weights[l];
            }
        }
        return field;
    };

    const Vec2 start = group ? group->centroid : predicted;
    Vec2 located = predicted;
    bool ms_ok = false;
    try {
        located = meanshift_iterate(start, provider, kernel, cfg_.ms_eps, cfg_.ms_max_iters).center;
        ms_ok = true;
    } catch (const EmptySupportError&) {
        // Nothing matching the template under the window; treat as occlusion.
    }

    // Confidence of the whole template at the MeanShift displacement.
    const Vec2i ms_topleft = round_vec(located - Vec2{st.bbox.w / 2.0, st.bbox.h / 2.0});
    const Vec2i ms_delta = ms_topleft - Vec2i{tmpl.bbox.x, tmpl.bbox.y};
    double conf = 0.0;
    if (ms_ok) {
        const BoundingBox win = candidate_window(tmpl.bbox, ms_delta, ms_delta, frame.bounds());
        if (win.valid()) {
            const LabelMap labels = selected_labels_window(frame, win, tmpl.palette);
            conf = confidence(tmpl, labels, {win.x, win.y}, ms_delta);
        }
    }

    Vec2 new_center = located;
    TrackMode mode = TrackMode::Normal;

    if (!ms_ok || conf < cfg_.conf_threshold) {
        // Graded fallback, searching per-frame displacements bounded by the
        // velocity estimate. All offsets below are template-anchored.
        const Vec2i prev_topleft =
            round_vec(prev_center - Vec2{st.bbox.w / 2.0, st.bbox.h / 2.0});
        const Vec2i prev_rel = prev_topleft - Vec2i{tmpl.bbox.x, tmpl.bbox.y};
        SearchConstraint c = displacement_bounds(st.velocity, cfg_.lambda_min,
                                                 cfg_.lambda_max, cfg_.min_search_radius);
        c.dx_lo += prev_rel.x;
        c.dx_hi += prev_rel.x;
        c.dy_lo += prev_rel.y;
        c.dy_hi += prev_rel.y;
        const Vec2 prior{prev_rel.x + st.velocity.x, prev_rel.y + st.velocity.y};

        const Vec2i lo{int(std::floor(std::min(c.dx_lo, double(ms_delta.x)))),
                       int(std::floor(std::min(c.dy_lo, double(ms_delta.y))))};
        const Vec2i hi{int(std::ceil(std::max(c.dx_hi, double(ms_delta.x)))),
                       int(std::ceil(std::max(c.dy_hi, double(ms_delta.y))))};
        const BoundingBox win = candidate_window(tmpl.bbox, lo, hi, frame.bounds());
        if (win.valid()) {
            const LabelMap labels = selected_labels_window(frame, win, tmpl.palette);
            const MatchResult mr =
                graded_match(tmpl, labels, {win.x, win.y}, c, prior, cfg_.component_floor,
                             cfg_.step0, cfg_.max_evals);
            new_center = Vec2{tmpl.bbox.x + mr.offset.x + st.bbox.w / 2.0,
                              tmpl.bbox.y + mr.offset.y + st.bbox.h / 2.0};
            conf = mr.score;
            mode = mr.coasting ? TrackMode::Coasting : TrackMode::Graded;
        } else {
            new_center = predicted;
            conf = 0.0;
            mode = TrackMode::Coasting;
        }
    }

    st.velocity = st.velocity * 0.5 + (new_center - prev_center) * 0.5;
    st.center = new_center;
    st.confidence = conf;
    st.mode = conf >= cfg_.conf_threshold ? TrackMode::Normal : mode;
    if (st.mode == TrackMode::Normal) {
        st.misses = 0;
    } else {
        ++st.misses;
    }
    ++st.age;

    int bw = st.bbox.w, bh = st.bbox.h;
    const bool high_conf = conf >= cfg_.template_update_conf;
    if (high_conf && group) {
        // Scale comes from the pre-extraction: adopt the group extent, rate
        // limited so a one-frame group split cannot collapse the box.
        auto adopt = [](int cur, int target) {
            const int lo = std::max(4, int(std::floor(cur / 1.25)));
            const int hi = int(std::ceil(cur * 1.25));
            return std::clamp(std::max(target, 4), lo, hi);
        };
        bw = adopt(bw, group->bbox.w);
        bh = adopt(bh, group->bbox.h);
    }
    st.bbox = BoundingBox::from_center(st.center, bw, bh);

    if (high_conf && group) {
        if (auto fresh = build_template(frame, mask, *group, grid, st.bbox, &tmpl.palette)) {
            entry.tmpl = std::move(*fresh);
        }
    }
}

std::vector<TrackRecord> Tracker::process(const Frame& frame) {
    GrayFrame gray = to_gray_normalized(frame);
    gray.index = frame_count_;
    const int t = frame_count_++;

    if (!model_) {
        boot_buffer_.push_back(std::move(gray));
        if (int(boot_buffer_.size()) >= cfg_.init_frames) {
            model_ = GaussianBackground::init(boot_buffer_);
            boot_buffer_.clear();
        }
        return {};
    }

    // (1) foreground pre-extraction
    ForegroundMask mask = model_->classify(gray, float(cfg_.k_sigma), float(cfg_.sigma_floor));
    mask = refine_by_gray_histogram(mask, gray, cfg_.hist_bins);

    // (2) block statistics, motion, candidate groups
    BlockGrid grid = partition_blocks(mask, cfg_.block_size);
    classify_moving_blocks(grid, cfg_.theta);
    if (prev_grid_) {
        estimate_block_motion(*prev_grid_, grid, prev_gray_, gray, prev_mask_,
                              cfg_.search_radius);
    }
    const std::vector<BlockGroup> groups =
        group_blocks(grid, mask, cfg_.motion_tol, cfg_.min_group_blocks);

    // (3) greedy IoU association of groups to live tracks
    std::vector<int> track_group(entries_.size(), -1);
    std::vector<bool> group_taken(groups.size(), false);
    {
        struct Cand {
            double iou;
            int track, group;
        };
        std::vector<Cand> cands;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const TrackState& st = entries_[i].state;
            const BoundingBox pred =
                BoundingBox::from_center(st.center + st.velocity, st.bbox.w, st.bbox.h);
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                const double v = iou(pred, groups[gi].bbox);
                if (v >= cfg_.iou_assoc_threshold) cands.push_back({v, int(i), int(gi)});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.iou != b.iou) return a.iou > b.iou;
            if (a.track != b.track) return a.track < b.track;
            return a.group < b.group;
        });
        for (const Cand& c : cands) {
            if (track_group[std::size_t(c.track)] != -1 || group_taken[std::size_t(c.group)]) {
                continue;
            }
            track_group[std::size_t(c.track)] = c.group;
            group_taken[std::size_t(c.group)] = true;
        }
    }

    // (4)-(7) per-track localization and state update; one failing track must
    // not take down the others.
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        Entry& e = entries_[i];
        const BlockGroup* group =
            track_group[i] >= 0 ? &groups[std::size_t(track_group[i])] : nullptr;
        try {
            step_track(e, frame, mask, grid, group);
        } catch (const std::exception&) {
            e.state.center += e.state.velocity;
            e.state.bbox =
                BoundingBox::from_center(e.state.center, e.state.bbox.w, e.state.bbox.h);
            e.state.confidence = 0.0;
            e.state.mode = TrackMode::Coasting;
            ++e.state.misses;
            ++e.state.age;
        }
    }

    // Drop exhausted or departed tracks.
    std::erase_if(entries_, [&](const Entry& e) {
        return e.state.misses > cfg_.max_misses ||
               !e.state.bbox.intersects(frame.bounds());
    });

    // New-track warmup over unassociated groups.
    for (auto& p : pendings_) p.seen = false;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (group_taken[gi]) continue;
        const BlockGroup& g = groups[gi];
        Pending* best = nullptr;
        double best_iou = cfg_.iou_assoc_threshold;
        for (auto& p : pendings_) {
            if (p.seen) continue;
            const double v = iou(p.bbox, g.bbox);
            if (v >= best_iou) {
                best_iou = v;
                best = &p;
            }
        }
        if (best) {
            best->bbox = g.bbox;
            best->seen = true;
            ++best->consecutive;
            if (best->consecutive >= kWarmupFrames) {
                if (auto tmpl = build_template(frame, mask, g, grid, g.bbox, nullptr)) {
                    Entry e;
                    e.state.id = next_id_++;
                    e.state.bbox = tmpl->bbox;
                    e.state.center = tmpl->bbox.center();
                    e.state.velocity = g.velocity;
                    e.state.confidence = 1.0;
                    e.state.mode = TrackMode::Normal;
                    e.state.age = 1;
                    e.tmpl = std::move(*tmpl);
                    entries_.push_back(std::move(e));
                    best->consecutive = -1;  // consumed, erased below
                }
            }
        } else {
            pendings_.push_back({g.bbox, 1, true});
        }
    }
    std::erase_if(pendings_, [](const Pending& p) { return !p.seen || p.consecutive < 0; });

    // (8) block-gated background update
    std::vector<std::uint8_t> moving_region(gray.size(), 0);
    for (int idx = 0; idx < int(grid.blocks.size()); ++idx) {
        if (!grid.blocks[std::size_t(idx)].moving) continue;
        const BoundingBox r = grid.rect_of(idx);
        for (int y = r.y; y <= r.bottom(); ++y) {
            for (int x = r.x; x <= r.right(); ++x) {
                moving_region[std::size_t(y) * gray.width + x] = 1;
            }
        }
    }
    model_->update(gray, moving_region,
                   {float(cfg_.alpha_bg), float(cfg_.alpha_fg)});

    prev_gray_ = std::move(gray);
    prev_mask_ = std::move(mask);
    prev_grid_ = std::move(grid);

    std::vector<TrackRecord> records;
    records.reserve(entries_.size());
    for (const auto& e : entries_) {
        records.push_back({t, e.state.id, e.state.bbox, e.state.confidence, e.state.mode});
    }
    return records;
}

std::string records_to_csv(const std::vector<TrackRecord>& records) {
    std::string out = "frame,id,x,y,w,h,confidence,mode\n";
    char buf[160];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%d,%.6f,%s\n", r.frame, r.id,
                      r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h, r.confidence,
                      to_string(r.mode));
        out += buf;
    }
    return out;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<TrackRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoError::Kind::WriteFailure, path.string(), "cannot open for writing");
    out << records_to_csv(records);
    if (!out) throw IoError(IoError::Kind::WriteFailure, path.string(), "short write");
}

std::vector<TrackRecord> parse_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::Kind::BadGroundTruth, path.string(), "cannot open file");
    std::vector<TrackRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("frame,", 0) == 0) continue;  // header
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() < 8) {
            throw IoError(IoError::Kind::BadGroundTruth, path.string(),
                          "malformed record line " + std::to_string(lineno));
        }
        try {
            TrackRecord r;
            r.frame = std::stoi(f[0]);
            r.id = std::stoi(f[1]);
            r.bbox = {std::stoi(f[2]), std::stoi(f[3]), std::stoi(f[4]), std::stoi(f[5])};
            r.confidence = std::stod(f[6]);
            auto mode = parse_track_mode(f[7]);
            if (!mode) throw std::invalid_argument(f[7]);
            r.mode = *mode;
            out.push_back(r);
        } catch (const std::exception&) {
            throw IoError(IoError::Kind::BadGroundTruth, path.string(),
                          "malformed record line " + std::to_string(lineno));
        }
    }
    return out;
}

}  // namespace cntrack
