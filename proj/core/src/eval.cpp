#include "cntrack/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "cntrack/errors.hpp"

namespace cntrack {

EvalReport evaluate(const std::vector<TrackRecord>& records, const BoxAnnotations& truth,
                    int eval_from_frame, double fps) {
    if (truth.empty()) throw ContractError("evaluate: empty ground truth");

    std::map<int, std::vector<TrackRecord>> by_frame;
    for (const auto& r : records) by_frame[r.frame].push_back(r);

    EvalReport rep;
    rep.fps = fps;
    std::map<int, TrackEval> per_track;
    double iou_sum = 0.0, err_sum = 0.0;
    int n_instances = 0, n_matched = 0;

    for (const auto& [frame, boxes] : truth) {
        if (frame < eval_from_frame) continue;
        const auto out_it = by_frame.find(frame);
        const std::vector<TrackRecord>* outs =
            out_it != by_frame.end() ? &out_it->second : nullptr;

        // Greedy best-IoU pairing, deterministic tie-breaks.
        struct Cand {
            double iou;
            int truth_idx, out_idx;
        };
        std::vector<Cand> cands;
        if (outs) {
            for (std::size_t ti = 0; ti < boxes.size(); ++ti) {
                for (std::size_t oi = 0; oi < outs->size(); ++oi) {
                    const double v = iou(boxes[ti].second, (*outs)[oi].bbox);
                    if (v > 0.0) cands.push_back({v, int(ti), int(oi)});
                }
            }
            std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
                if (a.iou != b.iou) return a.iou > b.iou;
                if (a.truth_idx != b.truth_idx) return a.truth_idx < b.truth_idx;
                return a.out_idx < b.out_idx;
            });
        }
        std::vector<int> truth_match(boxes.size(), -1);
        std::vector<bool> out_taken(outs ? outs->size() : 0, false);
        for (const Cand& c : cands) {
            if (truth_match[std::size_t(c.truth_idx)] != -1 ||
                out_taken[std::size_t(c.out_idx)]) {
                continue;
            }
            truth_match[std::size_t(c.truth_idx)] = c.out_idx;
            out_taken[std::size_t(c.out_idx)] = true;
        }

        for (std::size_t ti = 0; ti < boxes.size(); ++ti) {
            const auto& [tid, tbox] = boxes[ti];
            TrackEval& te = per_track[tid];
            te.truth_id = tid;
            ++te.frames_total;
            ++n_instances;
            FrameScore fs;
            fs.frame = frame;
            fs.truth_id = tid;
            if (truth_match[ti] >= 0) {
                const TrackRecord& r = (*outs)[std::size_t(truth_match[ti])];
                fs.matched = true;
                fs.output_id = r.id;
                fs.iou = iou(tbox, r.bbox);
                fs.center_err = (tbox.center() - r.bbox.center()).norm();
                te.mean_iou += fs.iou;
                te.mean_center_err += fs.center_err;
                ++te.frames_tracked;
                if (te.first_tracked_frame < 0) te.first_tracked_frame = frame;
                iou_sum += fs.iou;
                err_sum += fs.center_err;
                ++n_matched;
            }
            rep.series.push_back(fs);
        }
    }
    if (n_instances == 0) throw ContractError("evaluate: no truth frames at or after eval_from_frame");

    for (auto& [tid, te] : per_track) {
        te.mean_iou = te.frames_total > 0 ? te.mean_iou / te.frames_total : 0.0;
        te.mean_center_err =
            te.frames_tracked > 0 ? te.mean_center_err / te.frames_tracked : 0.0;
        rep.per_track.push_back(te);
        rep.frames_tracked += te.frames_tracked;
        rep.frames_total += te.frames_total;
    }
    rep.mean_iou = iou_sum / double(n_instances);
    rep.mean_center_err = n_matched > 0 ? err_sum / double(n_matched) : 0.0;
    return rep;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["mean_iou"] = mean_iou;
    j["mean_center_err"] = mean_center_err;
    j["frames_tracked"] = frames_tracked;
    j["frames_total"] = frames_total;
    if (fps > 0.0) j["fps"] = fps;
    j["per_track"] = nlohmann::json::array();
    for (const auto& t : per_track) {
        j["per_track"].push_back({{"truth_id", t.truth_id},
                                  {"mean_iou", t.mean_iou},
                                  {"mean_center_err", t.mean_center_err},
                                  {"frames_tracked", t.frames_tracked},
                                  {"frames_total", t.frames_total},
                                  {"first_tracked_frame", t.first_tracked_frame}});
    }
    j["series"] = nlohmann::json::array();
    for (const auto& s : series) {
        j["series"].push_back({{"frame", s.frame},
                               {"truth_id", s.truth_id},
                               {"iou", s.iou},
                               {"center_err", s.center_err},
                               {"matched", s.matched},
                               {"output_id", s.output_id}});
    }
    return j.dump(2);
}

std::string EvalReport::table() const {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-8s %-9s %-12s %-10s %s\n", "track", "mean_iou",
                  "center_err", "tracked", "total");
    out += buf;
    for (const auto& t : per_track) {
        std::snprintf(buf, sizeof(buf), "%-8d %-9.3f %-12.2f %-10d %d\n", t.truth_id,
                      t.mean_iou, t.mean_center_err, t.frames_tracked, t.frames_total);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "overall  %-9.3f %-12.2f %-10d %d\n", mean_iou,
                  mean_center_err, frames_tracked, frames_total);
    out += buf;
    if (fps > 0.0) {
        std::snprintf(buf, sizeof(buf), "fps      %.2f\n", fps);
        out += buf;
    }
    return out;
}

LoopResult run_tracking_loop(const std::vector<Frame>& frames, const TrackerConfig& cfg) {
    LoopResult res;
    res.frames = int(frames.size());
    Tracker tracker(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    for (const Frame& f : frames) {
        auto records = tracker.process(f);
        res.records.insert(res.records.end(), records.begin(), records.end());
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.seconds = std::chrono::duration<double>(t1 - t0).count();
    res.fps = res.seconds > 0.0 ? double(res.frames) / res.seconds : 0.0;
    return res;
}

}  // namespace cntrack
