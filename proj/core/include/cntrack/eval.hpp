#pragma once

#include <string>
#include <vector>

#include "cntrack/config.hpp"
#include "cntrack/sequence_io.hpp"
#include "cntrack/tracker.hpp"

namespace cntrack {

struct FrameScore {
    int frame = 0;
    int truth_id = 0;
    double iou = 0.0;        // 0 when unmatched
    double center_err = 0.0; // meaningful only when matched
    bool matched = false;
    int output_id = -1;
};

struct TrackEval {
    int truth_id = 0;
    double mean_iou = 0.0;         // over evaluated frames, unmatched counting 0
    double mean_center_err = 0.0;  // over matched frames
    int frames_tracked = 0;
    int frames_total = 0;
    int first_tracked_frame = -1;
};

struct EvalReport {
    double mean_iou = 0.0;
    double mean_center_err = 0.0;
    int frames_tracked = 0;
    int frames_total = 0;
    double fps = 0.0;  // 0 when not measured
    std::vector<TrackEval> per_track;
    std::vector<FrameScore> series;

    std::string to_json() const;
    std::string table() const;
};

// Greedy per-frame best-IoU assignment of output boxes to truth boxes over
// frames >= eval_from_frame. Truth boxes left unassigned score IoU 0.
EvalReport evaluate(const std::vector<TrackRecord>& records, const BoxAnnotations& truth,
                    int eval_from_frame = 0, double fps = 0.0);

struct LoopResult {
    double fps = 0.0;  // over the whole tracking loop, I/O excluded
    double seconds = 0.0;
    int frames = 0;
    std::vector<TrackRecord> records;
};

// Runs a fresh Tracker over preloaded frames and times the loop.
LoopResult run_tracking_loop(const std::vector<Frame>& frames, const TrackerConfig& cfg);

}  // namespace cntrack
