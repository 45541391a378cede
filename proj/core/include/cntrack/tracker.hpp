#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cntrack/background_model.hpp"
#include "cntrack/block_analysis.hpp"
#include "cntrack/config.hpp"
#include "cntrack/graded_matching.hpp"
#include "cntrack/image.hpp"

namespace cntrack {

enum class TrackMode { Normal, Graded, Coasting };

const char* to_string(TrackMode mode);
std::optional<TrackMode> parse_track_mode(const std::string& s);

struct TrackState {
    int id = 0;
    BoundingBox bbox;
    Vec2 center;
    Vec2 velocity;
    double confidence = 1.0;
    TrackMode mode = TrackMode::Normal;
    int age = 0;      // frames since the track was promoted
    int misses = 0;   // consecutive low-confidence frames
};

struct TrackRecord {
    int frame = 0;
    int id = 0;
    BoundingBox bbox;
    double confidence = 1.0;
    TrackMode mode = TrackMode::Normal;
};

// Detect-and-track pipeline, no manual initialization: the first init_frames
// feed the background model, then per frame the foreground is pre-extracted
// into block groups, groups are associated to tracks, each track is located
// by MeanShift and falls back to graded component matching when confidence
// drops. Frames must arrive in order.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg = {});

    // Feeds the next frame, returns the reported tracks for it (empty while
    // bootstrapping and during the new-track warmup).
    std::vector<TrackRecord> process(const Frame& frame);

    bool bootstrapped() const { return model_.has_value(); }
    const GaussianBackground* background() const { return model_ ? &*model_ : nullptr; }
    int frames_processed() const { return frame_count_; }

    std::vector<TrackState> tracks() const;

    static constexpr int kWarmupFrames = 3;

private:
    struct Entry {
        TrackState state;
        TargetTemplate tmpl;
    };
    struct Pending {
        BoundingBox bbox;
        int consecutive = 0;
        bool seen = false;
    };

    void step_track(Entry& entry, const Frame& frame, const ForegroundMask& mask,
                    const BlockGrid& grid, const BlockGroup* group);
    std::optional<TargetTemplate> build_template(const Frame& frame, const ForegroundMask& mask,
                                                 const BlockGroup& group, const BlockGrid& grid,
                                                 const BoundingBox& anchor,
                                                 const ColorPalette* keep_palette) const;
    LabelMap selected_labels_window(const Frame& frame, const BoundingBox& window,
                                    const ColorPalette& palette) const;

    TrackerConfig cfg_;
    ColorPalette base_palette_;
    std::optional<GaussianBackground> model_;
    std::vector<GrayFrame> boot_buffer_;
    int frame_count_ = 0;
    int next_id_ = 1;

    std::vector<Entry> entries_;
    std::vector<Pending> pendings_;

    GrayFrame prev_gray_;
    ForegroundMask prev_mask_;
    std::optional<BlockGrid> prev_grid_;
};

// Per-frame record CSV: "frame,id,x,y,w,h,confidence,mode" with one header
// line. Serialization is byte-deterministic for identical records.
std::string records_to_csv(const std::vector<TrackRecord>& records);
void write_records_csv(const std::filesystem::path& path,
                       const std::vector<TrackRecord>& records);
std::vector<TrackRecord> parse_records_csv(const std::filesystem::path& path);

}  // namespace cntrack
