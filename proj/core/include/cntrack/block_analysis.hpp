#pragma once

#include <optional>
#include <vector>

#include "cntrack/background_model.hpp"
#include "cntrack/geometry.hpp"
#include "cntrack/image.hpp"

namespace cntrack {

struct Block {
    int moving_count = 0;             // flagged pixels inside the block
    int total_count = 0;              // block area (edge blocks truncated)
    bool moving = false;
    std::optional<Vec2i> motion;      // pixels/frame; nullopt = unknown
};

// Fixed-size square partition of the frame; edge blocks are truncated.
struct BlockGrid {
    int block_size = 16;
    int cols = 0;
    int rows = 0;
    int width = 0;   // frame dimensions the grid was built over
    int height = 0;
    std::vector<Block> blocks;

    int index(int cx, int cy) const { return cy * cols + cx; }
    Block& at(int cx, int cy) { return blocks[std::size_t(index(cx, cy))]; }
    const Block& at(int cx, int cy) const { return blocks[std::size_t(index(cx, cy))]; }
    BoundingBox rect_of(int idx) const;
    Vec2 center_of(int idx) const;
    bool congruent(const BlockGrid& o) const {
        return cols == o.cols && rows == o.rows && block_size == o.block_size &&
               width == o.width && height == o.height;
    }
};

// Motion-coherent set of 4-adjacent moving blocks: one candidate target.
struct BlockGroup {
    std::vector<int> members;   // grid indices, ascending
    Vec2 centroid;              // centroid of flagged pixels in member blocks
    BoundingBox bbox;           // tight box around flagged pixels in member blocks
    Vec2 velocity;              // mean of known member motions
    double radius = 0.0;        // max distance centroid -> member block center
};

BlockGrid partition_blocks(const ForegroundMask& mask, int block_size = 16);

// moving = flagged fraction strictly greater than theta.
void classify_moving_blocks(BlockGrid& grid, double theta = 0.10);

// Exhaustive SAD block matching for every moving block of cur, against the
// previous gray frame, offsets within +/- search_radius. Ties prefer the
// smaller offset magnitude, then lexicographic (dx, dy). Blocks whose search
// finds no overlap with the previous foreground stay unknown.
void estimate_block_motion(const BlockGrid& prev, BlockGrid& cur,
                           const GrayFrame& prev_gray, const GrayFrame& cur_gray,
                           const ForegroundMask& prev_mask, int search_radius = 8);

// Union of 4-adjacent moving blocks whose motions agree within motion_tol
// (unknown motion joins anything adjacent). Groups smaller than
// min_group_blocks are discarded. Output sorted by smallest member index.
std::vector<BlockGroup> group_blocks(const BlockGrid& grid, const ForegroundMask& mask,
                                     double motion_tol = 2.0, int min_group_blocks = 2);

// Moving-pixel density graded by centrality within the group; in [0,1] for
// any member block. Collapses to n_i/n for single-point groups (radius 0).
double gray_density(int block_index, const BlockGroup& group, const BlockGrid& grid);

}  // namespace cntrack
