#include "cntrack/block_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace cntrack {

BoundingBox BlockGrid::rect_of(int idx) const {
    const int cx = idx % cols, cy = idx / cols;
    const int x = cx * block_size, y = cy * block_size;
    return {x, y, std::min(block_size, width - x), std::min(block_size, height - y)};
}

Vec2 BlockGrid::center_of(int idx) const {
    BoundingBox r = rect_of(idx);
    return {r.x + r.w / 2.0, r.y + r.h / 2.0};
}

BlockGrid partition_blocks(const ForegroundMask& mask, int block_size) {
    if (block_size < 4) {
        throw ContractError("partition_blocks: block_size must be >= 4");
    }
    BlockGrid grid;
    grid.block_size = block_size;
    grid.width = mask.width;
    grid.height = mask.height;
    grid.cols = (mask.width + block_size - 1) / block_size;
    grid.rows = (mask.height + block_size - 1) / block_size;
    grid.blocks.assign(std::size_t(grid.cols) * grid.rows, Block{});

    for (int cy = 0; cy < grid.rows; ++cy) {
        for (int cx = 0; cx < grid.cols; ++cx) {
            Block& b = grid.at(cx, cy);
            BoundingBox r = grid.rect_of(grid.index(cx, cy));
            b.total_count = int(r.area());
            int n = 0;
            for (int y = r.y; y <= r.bottom(); ++y) {
                for (int x = r.x; x <= r.right(); ++x) {
                    n += mask.at(x, y) ? 1 : 0;
                }
            }
            b.moving_count = n;
        }
    }
    return grid;
}

void classify_moving_blocks(BlockGrid& grid, double theta) {
    if (theta <= 0.0 || theta >= 1.0) {
        throw ContractError("classify_moving_blocks: theta must be in (0,1)");
    }
    for (Block& b : grid.blocks) {
        b.moving = b.total_count > 0 &&
                   double(b.moving_count) / double(b.total_count) > theta;
    }
}

namespace {

// Summed-area table of the mask for O(1) flagged-count queries.
struct MaskIntegral {
    int width, height;
    std::vector<int> sums;  // (w+1)x(h+1)

    explicit MaskIntegral(const ForegroundMask& m) : width(m.width), height(m.height) {
        sums.assign(std::size_t(width + 1) * (height + 1), 0);
        for (int y = 0; y < height; ++y) {
            int row = 0;
            for (int x = 0; x < width; ++x) {
                row += m.at(x, y) ? 1 : 0;
                sums[std::size_t(y + 1) * (width + 1) + (x + 1)] =
                    sums[std::size_t(y) * (width + 1) + (x + 1)] + row;
            }
        }
    }
    // Flagged count over the rect clipped to the frame.
    int count(BoundingBox r) const {
        int x0 = std::max(r.x, 0), y0 = std::max(r.y, 0);
        int x1 = std::min(r.right() + 1, width), y1 = std::min(r.bottom() + 1, height);
        if (x0 >= x1 || y0 >= y1) return 0;
        auto s = [&](int x, int y) { return sums[std::size_t(y) * (width + 1) + x]; };
        return s(x1, y1) - s(x0, y1) - s(x1, y0) + s(x0, y0);
    }
};

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(std::size_t(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[std::size_t(a)] != a) {
            parent[std::size_t(a)] = parent[std::size_t(parent[std::size_t(a)])];
            a = parent[std::size_t(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::size_t(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

void estimate_block_motion(const BlockGrid& prev, BlockGrid& cur,
                           const GrayFrame& prev_gray, const GrayFrame& cur_gray,
                           const ForegroundMask& prev_mask, int search_radius) {
    if (!prev.congruent(cur)) {
        throw ContractError("estimate_block_motion: grids not congruent");
    }
    if (prev_gray.width != cur.width || prev_gray.height != cur.height ||
        cur_gray.width != cur.width || cur_gray.height != cur.height) {
        throw ContractError("estimate_block_motion: frame dimensions mismatch");
    }
    const MaskIntegral prev_fg(prev_mask);
    const int r = search_radius;

    for (int idx = 0; idx < int(cur.blocks.size()); ++idx) {
        Block& b = cur.blocks[std::size_t(idx)];
        b.motion.reset();
        if (!b.moving) continue;

        const BoundingBox rect = cur.rect_of(idx);
        double best_sad = std::numeric_limits<double>::infinity();
        int best_mag = 0, best_dx = 0, best_dy = 0;
        bool found = false;

        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                // Candidate source rect in the previous frame: rect shifted
                // back by the offset. It must touch previous foreground.
                BoundingBox src{rect.x - dx, rect.y - dy, rect.w, rect.h};
                if (prev_fg.count(src) == 0) continue;

                double sad = 0.0;
                int compared = 0;
                for (int y = 0; y < rect.h; ++y) {
                    const int cy = rect.y + y, py = cy - dy;
                    if (py < 0 || py >= prev_gray.height) continue;
                    for (int x = 0; x < rect.w; ++x) {
                        const int cx = rect.x + x, px = cx - dx;
                        if (px < 0 || px >= prev_gray.width) continue;
                        sad += std::fabs(double(cur_gray.at(cx, cy)) -
                                         double(prev_gray.at(px, py)));
                        ++compared;
                    }
                }
                if (compared * 2 < rect.w * rect.h) continue;  // mostly off-frame
                sad /= double(compared);

                const int mag = dx * dx + dy * dy;
                const auto cand = std::make_tuple(sad, mag, dx, dy);
                const auto best = std::make_tuple(best_sad, best_mag, best_dx, best_dy);
                if (!found || cand < best) {
                    found = true;
                    best_sad = sad;
                    best_mag = mag;
                    best_dx = dx;
                    best_dy = dy;
                }
            }
        }
        if (found) b.motion = Vec2i{best_dx, best_dy};
    }
}

namespace {

bool motions_coherent(const Block& a, const Block& b, double tol) {
    if (!a.motion || !b.motion) return true;  // unknown joins anything adjacent
    const Vec2i d = *a.motion - *b.motion;
    return d.norm() <= tol;
}

}  // namespace

std::vector<BlockGroup> group_blocks(const BlockGrid& grid, const ForegroundMask& mask,
                                     double motion_tol, int min_group_blocks) {
    if (mask.width != grid.width || mask.height != grid.height) {
        throw ContractError("group_blocks: mask dimensions mismatch");
    }
    const int n = int(grid.blocks.size());
    DisjointSet ds(n);
    for (int cy = 0; cy < grid.rows; ++cy) {
        for (int cx = 0; cx < grid.cols; ++cx) {
            const int idx = grid.index(cx, cy);
            if (!grid.blocks[std::size_t(idx)].moving) continue;
            // 4-adjacency: right and down neighbors cover every pair once.
            if (cx + 1 < grid.cols && grid.at(cx + 1, cy).moving &&
                motions_coherent(grid.blocks[std::size_t(idx)], grid.at(cx + 1, cy), motion_tol)) {
                ds.unite(idx, grid.index(cx + 1, cy));
            }
            if (cy + 1 < grid.rows && grid.at(cx, cy + 1).moving &&
                motions_coherent(grid.blocks[std::size_t(idx)], grid.at(cx, cy + 1), motion_tol)) {
                ds.unite(idx, grid.index(cx, cy + 1));
            }
        }
    }

    const std::size_t n_roots = std::size_t(n);
    std::vector<std::vector<int>> members_by_root(n_roots);
    for (int idx = 0; idx < n; ++idx) {
        if (grid.blocks[std::size_t(idx)].moving) {
            members_by_root[std::size_t(ds.find(idx))].push_back(idx);
        }
    }

    std::vector<BlockGroup> groups;
    for (auto& members : members_by_root) {
        if (int(members.size()) < min_group_blocks) continue;
        BlockGroup g;
        g.members = members;  // already ascending by construction

        // Centroid and tight box over flagged pixels of the member blocks.
        double sx = 0, sy = 0;
        long long npix = 0;
        int minx = grid.width, miny = grid.height, maxx = -1, maxy = -1;
        for (int idx : g.members) {
            BoundingBox r = grid.rect_of(idx);
            for (int y = r.y; y <= r.bottom(); ++y) {
                for (int x = r.x; x <= r.right(); ++x) {
                    if (!mask.at(x, y)) continue;
                    sx += x + 0.5;
                    sy += y + 0.5;
                    ++npix;
                    minx = std::min(minx, x);
                    miny = std::min(miny, y);
                    maxx = std::max(maxx, x);
                    maxy = std::max(maxy, y);
                }
            }
        }
        if (npix > 0) {
            g.centroid = {sx / double(npix), sy / double(npix)};
            g.bbox = {minx, miny, maxx - minx + 1, maxy - miny + 1};
        } else {
            // Moving blocks always contain flagged pixels, but stay defined.
            g.centroid = grid.center_of(g.members.front());
            g.bbox = grid.rect_of(g.members.front());
        }

        Vec2 vsum{};
        int nv = 0;
        for (int idx : g.members) {
            if (auto m = grid.blocks[std::size_t(idx)].motion) {
                vsum += m->to_vec2();
                ++nv;
            }
        }
        g.velocity = nv > 0 ? vsum * (1.0 / nv) : Vec2{};

        double rmax = 0.0;
        for (int idx : g.members) {
            rmax = std::max(rmax, (grid.center_of(idx) - g.centroid).norm());
        }
        g.radius = rmax;
        groups.push_back(std::move(g));
    }

    std::sort(groups.begin(), groups.end(), [](const BlockGroup& a, const BlockGroup& b) {
        return a.members.front() < b.members.front();
    });
    return groups;
}

double gray_density(int block_index, const BlockGroup& group, const BlockGrid& grid) {
    if (std::find(group.members.begin(), group.members.end(), block_index) ==
        group.members.end()) {
        throw ContractError("gray_density: block is not a member of the group");
    }
    const Block& b = grid.blocks[std::size_t(block_index)];
    if (b.total_count == 0) return 0.0;
    const double frac = double(b.moving_count) / double(b.total_count);
    if (group.radius <= 0.0) return frac;
    const double h_eps = (grid.center_of(block_index) - group.centroid).norm();
    return std::max(0.0, frac * (group.radius - h_eps) / group.radius);
}

}  // namespace cntrack
