#include <doctest.h>

#include <random>

#include "cntrack/block_analysis.hpp"
#include "oracles.hpp"

using namespace cntrack;

namespace {

ForegroundMask box_mask(int w, int h, const BoundingBox& box) {
    ForegroundMask m(w, h);
    const BoundingBox vis = box.clip({0, 0, w, h});
    for (int y = vis.y; y <= vis.bottom(); ++y) {
        for (int x = vis.x; x <= vis.right(); ++x) m.set(x, y, true);
    }
    return m;
}

GrayFrame gray_with_box(int w, int h, const BoundingBox& box, float bg, float fg) {
    GrayFrame g(w, h);
    std::fill(g.values.begin(), g.values.end(), bg);
    const BoundingBox vis = box.clip({0, 0, w, h});
    for (int y = vis.y; y <= vis.bottom(); ++y) {
        for (int x = vis.x; x <= vis.right(); ++x) g.at(x, y) = fg;
    }
    return g;
}

}  // namespace

TEST_CASE("partition_blocks counts and geometry") {
    SUBCASE("empty mask") {
        const auto grid = partition_blocks(ForegroundMask(64, 64), 16);
        for (const auto& b : grid.blocks) CHECK(b.moving_count == 0);
    }
    SUBCASE("saturated 64x64 mask") {
        ForegroundMask m(64, 64);
        std::fill(m.flags.begin(), m.flags.end(), std::uint8_t(1));
        const auto grid = partition_blocks(m, 16);
        CHECK(grid.blocks.size() == 16);
        for (const auto& b : grid.blocks) {
            CHECK(b.moving_count == 256);
            CHECK(b.total_count == 256);
        }
    }
    SUBCASE("640x480 grid shape") {
        const auto grid = partition_blocks(ForegroundMask(640, 480), 16);
        CHECK(grid.cols == 40);
        CHECK(grid.rows == 30);
    }
    SUBCASE("edge blocks truncated") {
        const auto grid = partition_blocks(ForegroundMask(100, 70), 16);
        CHECK(grid.cols == 7);
        CHECK(grid.rows == 5);
        CHECK(grid.at(6, 0).total_count == 4 * 16);   // 100 - 96 = 4 wide
        CHECK(grid.at(0, 4).total_count == 16 * 6);   // 70 - 64 = 6 tall
        CHECK(grid.at(6, 4).total_count == 4 * 6);
    }
    SUBCASE("block_size below 4 rejected") {
        CHECK_THROWS_AS(partition_blocks(ForegroundMask(8, 8), 2), ContractError);
    }
}

TEST_CASE("classify_moving_blocks threshold is strict") {
    ForegroundMask m(16, 16);
    auto grid = partition_blocks(m, 16);
    grid.blocks[0].moving_count = 26;  // 26/256 = 10.16% > 10%
    classify_moving_blocks(grid, 0.10);
    CHECK(grid.blocks[0].moving);

    grid.blocks[0].moving_count = 25;  // 9.77%
    classify_moving_blocks(grid, 0.10);
    CHECK_FALSE(grid.blocks[0].moving);

    grid.blocks[0].moving_count = 0;
    classify_moving_blocks(grid, 0.10);
    CHECK_FALSE(grid.blocks[0].moving);

    CHECK_THROWS_AS(classify_moving_blocks(grid, 0.0), ContractError);
    CHECK_THROWS_AS(classify_moving_blocks(grid, 1.0), ContractError);
}

TEST_CASE("estimate_block_motion static and translated content") {
    const int w = 64, h = 64;
    const BoundingBox box{24, 24, 16, 16};

    SUBCASE("identical frames give zero offset") {
        const auto gray = gray_with_box(w, h, box, 0.2f, 0.9f);
        const auto mask = box_mask(w, h, box);
        auto prev = partition_blocks(mask, 16);
        classify_moving_blocks(prev, 0.10);
        auto cur = prev;
        estimate_block_motion(prev, cur, gray, gray, mask, 8);
        for (const auto& b : cur.blocks) {
            if (b.moving) {
                REQUIRE(b.motion.has_value());
                CHECK(*b.motion == Vec2i{0, 0});
            }
        }
    }

    SUBCASE("translation by (2,0) recovered, matches exhaustive oracle") {
        const BoundingBox moved{26, 24, 16, 16};
        const auto prev_gray = gray_with_box(w, h, box, 0.2f, 0.9f);
        const auto cur_gray = gray_with_box(w, h, moved, 0.2f, 0.9f);
        const auto prev_mask = box_mask(w, h, box);
        const auto cur_mask = box_mask(w, h, moved);
        auto prev = partition_blocks(prev_mask, 16);
        classify_moving_blocks(prev, 0.10);
        auto cur = partition_blocks(cur_mask, 16);
        classify_moving_blocks(cur, 0.10);
        estimate_block_motion(prev, cur, prev_gray, cur_gray, prev_mask, 8);
        int checked = 0;
        for (int idx = 0; idx < int(cur.blocks.size()); ++idx) {
            const auto& b = cur.blocks[std::size_t(idx)];
            if (!b.moving) continue;
            const auto expect = oracles::block_match_direct(prev_gray, cur_gray, prev_mask,
                                                            cur.rect_of(idx), 8);
            REQUIRE(b.motion.has_value());
            REQUIRE(expect.has_value());
            CHECK(*b.motion == *expect);
            CHECK(*b.motion == Vec2i{2, 0});
            ++checked;
        }
        CHECK(checked > 0);
    }

    SUBCASE("no previous foreground leaves motion unknown") {
        const auto cur_gray = gray_with_box(w, h, box, 0.2f, 0.9f);
        const auto prev_gray = gray_with_box(w, h, box, 0.2f, 0.2f);  // plain
        const auto cur_mask = box_mask(w, h, box);
        const ForegroundMask prev_mask(w, h);  // nothing moving before
        auto prev = partition_blocks(prev_mask, 16);
        classify_moving_blocks(prev, 0.10);
        auto cur = partition_blocks(cur_mask, 16);
        classify_moving_blocks(cur, 0.10);
        estimate_block_motion(prev, cur, prev_gray, cur_gray, prev_mask, 8);
        for (const auto& b : cur.blocks) {
            if (b.moving) CHECK_FALSE(b.motion.has_value());
        }
    }
}

TEST_CASE("group_blocks coherence and adjacency") {
    ForegroundMask mask(64, 32);
    auto make_grid = [&] {
        auto g = partition_blocks(mask, 16);
        return g;  // 4x2 blocks
    };

    SUBCASE("two adjacent blocks with near motions form one group") {
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 32; ++x) mask.set(x, y, true);
        }
        auto grid = make_grid();
        classify_moving_blocks(grid, 0.10);
        grid.blocks[0].motion = Vec2i{2, 0};
        grid.blocks[1].motion = Vec2i{2, 1};
        const auto groups = group_blocks(grid, mask, 2.0, 2);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].members == std::vector<int>{0, 1});
        CHECK(groups[0].velocity.x == doctest::Approx(2.0));
        CHECK(groups[0].velocity.y == doctest::Approx(0.5));
    }

    SUBCASE("distant blocks split; singletons are discarded") {
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) mask.set(x, y, true);
            for (int x = 48; x < 64; ++x) mask.set(x, y, true);
        }
        auto grid = make_grid();
        classify_moving_blocks(grid, 0.10);
        const auto groups = group_blocks(grid, mask, 2.0, 2);
        CHECK(groups.empty());  // two singletons, both below min_group_blocks
        const auto kept = group_blocks(grid, mask, 2.0, 1);
        CHECK(kept.size() == 2);
    }

    SUBCASE("opposed motions split adjacent blocks") {
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 32; ++x) mask.set(x, y, true);
        }
        auto grid = make_grid();
        classify_moving_blocks(grid, 0.10);
        grid.blocks[0].motion = Vec2i{3, 0};
        grid.blocks[1].motion = Vec2i{-3, 0};
        const auto groups = group_blocks(grid, mask, 2.0, 1);
        CHECK(groups.size() == 2);
    }

    SUBCASE("unknown motion joins an adjacent group") {
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 32; ++x) mask.set(x, y, true);
        }
        auto grid = make_grid();
        classify_moving_blocks(grid, 0.10);
        grid.blocks[0].motion = Vec2i{3, 0};
        grid.blocks[1].motion.reset();
        const auto groups = group_blocks(grid, mask, 2.0, 2);
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].members.size() == 2);
    }
}

TEST_CASE("group_blocks matches brute-force grouping on random grids") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> vel(-3, 3);
    for (int trial = 0; trial < 40; ++trial) {
        const int cols = 6, rows = 5, bs = 8;
        ForegroundMask mask(cols * bs, rows * bs);
        auto grid = partition_blocks(mask, bs);
        for (int i = 0; i < cols * rows; ++i) {
            Block& b = grid.blocks[std::size_t(i)];
            b.moving = coin(rng) == 1;
            if (b.moving) {
                const auto r = grid.rect_of(i);
                for (int y = r.y; y <= r.bottom(); ++y) {
                    for (int x = r.x; x <= r.right(); ++x) mask.set(x, y, true);
                }
                b.moving_count = b.total_count;
                if (coin(rng) == 1) b.motion = Vec2i{vel(rng), vel(rng)};
            }
        }
        const auto groups = group_blocks(grid, mask, 2.0, 2);
        const auto expect = oracles::group_loops(grid, 2.0, 2);
        REQUIRE(groups.size() == expect.size());
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            CHECK(groups[gi].members == expect[gi]);
        }
    }
}

TEST_CASE("gray_density follows the graded density formula") {
    ForegroundMask mask(48, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 48; ++x) mask.set(x, y, true);
    }
    auto grid = partition_blocks(mask, 16);
    classify_moving_blocks(grid, 0.10);
    const auto groups = group_blocks(grid, mask, 2.0, 2);
    REQUIRE(groups.size() == 1);
    const BlockGroup& g = groups[0];  // 3 blocks in a row, centroid at block 1

    SUBCASE("fully flagged block at the centroid has density 1") {
        CHECK(gray_density(1, g, grid) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("boundary block at radius has density 0") {
        CHECK(gray_density(0, g, grid) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(gray_density(2, g, grid) == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("worked mid-range value") {
        // n_i = 50, n = 100, h = 10, h_eps = 5 -> 0.25
        BlockGroup fake;
        fake.members = {0};
        fake.radius = 10.0;
        fake.centroid = grid.center_of(0) + Vec2{5.0, 0.0};
        auto grid2 = grid;
        grid2.blocks[0].moving_count = 50;
        grid2.blocks[0].total_count = 100;
        CHECK(gray_density(0, fake, grid2) == doctest::Approx(0.25).epsilon(1e-9));
    }
    SUBCASE("zero radius degenerates to the flagged fraction") {
        BlockGroup point;
        point.members = {1};
        point.radius = 0.0;
        point.centroid = grid.center_of(1);
        CHECK(gray_density(1, point, grid) == doctest::Approx(1.0));
    }
    SUBCASE("non-member is rejected") {
        BlockGroup g2 = g;
        g2.members = {0, 1};
        CHECK_THROWS_AS(gray_density(2, g2, grid), ContractError);
    }
}

TEST_CASE("gray_density stays in [0,1] for members") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> cnt(0, 64);
    ForegroundMask mask(40, 40);
    auto grid = partition_blocks(mask, 8);
    for (auto& b : grid.blocks) {
        b.moving = true;
        b.moving_count = std::min(cnt(rng), b.total_count);
    }
    std::vector<int> all(grid.blocks.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = int(i);
    BlockGroup g;
    g.members = all;
    g.centroid = {20.0, 20.0};
    double rmax = 0;
    for (int i : all) rmax = std::max(rmax, (grid.center_of(i) - g.centroid).norm());
    g.radius = rmax;
    for (int i : all) {
        const double f = gray_density(i, g, grid);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }
}
