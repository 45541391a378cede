#include <doctest.h>

#include <algorithm>
#include <random>

#include "cntrack/eval.hpp"
#include "cntrack/synth.hpp"

using namespace cntrack;

namespace {

ScenarioSpec basic_spec() {
    ScenarioSpec s;
    s.width = 64;
    s.height = 48;
    s.n_frames = 5;
    s.background_gray = 128;
    s.seed = 9;
    TargetSpec t;
    t.bbox = {10, 10, 12, 12};
    t.velocity = {2.0, 0.0};
    t.colors = {base_label_index("red"), base_label_index("yellow")};
    s.targets.push_back(t);
    return s;
}

}  // namespace

TEST_CASE("generate static target repeats frames and truth") {
    ScenarioSpec s = basic_spec();
    s.targets[0].velocity = {0.0, 0.0};
    const SynthResult r = generate(s);
    REQUIRE(r.frames.size() == 5);
    for (int t = 1; t < 5; ++t) {
        CHECK(r.frames[std::size_t(t)].rgb == r.frames[0].rgb);
        CHECK(r.truth.at(t)[0].second == r.truth.at(0)[0].second);
    }
}

TEST_CASE("generate kinematics follow the scenario") {
    const ScenarioSpec s = basic_spec();
    const SynthResult r = generate(s);
    for (int t = 0; t < 5; ++t) {
        const BoundingBox box = r.truth.at(t)[0].second;
        CHECK(box.x == 10 + 2 * t);
        CHECK(box.y == 10);
        CHECK(box.w == 12);
    }
}

TEST_CASE("generate is deterministic per seed, including noise") {
    ScenarioSpec s = basic_spec();
    s.noise_sigma = 12.0;
    const SynthResult a = generate(s);
    const SynthResult b = generate(s);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        CHECK(a.frames[i].rgb == b.frames[i].rgb);
    }
    s.seed = 10;
    const SynthResult c = generate(s);
    CHECK(c.frames[0].rgb != a.frames[0].rgb);
}

TEST_CASE("generate rejects degenerate specs") {
    ScenarioSpec s = basic_spec();
    s.targets[0].bbox.w = 0;
    CHECK_THROWS_AS(generate(s), ContractError);
    s = basic_spec();
    s.targets[0].colors.clear();
    CHECK_THROWS_AS(generate(s), ContractError);
    s = basic_spec();
    s.n_frames = 0;
    CHECK_THROWS_AS(generate(s), ContractError);
}

TEST_CASE("scenario json round trip") {
    ScenarioSpec s = basic_spec();
    s.noise_sigma = 3.5;
    OccluderSpec o;
    o.bbox = {30, 10, 8, 20};
    o.velocity = {1.0, 0.0};
    o.color = kBasePrototypes[std::size_t(base_label_index("blue"))];
    o.from = 1;
    o.to = 3;
    s.occluders.push_back(o);
    const ScenarioSpec back = ScenarioSpec::from_json(s.to_json());
    CHECK(back.width == s.width);
    CHECK(back.noise_sigma == s.noise_sigma);
    REQUIRE(back.targets.size() == 1);
    CHECK(back.targets[0].bbox == s.targets[0].bbox);
    CHECK(back.targets[0].colors == s.targets[0].colors);
    REQUIRE(back.occluders.size() == 1);
    CHECK(back.occluders[0].bbox == o.bbox);
    CHECK(back.occluders[0].from == 1);
    CHECK(back.occluders[0].to == 3);
    const SynthResult ra = generate(s), rb = generate(back);
    for (std::size_t i = 0; i < ra.frames.size(); ++i) {
        CHECK(ra.frames[i].rgb == rb.frames[i].rgb);
    }
}

TEST_CASE("occluders paint over targets only while active") {
    ScenarioSpec s = basic_spec();
    s.targets[0].velocity = {0, 0};
    OccluderSpec o;
    o.bbox = s.targets[0].bbox;
    o.color = kBasePrototypes[std::size_t(base_label_index("blue"))];
    o.from = 2;
    o.to = 2;
    s.occluders.push_back(o);
    const SynthResult r = generate(s);
    const std::uint8_t* before = r.frames[1].at(12, 12);
    const std::uint8_t* during = r.frames[2].at(12, 12);
    CHECK(before[0] == 255);  // red quadrant
    CHECK(during[2] == 255);  // blue occluder on top
}

TEST_CASE("iou identities and worked value") {
    const BoundingBox a{0, 0, 10, 10};
    CHECK(iou(a, a) == doctest::Approx(1.0));
    CHECK(iou(a, {20, 20, 5, 5}) == 0.0);
    CHECK(iou(a, {5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0));
    CHECK(iou(a, {5, 0, 10, 10}) == iou({5, 0, 10, 10}, a));
}

TEST_CASE("evaluate perfect output and shifted output") {
    BoxAnnotations truth;
    std::vector<TrackRecord> records;
    for (int t = 0; t < 10; ++t) {
        const BoundingBox box{10 + t, 20, 40, 40};
        truth[t].emplace_back(1, box);
        records.push_back({t, 7, box, 1.0, TrackMode::Normal});
    }
    SUBCASE("perfect") {
        const EvalReport rep = evaluate(records, truth);
        CHECK(rep.mean_iou == doctest::Approx(1.0));
        CHECK(rep.mean_center_err == doctest::Approx(0.0));
        CHECK(rep.frames_tracked == 10);
        CHECK(rep.frames_total == 10);
    }
    SUBCASE("one pixel shift on 40x40 boxes") {
        for (auto& r : records) r.bbox.x += 1;
        const EvalReport rep = evaluate(records, truth);
        CHECK(rep.mean_center_err == doctest::Approx(1.0));
        CHECK(rep.mean_iou < 1.0);
    }
    SUBCASE("eval_from skips early frames") {
        const EvalReport rep = evaluate(records, truth, 5);
        CHECK(rep.frames_total == 5);
    }
    SUBCASE("missing output counts as zero IoU") {
        records.resize(5);  // frames 5..9 untracked
        const EvalReport rep = evaluate(records, truth);
        CHECK(rep.mean_iou == doctest::Approx(0.5));
        CHECK(rep.frames_tracked == 5);
    }
}

TEST_CASE("evaluate matches a hand-computed mixed case") {
    // 5 frames, one truth track; output drifts then disappears.
    BoxAnnotations truth;
    for (int t = 0; t < 5; ++t) truth[t].emplace_back(1, BoundingBox{0, 0, 10, 10});
    std::vector<TrackRecord> records = {
        {0, 1, {0, 0, 10, 10}, 1.0, TrackMode::Normal},   // iou 1
        {1, 1, {5, 0, 10, 10}, 1.0, TrackMode::Normal},   // iou 1/3, err 5
        {2, 1, {10, 0, 10, 10}, 1.0, TrackMode::Normal},  // iou 0 (touching, no overlap)
        {3, 1, {2, 0, 10, 10}, 1.0, TrackMode::Normal},   // iou 8/12 = 2/3, err 2
    };
    const EvalReport rep = evaluate(records, truth);
    // per-frame ious: 1, 1/3, 0, 2/3, 0(missing) -> mean 0.4
    CHECK(rep.mean_iou == doctest::Approx((1.0 + 1.0 / 3 + 0.0 + 2.0 / 3 + 0.0) / 5));
    // matched frames: 0,1,3 -> center errors 0, 5, 2 -> mean 7/3
    CHECK(rep.mean_center_err == doctest::Approx(7.0 / 3));
    CHECK(rep.frames_tracked == 3);
    CHECK(rep.frames_total == 5);
}

TEST_CASE("evaluate ignores record order within a frame") {
    BoxAnnotations truth;
    truth[0].emplace_back(1, BoundingBox{0, 0, 10, 10});
    truth[0].emplace_back(2, BoundingBox{30, 0, 10, 10});
    std::vector<TrackRecord> fwd = {
        {0, 5, {1, 0, 10, 10}, 1.0, TrackMode::Normal},
        {0, 6, {29, 0, 10, 10}, 1.0, TrackMode::Normal},
    };
    std::vector<TrackRecord> rev = {fwd[1], fwd[0]};
    const EvalReport a = evaluate(fwd, truth);
    const EvalReport b = evaluate(rev, truth);
    CHECK(a.mean_iou == doctest::Approx(b.mean_iou));
    CHECK(a.mean_center_err == doctest::Approx(b.mean_center_err));
}

TEST_CASE("evaluate rejects empty truth") {
    CHECK_THROWS_AS(evaluate({}, BoxAnnotations{}), ContractError);
}

TEST_CASE("records csv round trip is byte-stable") {
    std::vector<TrackRecord> records = {
        {0, 1, {5, 6, 7, 8}, 0.987654, TrackMode::Normal},
        {1, 1, {6, 6, 7, 8}, 0.25, TrackMode::Graded},
        {2, 1, {7, 6, 7, 8}, 0.0, TrackMode::Coasting},
    };
    const auto dir = std::filesystem::temp_directory_path() / "cntrack_records";
    std::filesystem::create_directories(dir);
    write_records_csv(dir / "r.csv", records);
    const auto back = parse_records_csv(dir / "r.csv");
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].frame == records[i].frame);
        CHECK(back[i].bbox == records[i].bbox);
        CHECK(back[i].confidence == doctest::Approx(records[i].confidence));
        CHECK(back[i].mode == records[i].mode);
    }
    CHECK(records_to_csv(back) == records_to_csv(records));
}
