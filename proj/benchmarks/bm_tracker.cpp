#include <benchmark/benchmark.h>

#include <random>

#include "cntrack/background_model.hpp"
#include "cntrack/block_analysis.hpp"
#include "cntrack/color_names.hpp"
#include "cntrack/eval.hpp"
#include "cntrack/meanshift.hpp"
#include "cntrack/synth.hpp"
#include "cntrack/tracker.hpp"

using namespace cntrack;

namespace {

ScenarioSpec vga_scenario(int n_frames) {
    ScenarioSpec s;
    s.width = 640;
    s.height = 480;
    s.n_frames = n_frames;
    s.background_gray = 128;
    s.seed = 3;
    TargetSpec t;
    t.bbox = {80, 120, 48, 48};
    t.velocity = {2, 1};
    t.colors = {base_label_index("red"), base_label_index("yellow")};
    s.targets.push_back(t);
    return s;
}

GrayFrame noise_frame(int w, int h, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> noise{0.5f, 0.06f};
    GrayFrame g(w, h);
    for (auto& v : g.values) v = noise(rng);
    return g;
}

}  // namespace

static void BM_ToGrayNormalized(benchmark::State& state) {
    const SynthResult synth = generate(vga_scenario(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(to_gray_normalized(synth.frames[0]));
    }
}
BENCHMARK(BM_ToGrayNormalized);

static void BM_ClassifyForeground(benchmark::State& state) {
    const int w = 640, h = 480;
    GaussianBackground m;
    m.width = w;
    m.height = h;
    m.mu.assign(std::size_t(w) * h, 0.5f);
    m.sigma2.assign(std::size_t(w) * h, 0.0036f);
    const GrayFrame g = noise_frame(w, h, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(m.classify(g));
    }
}
BENCHMARK(BM_ClassifyForeground);

static void BM_UpdateModel(benchmark::State& state) {
    const int w = 640, h = 480;
    GaussianBackground m;
    m.width = w;
    m.height = h;
    m.mu.assign(std::size_t(w) * h, 0.5f);
    m.sigma2.assign(std::size_t(w) * h, 0.0036f);
    const GrayFrame g = noise_frame(w, h, 2);
    const std::vector<std::uint8_t> region(std::size_t(w) * h, 0);
    for (auto _ : state) {
        m.update(g, region, {});
    }
}
BENCHMARK(BM_UpdateModel);

static void BM_RefineByGrayHistogram(benchmark::State& state) {
    const int w = 640, h = 480;
    const GrayFrame g = noise_frame(w, h, 3);
    ForegroundMask mask(w, h);
    for (int y = 100; y < 160; ++y) {
        for (int x = 200; x < 260; ++x) mask.set(x, y, true);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(refine_by_gray_histogram(mask, g));
    }
}
BENCHMARK(BM_RefineByGrayHistogram);

static void BM_BlockMotionEstimation(benchmark::State& state) {
    const SynthResult synth = generate(vga_scenario(2));
    const GrayFrame g0 = to_gray_normalized(synth.frames[0]);
    const GrayFrame g1 = to_gray_normalized(synth.frames[1]);
    ForegroundMask mask(640, 480);
    for (int y = 120; y < 168; ++y) {
        for (int x = 80; x < 128; ++x) mask.set(x, y, true);
    }
    auto prev = partition_blocks(mask, 16);
    classify_moving_blocks(prev, 0.10);
    const auto cur = prev;
    for (auto _ : state) {
        auto grid = cur;
        estimate_block_motion(prev, grid, g0, g1, mask, 8);
        benchmark::DoNotOptimize(grid);
    }
}
BENCHMARK(BM_BlockMotionEstimation);

static void BM_MapRgbToBaseLabels(benchmark::State& state) {
    const SynthResult synth = generate(vga_scenario(1));
    const ColorPalette palette;
    const BoundingBox window{60, 100, 96, 96};
    for (auto _ : state) {
        benchmark::DoNotOptimize(map_rgb_to_base_labels(synth.frames[0], window, palette));
    }
}
BENCHMARK(BM_MapRgbToBaseLabels);

static void BM_MeanShiftIterate(benchmark::State& state) {
    const BoundingBox window{0, 0, 61, 61};
    WeightField blob(window);
    for (int y = 0; y < 61; ++y) {
        for (int x = 0; x < 61; ++x) {
            const double dx = x - 25.0, dy = y - 28.0;
            blob.weights[std::size_t(y) * 61 + x] = std::exp(-(dx * dx + dy * dy) / 50.0);
        }
    }
    const KernelSpec k{KernelProfile::Epanechnikov, 14.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            meanshift_iterate({18.0, 20.0}, [&](const Vec2&) { return blob; }, k, 0.5, 20));
    }
}
BENCHMARK(BM_MeanShiftIterate);

static void BM_TrackerStepVga(benchmark::State& state) {
    const SynthResult synth = generate(vga_scenario(120));
    Tracker warm{TrackerConfig{}};
    // run past bootstrap so the steady-state per-frame cost is measured
    std::size_t i = 0;
    for (; i < 30; ++i) warm.process(synth.frames[i]);
    for (auto _ : state) {
        if (i >= synth.frames.size()) {
            state.PauseTiming();
            warm = Tracker{TrackerConfig{}};
            for (i = 0; i < 30; ++i) warm.process(synth.frames[i]);
            state.ResumeTiming();
        }
        benchmark::DoNotOptimize(warm.process(synth.frames[i++]));
    }
}
BENCHMARK(BM_TrackerStepVga)->Unit(benchmark::kMillisecond);

static void BM_FullLoopVga100(benchmark::State& state) {
    const SynthResult synth = generate(vga_scenario(100));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_tracking_loop(synth.frames, {}));
    }
    const LoopResult r = run_tracking_loop(synth.frames, {});
    state.counters["fps"] = r.fps;
}
BENCHMARK(BM_FullLoopVga100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
