#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cntrack/eval.hpp"
#include "cntrack/synth.hpp"
#include "cntrack/tracker.hpp"

namespace fs = std::filesystem;
using namespace cntrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

TrackerConfig make_config(const std::string& config_path,
                          const std::vector<std::string>& overrides) {
    TrackerConfig cfg;
    if (!config_path.empty()) cfg = TrackerConfig::from_json_file(config_path);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ContractError("--set expects key=value, got '" + kv + "'");
        }
        cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

void draw_box(Frame& f, const BoundingBox& box, const Rgb& color) {
    const BoundingBox vis = box.clip(f.bounds());
    if (!vis.valid()) return;
    auto put = [&](int x, int y) {
        std::uint8_t* px = f.at(x, y);
        px[0] = color[0];
        px[1] = color[1];
        px[2] = color[2];
    };
    for (int x = vis.x; x <= vis.right(); ++x) {
        if (box.y >= 0 && box.y < f.height) put(x, box.y);
        if (box.bottom() >= 0 && box.bottom() < f.height) put(x, box.bottom());
    }
    for (int y = vis.y; y <= vis.bottom(); ++y) {
        if (box.x >= 0 && box.x < f.width) put(box.x, y);
        if (box.right() >= 0 && box.right() < f.width) put(box.right(), y);
    }
}

Rgb id_color(int id) {
    static const Rgb palette[] = {{255, 0, 0},   {0, 255, 0},   {0, 128, 255},
                                  {255, 255, 0}, {255, 0, 255}, {0, 255, 255}};
    return palette[std::size_t(id) % std::size(palette)];
}

int cmd_track(const std::string& input_dir, const std::string& pattern,
              const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_csv, const std::string& overlay_dir) {
    const TrackerConfig cfg = make_config(config_path, overrides);
    const std::vector<Frame> frames = load_sequence(input_dir, pattern);

    if (!overlay_dir.empty()) fs::create_directories(overlay_dir);

    Tracker tracker(cfg);
    std::vector<TrackRecord> all;
    for (const Frame& f : frames) {
        const auto records = tracker.process(f);
        all.insert(all.end(), records.begin(), records.end());
        if (!overlay_dir.empty()) {
            Frame annotated = f;
            for (const auto& r : records) draw_box(annotated, r.bbox, id_color(r.id));
            char name[32];
            std::snprintf(name, sizeof(name), "overlay_%05d.png", f.index);
            write_png(fs::path(overlay_dir) / name, annotated);
        }
    }
    write_records_csv(out_csv, all);
    std::cout << "wrote " << all.size() << " records over " << frames.size()
              << " frames to " << out_csv << "\n";
    return kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              const std::string& format) {
    const ScenarioSpec spec = ScenarioSpec::from_json_file(spec_path);
    const SynthResult res = generate(spec);
    fs::create_directories(out_dir);
    for (const Frame& f : res.frames) {
        char name[32];
        if (format == "png") {
            std::snprintf(name, sizeof(name), "f%05d.png", f.index);
            write_png(fs::path(out_dir) / name, f);
        } else {
            std::snprintf(name, sizeof(name), "f%05d.ppm", f.index);
            write_ppm(fs::path(out_dir) / name, f);
        }
    }
    write_mot_ground_truth(fs::path(out_dir) / "truth.csv", res.truth);
    std::cout << "wrote " << res.frames.size() << " frames and truth.csv to " << out_dir
              << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& output_csv, const std::string& truth_csv, int eval_from,
             const std::string& json_path) {
    const auto records = parse_records_csv(output_csv);
    const auto truth = parse_mot_ground_truth(truth_csv);
    const EvalReport rep = evaluate(records, truth, eval_from);
    std::cout << rep.table();
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << rep.to_json() << "\n";
    }
    return kExitOk;
}

int cmd_bench(const std::string& input_dir, const std::string& pattern,
              const std::string& config_path, const std::vector<std::string>& overrides,
              int repeat) {
    const TrackerConfig cfg = make_config(config_path, overrides);
    const std::vector<Frame> frames = load_sequence(input_dir, pattern);
    std::vector<double> fps;
    for (int i = 0; i < repeat; ++i) {
        const LoopResult r = run_tracking_loop(frames, cfg);
        fps.push_back(r.fps);
        std::printf("run %d: %d frames in %.3f s -> %.2f fps\n", i + 1, r.frames,
                    r.seconds, r.fps);
    }
    std::sort(fps.begin(), fps.end());
    const double median = fps.size() % 2 == 1
                              ? fps[fps.size() / 2]
                              : 0.5 * (fps[fps.size() / 2 - 1] + fps[fps.size() / 2]);
    std::printf("median_fps %.2f\n", median);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block-gated color-names tracker"};
    app.require_subcommand(1);

    std::string input_dir, pattern = "*", config_path, out_csv = "tracks.csv";
    std::string overlay_dir, spec_path, out_dir, format = "ppm";
    std::string output_csv, truth_csv, json_path;
    std::vector<std::string> overrides;
    int repeat = 3, eval_from = 0;

    CLI::App* track = app.add_subcommand("track", "run the tracker over an image sequence");
    track->add_option("input_dir", input_dir, "directory of PNG/PPM frames")->required();
    track->add_option("--pattern", pattern, "filename glob (default '*')");
    track->add_option("--config", config_path, "JSON config file");
    track->add_option("--set", overrides, "override one config key (key=value)");
    track->add_option("--out", out_csv, "output CSV path (default tracks.csv)");
    track->add_option("--overlay", overlay_dir, "write per-frame overlay PNGs here");

    CLI::App* synth = app.add_subcommand("synth", "render a synthetic scenario");
    synth->add_option("spec", spec_path, "scenario spec JSON")->required();
    synth->add_option("out_dir", out_dir, "output directory")->required();
    synth->add_option("--format", format, "ppm (default) or png")
        ->check(CLI::IsMember({"ppm", "png"}));

    CLI::App* eval_cmd = app.add_subcommand("eval", "score tracker output against truth");
    eval_cmd->add_option("output_csv", output_csv, "tracker output CSV")->required();
    eval_cmd->add_option("truth_csv", truth_csv, "MOT-style ground truth CSV")->required();
    eval_cmd->add_option("--eval-from", eval_from, "first frame index to score");
    eval_cmd->add_option("--json", json_path, "also write the full report as JSON");

    CLI::App* bench = app.add_subcommand("bench", "measure tracking throughput");
    bench->add_option("input_dir", input_dir, "directory of PNG/PPM frames")->required();
    bench->add_option("--pattern", pattern, "filename glob (default '*')");
    bench->add_option("--config", config_path, "JSON config file");
    bench->add_option("--set", overrides, "override one config key (key=value)");
    bench->add_option("--repeat", repeat, "number of timed runs (default 3)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (track->parsed()) {
            return cmd_track(input_dir, pattern, config_path, overrides, out_csv,
                             overlay_dir);
        }
        if (synth->parsed()) return cmd_synth(spec_path, out_dir, format);
        if (eval_cmd->parsed()) return cmd_eval(output_csv, truth_csv, eval_from, json_path);
        if (bench->parsed()) {
            return cmd_bench(input_dir, pattern, config_path, overrides, repeat);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
