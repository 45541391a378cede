#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cntrack/meanshift.hpp"

namespace cntrack {

// Every tunable of the pipeline, flat. Keys in config files and CLI flags use
// exactly these field names.
struct TrackerConfig {
    // background model
    double k_sigma = 2.0;
    double sigma_floor = 0.01;
    double alpha_bg = 0.05;
    double alpha_fg = 0.005;
    int init_frames = 10;
    int hist_bins = 32;
    // block analysis
    int block_size = 16;
    double theta = 0.10;
    int search_radius = 8;
    double motion_tol = 2.0;
    int min_group_blocks = 2;
    // color names
    int k_labels = 6;
    double entropy_c = 1.0;
    std::string palette_file;
    // meanshift
    std::string kernel = "epanechnikov";
    double bandwidth_scale = 1.0;
    double ms_eps = 0.5;
    int ms_max_iters = 20;
    // graded matching
    double lambda_min = 0.5;
    double lambda_max = 2.0;
    double min_search_radius = 3.0;
    double conf_threshold = 0.5;
    double component_floor = 0.3;
    int step0 = 2;
    int max_evals = 200;
    // pipeline
    int max_misses = 10;
    double template_update_conf = 0.8;
    double iou_assoc_threshold = 0.3;

    KernelProfile kernel_profile() const;

    // Range-checks every field; throws ContractError naming the first bad key.
    void validate() const;

    // Sets one field from its key name and a string value ("key=value" style).
    // Throws ContractError for unknown keys or unparsable values.
    void apply(const std::string& key, const std::string& value);

    static TrackerConfig from_json_file(const std::filesystem::path& path);
    std::string to_json() const;

    static const std::vector<std::string>& key_names();
};

}  // namespace cntrack
