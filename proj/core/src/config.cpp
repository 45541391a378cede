#include "cntrack/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <limits>

#include "cntrack/errors.hpp"

namespace cntrack {

namespace {

using Json = nlohmann::json;

struct KeyDef {
    const char* name;
    enum { Double, Int, String } type;
    double lo, hi;  // inclusive range for numeric keys
    std::function<void(TrackerConfig&, double)> set_num;
    std::function<double(const TrackerConfig&)> get_num;
    std::function<void(TrackerConfig&, std::string)> set_str;
    std::function<std::string(const TrackerConfig&)> get_str;
};

#define NUM_KEY(field, kind, lo, hi)                                       \
    KeyDef{#field, KeyDef::kind, lo, hi,                                   \
           [](TrackerConfig& c, double v) { c.field = decltype(c.field)(v); }, \
           [](const TrackerConfig& c) { return double(c.field); }, nullptr, nullptr}
#define STR_KEY(field)                                                  \
    KeyDef{#field, KeyDef::String, 0, 0, nullptr, nullptr,              \
           [](TrackerConfig& c, std::string v) { c.field = std::move(v); }, \
           [](const TrackerConfig& c) { return c.field; }}

const std::vector<KeyDef>& registry() {
    static const double inf = std::numeric_limits<double>::infinity();
    static const std::vector<KeyDef> keys = {
        NUM_KEY(k_sigma, Double, 1e-9, inf),
        NUM_KEY(sigma_floor, Double, 0.0, 1.0),
        NUM_KEY(alpha_bg, Double, 0.0, 1.0),
        NUM_KEY(alpha_fg, Double, 0.0, 1.0),
        NUM_KEY(init_frames, Int, 2, 100000),
        NUM_KEY(hist_bins, Int, 2, 4096),
        NUM_KEY(block_size, Int, 4, 1024),
        NUM_KEY(theta, Double, 1e-9, 1.0 - 1e-9),
        NUM_KEY(search_radius, Int, 1, 256),
        NUM_KEY(motion_tol, Double, 0.0, inf),
        NUM_KEY(min_group_blocks, Int, 1, 100000),
        NUM_KEY(k_labels, Int, 1, 11),
        NUM_KEY(entropy_c, Double, 1e-12, inf),
        STR_KEY(palette_file),
        STR_KEY(kernel),
        NUM_KEY(bandwidth_scale, Double, 1e-3, 100.0),
        NUM_KEY(ms_eps, Double, 1e-6, 100.0),
        NUM_KEY(ms_max_iters, Int, 0, 10000),
        NUM_KEY(lambda_min, Double, 0.0, 100.0),
        NUM_KEY(lambda_max, Double, 0.0, 100.0),
        NUM_KEY(min_search_radius, Double, 1.0, 1000.0),
        NUM_KEY(conf_threshold, Double, 0.0, 1.0),
        NUM_KEY(component_floor, Double, 0.0, 1.0),
        NUM_KEY(step0, Int, 1, 1024),
        NUM_KEY(max_evals, Int, 1, 1000000),
        NUM_KEY(max_misses, Int, 0, 100000),
        NUM_KEY(template_update_conf, Double, 0.0, 1.0),
        NUM_KEY(iou_assoc_threshold, Double, 0.0, 1.0),
    };
    return keys;
}

#undef NUM_KEY
#undef STR_KEY

const KeyDef* find_key(const std::string& name) {
    for (const auto& k : registry()) {
        if (name == k.name) return &k;
    }
    return nullptr;
}

}  // namespace

KernelProfile TrackerConfig::kernel_profile() const {
    if (kernel == "epanechnikov") return KernelProfile::Epanechnikov;
    if (kernel == "gaussian") return KernelProfile::Gaussian;
    throw ContractError("config: kernel must be 'epanechnikov' or 'gaussian'");
}

void TrackerConfig::validate() const {
    for (const auto& k : registry()) {
        if (k.type == KeyDef::String) continue;
        const double v = k.get_num(*this);
        if (v < k.lo || v > k.hi) {
            throw ContractError(std::string("config: ") + k.name + " out of range");
        }
        if (k.type == KeyDef::Int && v != double(static_cast<long long>(v))) {
            throw ContractError(std::string("config: ") + k.name + " must be an integer");
        }
    }
    kernel_profile();  // rejects unknown kernel names
    if (alpha_fg > alpha_bg) {
        throw ContractError("config: alpha_fg must be <= alpha_bg");
    }
    if (lambda_min >= lambda_max) {
        throw ContractError("config: lambda_min must be < lambda_max");
    }
}

void TrackerConfig::apply(const std::string& key, const std::string& value) {
    const KeyDef* k = find_key(key);
    if (!k) throw ContractError("config: unknown key '" + key + "'");
    if (k->type == KeyDef::String) {
        k->set_str(*this, value);
        return;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        k->set_num(*this, v);
    } catch (const std::exception&) {
        throw ContractError("config: cannot parse value for '" + key + "'");
    }
}

TrackerConfig TrackerConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(IoError::Kind::MissingDirectory, path.string(),
                      "cannot open config file");
    }
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ContractError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ContractError("config: top level must be an object");
    TrackerConfig c;
    for (const auto& [key, val] : j.items()) {
        const KeyDef* k = find_key(key);
        if (!k) throw ContractError("config: unknown key '" + key + "'");
        if (k->type == KeyDef::String) {
            if (!val.is_string()) throw ContractError("config: '" + key + "' must be a string");
            k->set_str(c, val.get<std::string>());
        } else {
            if (!val.is_number()) throw ContractError("config: '" + key + "' must be a number");
            k->set_num(c, val.get<double>());
        }
    }
    return c;
}

std::string TrackerConfig::to_json() const {
    Json j = Json::object();
    for (const auto& k : registry()) {
        if (k.type == KeyDef::String) {
            j[k.name] = k.get_str(*this);
        } else if (k.type == KeyDef::Int) {
            j[k.name] = (long long)k.get_num(*this);
        } else {
            j[k.name] = k.get_num(*this);
        }
    }
    return j.dump(2);
}

const std::vector<std::string>& TrackerConfig::key_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& k : registry()) v.push_back(k.name);
        return v;
    }();
    return names;
}

}  // namespace cntrack
