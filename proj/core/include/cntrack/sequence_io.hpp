#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cntrack/errors.hpp"
#include "cntrack/image.hpp"

namespace cntrack {

// Ground truth / tracker output boxes: frame index -> (track id, box).
using BoxAnnotations = std::map<int, std::vector<std::pair<int, BoundingBox>>>;

// Loads all images in dir matching pattern ('*' and '?' wildcards), sorted
// lexicographically by filename. Frame::index follows the sorted order.
// Throws IoError on a missing directory, fewer than two matches, a frame
// size mismatch, or an undecodable file.
std::vector<Frame> load_sequence(const std::filesystem::path& dir,
                                 const std::string& pattern = "*");

// Single-image readers/writers. Format for read_image is sniffed from the
// file magic (PNG signature or PPM "P6").
Frame read_image(const std::filesystem::path& path);
Frame read_ppm(const std::filesystem::path& path);
Frame read_png(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Frame& f);
void write_png(const std::filesystem::path& path, const Frame& f);

// MOT-style CSV: frame,id,x,y,w,h[,...]; 1-based frame numbers in the file
// become 0-based indices, extra columns are ignored. Malformed lines throw
// IoError naming the line number.
BoxAnnotations parse_mot_ground_truth(const std::filesystem::path& path);
void write_mot_ground_truth(const std::filesystem::path& path, const BoxAnnotations& gt);

// Shell-style wildcard match ('*', '?'), exposed for tests.
bool glob_match(const std::string& pattern, const std::string& name);

}  // namespace cntrack
