#include "cntrack/sequence_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cntrack {

GrayFrame to_gray_normalized(const Frame& f) {
    GrayFrame g(f.width, f.height, f.index);
    const std::uint8_t* p = f.rgb.data();
    for (std::size_t i = 0; i < g.size(); ++i, p += 3) {
        g.values[i] = float((0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0);
    }
    return g;
}

bool glob_match(const std::string& pattern, const std::string& name) {
    std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

namespace {

bool has_png_signature(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// Skips PPM whitespace and '#' comments, then parses one unsigned integer.
int ppm_token(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) {
        throw IoError(IoError::Kind::BadImage, path, "malformed PPM header");
    }
    int v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = in.get();
    }
    return v;
}

}  // namespace

Frame read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Kind::BadImage, path.string(), "cannot open file");
    char magic[2] = {};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '6') {
        throw IoError(IoError::Kind::BadImage, path.string(), "not a binary PPM (P6)");
    }
    int w = ppm_token(in, path.string());
    int h = ppm_token(in, path.string());
    int maxval = ppm_token(in, path.string());
    if (w <= 0 || h <= 0 || maxval != 255) {
        throw IoError(IoError::Kind::BadImage, path.string(), "unsupported PPM geometry or maxval");
    }
    Frame f(w, h);
    in.read(reinterpret_cast<char*>(f.rgb.data()), std::streamsize(f.rgb.size()));
    if (in.gcount() != std::streamsize(f.rgb.size())) {
        throw IoError(IoError::Kind::BadImage, path.string(), "truncated PPM pixel data");
    }
    return f;
}

void write_ppm(const std::filesystem::path& path, const Frame& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoError::Kind::WriteFailure, path.string(), "cannot open for writing");
    out << "P6\n" << f.width << " " << f.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(f.rgb.data()), std::streamsize(f.rgb.size()));
    if (!out) throw IoError(IoError::Kind::WriteFailure, path.string(), "short write");
}

Frame read_png(const std::filesystem::path& path) {
    FILE* fp = std::fopen(path.string().c_str(), "rb");
    if (!fp) throw IoError(IoError::Kind::BadImage, path.string(), "cannot open file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError(IoError::Kind::BadImage, path.string(), "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError(IoError::Kind::BadImage, path.string(), "PNG decode error");
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    int w = int(png_get_image_width(png, info));
    int h = int(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != std::size_t(w) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError(IoError::Kind::BadImage, path.string(), "unexpected PNG row layout");
    }
    Frame f(w, h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = f.rgb.data() + std::size_t(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return f;
}

void write_png(const std::filesystem::path& path, const Frame& f) {
    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IoError(IoError::Kind::WriteFailure, path.string(), "cannot open for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError(IoError::Kind::WriteFailure, path.string(), "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError(IoError::Kind::WriteFailure, path.string(), "PNG encode error");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, png_uint_32(f.width), png_uint_32(f.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < f.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(f.rgb.data() + std::size_t(y) * f.width * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

Frame read_image(const std::filesystem::path& path) {
    if (has_png_signature(path)) return read_png(path);
    return read_ppm(path);
}

std::vector<Frame> load_sequence(const std::filesystem::path& dir, const std::string& pattern) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw IoError(IoError::Kind::MissingDirectory, dir.string(), "no such directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (glob_match(pattern, entry.path().filename().string())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });
    if (files.size() < 2) {
        throw IoError(IoError::Kind::NoFrames, dir.string(),
                      "no frames: need at least 2 matching images, found " +
                          std::to_string(files.size()));
    }
    std::vector<Frame> frames;
    frames.reserve(files.size());
    for (const auto& p : files) {
        Frame f = read_image(p);
        if (!frames.empty() &&
            (f.width != frames.front().width || f.height != frames.front().height)) {
            throw IoError(IoError::Kind::DimensionMismatch, p.string(),
                          "frame dimensions differ from first frame");
        }
        f.index = int(frames.size());
        frames.push_back(std::move(f));
    }
    return frames;
}

BoxAnnotations parse_mot_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::Kind::BadGroundTruth, path.string(), "cannot open file");
    BoxAnnotations out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // Tolerate a trailing \r and blank lines.
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> tokens;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) tokens.push_back(tok);
        // only frame,id,x,y,w,h are read; extra columns are ignored
        std::vector<double> fields;
        bool bad = false;
        for (std::size_t i = 0; i < 6 && i < tokens.size(); ++i) {
            try {
                std::size_t used = 0;
                double v = std::stod(tokens[i], &used);
                while (used < tokens[i].size() && std::isspace(std::uint8_t(tokens[i][used]))) {
                    ++used;
                }
                if (used != tokens[i].size()) bad = true;
                fields.push_back(v);
            } catch (const std::exception&) {
                bad = true;
                break;
            }
        }
        if (bad || fields.size() < 6) {
            throw IoError(IoError::Kind::BadGroundTruth, path.string(),
                          "malformed ground-truth line " + std::to_string(lineno));
        }
        int frame = int(std::lround(fields[0])) - 1;  // 1-based file -> 0-based index
        int id = int(std::lround(fields[1]));
        BoundingBox box{int(std::lround(fields[2])), int(std::lround(fields[3])),
                        int(std::lround(fields[4])), int(std::lround(fields[5]))};
        out[frame].emplace_back(id, box);
    }
    return out;
}

void write_mot_ground_truth(const std::filesystem::path& path, const BoxAnnotations& gt) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Kind::WriteFailure, path.string(), "cannot open for writing");
    for (const auto& [frame, boxes] : gt) {
        for (const auto& [id, b] : boxes) {
            out << (frame + 1) << "," << id << "," << b.x << "," << b.y << ","
                << b.w << "," << b.h << "\n";
        }
    }
    if (!out) throw IoError(IoError::Kind::WriteFailure, path.string(), "short write");
}

}  // namespace cntrack
