#pragma once

// Grayscale image I/O (PGM P2/P5, maxval <= 255) and pre-processing.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "facekit/error.hpp"
#include "facekit/matrix.hpp"

namespace facekit {

namespace detail {

// Tokenizer over a PGM header/ASCII body: skips whitespace and '#' comments.
class PnmScanner {
public:
    explicit PnmScanner(const std::string& bytes) : bytes_(bytes) {}

    std::string next_token() {
        skip_separators();
        require(pos_ < bytes_.size(), errc::truncated_data,
                "unexpected end of PGM data");
        std::size_t start = pos_;
        while (pos_ < bytes_.size() &&
               !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
            ++pos_;
        return bytes_.substr(start, pos_ - start);
    }

    int next_int(const char* what) {
        const std::string tok = next_token();
        for (char ch : tok)
            require(std::isdigit(static_cast<unsigned char>(ch)) != 0,
                    errc::malformed_header, std::string("bad PGM value for ") + what);
        require(tok.size() <= 9, errc::malformed_header,
                std::string("PGM value out of range for ") + what);
        return std::stoi(tok);
    }

    // Position just past the single whitespace byte that terminates the
    // header before a P5 raster.
    std::size_t raster_offset() {
        require(pos_ < bytes_.size(), errc::truncated_data, "missing raster data");
        require(std::isspace(static_cast<unsigned char>(bytes_[pos_])) != 0,
                errc::malformed_header, "expected whitespace before raster");
        return pos_ + 1;
    }

private:
    void skip_separators() {
        while (pos_ < bytes_.size()) {
            const unsigned char ch = static_cast<unsigned char>(bytes_[pos_]);
            if (std::isspace(ch)) {
                ++pos_;
            } else if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_error, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    require(!in.bad(), errc::io_error, "read failure on " + path.string());
    return std::move(buf).str();
}

}  // namespace detail

inline ImageMatrix load_pgm(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file_bytes(path);
    detail::PnmScanner scan(bytes);

    const std::string magic = scan.next_token();
    require(magic == "P2" || magic == "P5", errc::malformed_header,
            "not a P2/P5 PGM file: " + path.string());
    const int width = scan.next_int("width");
    const int height = scan.next_int("height");
    require(width >= 1 && height >= 1, errc::malformed_header,
            "non-positive PGM dimensions");
    const int maxval = scan.next_int("maxval");
    require(maxval >= 1, errc::malformed_header, "non-positive PGM maxval");
    require(maxval <= 255, errc::unsupported_maxval,
            "PGM maxval above 255 is not supported");

    const std::size_t count =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> entries(count);
    if (magic == "P5") {
        const std::size_t offset = scan.raster_offset();
        require(bytes.size() - offset >= count, errc::truncated_data,
                "P5 raster shorter than declared size");
        for (std::size_t i = 0; i < count; ++i)
            entries[i] = static_cast<double>(
                static_cast<std::uint8_t>(bytes[offset + i]));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const int v = scan.next_int("sample");
            require(v <= maxval, errc::malformed_header,
                    "P2 sample exceeds declared maxval");
            entries[i] = static_cast<double>(v);
        }
    }
    return ImageMatrix(static_cast<std::size_t>(height),
                       static_cast<std::size_t>(width), std::move(entries));
}

// Writes P5 (binary) or P2 (ASCII). Entries are rounded and clamped to
// [0, 255]; integer-valued images round-trip bit-exactly.
inline void save_pgm(const std::filesystem::path& path, const ImageMatrix& img,
                     bool binary = true) {
    std::ostringstream out;
    out << (binary ? "P5" : "P2") << "\n"
        << img.cols() << " " << img.rows() << "\n255\n";
    const auto quantize = [](double v) {
        return static_cast<int>(std::clamp(std::lround(v), 0L, 255L));
    };
    if (binary) {
        std::string raster(img.size(), '\0');
        const auto data = img.data();
        for (std::size_t i = 0; i < data.size(); ++i)
            raster[i] = static_cast<char>(static_cast<unsigned char>(quantize(data[i])));
        out << raster;
    } else {
        for (std::size_t i = 0; i < img.rows(); ++i) {
            for (std::size_t j = 0; j < img.cols(); ++j) {
                out << quantize(img(i, j));
                out << (j + 1 == img.cols() ? '\n' : ' ');
            }
        }
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    require(file.good(), errc::io_error, "cannot open " + path.string() + " for write");
    const std::string payload = std::move(out).str();
    file.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    require(file.good(), errc::io_error, "write failure on " + path.string());
}

// Histogram equalization over the integer intensity domain [0, 255]:
//   v -> round(255 * (cdf(v) - cdf_min) / (N - cdf_min))
// with cdf the cumulative pixel-count histogram and cdf_min its smallest
// nonzero value. A constant image is returned unchanged and flagged.
inline ImageMatrix histogram_equalize(const ImageMatrix& img,
                                      bool* constant_image = nullptr) {
    const auto data = img.data();
    std::array<std::size_t, 256> hist{};
    for (double v : data) {
        require(v >= 0.0 && v <= 255.0 && v == std::floor(v), errc::bad_argument,
                "histogram_equalize expects integer intensities in [0, 255]");
        ++hist[static_cast<std::size_t>(v)];
    }
    const std::size_t total = data.size();

    if (constant_image) *constant_image = false;
    for (std::size_t level = 0; level < hist.size(); ++level) {
        if (hist[level] == total) {
            if (constant_image) *constant_image = true;
            return img;
        }
    }

    std::array<std::size_t, 256> cdf{};
    std::size_t running = 0;
    std::size_t cdf_min = 0;
    for (std::size_t level = 0; level < hist.size(); ++level) {
        running += hist[level];
        cdf[level] = running;
        if (cdf_min == 0 && running > 0) cdf_min = running;
    }

    std::array<double, 256> lut{};
    const double denom = static_cast<double>(total - cdf_min);
    for (std::size_t level = 0; level < lut.size(); ++level)
        lut[level] = static_cast<double>(std::lround(
            255.0 * static_cast<double>(cdf[level] - std::min(cdf[level], cdf_min)) /
            denom));

    ImageMatrix out(img.rows(), img.cols());
    for (std::size_t i = 0; i < img.rows(); ++i)
        for (std::size_t j = 0; j < img.cols(); ++j)
            out(i, j) = lut[static_cast<std::size_t>(img(i, j))];
    return out;
}

inline ImageMatrix center_crop(const ImageMatrix& img, std::size_t rows,
                               std::size_t cols) {
    require(rows >= 1 && cols >= 1, errc::bad_argument, "crop size must be positive");
    require(rows <= img.rows() && cols <= img.cols(), errc::dimension_mismatch,
            "crop larger than image");
    const std::size_t top = (img.rows() - rows) / 2;
    const std::size_t left = (img.cols() - cols) / 2;
    ImageMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = img(top + i, left + j);
    return out;
}

inline ImageMatrix resize_nearest(const ImageMatrix& img, std::size_t rows,
                                  std::size_t cols) {
    require(rows >= 1 && cols >= 1, errc::bad_argument, "resize target must be positive");
    ImageMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t src_i = std::min(img.rows() - 1, i * img.rows() / rows);
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t src_j = std::min(img.cols() - 1, j * img.cols() / cols);
            out(i, j) = img(src_i, src_j);
        }
    }
    return out;
}

}  // namespace facekit
