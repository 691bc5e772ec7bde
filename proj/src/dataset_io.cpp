#include "xover/dataset_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "xover/rng.hpp"

namespace xover {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v) {
    std::array<char, 11> buf{};
    std::snprintf(buf.data(), buf.size(), "0x%08X", v);
    return buf.data();
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected, std::size_t header_size) {
    if (bytes.size() >= 4) {
        const std::uint32_t found = read_be32(bytes, 0);
        if (found != expected) {
            throw IdxFormatError("IDX magic mismatch: expected " + hex32(expected) + ", found " + hex32(found));
        }
    }
    if (bytes.size() < header_size) {
        throw IdxLengthError("IDX header truncated: expected " + std::to_string(header_size) +
                             " header bytes, got " + std::to_string(bytes.size()));
    }
}

void check_payload(std::size_t expected, std::size_t actual) {
    if (expected != actual) {
        throw IdxLengthError("IDX payload length mismatch: expected " + std::to_string(expected) +
                             " bytes, got " + std::to_string(actual));
    }
}

}  // namespace

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::MnistTrain: return "mnist-train";
        case Provenance::MnistTest: return "mnist-test";
        case Provenance::Synthetic: return "synthetic";
        case Provenance::Seed: return "seed";
    }
    return "unknown";
}

std::vector<GrayImage> read_idx_images(std::span<const std::uint8_t> bytes) {
    constexpr std::size_t header = 16;
    check_magic(bytes, kIdxImageMagic, header);
    const std::uint64_t count = read_be32(bytes, 4);
    const std::uint64_t rows = read_be32(bytes, 8);
    const std::uint64_t cols = read_be32(bytes, 12);
    const std::uint64_t per_image = rows * cols;
    check_payload(count * per_image, bytes.size() - header);

    std::vector<GrayImage> images;
    images.reserve(count);
    auto payload = bytes.subspan(header);
    for (std::uint64_t i = 0; i < count; ++i) {
        GrayImage img(static_cast<int>(cols), static_cast<int>(rows));
        auto src = payload.subspan(i * per_image, per_image);
        std::copy(src.begin(), src.end(), img.pixels.begin());
        images.push_back(std::move(img));
    }
    return images;
}

std::vector<std::uint8_t> read_idx_labels(std::span<const std::uint8_t> bytes) {
    constexpr std::size_t header = 8;
    check_magic(bytes, kIdxLabelMagic, header);
    const std::uint64_t count = read_be32(bytes, 4);
    check_payload(count, bytes.size() - header);

    std::vector<std::uint8_t> labels(bytes.begin() + header, bytes.end());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 9) {
            throw IdxValueError("IDX label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                                " is outside 0..9");
        }
    }
    return labels;
}

std::vector<std::uint8_t> encode_idx_images(std::span<const GrayImage> images) {
    const int width = images.empty() ? 28 : images.front().width;
    const int height = images.empty() ? 28 : images.front().height;
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.size() * static_cast<std::size_t>(width * height));
    append_be32(out, kIdxImageMagic);
    append_be32(out, static_cast<std::uint32_t>(images.size()));
    append_be32(out, static_cast<std::uint32_t>(height));
    append_be32(out, static_cast<std::uint32_t>(width));
    for (const auto& img : images) {
        if (img.width != width || img.height != height) {
            throw std::invalid_argument("encode_idx_images: images must share one size");
        }
        out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    }
    return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    append_be32(out, kIdxLabelMagic);
    append_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string() + " for reading");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw std::runtime_error("read failed: " + path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

LabeledSet read_idx(const std::filesystem::path& image_path, const std::filesystem::path& label_path,
                    Provenance provenance) {
    LabeledSet set;
    set.provenance = provenance;
    try {
        set.images = read_idx_images(read_file(image_path));
    } catch (const std::exception& e) {
        throw std::runtime_error(image_path.string() + ": " + e.what());
    }
    try {
        set.labels = read_idx_labels(read_file(label_path));
    } catch (const std::exception& e) {
        throw std::runtime_error(label_path.string() + ": " + e.what());
    }
    if (set.images.size() != set.labels.size()) {
        throw IdxLengthError(image_path.string() + " holds " + std::to_string(set.images.size()) + " images but " +
                             label_path.string() + " holds " + std::to_string(set.labels.size()) + " labels");
    }
    return set;
}

void write_idx(const LabeledSet& set, const std::filesystem::path& image_path,
               const std::filesystem::path& label_path) {
    if (set.images.size() != set.labels.size()) {
        throw std::invalid_argument("write_idx: image and label counts differ");
    }
    write_file(image_path, encode_idx_images(set.images));
    write_file(label_path, encode_idx_labels(set.labels));
}

LabeledSet select_seed(const LabeledSet& set, std::size_t n, std::uint64_t rng_seed) {
    if (n > set.size()) {
        throw std::invalid_argument("select_seed: requested " + std::to_string(n) + " samples from a set of " +
                                    std::to_string(set.size()));
    }
    Rng rng(rng_seed);

    std::array<std::vector<std::size_t>, 10> by_class;
    for (std::size_t i = 0; i < set.size(); ++i) {
        by_class[set.labels[i]].push_back(i);
    }
    for (auto& members : by_class) {
        rng.shuffle(std::span(members));
    }

    std::array<std::size_t, 10> quota{};
    for (std::size_t c = 0; c < 10; ++c) {
        quota[c] = n / 10 + (c < n % 10 ? 1 : 0);
    }
    // Classes too small for their quota hand the deficit to the others, in
    // class order, one sample at a time so counts stay as even as possible.
    std::size_t deficit = 0;
    for (std::size_t c = 0; c < 10; ++c) {
        if (quota[c] > by_class[c].size()) {
            deficit += quota[c] - by_class[c].size();
            quota[c] = by_class[c].size();
        }
    }
    while (deficit > 0) {
        bool progressed = false;
        for (std::size_t c = 0; c < 10 && deficit > 0; ++c) {
            if (quota[c] < by_class[c].size()) {
                ++quota[c];
                --deficit;
                progressed = true;
            }
        }
        if (!progressed) {
            break;
        }
    }

    LabeledSet out;
    out.provenance = Provenance::Seed;
    for (std::size_t c = 0; c < 10; ++c) {
        for (std::size_t k = 0; k < quota[c]; ++k) {
            const std::size_t idx = by_class[c][k];
            out.push_back(set.images[idx], set.labels[idx]);
        }
    }
    return out;
}

GrayImage make_contact_sheet(const LabeledSet& set, int grid_cols) {
    if (set.empty()) {
        throw std::invalid_argument("contact sheet needs a nonempty set");
    }
    if (grid_cols < 1) {
        throw std::invalid_argument("contact sheet needs at least one column");
    }
    constexpr std::uint8_t kSeparator = 128;
    const int tile_w = set.images.front().width;
    const int tile_h = set.images.front().height;
    const int count = static_cast<int>(set.size());
    const int cols = std::min(grid_cols, count);
    const int rows = (count + cols - 1) / cols;

    GrayImage sheet(cols * (tile_w + 1) + 1, rows * (tile_h + 1) + 1, kSeparator);
    for (int i = 0; i < count; ++i) {
        const auto& tile = set.images[static_cast<std::size_t>(i)];
        if (tile.width != tile_w || tile.height != tile_h) {
            throw std::invalid_argument("contact sheet images must share one size");
        }
        const int ox = 1 + (i % cols) * (tile_w + 1);
        const int oy = 1 + (i / cols) * (tile_h + 1);
        for (int y = 0; y < tile_h; ++y) {
            for (int x = 0; x < tile_w; ++x) {
                sheet.at(ox + x, oy + y) = tile.at(x, y);
            }
        }
    }
    // Cells past the last image stay background-black.
    for (int i = count; i < rows * cols; ++i) {
        const int ox = 1 + (i % cols) * (tile_w + 1);
        const int oy = 1 + (i / cols) * (tile_h + 1);
        for (int y = 0; y < tile_h; ++y) {
            for (int x = 0; x < tile_w; ++x) {
                sheet.at(ox + x, oy + y) = 0;
            }
        }
    }
    return sheet;
}

void write_png(const GrayImage& image, const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng initialisation failed for " + path.string());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encoding failed for " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(y * image.width)));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_contact_sheet(const LabeledSet& set, const std::filesystem::path& path, int grid_cols) {
    write_png(make_contact_sheet(set, grid_cols), path);
}

}  // namespace xover
