#pragma once

// MNIST-style IDX containers, seed subset selection and contact sheets.
//
// IDX layout (all integers big-endian):
//   images: 0x00000803, count, rows, cols, then count*rows*cols bytes
//   labels: 0x00000801, count, then count bytes

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xover {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Grayscale raster, row-major with the origin at the top-left.
struct GrayImage {
    int width = 28;
    int height = 28;
    std::vector<std::uint8_t> pixels;

    GrayImage() : pixels(static_cast<std::size_t>(width * height), 0) {}
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y * width + x)]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y * width + x)]; }

    bool operator==(const GrayImage&) const = default;
};

enum class Provenance { MnistTrain, MnistTest, Synthetic, Seed };

std::string_view to_string(Provenance p);

struct LabeledSet {
    std::vector<GrayImage> images;
    std::vector<std::uint8_t> labels;
    Provenance provenance = Provenance::Synthetic;

    std::size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }
    void push_back(GrayImage image, std::uint8_t label) {
        images.push_back(std::move(image));
        labels.push_back(label);
    }

    // Images and labels are compared; the provenance tag is metadata.
    bool same_content(const LabeledSet& other) const {
        return images == other.images && labels == other.labels;
    }
};

// Wrong magic number.
class IdxFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Payload shorter or longer than the header declares.
class IdxLengthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Label byte outside 0..9.
class IdxValueError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<GrayImage> read_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_idx_labels(std::span<const std::uint8_t> bytes);

// All images of a set must share one size. An empty set is written as 0x0
// images of the default 28x28 geometry.
std::vector<std::uint8_t> encode_idx_images(std::span<const GrayImage> images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Reads an image/label file pair; counts must agree.
LabeledSet read_idx(const std::filesystem::path& image_path, const std::filesystem::path& label_path,
                    Provenance provenance);

void write_idx(const LabeledSet& set, const std::filesystem::path& image_path,
               const std::filesystem::path& label_path);

// Class-stratified draw of n samples without replacement: n/10 per digit,
// the remainder given to the lowest digit classes. When a class holds fewer
// samples than its quota the shortfall is filled from the remaining pool.
// Output order: class-major, within class in draw order.
LabeledSet select_seed(const LabeledSet& set, std::size_t n, std::uint64_t rng_seed);

// Tiles images left-to-right, top-to-bottom, with 1-px separators (and a
// 1-px frame) at intensity 128. Returns the sheet before encoding.
GrayImage make_contact_sheet(const LabeledSet& set, int grid_cols);

void write_png(const GrayImage& image, const std::filesystem::path& path);
void write_contact_sheet(const LabeledSet& set, const std::filesystem::path& path, int grid_cols);

}  // namespace xover
