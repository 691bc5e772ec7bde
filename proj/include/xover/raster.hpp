#pragma once

// Binary raster primitives: binarization, Zhang-Suen thinning, 3x3 dilation,
// shifted overlay and 8-connected component labelling. All morphology clips at
// the canvas border; nothing outside the canvas is ever foreground.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xover/dataset_io.hpp"

namespace xover {

struct Pixel {
    int x = 0;
    int y = 0;

    bool operator==(const Pixel&) const = default;
    // Raster order: by row, then column.
    friend bool operator<(const Pixel& a, const Pixel& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; }
};

using PixelSet = std::vector<Pixel>;

struct Offset {
    int dx = 0;
    int dy = 0;

    bool operator==(const Offset&) const = default;
};

class BinaryImage {
public:
    BinaryImage() : BinaryImage(28, 28) {}
    BinaryImage(int width, int height) : width_(width), height_(height), mask_(static_cast<std::size_t>(width * height), 0) {}

    int width() const { return width_; }
    int height() const { return height_; }

    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool get(int x, int y) const { return mask_[index(x, y)] != 0; }
    // Out-of-canvas reads are background.
    bool get_or_false(int x, int y) const { return in_bounds(x, y) && get(x, y); }
    void set(int x, int y, bool on = true) { mask_[index(x, y)] = on ? 1 : 0; }

    std::size_t count() const;
    bool empty() const { return count() == 0; }
    PixelSet pixels() const;

    const std::vector<std::uint8_t>& mask() const { return mask_; }

    bool operator==(const BinaryImage&) const = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y * width_ + x); }

    int width_;
    int height_;
    std::vector<std::uint8_t> mask_;
};

// A thinned binary image. Obtained from thin(), or from from_thin() which
// verifies that a further thinning pass would remove nothing.
class Skeleton {
public:
    static Skeleton from_thin(BinaryImage image);

    const BinaryImage& image() const { return image_; }
    int width() const { return image_.width(); }
    int height() const { return image_.height(); }

    bool operator==(const Skeleton&) const = default;

private:
    friend Skeleton thin(const BinaryImage& img);
    explicit Skeleton(BinaryImage image) : image_(std::move(image)) {}

    BinaryImage image_;
};

inline constexpr int kDefaultThreshold = 128;

// Foreground iff intensity >= threshold.
BinaryImage binarize(const GrayImage& img, int threshold = kDefaultThreshold);

// 0 -> 0, foreground -> 255.
GrayImage to_gray(const BinaryImage& img);

BinaryImage from_pixels(int width, int height, const PixelSet& pixels);

// Zhang-Suen two-subiteration thinning with parallel deletion, iterated to
// convergence. If a subiteration would delete every pixel of a component
// (2x2 blocks do this), the component's first pixel in raster order is kept.
Skeleton thin(const BinaryImage& img);

// Runs a single full pass (both subiterations) and returns how many pixels it
// removed. Used to check the thinness invariant.
std::size_t thinning_pass(BinaryImage& img);

BinaryImage dilate(const BinaryImage& img, int iterations);

// Shifts `img` by (dx, dy); pixels leaving the canvas are dropped.
BinaryImage translate(const BinaryImage& img, Offset offset);

struct OverlayResult {
    BinaryImage union_mask;
    BinaryImage intersection;
};

// Union and intersection of `base` with `other` shifted by `offset`, in
// base's frame.
OverlayResult overlay(const BinaryImage& base, const BinaryImage& other, Offset offset);

// Maximal 8-connected foreground sets, ordered by their smallest (y, x)
// pixel; pixels inside each set are in raster order.
std::vector<PixelSet> connected_components(const BinaryImage& img);

std::size_t count_components(const BinaryImage& img);

}  // namespace xover
