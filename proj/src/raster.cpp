#include "xover/raster.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <stdexcept>
#include <utility>

namespace xover {

namespace {

// Neighbour ring P2..P9 clockwise from north: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kRingDx = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kRingDy = {-1, -1, 0, 1, 1, 1, 0, -1};

std::array<bool, 8> ring(const BinaryImage& img, int x, int y) {
    std::array<bool, 8> p{};
    for (std::size_t k = 0; k < 8; ++k) {
        p[k] = img.get_or_false(x + kRingDx[k], y + kRingDy[k]);
    }
    return p;
}

int neighbour_count(const std::array<bool, 8>& p) {
    return static_cast<int>(std::count(p.begin(), p.end(), true));
}

// Number of 0 -> 1 transitions around the cyclic ring.
int transitions(const std::array<bool, 8>& p) {
    int a = 0;
    for (std::size_t k = 0; k < 8; ++k) {
        if (!p[k] && p[(k + 1) % 8]) {
            ++a;
        }
    }
    return a;
}

// Zhang-Suen deletion test for one subiteration (0 or 1).
bool zs_deletable(const std::array<bool, 8>& p, int subiteration) {
    const int b = neighbour_count(p);
    if (b < 2 || b > 6 || transitions(p) != 1) {
        return false;
    }
    const bool n = p[0], e = p[2], s = p[4], w = p[6];
    if (subiteration == 0) {
        return !(n && e && s) && !(e && s && w);
    }
    return !(n && e && w) && !(n && s && w);
}

std::size_t zs_subiteration(BinaryImage& img, int subiteration) {
    BinaryImage marked(img.width(), img.height());
    std::size_t removed = 0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (img.get(x, y) && zs_deletable(ring(img, x, y), subiteration)) {
                marked.set(x, y);
                ++removed;
            }
        }
    }
    if (removed == 0) {
        return 0;
    }
    // Parallel deletion can wipe out a whole component (a 2x2 block, for
    // one). Such a component keeps its first pixel.
    for (const auto& component : connected_components(img)) {
        const bool all_marked = std::all_of(component.begin(), component.end(),
                                            [&](const Pixel& p) { return marked.get(p.x, p.y); });
        if (all_marked) {
            marked.set(component.front().x, component.front().y, false);
            --removed;
        }
    }
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (marked.get(x, y)) {
                img.set(x, y, false);
            }
        }
    }
    return removed;
}

}  // namespace

std::size_t BinaryImage::count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

PixelSet BinaryImage::pixels() const {
    PixelSet out;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (get(x, y)) {
                out.push_back({x, y});
            }
        }
    }
    return out;
}

Skeleton Skeleton::from_thin(BinaryImage image) {
    BinaryImage probe = image;
    if (thinning_pass(probe) != 0) {
        throw std::invalid_argument("Skeleton::from_thin: image is not thin (a thinning pass removes pixels)");
    }
    return Skeleton(std::move(image));
}

BinaryImage binarize(const GrayImage& img, int threshold) {
    BinaryImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (img.at(x, y) >= threshold) {
                out.set(x, y);
            }
        }
    }
    return out;
}

GrayImage to_gray(const BinaryImage& img) {
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        out.pixels[i] = img.mask()[i] ? 255 : 0;
    }
    return out;
}

BinaryImage from_pixels(int width, int height, const PixelSet& pixels) {
    BinaryImage out(width, height);
    for (const auto& p : pixels) {
        if (out.in_bounds(p.x, p.y)) {
            out.set(p.x, p.y);
        }
    }
    return out;
}

std::size_t thinning_pass(BinaryImage& img) {
    const std::size_t first = zs_subiteration(img, 0);
    return first + zs_subiteration(img, 1);
}

Skeleton thin(const BinaryImage& img) {
    BinaryImage work = img;
    while (thinning_pass(work) > 0) {
    }
    return Skeleton(std::move(work));
}

BinaryImage dilate(const BinaryImage& img, int iterations) {
    if (iterations < 0) {
        throw std::invalid_argument("dilate: iterations must be >= 0");
    }
    BinaryImage current = img;
    for (int it = 0; it < iterations; ++it) {
        BinaryImage next(current.width(), current.height());
        for (int y = 0; y < current.height(); ++y) {
            for (int x = 0; x < current.width(); ++x) {
                if (!current.get(x, y)) {
                    continue;
                }
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (next.in_bounds(x + dx, y + dy)) {
                            next.set(x + dx, y + dy);
                        }
                    }
                }
            }
        }
        current = std::move(next);
    }
    return current;
}

BinaryImage translate(const BinaryImage& img, Offset offset) {
    BinaryImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (img.get(x, y) && out.in_bounds(x + offset.dx, y + offset.dy)) {
                out.set(x + offset.dx, y + offset.dy);
            }
        }
    }
    return out;
}

OverlayResult overlay(const BinaryImage& base, const BinaryImage& other, Offset offset) {
    OverlayResult result{base, BinaryImage(base.width(), base.height())};
    for (int y = 0; y < other.height(); ++y) {
        for (int x = 0; x < other.width(); ++x) {
            const int tx = x + offset.dx;
            const int ty = y + offset.dy;
            if (!other.get(x, y) || !base.in_bounds(tx, ty)) {
                continue;
            }
            result.union_mask.set(tx, ty);
            if (base.get(tx, ty)) {
                result.intersection.set(tx, ty);
            }
        }
    }
    return result;
}

std::vector<PixelSet> connected_components(const BinaryImage& img) {
    std::vector<int> label(static_cast<std::size_t>(img.width() * img.height()), -1);
    auto idx = [&](int x, int y) { return static_cast<std::size_t>(y * img.width() + x); };

    std::vector<PixelSet> components;
    PixelSet stack;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (!img.get(x, y) || label[idx(x, y)] >= 0) {
                continue;
            }
            const int id = static_cast<int>(components.size());
            PixelSet members;
            label[idx(x, y)] = id;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                members.push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if (img.get_or_false(nx, ny) && label[idx(nx, ny)] < 0) {
                            label[idx(nx, ny)] = id;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            std::sort(members.begin(), members.end());
            components.push_back(std::move(members));
        }
    }
    return components;
}

std::size_t count_components(const BinaryImage& img) { return connected_components(img).size(); }

}  // namespace xover
