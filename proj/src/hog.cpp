#include "xover/hog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace xover {

void HogParams::validate() const {
    if (cell_size < 1) throw std::invalid_argument("hog: cell-size must be >= 1");
    if (bins < 2) throw std::invalid_argument("hog: bins must be >= 2");
    if (block_cells < 1) throw std::invalid_argument("hog: block must be >= 1 cell");
    if (block_stride < 1) throw std::invalid_argument("hog: block stride must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("hog: epsilon must be > 0");
}

std::size_t HogParams::descriptor_length(int width, int height) const {
    const int cells_x = width / cell_size;
    const int cells_y = height / cell_size;
    if (cells_x < block_cells || cells_y < block_cells) {
        return 0;
    }
    const int blocks_x = (cells_x - block_cells) / block_stride + 1;
    const int blocks_y = (cells_y - block_cells) / block_stride + 1;
    return static_cast<std::size_t>(blocks_x * blocks_y * block_cells * block_cells * bins);
}

std::vector<double> hog_cell_histograms(const GrayImage& img, const HogParams& params) {
    params.validate();
    if (img.width % params.cell_size != 0 || img.height % params.cell_size != 0) {
        throw std::invalid_argument("hog: image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                                    " is not divisible by cell size " + std::to_string(params.cell_size));
    }
    const int w = img.width;
    const int h = img.height;
    const int cells_x = w / params.cell_size;
    const std::size_t bins = static_cast<std::size_t>(params.bins);
    const double bin_width = std::numbers::pi / params.bins;

    std::vector<double> hist(static_cast<std::size_t>(cells_x * (h / params.cell_size)) * bins, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double gx = double(img.at(std::min(x + 1, w - 1), y)) - double(img.at(std::max(x - 1, 0), y));
            double gy = double(img.at(x, std::min(y + 1, h - 1))) - double(img.at(x, std::max(y - 1, 0)));
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) {
                continue;
            }
            // Fold into the upper half-plane so opposite gradients share an
            // angle exactly.
            if (gy < 0.0 || (gy == 0.0 && gx < 0.0)) {
                gx = -gx;
                gy = -gy;
            }
            double angle = std::atan2(gy, gx);
            if (angle >= std::numbers::pi) {
                angle = 0.0;
            }
            const double pos = angle / bin_width;
            const double lower = std::floor(pos);
            const double frac = pos - lower;
            const std::size_t lo = static_cast<std::size_t>(lower) % bins;
            const std::size_t hi = (lo + 1) % bins;

            const std::size_t cell =
                static_cast<std::size_t>((y / params.cell_size) * cells_x + x / params.cell_size);
            hist[cell * bins + lo] += mag * (1.0 - frac);
            hist[cell * bins + hi] += mag * frac;
        }
    }
    return hist;
}

HogDescriptor hog(const GrayImage& img, const HogParams& params) {
    const auto hist = hog_cell_histograms(img, params);
    const int cells_x = img.width / params.cell_size;
    const int cells_y = img.height / params.cell_size;
    const std::size_t bins = static_cast<std::size_t>(params.bins);
    const int bc = params.block_cells;

    HogDescriptor out;
    out.values.reserve(params.descriptor_length(img.width, img.height));
    for (int by = 0; by + bc <= cells_y; by += params.block_stride) {
        for (int bx = 0; bx + bc <= cells_x; bx += params.block_stride) {
            const std::size_t start = out.values.size();
            for (int cy = by; cy < by + bc; ++cy) {
                for (int cx = bx; cx < bx + bc; ++cx) {
                    const auto first = hist.begin() + static_cast<std::ptrdiff_t>((cy * cells_x + cx) * bins);
                    out.values.insert(out.values.end(), first, first + static_cast<std::ptrdiff_t>(bins));
                }
            }
            if (!params.normalize_blocks) {
                continue;
            }
            double norm2 = 0.0;
            for (std::size_t i = start; i < out.values.size(); ++i) {
                norm2 += out.values[i] * out.values[i];
            }
            const double scale = 1.0 / std::sqrt(norm2 + params.epsilon * params.epsilon);
            for (std::size_t i = start; i < out.values.size(); ++i) {
                out.values[i] *= scale;
            }
        }
    }
    return out;
}

}  // namespace xover
