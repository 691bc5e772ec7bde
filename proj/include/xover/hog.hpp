#pragma once

#include <cstddef>
#include <vector>

#include "xover/dataset_io.hpp"

namespace xover {

struct HogParams {
    int cell_size = 4;
    // Unsigned orientation over [0, 180 deg); bin k is centred on k*180/bins.
    int bins = 9;
    int block_cells = 2;
    int block_stride = 1;
    double epsilon = 1e-6;
    bool normalize_blocks = true;

    void validate() const;
    std::size_t descriptor_length(int width, int height) const;
};

struct HogDescriptor {
    std::vector<double> values;
};

// Per-cell orientation histograms, cells row-major, `bins` values per cell.
// Gradients are [-1, 0, 1] central differences with replicated borders; each
// pixel votes its magnitude into the two nearest bins by linear
// interpolation.
std::vector<double> hog_cell_histograms(const GrayImage& img, const HogParams& params);

// Overlapping blocks of block_cells x block_cells cells, each L2-normalized as
// v / sqrt(|v|^2 + eps^2) (unless normalize_blocks is false), concatenated
// row-major. Throws std::invalid_argument when the image size is not a
// multiple of cell_size.
HogDescriptor hog(const GrayImage& img, const HogParams& params);

}  // namespace xover
