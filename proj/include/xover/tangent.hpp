#pragma once

// Tangent-vector distortion: first-order image displacements for eight
// elementary transformations, combined linearly with random coefficients.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "xover/dataset_io.hpp"

namespace xover {

struct RealImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    RealImage() = default;
    RealImage(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double at(int x, int y) const { return values[static_cast<std::size_t>(y * width + x)]; }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y * width + x)]; }
};

RealImage to_real(const GrayImage& img);

enum class TangentKind : std::size_t {
    Scaling,
    Rotation,
    XTranslation,
    YTranslation,
    ParallelHyperbolic,
    DiagonalHyperbolic,
    Thickness,
    ModifiedThickness,
};

inline constexpr std::size_t kTangentKinds = 8;

std::string_view to_string(TangentKind kind);

struct TangentField {
    TangentKind kind;
    RealImage values;
};

using TangentFields = std::array<TangentField, kTangentKinds>;

struct TangentCoefficients {
    std::array<double, kTangentKinds> alpha{};
};

struct TangentConfig {
    double smoothing_sigma = 1.0;
    // Geometric fields are per pixel (translation) or per unit of the
    // transformation parameter; the two thickness fields are in intensity
    // units.
    std::array<double, kTangentKinds> alpha_max = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 5.0, 5.0};

    void validate() const;
};

// Separable Gaussian blur, kernel radius ceil(3 sigma), replicated borders.
RealImage gaussian_smooth(const RealImage& img, double sigma);

// Fields of an already-smoothed image. With u, v the pixel coordinates about
// the image centre and gx, gy central differences:
//   scaling u*gx + v*gy, rotation v*gx - u*gy, x/y-translation gx / gy,
//   parallel hyperbolic u*gx - v*gy, diagonal hyperbolic v*gx + u*gy,
//   thickness (gx^2 + gy^2) / 255, modified thickness sqrt(gx^2 + gy^2).
// Adding alpha * field moves the content by -alpha along the corresponding
// transformation (for x-translation: img + a*gx ~ img(x + a, y)).
TangentFields tangent_fields_of_smoothed(const RealImage& smoothed);

TangentFields tangent_fields(const GrayImage& img, double smoothing_sigma);

// base + sum_k alpha[k] * field[k], unclamped.
RealImage tangent_displace(const RealImage& base, const TangentCoefficients& coeffs, const TangentFields& fields);

// clamp(round(img + sum_k alpha[k] * field[k]), 0, 255).
GrayImage apply_tangents(const GrayImage& img, const TangentCoefficients& coeffs, const TangentFields& fields);

// Draws a seed image uniformly and independent alpha[k] ~ U(-max_k, max_k),
// `target` times.
LabeledSet sample_tangent_dataset(const LabeledSet& seed, std::size_t target, const TangentConfig& cfg,
                                  std::uint64_t rng_seed);

}  // namespace xover
