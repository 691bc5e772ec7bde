#include "xover/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "xover/rng.hpp"

namespace xover {

RealImage to_real(const GrayImage& img) {
    RealImage out(img.width, img.height);
    std::transform(img.pixels.begin(), img.pixels.end(), out.values.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
    return out;
}

std::string_view to_string(TangentKind kind) {
    switch (kind) {
        case TangentKind::Scaling: return "scaling";
        case TangentKind::Rotation: return "rotation";
        case TangentKind::XTranslation: return "x-translation";
        case TangentKind::YTranslation: return "y-translation";
        case TangentKind::ParallelHyperbolic: return "parallel-hyperbolic";
        case TangentKind::DiagonalHyperbolic: return "diagonal-hyperbolic";
        case TangentKind::Thickness: return "thickness";
        case TangentKind::ModifiedThickness: return "modified-thickness";
    }
    return "unknown";
}

void TangentConfig::validate() const {
    if (!(smoothing_sigma > 0.0) || !std::isfinite(smoothing_sigma)) {
        throw std::invalid_argument("tangent config: smoothing-sigma must be > 0");
    }
    for (double a : alpha_max) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw std::invalid_argument("tangent config: alpha-max entries must be finite and >= 0");
        }
    }
}

RealImage gaussian_smooth(const RealImage& img, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("gaussian_smooth: sigma must be > 0");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-0.5 * k * k / (sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = w;
        total += w;
    }
    for (double& w : kernel) {
        w /= total;
    }

    auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
    RealImage rows(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] * img.at(clampi(x + k, img.width), y);
            }
            rows.at(x, y) = acc;
        }
    }
    RealImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<std::size_t>(k + radius)] * rows.at(x, clampi(y + k, img.height));
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

TangentFields tangent_fields_of_smoothed(const RealImage& s) {
    const int w = s.width;
    const int h = s.height;
    TangentFields fields;
    for (std::size_t k = 0; k < kTangentKinds; ++k) {
        fields[k] = TangentField{static_cast<TangentKind>(k), RealImage(w, h)};
    }
    auto field = [&](TangentKind kind) -> RealImage& { return fields[static_cast<std::size_t>(kind)].values; };

    const double cx = 0.5 * (w - 1);
    const double cy = 0.5 * (h - 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = 0.5 * (s.at(std::min(x + 1, w - 1), y) - s.at(std::max(x - 1, 0), y));
            const double gy = 0.5 * (s.at(x, std::min(y + 1, h - 1)) - s.at(x, std::max(y - 1, 0)));
            const double u = x - cx;
            const double v = y - cy;
            const double g2 = gx * gx + gy * gy;
            field(TangentKind::Scaling).at(x, y) = u * gx + v * gy;
            field(TangentKind::Rotation).at(x, y) = v * gx - u * gy;
            field(TangentKind::XTranslation).at(x, y) = gx;
            field(TangentKind::YTranslation).at(x, y) = gy;
            field(TangentKind::ParallelHyperbolic).at(x, y) = u * gx - v * gy;
            field(TangentKind::DiagonalHyperbolic).at(x, y) = v * gx + u * gy;
            field(TangentKind::Thickness).at(x, y) = g2 / 255.0;
            field(TangentKind::ModifiedThickness).at(x, y) = std::sqrt(g2);
        }
    }
    return fields;
}

TangentFields tangent_fields(const GrayImage& img, double smoothing_sigma) {
    return tangent_fields_of_smoothed(gaussian_smooth(to_real(img), smoothing_sigma));
}

RealImage tangent_displace(const RealImage& base, const TangentCoefficients& coeffs, const TangentFields& fields) {
    RealImage out = base;
    for (std::size_t k = 0; k < kTangentKinds; ++k) {
        const double a = coeffs.alpha[k];
        if (a == 0.0) {
            continue;
        }
        const auto& f = fields[k].values;
        if (f.width != base.width || f.height != base.height) {
            throw std::invalid_argument("tangent_displace: field dimensions differ from the image");
        }
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            out.values[i] += a * f.values[i];
        }
    }
    return out;
}

GrayImage apply_tangents(const GrayImage& img, const TangentCoefficients& coeffs, const TangentFields& fields) {
    const RealImage moved = tangent_displace(to_real(img), coeffs, fields);
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::round(moved.values[i]), 0.0, 255.0));
    }
    return out;
}

LabeledSet sample_tangent_dataset(const LabeledSet& seed, std::size_t target, const TangentConfig& cfg,
                                  std::uint64_t rng_seed) {
    cfg.validate();
    LabeledSet out;
    out.provenance = Provenance::Synthetic;
    if (target == 0) {
        return out;
    }
    if (seed.empty()) {
        throw std::invalid_argument("sample_tangent_dataset: seed set is empty");
    }
    std::vector<std::optional<TangentFields>> cache(seed.size());
    Rng rng(rng_seed);
    out.images.reserve(target);
    out.labels.reserve(target);
    for (std::size_t n = 0; n < target; ++n) {
        const std::size_t idx = rng.below(seed.size());
        TangentCoefficients coeffs;
        for (std::size_t k = 0; k < kTangentKinds; ++k) {
            coeffs.alpha[k] = rng.uniform(-cfg.alpha_max[k], cfg.alpha_max[k]);
        }
        if (!cache[idx]) {
            cache[idx] = tangent_fields(seed.images[idx], cfg.smoothing_sigma);
        }
        out.push_back(apply_tangents(seed.images[idx], coeffs, *cache[idx]), seed.labels[idx]);
    }
    return out;
}

}  // namespace xover
