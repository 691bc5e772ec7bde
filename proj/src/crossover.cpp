#include "xover/crossover.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "xover/rng.hpp"

namespace xover {

void SynthConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("synth config: " + what); };
    if (threshold < 0 || threshold > 255) fail("threshold must be in [0,255]");
    if (sweep_radius < 0) fail("sweep-radius must be >= 0");
    if (step < 1) fail("step must be >= 1");
    if (min_points < 1) fail("min-points must be >= 1");
    if (max_cluster_size < 1) fail("max-cluster-size must be >= 1");
    if (erase_radius < 0) fail("erase-radius must be >= 0");
    if (min_fragment_size < 1) fail("min-fragment-size must be >= 1");
    if (dilate_iters < 0) fail("dilate-iters must be >= 0");
    if (!(size_band_lo > 0.0) || !(size_band_hi >= size_band_lo)) fail("size-band must satisfy 0 < lo <= hi");
    if (max_attempts_per_target < 1) fail("max-attempts must be >= 1");
}

std::vector<Offset> sweep_grid(int radius, int step) {
    if (radius < 0 || step < 1) {
        throw std::invalid_argument("sweep_grid: radius must be >= 0 and step >= 1");
    }
    // Symmetric about zero so (0,0) is always on the grid.
    std::vector<int> axis;
    for (int v = -(radius / step) * step; v <= radius; v += step) {
        axis.push_back(v);
    }
    std::vector<Offset> grid;
    grid.reserve(axis.size() * axis.size());
    for (int dy : axis) {
        for (int dx : axis) {
            grid.push_back({dx, dy});
        }
    }
    return grid;
}

CrossingPointSet find_crossing_points(const Skeleton& left, const Skeleton& right, Offset offset,
                                      std::size_t max_cluster_size) {
    CrossingPointSet result;
    result.offset = offset;
    result.canvas_width = left.width();
    result.canvas_height = left.height();

    const auto overlap = overlay(left.image(), right.image(), offset);
    const auto clusters = connected_components(overlap.intersection);
    for (const auto& cluster : clusters) {
        if (cluster.size() > max_cluster_size) {
            result.points.clear();
            result.cluster_sizes.clear();
            return result;
        }
    }
    for (const auto& cluster : clusters) {
        double sx = 0.0;
        double sy = 0.0;
        for (const auto& p : cluster) {
            sx += p.x;
            sy += p.y;
        }
        const double cx = sx / static_cast<double>(cluster.size());
        const double cy = sy / static_cast<double>(cluster.size());
        Pixel point{static_cast<int>(std::lround(cx)), static_cast<int>(std::lround(cy))};
        // Keep the point adjacent to the cluster; otherwise take the member
        // nearest the centroid.
        const bool adjacent = std::any_of(cluster.begin(), cluster.end(), [&](const Pixel& p) {
            return std::abs(p.x - point.x) <= 1 && std::abs(p.y - point.y) <= 1;
        });
        if (!adjacent) {
            double best = std::numeric_limits<double>::max();
            for (const auto& p : cluster) {
                const double d = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
                if (d < best) {
                    best = d;
                    point = p;
                }
            }
        }
        result.points.push_back(point);
        result.cluster_sizes.push_back(cluster.size());
    }
    return result;
}

std::vector<CrossingPointSet> sweep_offsets(const Skeleton& left, const Skeleton& right, int radius, int step,
                                            std::size_t min_points, std::size_t max_cluster_size) {
    std::vector<CrossingPointSet> kept;
    for (const auto& offset : sweep_grid(radius, step)) {
        auto found = find_crossing_points(left, right, offset, max_cluster_size);
        if (!found.empty() && found.points.size() >= min_points) {
            kept.push_back(std::move(found));
        }
    }
    return kept;
}

std::vector<Fragment> fragment(const Skeleton& skeleton, const CrossingPointSet& points, Source source,
                               int erase_radius, std::size_t min_fragment_size) {
    if (points.empty()) {
        throw std::invalid_argument("fragment: crossing point set is empty");
    }
    BinaryImage cut = skeleton.image();
    const Offset back = source == Source::Right ? Offset{-points.offset.dx, -points.offset.dy} : Offset{0, 0};
    for (const auto& p : points.points) {
        const int px = p.x + back.dx;
        const int py = p.y + back.dy;
        for (int dy = -erase_radius; dy <= erase_radius; ++dy) {
            for (int dx = -erase_radius; dx <= erase_radius; ++dx) {
                if (cut.in_bounds(px + dx, py + dy)) {
                    cut.set(px + dx, py + dy, false);
                }
            }
        }
    }

    std::vector<Fragment> fragments;
    for (auto& component : connected_components(cut)) {
        if (component.size() < min_fragment_size) {
            continue;
        }
        Fragment f;
        f.source = source;
        double sx = 0.0;
        double sy = 0.0;
        for (const auto& p : component) {
            sx += p.x;
            sy += p.y;
        }
        f.centroid_x = sx / static_cast<double>(component.size());
        f.centroid_y = sy / static_cast<double>(component.size());
        f.pixels = std::move(component);
        fragments.push_back(std::move(f));
    }
    return fragments;
}

namespace {

std::vector<StructureGroup> group_one(const std::vector<Fragment>& fragments, double split_row, double frame_dy,
                                      int width, int height) {
    std::array<StructureGroup, 2> sides;
    for (int i = 0; i < 2; ++i) {
        sides[static_cast<std::size_t>(i)].index = i;
        sides[static_cast<std::size_t>(i)].mask = BinaryImage(width, height);
    }
    for (const auto& f : fragments) {
        auto& side = sides[f.centroid_y + frame_dy < split_row ? 0 : 1];
        side.source = f.source;
        for (const auto& p : f.pixels) {
            side.mask.set(p.x, p.y);
        }
        side.fragments.push_back(f);
    }
    std::vector<StructureGroup> out;
    for (auto& side : sides) {
        if (!side.fragments.empty()) {
            out.push_back(std::move(side));
        }
    }
    return out;
}

}  // namespace

std::pair<std::vector<StructureGroup>, std::vector<StructureGroup>> group_structures(
    const std::vector<Fragment>& left, const std::vector<Fragment>& right, const CrossingPointSet& points) {
    if (left.empty() || right.empty()) {
        throw std::invalid_argument("group_structures: both fragment lists must be nonempty");
    }
    if (points.empty()) {
        throw std::invalid_argument("group_structures: crossing point set is empty");
    }
    double mean_y = 0.0;
    for (const auto& p : points.points) {
        mean_y += p.y;
    }
    mean_y /= static_cast<double>(points.points.size());

    const int w = points.canvas_width;
    const int h = points.canvas_height;
    return {group_one(left, mean_y, 0.0, w, h),
            group_one(right, mean_y, static_cast<double>(points.offset.dy), w, h)};
}

std::string_view to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::None: return "accepted";
        case RejectReason::Disconnected: return "disconnected";
        case RejectReason::MassOutOfBand: return "mass-out-of-band";
        case RejectReason::CopyOfSource: return "copy-of-source";
        case RejectReason::Empty: return "empty";
    }
    return "unknown";
}

Reproduction reproduce(const StructureGroup& left, const CrossingPointSet& points, const StructureGroup& right,
                       const SourceRendering& sources, const ReproduceOptions& options) {
    if (left.source != Source::Left || right.source != Source::Right) {
        throw std::invalid_argument("reproduce: expected a structure of L and a structure of R");
    }
    if (left.index == right.index) {
        throw std::invalid_argument("reproduce: L and R structures must have different indices");
    }

    Reproduction out;
    out.undilated = left.mask;
    const BinaryImage shifted = translate(right.mask, points.offset);
    const auto& a = shifted.mask();
    for (int y = 0; y < out.undilated.height(); ++y) {
        for (int x = 0; x < out.undilated.width(); ++x) {
            if (a[static_cast<std::size_t>(y * shifted.width() + x)]) {
                out.undilated.set(x, y);
            }
        }
    }
    for (const auto& p : points.points) {
        if (out.undilated.in_bounds(p.x, p.y)) {
            out.undilated.set(p.x, p.y);
        }
    }
    out.image = dilate(out.undilated, options.dilate_iters);

    const double mass = static_cast<double>(out.image.count());
    const double reference = sources.mean_mass();
    if (mass == 0.0) {
        out.reason = RejectReason::Empty;
    } else if (count_components(out.image) != 1) {
        out.reason = RejectReason::Disconnected;
    } else if (mass < options.size_band_lo * reference || mass > options.size_band_hi * reference) {
        out.reason = RejectReason::MassOutOfBand;
    } else if (out.image == sources.left || out.image == translate(sources.right, points.offset)) {
        out.reason = RejectReason::CopyOfSource;
    }
    return out;
}

PreparedCharacter prepare_character(const GrayImage& image, std::uint8_t label, const SynthConfig& cfg) {
    Skeleton skeleton = thin(binarize(image, cfg.threshold));
    BinaryImage rendered = dilate(skeleton.image(), cfg.dilate_iters);
    return {std::move(skeleton), std::move(rendered), label};
}

SynthesisResult synthesize_dataset(const LabeledSet& seed, std::size_t target, const SynthConfig& cfg,
                                   std::uint64_t rng_seed) {
    cfg.validate();
    SynthesisResult result;
    result.set.provenance = Provenance::Synthetic;
    if (target == 0) {
        return result;
    }
    if (seed.empty()) {
        throw std::invalid_argument("synthesize_dataset: seed set is empty");
    }

    std::vector<PreparedCharacter> prepared;
    prepared.reserve(seed.size());
    std::array<std::vector<std::size_t>, 10> by_class;
    for (std::size_t i = 0; i < seed.size(); ++i) {
        prepared.push_back(prepare_character(seed.images[i], seed.labels[i], cfg));
        by_class[seed.labels[i]].push_back(i);
    }

    const ReproduceOptions options{cfg.dilate_iters, cfg.size_band_lo, cfg.size_band_hi};
    const std::size_t budget = cfg.max_attempts_per_target * target;
    Rng rng(rng_seed);
    auto& stats = result.stats;

    while (result.set.size() < target && stats.attempts < budget) {
        ++stats.attempts;
        const std::size_t left_id = rng.below(seed.size());
        const auto& peers = by_class[seed.labels[left_id]];
        if (peers.size() < 2) {
            ++stats.no_partner;
            continue;
        }
        // Uniform over the same-class peers other than left_id.
        std::size_t pick = rng.below(peers.size() - 1);
        if (peers[pick] == left_id) {
            pick = peers.size() - 1;
        }
        const std::size_t right_id = peers[pick];
        const auto& lc = prepared[left_id];
        const auto& rc = prepared[right_id];

        auto crossings = sweep_offsets(lc.skeleton, rc.skeleton, cfg.sweep_radius, cfg.step, cfg.min_points,
                                       cfg.max_cluster_size);
        if (crossings.empty()) {
            ++stats.no_crossing;
            continue;
        }
        const auto& points = crossings[rng.below(crossings.size())];

        const auto frags_l = fragment(lc.skeleton, points, Source::Left, cfg.erase_radius, cfg.min_fragment_size);
        const auto frags_r = fragment(rc.skeleton, points, Source::Right, cfg.erase_radius, cfg.min_fragment_size);
        if (frags_l.empty() || frags_r.empty()) {
            ++stats.degenerate;
            continue;
        }
        const auto [groups_l, groups_r] = group_structures(frags_l, frags_r, points);
        const SourceRendering sources{lc.rendered, rc.rendered};

        for (const auto& gl : groups_l) {
            for (const auto& gr : groups_r) {
                if (gl.index == gr.index || result.set.size() >= target) {
                    continue;
                }
                ++stats.candidates;
                auto made = reproduce(gl, points, gr, sources, options);
                if (!made.accepted()) {
                    ++stats.rejected[static_cast<std::size_t>(made.reason)];
                    continue;
                }
                ++stats.accepted;
                result.set.push_back(to_gray(made.image), lc.label);
                result.provenance.push_back({left_id, right_id, points.offset, gl.index, gr.index});
            }
        }
    }
    stats.shortfall = target - result.set.size();
    return result;
}

}  // namespace xover
