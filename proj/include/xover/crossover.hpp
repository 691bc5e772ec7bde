#pragma once

// Structural crossing-over synthesis.
//
// Two skeletons of the same digit, L and R, are overlaid with R shifted by an
// offset. Small intersection clusters become crossing points; erasing the
// neighbourhood of every crossing point cuts each skeleton into fragments.
// Fragments are merged into an upper and a lower structure relative to the
// mean crossing row, and a new character is the union of one structure of L,
// the crossing points and the opposite structure of R, dilated.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "xover/dataset_io.hpp"
#include "xover/raster.hpp"

namespace xover {

struct SynthConfig {
    int threshold = kDefaultThreshold;
    int sweep_radius = 4;
    int step = 2;
    std::size_t min_points = 1;
    // Intersection clusters larger than this are collinear stroke overlap, and
    // invalidate the whole offset.
    std::size_t max_cluster_size = 5;
    int erase_radius = 1;
    std::size_t min_fragment_size = 3;
    int dilate_iters = 1;
    double size_band_lo = 0.5;
    double size_band_hi = 1.5;
    // Pair draws allowed per requested sample.
    std::size_t max_attempts_per_target = 50;

    void validate() const;
};

struct CrossingPointSet {
    Offset offset;
    // Rounded cluster centroids, in L's frame.
    PixelSet points;
    std::vector<std::size_t> cluster_sizes;
    int canvas_width = 28;
    int canvas_height = 28;

    bool empty() const { return points.empty(); }
};

enum class Source { Left, Right };

struct Fragment {
    PixelSet pixels;  // in the source character's own frame
    Source source = Source::Left;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
};

struct StructureGroup {
    std::vector<Fragment> fragments;
    Source source = Source::Left;
    // 0 = above the mean crossing row, 1 = at or below it. A character whose
    // fragments all fall on one side has a single group carrying that side.
    int index = 0;
    BinaryImage mask;  // union of member pixels, source frame
};

struct SynthProvenance {
    std::size_t left_id = 0;
    std::size_t right_id = 0;
    Offset offset;
    int left_structure = 0;
    int right_structure = 0;
};

struct SynthSample {
    BinaryImage image;
    std::uint8_t label = 0;
    SynthProvenance provenance;
};

std::vector<Offset> sweep_grid(int radius, int step);

CrossingPointSet find_crossing_points(const Skeleton& left, const Skeleton& right, Offset offset,
                                      std::size_t max_cluster_size = 5);

// Evaluates every offset of sweep_grid(radius, step) in ascending (dy, dx)
// order and keeps the sets with at least min_points points.
std::vector<CrossingPointSet> sweep_offsets(const Skeleton& left, const Skeleton& right, int radius, int step,
                                            std::size_t min_points, std::size_t max_cluster_size = 5);

// Cuts `skeleton` at the crossing points by erasing the (2r+1)x(2r+1) square
// around each one. For Source::Right the points are moved back into R's frame
// by -offset. Components below min_fragment_size are dropped. An empty result
// means the pair is degenerate at this offset.
std::vector<Fragment> fragment(const Skeleton& skeleton, const CrossingPointSet& points, Source source,
                               int erase_radius = 1, std::size_t min_fragment_size = 3);

// Splits each character's fragments at the mean crossing-point row (compared
// in L's frame). Groups are returned in ascending index order.
std::pair<std::vector<StructureGroup>, std::vector<StructureGroup>> group_structures(
    const std::vector<Fragment>& left, const std::vector<Fragment>& right, const CrossingPointSet& points);

enum class RejectReason {
    None,
    Disconnected,
    MassOutOfBand,
    CopyOfSource,
    Empty,
};

std::string_view to_string(RejectReason reason);

// The two parent characters as rendered by the same pipeline (thinned and
// dilated), each in its own frame. Used for the mass band and copy check.
struct SourceRendering {
    BinaryImage left;
    BinaryImage right;

    double mean_mass() const { return 0.5 * static_cast<double>(left.count() + right.count()); }
};

struct ReproduceOptions {
    int dilate_iters = 1;
    double size_band_lo = 0.5;
    double size_band_hi = 1.5;
};

struct Reproduction {
    RejectReason reason = RejectReason::None;
    BinaryImage undilated;
    BinaryImage image;

    bool accepted() const { return reason == RejectReason::None; }
};

// Combines structure `left` of L, the crossing points and structure `right`
// of R (shifted by the crossing offset). Throws std::invalid_argument unless
// left comes from L, right from R, and their indices differ.
Reproduction reproduce(const StructureGroup& left, const CrossingPointSet& points, const StructureGroup& right,
                       const SourceRendering& sources, const ReproduceOptions& options);

struct SynthStats {
    std::size_t attempts = 0;
    std::size_t candidates = 0;
    std::size_t accepted = 0;
    std::size_t no_partner = 0;
    std::size_t no_crossing = 0;
    std::size_t degenerate = 0;
    std::array<std::size_t, 5> rejected{};  // indexed by RejectReason
    std::size_t shortfall = 0;

    double accept_rate() const {
        return candidates == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(candidates);
    }
};

struct SynthesisResult {
    LabeledSet set;
    std::vector<SynthProvenance> provenance;
    SynthStats stats;
};

// Skeleton and rendering of one seed character, computed once per seed.
struct PreparedCharacter {
    Skeleton skeleton;
    BinaryImage rendered;
    std::uint8_t label;
};

PreparedCharacter prepare_character(const GrayImage& image, std::uint8_t label, const SynthConfig& cfg);

// Draws a seed character uniformly, then a different seed character of the
// same label, runs the full pipeline at one randomly chosen valid offset and
// keeps both reproductions that pass. Stops at `target` samples or after
// cfg.max_attempts_per_target * target draws; a shortfall is reported in the
// stats, never thrown.
SynthesisResult synthesize_dataset(const LabeledSet& seed, std::size_t target, const SynthConfig& cfg,
                                   std::uint64_t rng_seed);

}  // namespace xover
