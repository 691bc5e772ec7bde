#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "xover/crossover.hpp"

using namespace xover;

namespace {

Skeleton line_h(int y, int x0, int x1) {
    BinaryImage img(28, 28);
    for (int x = x0; x <= x1; ++x) img.set(x, y);
    return Skeleton::from_thin(img);
}

Skeleton line_v(int x, int y0, int y1) {
    BinaryImage img(28, 28);
    for (int y = y0; y <= y1; ++y) img.set(x, y);
    return Skeleton::from_thin(img);
}

// A bracket opening to the left, crossed twice by the vertical line x = 10.
Skeleton bracket() {
    BinaryImage img(28, 28);
    for (int x = 5; x <= 15; ++x) {
        img.set(x, 8);
        img.set(x, 18);
    }
    for (int y = 8; y <= 18; ++y) img.set(15, y);
    return Skeleton::from_thin(img);
}

CrossingPointSet points_at(PixelSet pts, Offset offset = {0, 0}) {
    CrossingPointSet set;
    set.offset = offset;
    set.points = std::move(pts);
    set.cluster_sizes.assign(set.points.size(), 1);
    return set;
}

Fragment fake_fragment(Source source, double cy, int x) {
    Fragment f;
    f.source = source;
    f.centroid_x = x;
    f.centroid_y = cy;
    f.pixels = {{x, static_cast<int>(cy)}};
    return f;
}

}  // namespace

TEST(SweepGrid, Sizes) {
    EXPECT_EQ(sweep_grid(0, 1), (std::vector<Offset>{{0, 0}}));
    EXPECT_EQ(sweep_grid(2, 1).size(), 25u);
    const auto g = sweep_grid(4, 2);
    EXPECT_EQ(g.size(), 25u);
    EXPECT_NE(std::find(g.begin(), g.end(), Offset{0, 0}), g.end());
    EXPECT_EQ(g.front(), (Offset{-4, -4}));
    EXPECT_EQ(g.back(), (Offset{4, 4}));
}

TEST(FindCrossingPoints, PerpendicularLines) {
    const auto cps = find_crossing_points(line_h(5, 0, 27), line_v(5, 0, 27), {0, 0});
    EXPECT_EQ(cps.points, (PixelSet{{5, 5}}));
    EXPECT_EQ(cps.cluster_sizes, (std::vector<std::size_t>{1}));
}

TEST(FindCrossingPoints, RingClusterCentroidInItsHole) {
    // A 4-pixel diamond ring: the rounded centroid is not a member but is
    // adjacent to the cluster, so it is kept.
    BinaryImage ring(28, 28);
    for (const Pixel p : {Pixel{10, 9}, Pixel{11, 10}, Pixel{10, 11}, Pixel{9, 10}}) ring.set(p.x, p.y);
    const auto skel = Skeleton::from_thin(ring);
    const auto cps = find_crossing_points(skel, skel, {0, 0});
    EXPECT_EQ(cps.points, (PixelSet{{10, 10}}));
    EXPECT_EQ(cps.cluster_sizes, (std::vector<std::size_t>{4}));
}

TEST(SweepOffsets, DisjointSkeletonsGiveNothing) {
    EXPECT_TRUE(sweep_offsets(line_h(2, 0, 10), line_h(20, 15, 27), 4, 2, 1).empty());
}

TEST(SweepOffsets, RadiusZeroEvaluatesOnlyTheOrigin) {
    const auto found = sweep_offsets(line_h(5, 0, 27), line_v(5, 0, 27), 0, 1, 1);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].offset, (Offset{0, 0}));
}

TEST(SweepOffsets, SelfOverlapExcludesOrigin) {
    const auto digits = oracle::synthetic_digits(1, 5);
    for (std::size_t i = 0; i < digits.size(); ++i) {
        const auto skel = thin(binarize(digits.images[i]));
        ASSERT_GT(skel.image().count(), 5u);
        for (const auto& cps : sweep_offsets(skel, skel, 4, 2, 1)) {
            EXPECT_NE(cps.offset, (Offset{0, 0})) << "digit " << i;
        }
    }
}

TEST(SweepOffsets, LargeClusterInvalidatesOffset) {
    // Collinear overlap of 11 pixels at offset (0,0).
    const auto a = line_h(10, 0, 10);
    EXPECT_TRUE(find_crossing_points(a, a, {0, 0}, 5).empty());
    EXPECT_FALSE(find_crossing_points(a, a, {0, 0}, 11).empty());
}

TEST(Fragment, LineCutOnceGivesTwo) {
    const auto frags = fragment(line_h(10, 2, 20), points_at({{11, 10}}), Source::Left, 1, 1);
    ASSERT_EQ(frags.size(), 2u);
    EXPECT_EQ(frags[0].pixels.size(), 8u);  // x = 2..9
    EXPECT_EQ(frags[1].pixels.size(), 8u);  // x = 13..20
}

TEST(Fragment, PlusSignGivesFour) {
    BinaryImage plus(28, 28);
    for (int i = 6; i <= 20; ++i) {
        plus.set(i, 13);
        plus.set(13, i);
    }
    const auto frags = fragment(thin(plus), points_at({{13, 13}}), Source::Left);
    EXPECT_EQ(frags.size(), 4u);
}

TEST(Fragment, EmptyPointSetThrows) {
    EXPECT_THROW(fragment(line_h(3, 0, 5), CrossingPointSet{}, Source::Left), std::invalid_argument);
}

TEST(Fragment, RightPointsMoveBackByOffset) {
    // R's line sits at y = 10 in its own frame; crossing found at (11, 13)
    // with offset (0, 3).
    const auto frags = fragment(line_h(10, 2, 20), points_at({{11, 13}}, {0, 3}), Source::Right, 1, 1);
    EXPECT_EQ(frags.size(), 2u);
}

TEST(Fragment, TwoCrossingsGiveThreeFragmentsEach) {
    const auto left = line_v(10, 2, 25);
    const auto right = bracket();
    const auto cps = find_crossing_points(left, right, {0, 0});
    ASSERT_EQ(cps.points, (PixelSet{{10, 8}, {10, 18}}));
    EXPECT_EQ(fragment(left, cps, Source::Left).size(), 3u);
    EXPECT_EQ(fragment(right, cps, Source::Right).size(), 3u);

    const auto [gl, gr] = group_structures(fragment(left, cps, Source::Left), fragment(right, cps, Source::Right), cps);
    EXPECT_EQ(gl.size(), 2u);
    EXPECT_EQ(gr.size(), 2u);
}

TEST(Fragment, PiecesAndErasedSquaresCoverSkeleton) {
    const auto digits = oracle::synthetic_digits(2, 8);
    int checked = 0;
    for (std::size_t i = 0; i + 10 < digits.size(); ++i) {
        const auto l = thin(binarize(digits.images[i]));
        const auto r = thin(binarize(digits.images[i + 10]));
        for (const auto& cps : sweep_offsets(l, r, 4, 2, 1)) {
            for (Source src : {Source::Left, Source::Right}) {
                const auto& skel = src == Source::Left ? l : r;
                const Offset back = src == Source::Left ? Offset{0, 0} : Offset{-cps.offset.dx, -cps.offset.dy};
                BinaryImage covered(28, 28);
                for (const auto& f : fragment(skel, cps, src, 1, 1))
                    for (const auto& p : f.pixels) covered.set(p.x, p.y);
                for (const auto& p : cps.points)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx)
                            if (covered.in_bounds(p.x + back.dx + dx, p.y + back.dy + dy))
                                covered.set(p.x + back.dx + dx, p.y + back.dy + dy);
                for (const auto& p : skel.image().pixels()) EXPECT_TRUE(covered.get(p.x, p.y));
                ++checked;
            }
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(GroupStructures, SplitAtMeanCrossingRow) {
    const std::vector<Fragment> left = {fake_fragment(Source::Left, 3, 1), fake_fragment(Source::Left, 10, 2),
                                        fake_fragment(Source::Left, 24, 3)};
    const std::vector<Fragment> right = {fake_fragment(Source::Right, 5, 4)};
    const auto [gl, gr] = group_structures(left, right, points_at({{10, 14}}));
    ASSERT_EQ(gl.size(), 2u);
    EXPECT_EQ(gl[0].index, 0);
    ASSERT_EQ(gl[0].fragments.size(), 2u);
    EXPECT_EQ(gl[0].fragments[0].centroid_y, 3);
    EXPECT_EQ(gl[0].fragments[1].centroid_y, 10);
    EXPECT_EQ(gl[1].index, 1);
    ASSERT_EQ(gl[1].fragments.size(), 1u);
    EXPECT_EQ(gl[1].fragments[0].centroid_y, 24);
    ASSERT_EQ(gr.size(), 1u);
    EXPECT_EQ(gr[0].index, 0);
    EXPECT_EQ(gr[0].source, Source::Right);
}

TEST(GroupStructures, OneFragmentEachGivesOneStructureEach) {
    const auto [gl, gr] = group_structures({fake_fragment(Source::Left, 3, 1)}, {fake_fragment(Source::Right, 20, 1)},
                                           points_at({{5, 10}}));
    EXPECT_EQ(gl.size(), 1u);
    EXPECT_EQ(gr.size(), 1u);
    EXPECT_EQ(gl[0].index, 0);
    EXPECT_EQ(gr[0].index, 1);
}

TEST(GroupStructures, RightCentroidsComparedInLeftFrame) {
    // R centroid at y = 12 in R's frame is y = 16 after the (0, 4) offset.
    const auto [gl, gr] = group_structures({fake_fragment(Source::Left, 3, 1)}, {fake_fragment(Source::Right, 12, 1)},
                                           points_at({{5, 14}}, {0, 4}));
    EXPECT_EQ(gr[0].index, 1);
}

TEST(Reproduce, UnionBeforeDilationAndPreconditions) {
    const auto left = line_v(10, 2, 25);
    const auto right = bracket();
    const auto cps = find_crossing_points(left, right, {0, 0});
    const auto [gl, gr] = group_structures(fragment(left, cps, Source::Left), fragment(right, cps, Source::Right), cps);
    const SourceRendering src{dilate(left.image(), 1), dilate(right.image(), 1)};
    const auto made = reproduce(gl[0], cps, gr[1], src, {});

    BinaryImage expected = gl[0].mask;
    for (const auto& p : translate(gr[1].mask, cps.offset).pixels()) expected.set(p.x, p.y);
    for (const auto& p : cps.points) expected.set(p.x, p.y);
    EXPECT_EQ(made.undilated, expected);
    EXPECT_EQ(made.image, dilate(expected, 1));

    EXPECT_THROW(reproduce(gl[0], cps, gr[0], src, {}), std::invalid_argument);
    EXPECT_THROW(reproduce(gr[1], cps, gl[0], src, {}), std::invalid_argument);
}

TEST(Reproduce, RejectsOutOfBandMass) {
    const auto left = line_v(10, 2, 25);
    const auto right = bracket();
    const auto cps = find_crossing_points(left, right, {0, 0});
    const auto [gl, gr] = group_structures(fragment(left, cps, Source::Left), fragment(right, cps, Source::Right), cps);
    const SourceRendering src{dilate(left.image(), 1), dilate(right.image(), 1)};
    ReproduceOptions tight;
    tight.size_band_lo = 5.0;
    tight.size_band_hi = 6.0;
    const auto made = reproduce(gl[0], cps, gr[1], src, tight);
    if (made.reason != RejectReason::Disconnected) {
        EXPECT_EQ(made.reason, RejectReason::MassOutOfBand);
    }
}

class Synthesis : public ::testing::Test {
protected:
    static void SetUpTestSuite() { seed_ = new LabeledSet(oracle::synthetic_digits(10, 21)); }
    static void TearDownTestSuite() { delete seed_; }
    static LabeledSet* seed_;
};

LabeledSet* Synthesis::seed_ = nullptr;

TEST_F(Synthesis, TargetZeroIsEmpty) {
    const auto r = synthesize_dataset(*seed_, 0, SynthConfig{}, 1);
    EXPECT_TRUE(r.set.empty());
    EXPECT_EQ(r.stats.shortfall, 0u);
}

TEST_F(Synthesis, DeterministicPerSeed) {
    const auto a = synthesize_dataset(*seed_, 200, SynthConfig{}, 99);
    const auto b = synthesize_dataset(*seed_, 200, SynthConfig{}, 99);
    EXPECT_TRUE(a.set.same_content(b.set));
    EXPECT_EQ(a.stats.attempts, b.stats.attempts);
    const auto c = synthesize_dataset(*seed_, 200, SynthConfig{}, 100);
    EXPECT_FALSE(a.set.same_content(c.set));
}

TEST_F(Synthesis, AcceptedSamplesSatisfyInvariants) {
    const SynthConfig cfg;
    const auto r = synthesize_dataset(*seed_, 300, cfg, 5);
    ASSERT_EQ(r.set.size(), 300u);
    EXPECT_EQ(r.stats.accepted, 300u);
    EXPECT_EQ(r.stats.shortfall, 0u);
    for (std::size_t i = 0; i < r.set.size(); ++i) {
        const auto& prov = r.provenance[i];
        const auto img = binarize(r.set.images[i]);
        EXPECT_EQ(count_components(img), 1u) << i;
        EXPECT_EQ(r.set.labels[i], seed_->labels[prov.left_id]) << i;
        EXPECT_EQ(r.set.labels[i], seed_->labels[prov.right_id]) << i;
        EXPECT_NE(prov.left_id, prov.right_id);
        EXPECT_NE(prov.left_structure, prov.right_structure);
        const auto lp = prepare_character(seed_->images[prov.left_id], 0, cfg);
        const auto rp = prepare_character(seed_->images[prov.right_id], 0, cfg);
        const double mean = 0.5 * static_cast<double>(lp.rendered.count() + rp.rendered.count());
        const double mass = static_cast<double>(img.count());
        EXPECT_GE(mass, cfg.size_band_lo * mean) << i;
        EXPECT_LE(mass, cfg.size_band_hi * mean) << i;
        EXPECT_NE(img, lp.rendered) << i;
        EXPECT_NE(img, translate(rp.rendered, prov.offset)) << i;
    }
}

TEST_F(Synthesis, CrossingPointsLieOnBothDilatedSkeletons) {
    for (std::size_t i = 0; i + 10 < 40; ++i) {
        const auto l = thin(binarize(seed_->images[i]));
        const auto r = thin(binarize(seed_->images[i + 10]));
        const auto dl = dilate(l.image(), 1);
        for (const auto& cps : sweep_offsets(l, r, 4, 2, 1)) {
            const auto dr = translate(dilate(r.image(), 1), cps.offset);
            for (const auto& p : cps.points) {
                EXPECT_TRUE(dl.get(p.x, p.y));
                EXPECT_TRUE(dr.get(p.x, p.y));
            }
            for (auto size : cps.cluster_sizes) EXPECT_LE(size, 5u);
        }
    }
}

TEST_F(Synthesis, BudgetExhaustionReportsShortfall) {
    LabeledSet lonely;
    lonely.push_back(seed_->images[0], seed_->labels[0]);
    SynthConfig cfg;
    cfg.max_attempts_per_target = 2;
    const auto r = synthesize_dataset(lonely, 5, cfg, 1);
    EXPECT_TRUE(r.set.empty());
    EXPECT_EQ(r.stats.shortfall, 5u);
    EXPECT_EQ(r.stats.attempts, 10u);
    EXPECT_EQ(r.stats.no_partner, 10u);
}

TEST(SynthConfig, ValidateRejectsNonsense) {
    SynthConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.step = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.size_band_lo = 2.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
