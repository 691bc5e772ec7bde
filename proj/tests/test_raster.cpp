#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "xover/raster.hpp"

using namespace xover;

namespace {

bool is_subset(const BinaryImage& a, const BinaryImage& b) {
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (a.get(x, y) && !b.get(x, y)) return false;
    return true;
}

BinaryImage square(int w, int h, int x0, int y0, int side) {
    BinaryImage img(w, h);
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) img.set(x, y);
    return img;
}

}  // namespace

TEST(Binarize, Extremes) {
    EXPECT_EQ(binarize(GrayImage(28, 28, 0)).count(), 0u);
    EXPECT_EQ(binarize(GrayImage(28, 28, 255)).count(), 28u * 28u);
    GrayImage edge(2, 1);
    edge.at(0, 0) = 127;
    edge.at(1, 0) = 128;
    const auto b = binarize(edge, 128);
    EXPECT_FALSE(b.get(0, 0));
    EXPECT_TRUE(b.get(1, 0));
    EXPECT_EQ(to_gray(b).at(1, 0), 255);
}

TEST(Thin, HorizontalLineUnchanged) {
    BinaryImage line(28, 28);
    for (int x = 4; x < 20; ++x) line.set(x, 10);
    EXPECT_EQ(thin(line).image(), line);
}

TEST(Thin, EmptyStaysEmpty) {
    EXPECT_TRUE(thin(BinaryImage(28, 28)).image().empty());
}

TEST(Thin, FiveByFiveSquareMatchesTwoSubiterationRules) {
    const auto img = square(9, 9, 2, 2, 5);
    const auto expected = oracle::from_grid(oracle::zhang_suen(oracle::to_grid(img)));
    EXPECT_FALSE(expected.empty());
    EXPECT_EQ(thin(img).image(), expected);
}

TEST(Thin, TwoByTwoBlockKeepsAPixel) {
    // Textbook parallel deletion erases a 2x2 block entirely.
    const auto block = square(6, 6, 2, 2, 2);
    EXPECT_TRUE(oracle::from_grid(oracle::zhang_suen(oracle::to_grid(block))).empty());
    const auto skel = thin(block).image();
    EXPECT_FALSE(skel.empty());
    EXPECT_EQ(count_components(skel), 1u);
}

TEST(Thin, RandomBlobProperties) {
    std::mt19937 gen(2024);
    int guarded = 0;
    for (int i = 0; i < 200; ++i) {
        const auto img = oracle::random_blob(gen);
        const auto skel = thin(img).image();
        EXPECT_TRUE(is_subset(skel, img)) << "blob " << i;
        EXPECT_EQ(thin(skel).image(), skel) << "blob " << i;
        BinaryImage again = skel;
        EXPECT_EQ(thinning_pass(again), 0u) << "blob " << i;
        EXPECT_EQ(count_components(skel), count_components(img)) << "blob " << i;
        const auto textbook = oracle::from_grid(oracle::zhang_suen(oracle::to_grid(img)));
        if (count_components(textbook) == count_components(img)) {
            EXPECT_EQ(skel, textbook) << "blob " << i;
        } else {
            ++guarded;
        }
    }
    EXPECT_LT(guarded, 20);
}

TEST(Skeleton, FromThinRejectsThickImages) {
    EXPECT_THROW(Skeleton::from_thin(square(10, 10, 2, 2, 4)), std::invalid_argument);
    BinaryImage line(10, 10);
    for (int x = 1; x < 8; ++x) line.set(x, 4);
    EXPECT_NO_THROW(Skeleton::from_thin(line));
}

TEST(Dilate, SinglePixelBecomesBlock) {
    BinaryImage img(28, 28);
    img.set(14, 14);
    EXPECT_EQ(dilate(img, 1), square(28, 28, 13, 13, 3));
}

TEST(Dilate, ZeroIterationsIsIdentity) {
    std::mt19937 gen(3);
    const auto img = oracle::random_noise(gen, 16, 16, 0.2);
    EXPECT_EQ(dilate(img, 0), img);
    EXPECT_THROW(dilate(img, -1), std::invalid_argument);
}

TEST(Dilate, LineOfFiveBecomesThreeBySeven) {
    BinaryImage img(28, 28);
    for (int x = 10; x < 15; ++x) img.set(x, 12);
    BinaryImage expected(28, 28);
    for (int y = 11; y <= 13; ++y)
        for (int x = 9; x <= 15; ++x) expected.set(x, y);
    EXPECT_EQ(dilate(img, 1), expected);
}

TEST(Dilate, ComposesAndClips) {
    std::mt19937 gen(5);
    for (int i = 0; i < 20; ++i) {
        const auto img = oracle::random_noise(gen, 16, 16, 0.05);
        EXPECT_EQ(dilate(dilate(img, 1), 1), dilate(img, 2));
        EXPECT_TRUE(is_subset(img, dilate(img, 1)));
    }
    BinaryImage corner(5, 5);
    corner.set(0, 0);
    EXPECT_EQ(dilate(corner, 1).count(), 4u);
}

TEST(Translate, DropsPixelsLeavingCanvas) {
    BinaryImage img(5, 5);
    img.set(0, 0);
    img.set(4, 4);
    const auto t = translate(img, {1, 2});
    EXPECT_EQ(t.count(), 1u);
    EXPECT_TRUE(t.get(1, 2));
}

TEST(Overlay, IdenticalAtZero) {
    std::mt19937 gen(9);
    const auto img = oracle::random_noise(gen, 16, 16, 0.3);
    const auto r = overlay(img, img, {0, 0});
    EXPECT_EQ(r.union_mask, img);
    EXPECT_EQ(r.intersection, img);
}

TEST(Overlay, DisjointStrokes) {
    BinaryImage a(20, 20), b(20, 20);
    for (int x = 0; x < 8; ++x) a.set(x, 2);
    for (int x = 0; x < 8; ++x) b.set(x, 12);
    for (int dy = -3; dy <= 3; ++dy) EXPECT_TRUE(overlay(a, b, {0, dy}).intersection.empty());
}

TEST(Overlay, CrossOfLines) {
    BinaryImage h(28, 28), v(28, 28);
    for (int x = 0; x < 28; ++x) h.set(x, 5);
    for (int y = 0; y < 28; ++y) v.set(5, y);
    const auto r = overlay(h, v, {0, 0});
    EXPECT_EQ(r.intersection.pixels(), (PixelSet{{5, 5}}));
    EXPECT_EQ(r.union_mask.count(), 55u);
}

TEST(ConnectedComponents, SmallCases) {
    EXPECT_TRUE(connected_components(BinaryImage(8, 8)).empty());
    BinaryImage diag(8, 8);
    diag.set(2, 2);
    diag.set(3, 3);
    EXPECT_EQ(connected_components(diag).size(), 1u);
}

TEST(ConnectedComponents, MatchesFloodFillOracle) {
    std::mt19937 gen(77);
    for (int i = 0; i < 50; ++i) {
        const auto img = oracle::random_noise(gen, 16, 16, 0.15 + 0.01 * i);
        EXPECT_EQ(connected_components(img), oracle::flood_fill_components(img)) << "image " << i;
    }
}
