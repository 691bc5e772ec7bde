#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "xover/linear_svm.hpp"

using namespace xover;

namespace {

FeatureMatrix two_clusters(std::vector<int>& y, std::uint32_t seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> n(0.0, 0.3);
    FeatureMatrix x;
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2 ? 1 : -1;
        const double c = label * 2.0;
        const std::array<double, 2> row = {c + n(gen), -c + n(gen)};
        x.push_back(row);
        y.push_back(label);
    }
    return x;
}

// Central finite differences of hinge_objective with respect to every
// weight and the bias.
BinaryModel finite_difference(const BinaryModel& m, const FeatureMatrix& x, std::span<const int> y, double c,
                              double h) {
    BinaryModel g{std::vector<double>(m.weights.size()), 0.0};
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        BinaryModel plus = m, minus = m;
        plus.weights[j] += h;
        minus.weights[j] -= h;
        g.weights[j] = (hinge_objective(plus, x, y, c) - hinge_objective(minus, x, y, c)) / (2 * h);
    }
    BinaryModel plus = m, minus = m;
    plus.bias += h;
    minus.bias -= h;
    g.bias = (hinge_objective(plus, x, y, c) - hinge_objective(minus, x, y, c)) / (2 * h);
    return g;
}

double dotp(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST(TrainBinary, SeparableClustersReachZeroError) {
    std::vector<int> y;
    const auto x = two_clusters(y, 1);
    SvmParams p;
    p.seed = 3;
    const auto m = train_binary(x, y, p);
    for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_GT(y[i] * (dotp(m.weights, x.row(i)) + m.bias), 0.0) << i;
}

TEST(TrainBinary, ObjectiveDecreasesOverEarlyEpochs) {
    std::vector<int> y;
    auto x = two_clusters(y, 2);
    // Some label noise so the optimum is not trivially reached.
    y[0] = -y[0];
    y[5] = -y[5];
    SvmParams p;
    p.epochs = 5;
    std::vector<double> objective;
    const BinaryModel zero{std::vector<double>(2, 0.0), 0.0};
    objective.push_back(hinge_objective(zero, x, y, p.c));
    train_binary(x, y, p, [&](int, const BinaryModel& m) { objective.push_back(hinge_objective(m, x, y, p.c)); });
    ASSERT_EQ(objective.size(), 6u);
    double total_change = 0.0;
    for (std::size_t e = 1; e < objective.size(); ++e) total_change += objective[e] - objective[e - 1];
    EXPECT_LT(total_change / 5.0, 0.0);
    EXPECT_LT(objective.back(), objective.front());
}

TEST(HingeSubgradient, MatchesCentralFiniteDifferences) {
    std::mt19937 gen(11);
    std::normal_distribution<double> n(0.0, 1.0);
    FeatureMatrix x;
    std::vector<int> y;
    for (int i = 0; i < 10; ++i) {
        const std::array<double, 3> row = {n(gen), n(gen), n(gen)};
        x.push_back(row);
        y.push_back(i % 3 == 0 ? 1 : -1);
    }
    int checked = 0;
    for (int trial = 0; trial < 5; ++trial) {
        BinaryModel m{{n(gen), n(gen), n(gen)}, 0.5 * n(gen)};
        const double h = 1e-6;
        bool near_kink = false;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            near_kink |= std::abs(y[i] * (dotp(m.weights, x.row(i)) + m.bias) - 1.0) < 1e-3;
        }
        if (near_kink) continue;
        const auto analytic = hinge_subgradient(m, x, y, 0.7);
        const auto numeric = finite_difference(m, x, y, 0.7, h);
        double diff = std::pow(analytic.bias - numeric.bias, 2), norm = std::pow(numeric.bias, 2);
        for (std::size_t j = 0; j < 3; ++j) {
            diff += std::pow(analytic.weights[j] - numeric.weights[j], 2);
            norm += std::pow(numeric.weights[j], 2);
        }
        EXPECT_LE(std::sqrt(diff / norm), 1e-4) << "trial " << trial;
        ++checked;
    }
    EXPECT_GE(checked, 3);
}

TEST(TrainOva, SeparableMulticlassAndDuplicates) {
    FeatureMatrix x;
    std::vector<std::uint8_t> labels;
    for (std::uint8_t c = 0; c < 10; ++c) {
        for (int k = 0; k < 5; ++k) {
            std::vector<double> row(10, 0.0);
            row[c] = 1.0 + 0.05 * k;
            x.push_back(row);
            labels.push_back(c);
        }
    }
    SvmParams p;
    p.epochs = 50;
    const auto model = train_ova(x, labels, p);
    EXPECT_EQ(evaluate(model, x, labels).error_percent, 0.0);

    // The same vector labelled twice differently cannot both be right.
    FeatureMatrix dup;
    std::vector<std::uint8_t> dup_labels;
    const std::array<double, 2> v = {1.0, 2.0};
    for (int i = 0; i < 4; ++i) {
        dup.push_back(v);
        dup_labels.push_back(static_cast<std::uint8_t>(i % 2 ? 3 : 8));
    }
    const auto dm = train_ova(dup, dup_labels, p);
    EXPECT_GT(evaluate(dm, dup, dup_labels).error_percent, 0.0);
}

TEST(TrainOva, DeterministicAndRejectsEmptyInput) {
    FeatureMatrix x;
    std::vector<std::uint8_t> labels;
    std::mt19937 gen(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        const std::array<double, 4> row = {n(gen), n(gen), n(gen), n(gen)};
        x.push_back(row);
        labels.push_back(static_cast<std::uint8_t>(i % 10));
    }
    SvmParams p;
    p.seed = 9;
    EXPECT_EQ(train_ova(x, labels, p), train_ova(x, labels, p));
    EXPECT_THROW(train_ova(FeatureMatrix{}, {}, p), std::invalid_argument);
    const std::vector<std::uint8_t> bad(60, 12);
    EXPECT_THROW(train_ova(x, bad, p), std::invalid_argument);
}

TEST(Predict, TieBreakAndConstructedArgmax) {
    LinearModel zero;
    zero.dim = 3;
    zero.weights.assign(30, 0.0);
    const std::array<double, 3> x = {0.3, -1.2, 2.0};
    EXPECT_EQ(predict(zero, x), 0);

    LinearModel seven = zero;
    const double n2 = dotp(x, x);
    for (std::size_t j = 0; j < 3; ++j) seven.weights[7 * 3 + j] = x[j] / n2;
    EXPECT_EQ(predict(seven, x), 7);
    EXPECT_DOUBLE_EQ(class_scores(seven, x)[7], 1.0);

    const std::array<double, 2> wrong = {1.0, 2.0};
    EXPECT_THROW(predict(zero, wrong), std::invalid_argument);
}

TEST(Predict, InvariantToCommonBiasShiftAndPositiveScaling) {
    std::mt19937 gen(8);
    std::normal_distribution<double> n(0.0, 1.0);
    LinearModel m;
    m.dim = 5;
    for (int i = 0; i < 50; ++i) m.weights.push_back(n(gen));
    for (auto& b : m.bias) b = n(gen);
    for (int t = 0; t < 100; ++t) {
        std::array<double, 5> x{};
        for (auto& v : x) v = n(gen);
        const auto base = predict(m, x);
        LinearModel shifted = m;
        for (auto& b : shifted.bias) b += 3.25;
        EXPECT_EQ(predict(shifted, x), base);
        LinearModel scaled = m;
        for (auto& w : scaled.weights) w *= 4.0;
        for (auto& b : scaled.bias) b *= 4.0;
        EXPECT_EQ(predict(scaled, x), base);
    }
}

TEST(Evaluate, FourOfFiveCorrect) {
    LinearModel m;
    m.dim = 10;
    m.weights.assign(100, 0.0);
    for (std::size_t c = 0; c < 10; ++c) m.weights[c * 10 + c] = 1.0;
    FeatureMatrix x;
    std::vector<std::uint8_t> labels;
    for (std::uint8_t c = 0; c < 5; ++c) {
        std::vector<double> row(10, 0.0);
        row[c] = 1.0;
        x.push_back(row);
        labels.push_back(c == 4 ? 9 : c);
    }
    const auto r = evaluate(m, x, labels);
    EXPECT_DOUBLE_EQ(r.error_percent, 20.0);
    EXPECT_EQ(r.errors, 1u);
    EXPECT_EQ(r.total, 5u);
    EXPECT_EQ(r.confusion[9][4], 1u);
    EXPECT_EQ(r.confusion[2][2], 1u);
    EXPECT_THROW(evaluate(m, FeatureMatrix{}, {}), std::invalid_argument);
}

TEST(ModelFile, RoundTripIsBitExact) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    LinearModel m;
    m.dim = 37;
    for (int i = 0; i < 370; ++i) m.weights.push_back(u(gen) * std::pow(10.0, static_cast<int>(gen() % 20) - 10));
    for (auto& b : m.bias) b = u(gen) / 3.0;
    const auto path = std::filesystem::temp_directory_path() / "xover_model_roundtrip.json";
    save_model(m, path, {{"note", "test"}});
    nlohmann::json meta;
    const auto back = load_model(path, &meta);
    EXPECT_EQ(back, m);
    EXPECT_EQ(meta["note"], "test");
    EXPECT_THROW(model_from_json(nlohmann::json{{"format", "other"}}), std::runtime_error);
}
