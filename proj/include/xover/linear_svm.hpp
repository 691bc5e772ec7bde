#pragma once

// One-vs-all linear SVM trained by stochastic subgradient descent on the
// primal hinge objective  1/2 |w|^2 + C * sum_i max(0, 1 - y_i (w.x_i + b)).

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace xover {

inline constexpr std::size_t kNumClasses = 10;

// Dense row-major feature matrix.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    // Appends a row; the first row fixes the column count.
    void push_back(std::span<const double> values);

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct SvmParams {
    double c = 1.0;
    int epochs = 20;
    double eta0 = 0.1;
    double decay = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BinaryModel {
    std::vector<double> weights;
    double bias = 0.0;
};

// Value and subgradient of the binary objective; y_i in {-1, +1}. At the
// hinge kink (margin exactly 1) the zero subgradient is taken.
double hinge_objective(const BinaryModel& model, const FeatureMatrix& x, std::span<const int> y, double c);
BinaryModel hinge_subgradient(const BinaryModel& model, const FeatureMatrix& x, std::span<const int> y, double c);

// Per-sample SGD: each epoch visits a seeded shuffle of the samples; sample
// step t (counted across epochs) uses eta0 / (1 + t * decay) on the
// per-sample objective |w|^2 / (2n) + C * hinge_i. The bias is not
// regularized. `on_epoch`, if set, is called after every epoch.
BinaryModel train_binary(const FeatureMatrix& x, std::span<const int> y, const SvmParams& params,
                         const std::function<void(int epoch, const BinaryModel&)>& on_epoch = {});

struct LinearModel {
    std::size_t dim = 0;
    std::vector<double> weights;  // kNumClasses x dim, row-major
    std::array<double, kNumClasses> bias{};

    std::span<const double> class_weights(std::size_t c) const { return {weights.data() + c * dim, dim}; }
    bool operator==(const LinearModel&) const = default;
};

// Class c is trained on +1 for label c and -1 otherwise, with shuffle seed
// derived from params.seed and c.
LinearModel train_ova(const FeatureMatrix& features, std::span<const std::uint8_t> labels,
                      const SvmParams& params);

std::array<double, kNumClasses> class_scores(const LinearModel& model, std::span<const double> x);

// argmax_c w_c.x + b_c, ties to the lowest class.
std::uint8_t predict(const LinearModel& model, std::span<const double> x);

struct EvalReport {
    double error_percent = 0.0;
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};  // [truth][predicted]
    std::size_t total = 0;
    std::size_t errors = 0;
};

EvalReport evaluate(const LinearModel& model, const FeatureMatrix& features, std::span<const std::uint8_t> labels);

nlohmann::json eval_to_json(const EvalReport& report);

// JSON with a format tag, dimensions, row-major weights and biases. Doubles
// are written in shortest round-trip form, so save/load is bit-exact.
// `metadata` is stored verbatim under "metadata".
nlohmann::json model_to_json(const LinearModel& model, const nlohmann::json& metadata = nlohmann::json::object());
LinearModel model_from_json(const nlohmann::json& doc);

void save_model(const LinearModel& model, const std::filesystem::path& path,
                const nlohmann::json& metadata = nlohmann::json::object());
LinearModel load_model(const std::filesystem::path& path, nlohmann::json* metadata = nullptr);

}  // namespace xover
