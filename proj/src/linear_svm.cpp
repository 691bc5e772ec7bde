#include "xover/linear_svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "xover/rng.hpp"

namespace xover {

namespace {

constexpr const char* kModelFormat = "xover-linear-model";
constexpr int kModelVersion = 1;

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void check_training_input(const FeatureMatrix& x, std::size_t labels) {
    if (x.rows() == 0) {
        throw std::invalid_argument("svm: training set is empty");
    }
    if (x.rows() != labels) {
        throw std::invalid_argument("svm: " + std::to_string(x.rows()) + " feature rows but " +
                                    std::to_string(labels) + " labels");
    }
}

}  // namespace

void FeatureMatrix::push_back(std::span<const double> values) {
    if (rows_ == 0 && data_.empty()) {
        cols_ = values.size();
    } else if (values.size() != cols_) {
        throw std::invalid_argument("FeatureMatrix: row has " + std::to_string(values.size()) + " values, expected " +
                                    std::to_string(cols_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

void SvmParams::validate() const {
    if (!(c > 0.0)) throw std::invalid_argument("svm: C must be > 0");
    if (epochs < 1) throw std::invalid_argument("svm: epochs must be >= 1");
    if (!(eta0 > 0.0)) throw std::invalid_argument("svm: eta0 must be > 0");
    if (!(decay >= 0.0)) throw std::invalid_argument("svm: decay must be >= 0");
}

double hinge_objective(const BinaryModel& model, const FeatureMatrix& x, std::span<const int> y, double c) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        loss += std::max(0.0, 1.0 - y[i] * (dot(model.weights, x.row(i)) + model.bias));
    }
    return 0.5 * dot(model.weights, model.weights) + c * loss;
}

BinaryModel hinge_subgradient(const BinaryModel& model, const FeatureMatrix& x, std::span<const int> y, double c) {
    BinaryModel g{model.weights, 0.0};
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double margin = y[i] * (dot(model.weights, x.row(i)) + model.bias);
        if (margin < 1.0) {
            const auto row = x.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) {
                g.weights[j] -= c * y[i] * row[j];
            }
            g.bias -= c * y[i];
        }
    }
    return g;
}

BinaryModel train_binary(const FeatureMatrix& x, std::span<const int> y, const SvmParams& params,
                         const std::function<void(int, const BinaryModel&)>& on_epoch) {
    params.validate();
    check_training_input(x, y.size());
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();

    // w = scale * v, so the per-step shrink costs O(1).
    std::vector<double> v(d, 0.0);
    double scale = 1.0;
    double bias = 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(params.seed);
    std::uint64_t t = 0;

    auto materialize = [&] {
        BinaryModel m{v, bias};
        for (double& w : m.weights) {
            w *= scale;
        }
        return m;
    };

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        for (std::size_t i : order) {
            const double eta = params.eta0 / (1.0 + static_cast<double>(t) * params.decay);
            ++t;
            const auto row = x.row(i);
            const double margin = y[i] * (scale * dot(v, row) + bias);
            const double shrink = 1.0 - eta / static_cast<double>(n);
            if (shrink <= 0.0) {
                std::fill(v.begin(), v.end(), 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if (margin < 1.0) {
                const double step = eta * params.c * y[i];
                const double vstep = step / scale;
                for (std::size_t j = 0; j < d; ++j) {
                    v[j] += vstep * row[j];
                }
                bias += step;
            }
            if (scale < 1e-9) {
                for (double& w : v) {
                    w *= scale;
                }
                scale = 1.0;
            }
        }
        if (on_epoch) {
            on_epoch(epoch, materialize());
        }
    }
    return materialize();
}

LinearModel train_ova(const FeatureMatrix& features, std::span<const std::uint8_t> labels,
                      const SvmParams& params) {
    params.validate();
    check_training_input(features, labels.size());
    for (auto l : labels) {
        if (l >= kNumClasses) {
            throw std::invalid_argument("svm: label " + std::to_string(l) + " is outside 0..9");
        }
    }
    LinearModel model;
    model.dim = features.cols();
    model.weights.assign(kNumClasses * model.dim, 0.0);
    std::vector<int> y(labels.size());
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            y[i] = labels[i] == c ? 1 : -1;
        }
        SvmParams per_class = params;
        per_class.seed = mix_seed(params.seed, c);
        const auto binary = train_binary(features, y, per_class);
        std::copy(binary.weights.begin(), binary.weights.end(),
                  model.weights.begin() + static_cast<std::ptrdiff_t>(c * model.dim));
        model.bias[c] = binary.bias;
    }
    return model;
}

std::array<double, kNumClasses> class_scores(const LinearModel& model, std::span<const double> x) {
    if (x.size() != model.dim) {
        throw std::invalid_argument("predict: descriptor has " + std::to_string(x.size()) +
                                    " values, model expects " + std::to_string(model.dim));
    }
    std::array<double, kNumClasses> scores{};
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        scores[c] = dot(model.class_weights(c), x) + model.bias[c];
    }
    return scores;
}

std::uint8_t predict(const LinearModel& model, std::span<const double> x) {
    const auto scores = class_scores(model, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
        if (scores[c] > scores[best]) {
            best = c;
        }
    }
    return static_cast<std::uint8_t>(best);
}

EvalReport evaluate(const LinearModel& model, const FeatureMatrix& features, std::span<const std::uint8_t> labels) {
    if (features.rows() == 0) {
        throw std::invalid_argument("evaluate: test set is empty");
    }
    if (features.rows() != labels.size()) {
        throw std::invalid_argument("evaluate: feature and label counts differ");
    }
    EvalReport report;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto predicted = predict(model, features.row(i));
        ++report.confusion[labels[i]][predicted];
        if (predicted != labels[i]) {
            ++report.errors;
        }
    }
    report.total = features.rows();
    report.error_percent = 100.0 * static_cast<double>(report.errors) / static_cast<double>(report.total);
    return report;
}

nlohmann::json eval_to_json(const EvalReport& report) {
    nlohmann::json confusion = nlohmann::json::array();
    for (const auto& row : report.confusion) {
        confusion.push_back(row);
    }
    return {{"error_percent", report.error_percent},
            {"errors", report.errors},
            {"total", report.total},
            {"confusion", confusion}};
}

nlohmann::json model_to_json(const LinearModel& model, const nlohmann::json& metadata) {
    nlohmann::json weights = nlohmann::json::array();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto w = model.class_weights(c);
        weights.push_back(std::vector<double>(w.begin(), w.end()));
    }
    return {{"format", kModelFormat},
            {"version", kModelVersion},
            {"classes", kNumClasses},
            {"dim", model.dim},
            {"bias", model.bias},
            {"weights", weights},
            {"metadata", metadata}};
}

LinearModel model_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != kModelFormat) {
        throw std::runtime_error(std::string("model file: missing format tag \"") + kModelFormat + "\"");
    }
    if (doc.at("version").get<int>() != kModelVersion) {
        throw std::runtime_error("model file: unsupported version");
    }
    if (doc.at("classes").get<std::size_t>() != kNumClasses) {
        throw std::runtime_error("model file: expected 10 classes");
    }
    LinearModel model;
    model.dim = doc.at("dim").get<std::size_t>();
    const auto& weights = doc.at("weights");
    const auto& bias = doc.at("bias");
    if (weights.size() != kNumClasses || bias.size() != kNumClasses) {
        throw std::runtime_error("model file: weights/bias must have 10 rows");
    }
    model.weights.reserve(kNumClasses * model.dim);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto row = weights[c].get<std::vector<double>>();
        if (row.size() != model.dim) {
            throw std::runtime_error("model file: weight row " + std::to_string(c) + " has wrong length");
        }
        for (double w : row) {
            if (!std::isfinite(w)) {
                throw std::runtime_error("model file: non-finite weight");
            }
        }
        model.weights.insert(model.weights.end(), row.begin(), row.end());
        model.bias[c] = bias[c].get<double>();
    }
    return model;
}

void save_model(const LinearModel& model, const std::filesystem::path& path, const nlohmann::json& metadata) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << model_to_json(model, metadata).dump() << '\n';
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

LinearModel load_model(const std::filesystem::path& path, nlohmann::json* metadata) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    if (metadata) {
        *metadata = doc.value("metadata", nlohmann::json::object());
    }
    return model_from_json(doc);
}

}  // namespace xover
