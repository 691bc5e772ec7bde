#pragma once

// Benchmark harness: seed selection -> synthesis -> HOG + linear SVM training
// -> evaluation on the test set -> CSV / JSON reports.
//
// Every stage reads and writes files named by stage_path(), so the CLI can
// run stages one at a time and reproduce run_experiment() bit for bit.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xover/crossover.hpp"
#include "xover/dataset_io.hpp"
#include "xover/hog.hpp"
#include "xover/linear_svm.hpp"
#include "xover/tangent.hpp"

namespace xover {

inline constexpr std::string_view kVersion = "1.0.0";

enum class Technique { None, Tangent, Crossover };

std::string_view to_string(Technique t);
Technique parse_technique(std::string_view name);

// How every image (training and test alike) is normalised before HOG.
//   raw:      HOG on the gray image
//   binary:   binarize, back to 0/255
//   skeleton: binarize, thin, dilate -- the rendering synthesized crossover
//             samples already have
enum class Preprocess { Raw, Binary, Skeleton };

std::string_view to_string(Preprocess p);
Preprocess parse_preprocess(std::string_view name);

struct FeaturePipeline {
    Preprocess preprocess = Preprocess::Skeleton;
    int threshold = kDefaultThreshold;
    int dilate_iters = 1;
    HogParams hog;
};

GrayImage normalize_glyph(const GrayImage& img, const FeaturePipeline& pipeline);
FeatureMatrix featurize(const LabeledSet& set, const FeaturePipeline& pipeline);

struct DataPaths {
    std::filesystem::path train_images;
    std::filesystem::path train_labels;
    std::filesystem::path test_images;
    std::filesystem::path test_labels;

    // Standard MNIST file names inside `dir`.
    static DataPaths mnist_in(const std::filesystem::path& dir);
};

struct ExperimentConfig {
    DataPaths data = DataPaths::mnist_in("data/mnist");
    std::filesystem::path out_dir = "runs/default";
    std::size_t seed_count = 1000;
    std::vector<Technique> techniques = {Technique::None, Technique::Tangent, Technique::Crossover};
    std::vector<std::size_t> target_sizes = {10000, 20000, 30000, 40000, 50000, 60000};
    std::uint64_t rng_seed = 42;
    SynthConfig synth;
    TangentConfig tangent;
    FeaturePipeline features;
    SvmParams svm;
    // When false, every timing field is written as 0 so reports are
    // byte-identical across runs.
    bool record_timings = true;
    bool contact_sheets = false;
    // Persist synthesized IDX files for every cell.
    bool keep_datasets = true;
    // Train augmented cells on seed + synthesized samples instead of the
    // synthesized samples alone.
    bool include_seed = false;

    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// One (technique, size) grid cell. Technique::None has a single cell whose
// size is the seed count.
struct Cell {
    Technique technique = Technique::None;
    std::size_t target_size = 0;
};

std::vector<Cell> grid_cells(const ExperimentConfig& cfg);

std::filesystem::path stage_path(const std::filesystem::path& out_dir, const Cell& cell, std::string_view suffix);

// Seed stream salts: seed selection, crossover, tangent, SVM shuffling.
std::uint64_t stage_seed(const ExperimentConfig& cfg, std::string_view stage);

LabeledSet load_seed_set(const ExperimentConfig& cfg);

struct TrainingSet {
    LabeledSet set;
    double accept_rate = 1.0;
    std::size_t shortfall = 0;
    std::optional<SynthStats> crossover_stats;
    double seconds = 0.0;
};

TrainingSet build_training_set(const Cell& cell, const LabeledSet& seed, const ExperimentConfig& cfg);

LinearModel train_model(const LabeledSet& train, const ExperimentConfig& cfg);

EvalReport evaluate_model(const LinearModel& model, const FeatureMatrix& test_features,
                          std::span<const std::uint8_t> test_labels);

struct ReportRow {
    Technique technique = Technique::None;
    std::size_t target_size = 0;
    std::size_t achieved_size = 0;
    double error_percent = 0.0;
    double train_seconds = 0.0;
    double synth_accept_rate = 1.0;
    std::size_t shortfall = 0;
};

struct RunReport {
    std::vector<ReportRow> rows;
    std::vector<EvalReport> evals;  // parallel to rows
    std::vector<std::string> findings;
    nlohmann::json config;
};

// Published error rates for comparison (not reproduction targets).
std::optional<double> published_error_percent(Technique technique, std::size_t size);
inline constexpr double kPublishedFullTrainError = 16.55;

// Fixed column order: technique, target_size, achieved_size, error_percent,
// train_seconds, synth_accept_rate.
std::string rows_to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_csv(std::string_view text);

// Later inputs win on duplicate (technique, size) keys. Output is sorted by
// technique (none, tangent, crossover), then size.
std::vector<ReportRow> merge_rows(const std::vector<std::vector<ReportRow>>& inputs);

nlohmann::json report_to_json(const RunReport& report);

// Trend observations that are reported, not enforced.
std::vector<std::string> trend_findings(const std::vector<ReportRow>& rows);

// Individual stages, each reading its inputs from `cfg.out_dir`.
SynthStats run_synth_stage(const ExperimentConfig& cfg, const Cell& cell);
void run_train_stage(const ExperimentConfig& cfg, const Cell& cell);
ReportRow run_eval_stage(const ExperimentConfig& cfg, const Cell& cell);

// Full grid: checks inputs before any heavy work, then writes config.json,
// per-cell stage files, results.csv and report.json into cfg.out_dir.
RunReport run_experiment(const ExperimentConfig& cfg);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace xover
