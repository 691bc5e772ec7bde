#include "xover/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "xover/raster.hpp"
#include "xover/rng.hpp"

namespace xover {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_keys(const json& obj, const std::set<std::string>& allowed, std::string_view where) {
    if (!obj.is_object()) {
        throw std::invalid_argument("config: `" + std::string(where) + "` must be an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) {
            throw std::invalid_argument("config: unknown key `" + key + "` in `" + std::string(where) + "`");
        }
    }
}

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
    if (obj.contains(key)) {
        target = obj.at(key).get<T>();
    }
}

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

json synth_summary(const Cell& cell, const TrainingSet& ts, bool timings) {
    json doc = {{"technique", to_string(cell.technique)},
                {"target_size", cell.target_size},
                {"achieved_size", ts.set.size()},
                {"accept_rate", ts.accept_rate},
                {"shortfall", ts.shortfall},
                {"seconds", timings ? ts.seconds : 0.0}};
    if (ts.crossover_stats) {
        const auto& s = *ts.crossover_stats;
        json rejected = json::object();
        for (std::size_t r = 1; r < s.rejected.size(); ++r) {
            rejected[std::string(to_string(static_cast<RejectReason>(r)))] = s.rejected[r];
        }
        doc["crossover"] = {{"attempts", s.attempts},   {"candidates", s.candidates},
                            {"accepted", s.accepted},   {"no_partner", s.no_partner},
                            {"no_crossing", s.no_crossing}, {"degenerate", s.degenerate},
                            {"rejected", rejected}};
    }
    return doc;
}

ReportRow make_row(const Cell& cell, const json& synth, const json& train, const EvalReport& eval) {
    ReportRow row;
    row.technique = cell.technique;
    row.target_size = cell.target_size;
    row.achieved_size = synth.at("achieved_size").get<std::size_t>();
    row.synth_accept_rate = synth.at("accept_rate").get<double>();
    row.shortfall = synth.at("shortfall").get<std::size_t>();
    row.train_seconds = train.at("train_seconds").get<double>();
    row.error_percent = eval.error_percent;
    return row;
}

json read_json(const fs::path& path, std::string_view producer) {
    if (!fs::exists(path)) {
        throw std::runtime_error("missing " + path.string() + "; run `xover " + std::string(producer) +
                                 "` for this cell first");
    }
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void check_inputs_exist(const ExperimentConfig& cfg) {
    for (const auto& p : {cfg.data.train_images, cfg.data.train_labels, cfg.data.test_images, cfg.data.test_labels}) {
        if (!fs::exists(p)) {
            throw std::runtime_error("input file not found: " + p.string());
        }
    }
}

LabeledSet load_test_set(const ExperimentConfig& cfg) {
    return read_idx(cfg.data.test_images, cfg.data.test_labels, Provenance::MnistTest);
}

void write_training_set(const ExperimentConfig& cfg, const Cell& cell, const TrainingSet& ts) {
    // The seed-only cell trains straight from seed-images.idx.
    if (cell.technique == Technique::None) {
        return;
    }
    if (cfg.keep_datasets) {
        write_idx(ts.set, stage_path(cfg.out_dir, cell, "images.idx"), stage_path(cfg.out_dir, cell, "labels.idx"));
    }
    write_text(stage_path(cfg.out_dir, cell, "synth.json"), synth_summary(cell, ts, cfg.record_timings).dump(2) + "\n");
    if (cfg.contact_sheets && !ts.set.empty()) {
        LabeledSet preview;
        for (std::size_t i = 0; i < std::min<std::size_t>(ts.set.size(), 100); ++i) {
            preview.push_back(ts.set.images[i], ts.set.labels[i]);
        }
        write_contact_sheet(preview, stage_path(cfg.out_dir, cell, "sheet.png"), 10);
    }
}

json train_and_save(const ExperimentConfig& cfg, const Cell& cell, const LabeledSet& train) {
    const auto start = Clock::now();
    const auto model = train_model(train, cfg);
    const double secs = cfg.record_timings ? seconds_since(start) : 0.0;
    const json meta = {{"technique", to_string(cell.technique)},
                       {"target_size", cell.target_size},
                       {"samples", train.size()},
                       {"features", to_json(cfg)["features"]}};
    save_model(model, stage_path(cfg.out_dir, cell, "model.json"), meta);
    const json summary = {{"train_seconds", secs}, {"samples", train.size()}};
    write_text(stage_path(cfg.out_dir, cell, "train.json"), summary.dump(2) + "\n");
    return summary;
}

LabeledSet with_seed(const ExperimentConfig& cfg, const Cell& cell, LabeledSet synthesized, const LabeledSet& seed) {
    if (!cfg.include_seed || cell.technique == Technique::None) {
        return synthesized;
    }
    LabeledSet merged = seed;
    merged.provenance = Provenance::Synthetic;
    merged.images.insert(merged.images.end(), synthesized.images.begin(), synthesized.images.end());
    merged.labels.insert(merged.labels.end(), synthesized.labels.begin(), synthesized.labels.end());
    return merged;
}

EvalReport evaluate_and_save(const ExperimentConfig& cfg, const Cell& cell, const FeatureMatrix& test_features,
                             std::span<const std::uint8_t> test_labels) {
    const auto model = load_model(stage_path(cfg.out_dir, cell, "model.json"));
    const auto report = evaluate_model(model, test_features, test_labels);
    write_text(stage_path(cfg.out_dir, cell, "eval.json"), eval_to_json(report).dump(2) + "\n");
    return report;
}

}  // namespace

std::string_view to_string(Technique t) {
    switch (t) {
        case Technique::None: return "none";
        case Technique::Tangent: return "tangent";
        case Technique::Crossover: return "crossover";
    }
    return "unknown";
}

Technique parse_technique(std::string_view name) {
    if (name == "none") return Technique::None;
    if (name == "tangent") return Technique::Tangent;
    if (name == "crossover") return Technique::Crossover;
    throw std::invalid_argument("unknown technique `" + std::string(name) + "` (expected none, tangent or crossover)");
}

std::string_view to_string(Preprocess p) {
    switch (p) {
        case Preprocess::Raw: return "raw";
        case Preprocess::Binary: return "binary";
        case Preprocess::Skeleton: return "skeleton";
    }
    return "unknown";
}

Preprocess parse_preprocess(std::string_view name) {
    if (name == "raw") return Preprocess::Raw;
    if (name == "binary") return Preprocess::Binary;
    if (name == "skeleton") return Preprocess::Skeleton;
    throw std::invalid_argument("unknown preprocess mode `" + std::string(name) + "` (expected raw, binary or skeleton)");
}

GrayImage normalize_glyph(const GrayImage& img, const FeaturePipeline& pipeline) {
    switch (pipeline.preprocess) {
        case Preprocess::Raw: return img;
        case Preprocess::Binary: return to_gray(binarize(img, pipeline.threshold));
        case Preprocess::Skeleton:
            return to_gray(dilate(thin(binarize(img, pipeline.threshold)).image(), pipeline.dilate_iters));
    }
    return img;
}

FeatureMatrix featurize(const LabeledSet& set, const FeaturePipeline& pipeline) {
    FeatureMatrix out;
    for (const auto& img : set.images) {
        out.push_back(hog(normalize_glyph(img, pipeline), pipeline.hog).values);
    }
    return out;
}

DataPaths DataPaths::mnist_in(const fs::path& dir) {
    return {dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", dir / "t10k-images-idx3-ubyte",
            dir / "t10k-labels-idx1-ubyte"};
}

void ExperimentConfig::validate() const {
    if (seed_count == 0) throw std::invalid_argument("config: seed-count must be > 0");
    if (techniques.empty()) throw std::invalid_argument("config: at least one technique is required");
    const bool needs_sizes = std::any_of(techniques.begin(), techniques.end(),
                                         [](Technique t) { return t != Technique::None; });
    if (needs_sizes && target_sizes.empty()) {
        throw std::invalid_argument("config: target-sizes must be nonempty for tangent/crossover");
    }
    for (auto s : target_sizes) {
        if (s == 0) throw std::invalid_argument("config: target sizes must be > 0");
    }
    synth.validate();
    tangent.validate();
    features.hog.validate();
    if (features.threshold < 0 || features.threshold > 255) {
        throw std::invalid_argument("config: features.threshold must be in [0,255]");
    }
    if (features.dilate_iters < 0) throw std::invalid_argument("config: features.dilate-iters must be >= 0");
    svm.validate();
}

json to_json(const ExperimentConfig& cfg) {
    json techniques = json::array();
    for (auto t : cfg.techniques) {
        techniques.push_back(to_string(t));
    }
    json alpha = json::object();
    for (std::size_t k = 0; k < kTangentKinds; ++k) {
        alpha[std::string(to_string(static_cast<TangentKind>(k)))] = cfg.tangent.alpha_max[k];
    }
    const auto& s = cfg.synth;
    const auto& h = cfg.features.hog;
    return {
        {"data",
         {{"train-images", cfg.data.train_images.string()},
          {"train-labels", cfg.data.train_labels.string()},
          {"test-images", cfg.data.test_images.string()},
          {"test-labels", cfg.data.test_labels.string()}}},
        {"out-dir", cfg.out_dir.string()},
        {"seed-count", cfg.seed_count},
        {"techniques", techniques},
        {"target-sizes", cfg.target_sizes},
        {"rng-seed", cfg.rng_seed},
        {"synth",
         {{"threshold", s.threshold},
          {"sweep-radius", s.sweep_radius},
          {"step", s.step},
          {"min-points", s.min_points},
          {"max-cluster-size", s.max_cluster_size},
          {"erase-radius", s.erase_radius},
          {"min-fragment-size", s.min_fragment_size},
          {"dilate-iters", s.dilate_iters},
          {"size-band", {s.size_band_lo, s.size_band_hi}},
          {"max-attempts", s.max_attempts_per_target}}},
        {"tangent", {{"smoothing-sigma", cfg.tangent.smoothing_sigma}, {"alpha-max", alpha}}},
        {"features",
         {{"preprocess", to_string(cfg.features.preprocess)},
          {"threshold", cfg.features.threshold},
          {"dilate-iters", cfg.features.dilate_iters},
          {"hog",
           {{"cell-size", h.cell_size},
            {"bins", h.bins},
            {"block-cells", h.block_cells},
            {"block-stride", h.block_stride},
            {"epsilon", h.epsilon},
            {"normalize", h.normalize_blocks}}}}},
        {"svm", {{"c", cfg.svm.c}, {"epochs", cfg.svm.epochs}, {"eta0", cfg.svm.eta0}, {"decay", cfg.svm.decay}}},
        {"record-timings", cfg.record_timings},
        {"contact-sheets", cfg.contact_sheets},
        {"keep-datasets", cfg.keep_datasets},
        {"include-seed", cfg.include_seed},
    };
}

ExperimentConfig config_from_json(const json& doc) {
    ExperimentConfig cfg;
    try {
        require_keys(doc,
                     {"data", "mnist-dir", "out-dir", "seed-count", "techniques", "target-sizes", "rng-seed", "synth",
                      "tangent", "features", "svm", "record-timings", "contact-sheets", "keep-datasets",
                      "include-seed"},
                     "root");
        if (doc.contains("mnist-dir")) {
            cfg.data = DataPaths::mnist_in(doc.at("mnist-dir").get<std::string>());
        }
        if (doc.contains("data")) {
            const auto& d = doc.at("data");
            require_keys(d, {"train-images", "train-labels", "test-images", "test-labels"}, "data");
            auto path_if = [&](const char* key, fs::path& target) {
                if (d.contains(key)) target = d.at(key).get<std::string>();
            };
            path_if("train-images", cfg.data.train_images);
            path_if("train-labels", cfg.data.train_labels);
            path_if("test-images", cfg.data.test_images);
            path_if("test-labels", cfg.data.test_labels);
        }
        if (doc.contains("out-dir")) cfg.out_dir = doc.at("out-dir").get<std::string>();
        read_if(doc, "seed-count", cfg.seed_count);
        if (doc.contains("techniques")) {
            cfg.techniques.clear();
            for (const auto& t : doc.at("techniques")) {
                cfg.techniques.push_back(parse_technique(t.get<std::string>()));
            }
        }
        read_if(doc, "target-sizes", cfg.target_sizes);
        read_if(doc, "rng-seed", cfg.rng_seed);
        read_if(doc, "record-timings", cfg.record_timings);
        read_if(doc, "contact-sheets", cfg.contact_sheets);
        read_if(doc, "keep-datasets", cfg.keep_datasets);
        read_if(doc, "include-seed", cfg.include_seed);

        if (doc.contains("synth")) {
            const auto& s = doc.at("synth");
            require_keys(s,
                         {"threshold", "sweep-radius", "step", "min-points", "max-cluster-size", "erase-radius",
                          "min-fragment-size", "dilate-iters", "size-band", "max-attempts"},
                         "synth");
            read_if(s, "threshold", cfg.synth.threshold);
            read_if(s, "sweep-radius", cfg.synth.sweep_radius);
            read_if(s, "step", cfg.synth.step);
            read_if(s, "min-points", cfg.synth.min_points);
            read_if(s, "max-cluster-size", cfg.synth.max_cluster_size);
            read_if(s, "erase-radius", cfg.synth.erase_radius);
            read_if(s, "min-fragment-size", cfg.synth.min_fragment_size);
            read_if(s, "dilate-iters", cfg.synth.dilate_iters);
            read_if(s, "max-attempts", cfg.synth.max_attempts_per_target);
            if (s.contains("size-band")) {
                const auto band = s.at("size-band").get<std::vector<double>>();
                if (band.size() != 2) throw std::invalid_argument("config: synth.size-band must be [lo, hi]");
                cfg.synth.size_band_lo = band[0];
                cfg.synth.size_band_hi = band[1];
            }
        }
        if (doc.contains("tangent")) {
            const auto& t = doc.at("tangent");
            require_keys(t, {"smoothing-sigma", "alpha-max"}, "tangent");
            read_if(t, "smoothing-sigma", cfg.tangent.smoothing_sigma);
            if (t.contains("alpha-max")) {
                const auto& a = t.at("alpha-max");
                std::set<std::string> names;
                for (std::size_t k = 0; k < kTangentKinds; ++k) {
                    names.insert(std::string(to_string(static_cast<TangentKind>(k))));
                }
                require_keys(a, names, "tangent.alpha-max");
                for (std::size_t k = 0; k < kTangentKinds; ++k) {
                    read_if(a, std::string(to_string(static_cast<TangentKind>(k))).c_str(), cfg.tangent.alpha_max[k]);
                }
            }
        }
        if (doc.contains("features")) {
            const auto& f = doc.at("features");
            require_keys(f, {"preprocess", "threshold", "dilate-iters", "hog"}, "features");
            if (f.contains("preprocess")) cfg.features.preprocess = parse_preprocess(f.at("preprocess").get<std::string>());
            read_if(f, "threshold", cfg.features.threshold);
            read_if(f, "dilate-iters", cfg.features.dilate_iters);
            if (f.contains("hog")) {
                const auto& h = f.at("hog");
                require_keys(h, {"cell-size", "bins", "block-cells", "block-stride", "epsilon", "normalize"},
                             "features.hog");
                read_if(h, "cell-size", cfg.features.hog.cell_size);
                read_if(h, "bins", cfg.features.hog.bins);
                read_if(h, "block-cells", cfg.features.hog.block_cells);
                read_if(h, "block-stride", cfg.features.hog.block_stride);
                read_if(h, "epsilon", cfg.features.hog.epsilon);
                read_if(h, "normalize", cfg.features.hog.normalize_blocks);
            }
        }
        if (doc.contains("svm")) {
            const auto& s = doc.at("svm");
            require_keys(s, {"c", "epochs", "eta0", "decay"}, "svm");
            read_if(s, "c", cfg.svm.c);
            read_if(s, "epochs", cfg.svm.epochs);
            read_if(s, "eta0", cfg.svm.eta0);
            read_if(s, "decay", cfg.svm.decay);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

std::vector<Cell> grid_cells(const ExperimentConfig& cfg) {
    std::vector<Cell> cells;
    for (auto t : cfg.techniques) {
        if (t == Technique::None) {
            cells.push_back({t, cfg.seed_count});
            continue;
        }
        for (auto size : cfg.target_sizes) {
            cells.push_back({t, size});
        }
    }
    return cells;
}

fs::path stage_path(const fs::path& out_dir, const Cell& cell, std::string_view suffix) {
    return out_dir / (std::string(to_string(cell.technique)) + "-" + std::to_string(cell.target_size) + "-" +
                      std::string(suffix));
}

std::uint64_t stage_seed(const ExperimentConfig& cfg, std::string_view stage) {
    if (stage == "seed") return mix_seed(cfg.rng_seed, 0);
    if (stage == "crossover") return mix_seed(cfg.rng_seed, 1);
    if (stage == "tangent") return mix_seed(cfg.rng_seed, 2);
    if (stage == "svm") return mix_seed(cfg.rng_seed, 3);
    throw std::invalid_argument("unknown stage `" + std::string(stage) + "`");
}

LabeledSet load_seed_set(const ExperimentConfig& cfg) {
    const auto train = read_idx(cfg.data.train_images, cfg.data.train_labels, Provenance::MnistTrain);
    return select_seed(train, cfg.seed_count, stage_seed(cfg, "seed"));
}

TrainingSet build_training_set(const Cell& cell, const LabeledSet& seed, const ExperimentConfig& cfg) {
    TrainingSet ts;
    const auto start = Clock::now();
    switch (cell.technique) {
        case Technique::None:
            ts.set = seed;
            break;
        case Technique::Tangent:
            ts.set = sample_tangent_dataset(seed, cell.target_size, cfg.tangent, stage_seed(cfg, "tangent"));
            break;
        case Technique::Crossover: {
            auto result = synthesize_dataset(seed, cell.target_size, cfg.synth, stage_seed(cfg, "crossover"));
            ts.set = std::move(result.set);
            ts.accept_rate = result.stats.accept_rate();
            ts.shortfall = result.stats.shortfall;
            ts.crossover_stats = result.stats;
            break;
        }
    }
    ts.seconds = seconds_since(start);
    return ts;
}

LinearModel train_model(const LabeledSet& train, const ExperimentConfig& cfg) {
    SvmParams params = cfg.svm;
    params.seed = stage_seed(cfg, "svm");
    return train_ova(featurize(train, cfg.features), train.labels, params);
}

EvalReport evaluate_model(const LinearModel& model, const FeatureMatrix& test_features,
                          std::span<const std::uint8_t> test_labels) {
    return evaluate(model, test_features, test_labels);
}

std::optional<double> published_error_percent(Technique technique, std::size_t size) {
    static const std::map<std::size_t, double> tangent = {{10000, 21.42}, {20000, 16.22}, {30000, 13.41},
                                                          {40000, 12.15}, {50000, 12.7},  {60000, 11.74}};
    static const std::map<std::size_t, double> crossover = {{10000, 10.66}, {20000, 9.42}, {30000, 9.07},
                                                            {40000, 8.5},   {50000, 8.35}, {60000, 8.06}};
    const std::map<std::size_t, double>* table = nullptr;
    switch (technique) {
        case Technique::Tangent: table = &tangent; break;
        case Technique::Crossover: table = &crossover; break;
        case Technique::None:
            if (size == 60000) return kPublishedFullTrainError;
            return std::nullopt;
    }
    const auto it = table->find(size);
    if (it == table->end()) return std::nullopt;
    return it->second;
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
    std::string out = "technique,target_size,achieved_size,error_percent,train_seconds,synth_accept_rate\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.technique)) + "," + std::to_string(r.target_size) + "," +
               std::to_string(r.achieved_size) + "," + format_double("%.4f", r.error_percent) + "," +
               format_double("%.3f", r.train_seconds) + "," + format_double("%.4f", r.synth_accept_rate) + "\n";
    }
    return out;
}

std::vector<ReportRow> rows_from_csv(std::string_view text) {
    std::vector<ReportRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("technique,", 0) == 0) continue;
        }
        std::vector<std::string> cols;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) cols.push_back(field);
        if (cols.size() != 6) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": expected 6 columns, got " +
                                        std::to_string(cols.size()));
        }
        try {
            ReportRow r;
            r.technique = parse_technique(cols[0]);
            r.target_size = std::stoull(cols[1]);
            r.achieved_size = std::stoull(cols[2]);
            r.error_percent = std::stod(cols[3]);
            r.train_seconds = std::stod(cols[4]);
            r.synth_accept_rate = std::stod(cols[5]);
            r.shortfall = r.achieved_size < r.target_size ? r.target_size - r.achieved_size : 0;
            rows.push_back(r);
        } catch (const std::logic_error& e) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

std::vector<ReportRow> merge_rows(const std::vector<std::vector<ReportRow>>& inputs) {
    std::map<std::pair<int, std::size_t>, ReportRow> keyed;
    for (const auto& rows : inputs) {
        for (const auto& r : rows) {
            keyed[{static_cast<int>(r.technique), r.target_size}] = r;
        }
    }
    std::vector<ReportRow> out;
    for (const auto& [_, r] : keyed) out.push_back(r);
    return out;
}

std::vector<std::string> trend_findings(const std::vector<ReportRow>& rows) {
    std::vector<std::string> findings;
    std::vector<const ReportRow*> xover;
    for (const auto& r : rows) {
        if (r.technique == Technique::Crossover) xover.push_back(&r);
        if (r.shortfall > 0) {
            findings.push_back(std::string(to_string(r.technique)) + " at " + std::to_string(r.target_size) +
                               ": synthesis shortfall of " + std::to_string(r.shortfall) + " samples");
        }
    }
    if (xover.size() >= 2) {
        auto [lo, hi] = std::minmax_element(xover.begin(), xover.end(), [](const ReportRow* a, const ReportRow* b) {
            return a->target_size < b->target_size;
        });
        const bool monotone = (*hi)->error_percent <= (*lo)->error_percent;
        findings.push_back("crossover error at " + std::to_string((*hi)->target_size) + " (" +
                           format_double("%.2f", (*hi)->error_percent) + "%) " + (monotone ? "<=" : ">") +
                           " error at " + std::to_string((*lo)->target_size) + " (" +
                           format_double("%.2f", (*lo)->error_percent) + "%)" +
                           (monotone ? "" : ": deviates from the published decreasing trend"));
    }
    return findings;
}

json report_to_json(const RunReport& report) {
    json rows = json::array();
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        json row = {{"technique", to_string(r.technique)},
                    {"target_size", r.target_size},
                    {"achieved_size", r.achieved_size},
                    {"error_percent", r.error_percent},
                    {"train_seconds", r.train_seconds},
                    {"synth_accept_rate", r.synth_accept_rate},
                    {"shortfall", r.shortfall}};
        const auto published = published_error_percent(r.technique, r.target_size);
        row["published_error_percent"] = published ? json(*published) : json(nullptr);
        if (i < report.evals.size()) {
            row["confusion"] = eval_to_json(report.evals[i])["confusion"];
        }
        rows.push_back(row);
    }
    json published_tangent = json::object();
    json published_crossover = json::object();
    for (std::size_t size = 10000; size <= 60000; size += 10000) {
        published_tangent[std::to_string(size)] = *published_error_percent(Technique::Tangent, size);
        published_crossover[std::to_string(size)] = *published_error_percent(Technique::Crossover, size);
    }
    return {{"tool", "xover"},
            {"version", kVersion},
            {"config", report.config},
            {"rows", rows},
            {"published_reference",
             {{"note",
               "published error rates from 1,000 MNIST seeds; parameters behind them are unpublished, so they "
               "are listed for comparison only"},
              {"full_train_baseline", kPublishedFullTrainError},
              {"tangent", published_tangent},
              {"crossover", published_crossover}}},
            {"findings", report.findings}};
}

SynthStats run_synth_stage(const ExperimentConfig& cfg, const Cell& cell) {
    cfg.validate();
    check_inputs_exist(cfg);
    fs::create_directories(cfg.out_dir);
    const auto seed = load_seed_set(cfg);
    const auto ts = build_training_set(cell, seed, cfg);
    write_training_set(cfg, cell, ts);
    return ts.crossover_stats.value_or(SynthStats{});
}

void run_train_stage(const ExperimentConfig& cfg, const Cell& cell) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    LabeledSet train;
    if (cell.technique == Technique::None) {
        check_inputs_exist(cfg);
        train = load_seed_set(cfg);
    } else {
        const auto images = stage_path(cfg.out_dir, cell, "images.idx");
        const auto labels = stage_path(cfg.out_dir, cell, "labels.idx");
        if (!fs::exists(images) || !fs::exists(labels)) {
            throw std::runtime_error("missing " + images.string() + "; run `xover synth` for this cell first");
        }
        train = read_idx(images, labels, Provenance::Synthetic);
        if (cfg.include_seed) {
            check_inputs_exist(cfg);
            train = with_seed(cfg, cell, std::move(train), load_seed_set(cfg));
        }
    }
    train_and_save(cfg, cell, train);
}

ReportRow run_eval_stage(const ExperimentConfig& cfg, const Cell& cell) {
    cfg.validate();
    check_inputs_exist(cfg);
    if (!fs::exists(stage_path(cfg.out_dir, cell, "model.json"))) {
        throw std::runtime_error("missing " + stage_path(cfg.out_dir, cell, "model.json").string() +
                                 "; run `xover train` for this cell first");
    }
    const auto test = load_test_set(cfg);
    const auto features = featurize(test, cfg.features);
    const auto report = evaluate_and_save(cfg, cell, features, test.labels);
    json synth;
    if (cell.technique == Technique::None) {
        synth = {{"achieved_size", cfg.seed_count}, {"accept_rate", 1.0}, {"shortfall", 0}};
    } else {
        synth = read_json(stage_path(cfg.out_dir, cell, "synth.json"), "synth");
    }
    const auto train = read_json(stage_path(cfg.out_dir, cell, "train.json"), "train");
    auto row = make_row(cell, synth, train, report);
    write_text(stage_path(cfg.out_dir, cell, "result.csv"), rows_to_csv({row}));
    return row;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    check_inputs_exist(cfg);
    fs::create_directories(cfg.out_dir);

    RunReport report;
    report.config = to_json(cfg);
    write_text(cfg.out_dir / "config.json", report.config.dump(2) + "\n");

    const auto seed = load_seed_set(cfg);
    write_idx(seed, cfg.out_dir / "seed-images.idx", cfg.out_dir / "seed-labels.idx");
    const auto test = load_test_set(cfg);
    const auto test_features = featurize(test, cfg.features);

    for (const auto& cell : grid_cells(cfg)) {
        const auto ts = build_training_set(cell, seed, cfg);
        write_training_set(cfg, cell, ts);
        const json synth = synth_summary(cell, ts, cfg.record_timings);
        const json train = train_and_save(cfg, cell, with_seed(cfg, cell, ts.set, seed));
        const auto eval = evaluate_and_save(cfg, cell, test_features, test.labels);
        auto row = make_row(cell, synth, train, eval);
        write_text(stage_path(cfg.out_dir, cell, "result.csv"), rows_to_csv({row}));
        report.rows.push_back(row);
        report.evals.push_back(eval);
    }
    report.findings = trend_findings(report.rows);
    write_text(cfg.out_dir / "results.csv", rows_to_csv(report.rows));
    write_text(cfg.out_dir / "report.json", report_to_json(report).dump(2) + "\n");
    return report;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string() + " for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

}  // namespace xover
