// xover: structural crossing-over synthesis and HOG + linear SVM benchmark.
//
//   xover run     --config cfg.json [--technique crossover,tangent] [--sizes 10000,20000] [--seed 42] [--out DIR]
//   xover synth   ... same selection flags, writes <technique>-<size>-{images,labels}.idx
//   xover train   ... reads the synthesized IDX files, writes <technique>-<size>-model.json
//   xover eval    ... reads the model, writes <technique>-<size>-{eval.json,result.csv}
//   xover report  --inputs a.csv b.csv --out merged.csv
//   xover inspect --images X --labels Y [--label 3] [--count 60] [--cols 10] --out sheet.png

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xover/dataset_io.hpp"
#include "xover/experiment.hpp"

namespace {

using namespace xover;

struct CommonOptions {
    std::string config;
    std::string technique;
    std::string sizes;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string mnist;
    bool no_timings = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--technique", o.technique, "Comma-separated subset of none,tangent,crossover");
    cmd->add_option("--sizes", o.sizes, "Comma-separated target sizes");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--mnist", o.mnist, "Directory with the four MNIST IDX files");
    cmd->add_flag("--no-timings", o.no_timings, "Write 0 for every timing field");
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

ExperimentConfig resolve(const CommonOptions& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (!o.mnist.empty()) cfg.data = DataPaths::mnist_in(o.mnist);
    if (!o.technique.empty()) {
        cfg.techniques.clear();
        for (const auto& t : split_commas(o.technique)) cfg.techniques.push_back(parse_technique(t));
    }
    if (!o.sizes.empty()) {
        cfg.target_sizes.clear();
        for (const auto& s : split_commas(o.sizes)) {
            try {
                cfg.target_sizes.push_back(std::stoull(s));
            } catch (const std::exception&) {
                throw std::invalid_argument("--sizes: `" + s + "` is not a count");
            }
        }
    }
    if (o.seed) cfg.rng_seed = *o.seed;
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (o.no_timings) cfg.record_timings = false;
    cfg.validate();
    return cfg;
}

std::vector<Cell> synthesized_cells(const ExperimentConfig& cfg) {
    std::vector<Cell> cells;
    for (const auto& c : grid_cells(cfg)) {
        if (c.technique != Technique::None) cells.push_back(c);
    }
    return cells;
}

void print_rows(const std::vector<ReportRow>& rows) { std::cout << rows_to_csv(rows); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural crossing-over training data synthesis and benchmark"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    CommonOptions run_opts, synth_opts, train_opts, eval_opts;
    auto* run = app.add_subcommand("run", "Full grid: seed -> synthesize -> train -> evaluate -> report");
    add_common(run, run_opts);
    auto* synth = app.add_subcommand("synth", "Synthesize training sets and write them as IDX");
    add_common(synth, synth_opts);
    auto* train = app.add_subcommand("train", "Train one-vs-all linear SVMs on synthesized sets");
    add_common(train, train_opts);
    auto* eval = app.add_subcommand("eval", "Evaluate trained models on the test set");
    add_common(eval, eval_opts);

    std::vector<std::string> report_inputs;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Merge result CSVs keyed by (technique, size)");
    report->add_option("--inputs", report_inputs, "CSV files to merge")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "Merged CSV (stdout when omitted)");

    std::string inspect_images, inspect_labels, inspect_out;
    int inspect_label = -1;
    std::size_t inspect_count = 60;
    int inspect_cols = 10;
    auto* inspect = app.add_subcommand("inspect", "Write a PNG contact sheet of an IDX set");
    inspect->add_option("--images", inspect_images, "IDX image file")->required()->check(CLI::ExistingFile);
    inspect->add_option("--labels", inspect_labels, "IDX label file")->required()->check(CLI::ExistingFile);
    inspect->add_option("--label", inspect_label, "Only show this digit")->check(CLI::Range(0, 9));
    inspect->add_option("--count", inspect_count, "Maximum number of tiles")->check(CLI::PositiveNumber);
    inspect->add_option("--cols", inspect_cols, "Tiles per row")->check(CLI::PositiveNumber);
    inspect->add_option("--out", inspect_out, "Output PNG")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto cfg = resolve(run_opts);
            const auto result = run_experiment(cfg);
            print_rows(result.rows);
            for (const auto& f : result.findings) std::cerr << "finding: " << f << '\n';
        } else if (synth->parsed()) {
            const auto cfg = resolve(synth_opts);
            const auto cells = synthesized_cells(cfg);
            if (cells.empty()) throw std::invalid_argument("synth: choose --technique tangent and/or crossover");
            for (const auto& cell : cells) {
                const auto stats = run_synth_stage(cfg, cell);
                std::cerr << to_string(cell.technique) << "-" << cell.target_size << ": written";
                if (cell.technique == Technique::Crossover) {
                    std::cerr << " (accepted " << stats.accepted << " of " << stats.candidates << " candidates";
                    if (stats.shortfall > 0) std::cerr << ", shortfall " << stats.shortfall;
                    std::cerr << ")";
                }
                std::cerr << '\n';
            }
        } else if (train->parsed()) {
            const auto cfg = resolve(train_opts);
            for (const auto& cell : grid_cells(cfg)) {
                run_train_stage(cfg, cell);
                std::cerr << to_string(cell.technique) << "-" << cell.target_size << ": model written\n";
            }
        } else if (eval->parsed()) {
            const auto cfg = resolve(eval_opts);
            std::vector<ReportRow> rows;
            for (const auto& cell : grid_cells(cfg)) rows.push_back(run_eval_stage(cfg, cell));
            print_rows(rows);
        } else if (report->parsed()) {
            std::vector<std::vector<ReportRow>> inputs;
            for (const auto& path : report_inputs) inputs.push_back(rows_from_csv(read_text(path)));
            const auto merged = rows_to_csv(merge_rows(inputs));
            if (report_out.empty()) {
                std::cout << merged;
            } else {
                write_text(report_out, merged);
            }
        } else if (inspect->parsed()) {
            const auto set = read_idx(inspect_images, inspect_labels, Provenance::Synthetic);
            LabeledSet shown;
            for (std::size_t i = 0; i < set.size() && shown.size() < inspect_count; ++i) {
                if (inspect_label < 0 || set.labels[i] == inspect_label) {
                    shown.push_back(set.images[i], set.labels[i]);
                }
            }
            if (shown.empty()) throw std::invalid_argument("inspect: no images match the selection");
            write_contact_sheet(shown, inspect_out, inspect_cols);
            std::cerr << "wrote " << shown.size() << " tiles to " << inspect_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "xover: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
