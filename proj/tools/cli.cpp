// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include "muse/io/artifacts.hpp"
#include "muse/io/config.hpp"
#include "muse/io/records.hpp"
#include "muse/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>

namespace muse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::ConfigInvalid:
    case ErrorKind::FractionSumInvalid:
    case ErrorKind::HeadsDontDivideWidth:
    case ErrorKind::RankExceedsDim:
    case ErrorKind::InvalidArgument:
        return ConfigError;
    case ErrorKind::ParseError:
    case ErrorKind::IoError:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::LengthMismatch:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::EmptyClass:
    case ErrorKind::EmptyObservationSet:
    case ErrorKind::SingleClass:
    case ErrorKind::NoPositives:
        return DataError;
    default:
        return NumericalError;
    }
}

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string outDir = ".";
    std::vector<std::string> sets;

    // impute
    std::string input;
    std::string fitInput;
    std::string method;
    std::optional<bool> mask;
    bool refit = false;
    std::string hyperparameters;
    std::string output;

    // train / eval / attention
    std::string validation;
    std::string checkpoint;
    std::optional<std::size_t> layer;

    // bench-solver
    std::vector<std::size_t> sizes;
};

void set_path(json& doc, const std::string& dotted, json value)
{
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        require(!key.empty(), ErrorKind::ConfigInvalid, "malformed --set path \"" + dotted + "\"");
        if (dot == std::string::npos) {
            (*node)[key] = std::move(value);
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) {
            (*node)[key] = json::object();
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

/// defaults < --config document < --set entries < dedicated flags.
io::RunConfig resolve_config(const Options& o)
{
    json doc = json::object();
    if (!o.config.empty()) {
        try {
            doc = json::parse(io::read_text(o.config));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ConfigInvalid, o.config + ": " + e.what());
        }
        // A run manifest replays the config it recorded.
        if (doc.is_object() && doc.contains("command") && doc.contains("config")) {
            doc = json(doc.at("config"));
        }
    }
    for (const auto& entry : o.sets) {
        const auto eq = entry.find('=');
        require(eq != std::string::npos, ErrorKind::ConfigInvalid, "--set expects key=value, got \"" + entry + "\"");
        const std::string text = entry.substr(eq + 1);
        json value;
        try {
            value = json::parse(text);
        } catch (const json::exception&) {
            value = text;
        }
        set_path(doc, entry.substr(0, eq), std::move(value));
    }
    if (o.seed) {
        doc["seed"] = *o.seed;
    }
    if (o.jobs) {
        doc["jobs"] = *o.jobs;
    }
    if (!o.method.empty()) {
        set_path(doc, "impute.method", o.method);
    }
    if (o.mask) {
        set_path(doc, "impute.mask", *o.mask);
    }
    if (o.refit) {
        set_path(doc, "impute.refitPerRecord", true);
    }
    if (o.layer) {
        set_path(doc, "attention.layer", *o.layer);
    }
    if (!o.sizes.empty()) {
        set_path(doc, "bench.sizes", o.sizes);
    }
    io::RunConfig config = io::config_from_json(doc);
    config.validate();
    return config;
}

class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    fs::path add(const std::string& name)
    {
        names_.push_back(name);
        return dir_ / name;
    }

    void finish(const std::string& command, const io::RunConfig& config, std::ostream& out)
    {
        const std::string manifest = "manifest-" + command + ".json";
        io::write_text(dir_ / manifest, io::run_manifest(command, config, names_).dump(2) + "\n");
        for (const auto& n : names_) {
            out << (dir_ / n).string() << "\n";
        }
        out << (dir_ / manifest).string() << "\n";
    }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

void gen_data(const io::RunConfig& config, Outputs& outputs)
{
    const auto dataset = synth::generate_dataset(config.data);
    io::write_records(outputs.add("data.ndjson"), dataset.records);
    io::write_text(outputs.add("data.meta.json"), io::synth_metadata(dataset, config).dump(2) + "\n");
    const auto split =
        synth::split_dataset(dataset.records, config.split, io::component_seed(config.seed, io::SeedStream::Split));
    io::write_records(outputs.add("train.ndjson"), split.train);
    io::write_records(outputs.add("validation.ndjson"), split.validation);
    io::write_records(outputs.add("test.ndjson"), split.test);
}

void impute(const io::RunConfig& config, const Options& o, Outputs& outputs)
{
    const Dataset targets = io::read_records(fs::path(o.input));
    const Dataset fitSet = o.fitInput.empty() ? targets : io::read_records(fs::path(o.fitInput));
    pipeline::ImputeOutcome outcome;
    if (!o.hyperparameters.empty() && config.impute.method != pipeline::ImputeMethod::Mean) {
        json doc;
        try {
            doc = json::parse(io::read_text(o.hyperparameters));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ParseError, o.hyperparameters + ": " + e.what());
        }
        outcome.hyperparameters = io::hyperparameters_from_json(doc);
        outcome.records = pipeline::apply_mask_choice(
            mgp::impute_dataset(targets, *outcome.hyperparameters, config.jobs, config.impute.fit.solver),
            config.impute.mask);
    } else {
        outcome = pipeline::impute(fitSet, targets, config.impute, config.jobs);
    }
    io::write_imputed(outputs.add(o.output.empty() ? "imputed.ndjson" : o.output),
                      io::ImputedFile{outcome.records, config.impute.mask});
    if (outcome.hyperparameters) {
        io::write_text(outputs.add("hyperparameters.json"),
                       io::hyperparameters_to_json(*outcome.hyperparameters).dump(2) + "\n");
    } else {
        io::write_text(outputs.add("means.json"), json(outcome.means).dump() + "\n");
    }
}

void train(const io::RunConfig& config, const Options& o, Outputs& outputs)
{
    const io::ImputedFile training = io::read_imputed(fs::path(o.input));
    require(!training.records.empty(), ErrorKind::EmptyClass, o.input + " holds no records");
    io::ImputedFile validation;
    if (!o.validation.empty()) {
        validation = io::read_imputed(fs::path(o.validation));
    }
    net::EncoderConfig encoder = config.encoder;
    encoder.nVariables = training.records.front().imputed.cols();
    encoder.useMaskStream = training.hasMasks;

    const auto standardizer = net::Standardizer::fit(training.records);
    const auto trainSet = standardizer.apply(training.records);
    const auto validationSet = standardizer.apply(validation.records);
    const net::MuseNet initial(encoder);
    const auto result = net::train(initial, trainSet, validationSet, config.train);

    io::Checkpoint checkpoint{encoder,           config.train,        standardizer,
                              result.trace.size(), result.model.parameters(), io::config_hash(config)};
    io::write_text(outputs.add("train_metrics.csv"), io::trace_csv(result.trace));
    const std::string name = o.output.empty() ? "checkpoint.json" : o.output;
    io::write_checkpoint(outputs.add(name), checkpoint);
    outputs.add(fs::path(name).replace_extension(".bin").string());
}

struct Loaded {
    io::Checkpoint checkpoint;
    net::MuseNet net;
    std::vector<ImputedRecord> records;
};

Loaded load_for_inference(const Options& o)
{
    auto checkpoint = io::read_checkpoint(o.checkpoint);
    net::MuseNet model(checkpoint.encoder, checkpoint.parameters);
    const auto file = io::read_imputed(fs::path(o.input));
    auto records = checkpoint.standardizer.apply(file.records);
    return {std::move(checkpoint), std::move(model), std::move(records)};
}

void evaluate(const io::RunConfig& config, const Options& o, Outputs& outputs)
{
    const Loaded l = load_for_inference(o);
    const auto scores = net::predict_dataset(l.net, l.records);
    std::vector<int> labels;
    for (const auto& r : l.records) {
        labels.push_back(r.label);
    }
    const auto items = eval::zip_scores(scores, labels);
    io::write_text(outputs.add("metrics.csv"), io::report_csv(eval::classification_report(items, config.threshold)));
    io::write_text(outputs.add("predictions.csv"), io::predictions_csv(l.records, scores));
}

void attention(const io::RunConfig& config, const Options& o, Outputs& outputs)
{
    const Loaded l = load_for_inference(o);
    const auto summary = net::export_attention(l.net, l.records, config.attentionLayer);
    io::write_text(outputs.add("attention.csv"), io::attention_csv(summary));
    io::write_text(outputs.add("attention_columns.csv"), io::column_sums_csv(summary));
}

void bench(const io::RunConfig& config, Outputs& outputs)
{
    io::write_text(outputs.add("bench.csv"), io::bench_csv(eval::bench_solver(config.benchSizes, config.bench)));
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Multi-task GP imputation and multi-branch attention classifier toolkit", "muse"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", o.config, "JSON run config, or a manifest to replay");
    app.add_option("--seed", o.seed, "Master seed");
    app.add_option("--jobs", o.jobs, "Worker threads");
    app.add_option("--out-dir", o.outDir, "Output directory")->capture_default_str();
    app.add_option("--set", o.sets, "Override a config field: section.key=json");

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset and its split");

    auto* imp = app.add_subcommand("impute", "Fill missing values");
    imp->add_option("--input", o.input, "Record file to impute")->required();
    imp->add_option("--fit", o.fitInput, "Record file to fit on (defaults to --input)");
    imp->add_option("--method", o.method, "mgp, gp or mean")->check(CLI::IsMember({"mgp", "gp", "mean"}));
    imp->add_flag("--mask,!--no-mask", o.mask, "Keep or drop the missingness masks");
    imp->add_flag("--refit", o.refit, "Refit hyperparameters on every record");
    imp->add_option("--hyperparameters", o.hyperparameters, "Use these fitted hyperparameters instead of fitting");
    imp->add_option("--output", o.output, "Output file name");

    auto* tr = app.add_subcommand("train", "Train the classifier");
    tr->add_option("--input", o.input, "Imputed training file")->required();
    tr->add_option("--validation", o.validation, "Imputed validation file");
    tr->add_option("--output", o.output, "Checkpoint file name");

    auto* ev = app.add_subcommand("eval", "Score a checkpoint on an imputed file");
    ev->add_option("--checkpoint", o.checkpoint)->required();
    ev->add_option("--input", o.input)->required();

    auto* at = app.add_subcommand("attention", "Export mean attention maps");
    at->add_option("--checkpoint", o.checkpoint)->required();
    at->add_option("--input", o.input)->required();
    at->add_option("--layer", o.layer, "Only this block");

    auto* be = app.add_subcommand("bench-solver", "Time Cholesky against the iterative solver");
    be->add_option("--sizes", o.sizes, "Kernel sizes")->delimiter(',');

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : ConfigError;
    }

    try {
        const io::RunConfig config = resolve_config(o);
        Outputs outputs(o.outDir);
        const std::string command = app.get_subcommands().front()->get_name();
        if (gen->parsed()) {
            gen_data(config, outputs);
        } else if (imp->parsed()) {
            impute(config, o, outputs);
        } else if (tr->parsed()) {
            train(config, o, outputs);
        } else if (ev->parsed()) {
            evaluate(config, o, outputs);
        } else if (at->parsed()) {
            attention(config, o, outputs);
        } else if (be->parsed()) {
            bench(config, outputs);
        }
        outputs.finish(command, config, out);
        return Ok;
    } catch (const Error& e) {
        err << "muse: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "muse: " << e.what() << "\n";
        return NumericalError;
    }
}

} // namespace muse::cli
