// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include "cli.hpp"
#include "muse/io/artifacts.hpp"
#include "muse/io/config.hpp"
#include "muse/io/records.hpp"
#include "muse/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

using namespace muse;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run muse_cli(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("muse_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string bytes(const fs::path& p)
{
    return io::read_text(p);
}

// Small, quick settings shared by the pipeline tests.
const std::vector<std::string> kSmall{"--set", "data.nSamples=40",       "--set", "data.nVariables=2",
                                      "--set", "data.subTime=8",         "--set", "data.nObs=40",
                                      "--set", "data.percentNegative=0.7", "--set", "impute.maxIterations=5",
                                      "--set", "encoder.nHeads=1",       "--set", "encoder.nBranches=2",
                                      "--set", "encoder.feedForwardWidth=4"};

std::vector<std::string> with_small(std::vector<std::string> args)
{
    args.insert(args.begin(), kSmall.begin(), kSmall.end());
    return args;
}

Dataset single_variable_records(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    std::bernoulli_distribution missing(0.3);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> times;
        std::vector<std::vector<std::optional<double>>> cells;
        for (std::size_t t = 0; t < 10; ++t) {
            times.push_back(static_cast<double>(t) + 0.1 * static_cast<double>(i % 3));
            const double v = std::sin(0.6 * times.back() + static_cast<double>(i)) + noise(rng);
            cells.push_back({(t == 0 || !missing(rng)) ? std::optional<double>(v) : std::nullopt});
        }
        d.push_back(LongitudinalRecord::from_cells("r" + std::to_string(i), static_cast<int>(i % 2), times, cells));
    }
    return d;
}

} // namespace

TEST_CASE("exit codes follow the error kind")
{
    CHECK(cli::exit_code(ErrorKind::ConfigInvalid) == 2);
    CHECK(cli::exit_code(ErrorKind::FractionSumInvalid) == 2);
    CHECK(cli::exit_code(ErrorKind::ParseError) == 3);
    CHECK(cli::exit_code(ErrorKind::IoError) == 3);
    CHECK(cli::exit_code(ErrorKind::NotPositiveDefinite) == 4);
    CHECK(cli::exit_code(ErrorKind::NonFiniteLoss) == 4);
    CHECK(cli::exit_code(ErrorKind::DivergenceDetected) == 4);
}

TEST_CASE("usage errors exit 2, help exits 0")
{
    CHECK(muse_cli({}).code == 2);
    CHECK(muse_cli({"frobnicate"}).code == 2);
    CHECK(muse_cli({"impute"}).code == 2);
    CHECK(muse_cli({"impute", "--input", "x", "--method", "spline"}).code == 2);
    CHECK(muse_cli({"--help"}).code == 0);
}

TEST_CASE("gen-data with zero samples writes an empty file")
{
    const auto dir = scratch("empty");
    const Run r = muse_cli({"--out-dir", dir.string(), "gen-data", "--set", "data.nSamples=0"});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "data.ndjson"));
    CHECK(fs::file_size(dir / "data.ndjson") == 0);
    CHECK(fs::exists(dir / "manifest-gen-data.json"));
}

TEST_CASE("invalid split fraction exits 2 and names the field")
{
    const auto dir = scratch("badsplit");
    const Run r = muse_cli({"--out-dir", dir.string(), "gen-data", "--set", "split=[0.7,0.2,0.2]"});
    CHECK(r.code == 2);
    CHECK(r.err.find("split") != std::string::npos);
    const Run q = muse_cli({"--out-dir", dir.string(), "gen-data", "--set", "data.percentNegative=1.5"});
    CHECK(q.code == 2);
    CHECK(q.err.find("data.percentNegative") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "data.ndjson"));
}

TEST_CASE("config file precedence: file < --set < --seed")
{
    const auto dir = scratch("precedence");
    io::write_text(dir / "c.json", R"({"seed": 3, "data": {"nSamples": 7, "nVariables": 2, "subTime": 5}})");
    const Run r = muse_cli({"--config", (dir / "c.json").string(), "--set", "data.nSamples=9", "--seed", "4",
                            "--out-dir", dir.string(), "gen-data"});
    REQUIRE(r.code == 0);
    const auto manifest = nlohmann::json::parse(bytes(dir / "manifest-gen-data.json"));
    CHECK(manifest.at("seed") == 4);
    CHECK(manifest.at("config").at("data").at("nSamples") == 9);
    CHECK(manifest.at("config").at("data").at("subTime") == 5);
    CHECK(io::read_records(dir / "data.ndjson").size() == 9);
    CHECK(manifest.at("configHash") == io::config_hash(io::config_from_json(manifest.at("config"))));
}

TEST_CASE("missing input exits 3")
{
    const auto dir = scratch("missing");
    CHECK(muse_cli({"--out-dir", dir.string(), "impute", "--input", (dir / "nope.ndjson").string()}).code == 3);
    io::write_text(dir / "bad.ndjson", "{\"id\": 1}\n");
    CHECK(muse_cli({"--out-dir", dir.string(), "impute", "--input", (dir / "bad.ndjson").string()}).code == 3);
}

TEST_CASE("gen-data is byte-stable per seed")
{
    const auto a = scratch("gen_a");
    const auto b = scratch("gen_b");
    const auto c = scratch("gen_c");
    REQUIRE(muse_cli(with_small({"--seed", "5", "--out-dir", a.string(), "gen-data"})).code == 0);
    REQUIRE(muse_cli(with_small({"--seed", "5", "--out-dir", b.string(), "gen-data"})).code == 0);
    REQUIRE(muse_cli(with_small({"--seed", "6", "--out-dir", c.string(), "gen-data"})).code == 0);
    for (const char* f : {"data.ndjson", "train.ndjson", "validation.ndjson", "test.ndjson", "data.meta.json"}) {
        CHECK(bytes(a / f) == bytes(b / f));
    }
    CHECK(bytes(a / "data.ndjson") != bytes(c / "data.ndjson"));
    const auto all = io::read_records(a / "data.ndjson");
    CHECK(all.size() == 40);
    CHECK(io::read_records(a / "train.ndjson").size() + io::read_records(a / "validation.ndjson").size() +
              io::read_records(a / "test.ndjson").size() ==
          40);
}

TEST_CASE("mean imputation fills the training mean")
{
    const auto dir = scratch("mean");
    const Dataset fit{LongitudinalRecord::from_cells("f1", 0, {0.0, 1.0}, {{1.0, 10.0}, {3.0, std::nullopt}}),
                      LongitudinalRecord::from_cells("f2", 1, {0.0}, {{5.0, 20.0}})};
    const Dataset target{LongitudinalRecord::from_cells("t", 0, {0.0, 2.0}, {{std::nullopt, 4.0}, {9.0, std::nullopt}})};
    io::write_records(dir / "fit.ndjson", fit);
    io::write_records(dir / "target.ndjson", target);
    const Run r = muse_cli({"--out-dir", dir.string(), "impute", "--method", "mean", "--input",
                            (dir / "target.ndjson").string(), "--fit", (dir / "fit.ndjson").string()});
    REQUIRE(r.code == 0);
    const auto out = io::read_imputed(dir / "imputed.ndjson");
    REQUIRE(out.records.size() == 1);
    CHECK(out.hasMasks);
    const auto& rec = out.records.front();
    CHECK(rec.imputed(0, 0) == 3.0);
    CHECK(rec.imputed(1, 1) == 15.0);
    CHECK(rec.imputed(0, 1) == 4.0);
    CHECK(rec.imputed(1, 0) == 9.0);
    CHECK(rec.mask(0, 0) == 1.0);
    CHECK(rec.mask(0, 1) == 0.0);
    CHECK(nlohmann::json::parse(bytes(dir / "means.json")) == nlohmann::json({3.0, 15.0}));
}

TEST_CASE("mgp and gp agree on single-variable data")
{
    const auto dir = scratch("m1");
    io::write_records(dir / "in.ndjson", single_variable_records(12, 8));
    const std::vector<std::string> common{"--seed", "2", "--set", "impute.maxIterations=30", "--out-dir"};
    auto args = [&](const char* method, const char* sub) {
        std::vector<std::string> a = common;
        a.push_back((dir / sub).string());
        a.insert(a.end(), {"impute", "--input", (dir / "in.ndjson").string(), "--method", method});
        return a;
    };
    REQUIRE(muse_cli(args("mgp", "mgp")).code == 0);
    REQUIRE(muse_cli(args("gp", "gp")).code == 0);
    const auto mgp = io::read_imputed(dir / "mgp" / "imputed.ndjson");
    const auto gp = io::read_imputed(dir / "gp" / "imputed.ndjson");
    REQUIRE(mgp.records.size() == gp.records.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < mgp.records.size(); ++i) {
        CHECK(mgp.records[i].mask == gp.records[i].mask);
        const auto& a = mgp.records[i].imputed.values();
        const auto& b = gp.records[i].imputed.values();
        for (std::size_t k = 0; k < a.size(); ++k) {
            worst = std::max(worst, std::abs(a[k] - b[k]));
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("CLI imputation equals the library pipeline")
{
    const auto dir = scratch("api");
    REQUIRE(muse_cli(with_small({"--seed", "9", "--out-dir", dir.string(), "gen-data"})).code == 0);
    REQUIRE(muse_cli(with_small({"--seed", "9", "--jobs", "2", "--out-dir", dir.string(), "impute", "--input",
                                 (dir / "data.ndjson").string()}))
                .code == 0);
    const auto manifest = nlohmann::json::parse(bytes(dir / "manifest-impute.json"));
    const io::RunConfig config = io::config_from_json(manifest.at("config"));
    const Dataset data = io::read_records(dir / "data.ndjson");
    const auto api = pipeline::impute(data, data, config.impute, 1);
    const auto cli = io::read_imputed(dir / "imputed.ndjson");
    REQUIRE(cli.records.size() == api.records.size());
    for (std::size_t i = 0; i < api.records.size(); ++i) {
        CHECK(cli.records[i] == api.records[i]);
    }
    REQUIRE(api.hyperparameters);
    CHECK(io::hyperparameters_from_json(nlohmann::json::parse(bytes(dir / "hyperparameters.json"))) ==
          *api.hyperparameters);

    // Reusing the fitted hyperparameters reproduces the file.
    const auto again = dir / "again";
    REQUIRE(muse_cli(with_small({"--seed", "9", "--out-dir", again.string(), "impute", "--input",
                                 (dir / "data.ndjson").string(), "--hyperparameters",
                                 (dir / "hyperparameters.json").string()}))
                .code == 0);
    CHECK(bytes(again / "imputed.ndjson") == bytes(dir / "imputed.ndjson"));
}

TEST_CASE("no-mask imputation drops masks and the mask stream")
{
    const auto dir = scratch("nomask");
    REQUIRE(muse_cli(with_small({"--seed", "1", "--out-dir", dir.string(), "gen-data"})).code == 0);
    REQUIRE(muse_cli(with_small({"--out-dir", dir.string(), "impute", "--method", "mean", "--no-mask", "--input",
                                 (dir / "train.ndjson").string()}))
                .code == 0);
    CHECK(bytes(dir / "imputed.ndjson").find("mask") == std::string::npos);
    REQUIRE(muse_cli(with_small({"--out-dir", dir.string(), "--set", "train.epochs=1", "train", "--input",
                                 (dir / "imputed.ndjson").string()}))
                .code == 0);
    const auto cp = io::read_checkpoint(dir / "checkpoint.json");
    CHECK_FALSE(cp.encoder.useMaskStream);
    CHECK_THROWS_AS(static_cast<void>(cp.parameters.find("masks.block0.head0.query")), Error);
}

TEST_CASE("train with zero epochs stores the initialization")
{
    const auto dir = scratch("epoch0");
    REQUIRE(muse_cli(with_small({"--seed", "4", "--out-dir", dir.string(), "gen-data"})).code == 0);
    REQUIRE(muse_cli(with_small({"--out-dir", dir.string(), "impute", "--method", "mean", "--input",
                                 (dir / "train.ndjson").string()}))
                .code == 0);
    REQUIRE(muse_cli(with_small({"--seed", "4", "--out-dir", dir.string(), "--set", "train.epochs=0", "train",
                                 "--input", (dir / "imputed.ndjson").string()}))
                .code == 0);
    const auto cp = io::read_checkpoint(dir / "checkpoint.json");
    CHECK(cp.epoch == 0);
    const io::RunConfig config = io::config_from_json(
        nlohmann::json::parse(bytes(dir / "manifest-train.json")).at("config"));
    net::EncoderConfig enc = config.encoder;
    enc.nVariables = 2;
    CHECK(cp.encoder == enc);
    CHECK(cp.parameters == net::MuseNet(enc).parameters());
    CHECK(cp.configHash == io::config_hash(config));
}

TEST_CASE("train, eval and attention replay byte-identically from their manifests")
{
    const auto dir = scratch("replay");
    const auto f = [&](const char* name) { return (dir / name).string(); };
    REQUIRE(muse_cli(with_small({"--seed", "12", "--out-dir", f(""), "gen-data"})).code == 0);
    REQUIRE(muse_cli(with_small({"--seed", "12", "--out-dir", f(""), "impute", "--input", f("train.ndjson"),
                                 "--output", "train_imp.ndjson"}))
                .code == 0);
    REQUIRE(muse_cli(with_small({"--seed", "12", "--out-dir", f(""), "impute", "--input", f("validation.ndjson"),
                                 "--hyperparameters", f("hyperparameters.json"), "--output", "val_imp.ndjson"}))
                .code == 0);
    const auto trainArgs = with_small({"--seed", "12", "--set", "train.epochs=3", "--set", "encoder.dropout=0.1",
                                       "--out-dir", f(""), "train", "--input", f("train_imp.ndjson"),
                                       "--validation", f("val_imp.ndjson")});
    REQUIRE(muse_cli(trainArgs).code == 0);
    const auto trace = io::parse_trace_csv(bytes(dir / "train_metrics.csv"));
    CHECK(trace.size() == 3);

    REQUIRE(muse_cli({"--out-dir", f(""), "eval", "--checkpoint", f("checkpoint.json"), "--input", f("val_imp.ndjson")})
                .code == 0);
    CHECK(bytes(dir / "metrics.csv").rfind("auroc,auprc,f1,recall\n", 0) == 0);
    const auto report = io::parse_report_csv(bytes(dir / "metrics.csv"));
    CHECK(report.auroc == trace.back().auroc);
    CHECK(bytes(dir / "predictions.csv").rfind("id,label,score\n", 0) == 0);

    REQUIRE(muse_cli({"--out-dir", f(""), "attention", "--checkpoint", f("checkpoint.json"), "--input",
                      f("val_imp.ndjson")})
                .code == 0);

    const auto replay = dir / "replay";
    REQUIRE(muse_cli({"--config", f("manifest-train.json"), "--out-dir", replay.string(), "train", "--input",
                      f("train_imp.ndjson"), "--validation", f("val_imp.ndjson")})
                .code == 0);
    CHECK(bytes(replay / "train_metrics.csv") == bytes(dir / "train_metrics.csv"));
    CHECK(bytes(replay / "checkpoint.bin") == bytes(dir / "checkpoint.bin"));
    CHECK(bytes(replay / "checkpoint.json") == bytes(dir / "checkpoint.json"));
    REQUIRE(muse_cli({"--config", f("manifest-eval.json"), "--out-dir", replay.string(), "eval", "--checkpoint",
                      (replay / "checkpoint.json").string(), "--input", f("val_imp.ndjson")})
                .code == 0);
    CHECK(bytes(replay / "metrics.csv") == bytes(dir / "metrics.csv"));
    CHECK(bytes(replay / "predictions.csv") == bytes(dir / "predictions.csv"));
    REQUIRE(muse_cli({"--config", f("manifest-attention.json"), "--out-dir", replay.string(), "attention",
                      "--checkpoint", (replay / "checkpoint.json").string(), "--input", f("val_imp.ndjson")})
                .code == 0);
    CHECK(bytes(replay / "attention.csv") == bytes(dir / "attention.csv"));
    CHECK(bytes(replay / "attention_columns.csv") == bytes(dir / "attention_columns.csv"));
}

TEST_CASE("attention export rows sum to the head count")
{
    const auto dir = scratch("attn");
    const auto f = [&](const char* name) { return (dir / name).string(); };
    REQUIRE(muse_cli(with_small({"--seed", "2", "--out-dir", f(""), "gen-data"})).code == 0);
    REQUIRE(muse_cli(with_small({"--out-dir", f(""), "impute", "--method", "mean", "--input", f("train.ndjson")}))
                .code == 0);
    REQUIRE(muse_cli(with_small({"--out-dir", f(""), "--set", "train.epochs=1", "--set", "encoder.nHeads=2", "train",
                                 "--input", f("imputed.ndjson")}))
                .code == 0);
    REQUIRE(muse_cli({"--out-dir", f(""), "attention", "--checkpoint", f("checkpoint.json"), "--input",
                      f("imputed.ndjson"), "--layer", "1"})
                .code == 0);
    const auto summary = io::parse_attention_csv(bytes(dir / "attention.csv"), bytes(dir / "attention_columns.csv"));
    REQUIRE(summary.layers.size() == 2);
    for (const auto& l : summary.layers) {
        CHECK(l.layer == 1);
        for (std::size_t i = 0; i < l.mean.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < l.mean.cols(); ++j) {
                s += l.mean(i, j);
            }
            CHECK(s == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("bench-solver writes one row per size")
{
    const auto dir = scratch("bench");
    REQUIRE(muse_cli({"--out-dir", dir.string(), "bench-solver", "--sizes", "40,60"}).code == 0);
    const auto rows = io::parse_bench_csv(bytes(dir / "bench.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].size == 40);
    CHECK(rows[1].size == 60);
    CHECK(rows[1].relativeError <= 1e-6);
}
