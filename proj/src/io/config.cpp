// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/io/config.hpp"

#include "muse/error.hpp"
#include "muse/io/records.hpp"
#include "muse/random.hpp"

#include <cstdio>

namespace muse::io {

using nlohmann::json;

std::uint64_t component_seed(std::uint64_t seed, SeedStream stream) noexcept
{
    return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

void RunConfig::propagate()
{
    data.seed = seed;
    impute.seed = component_seed(seed, SeedStream::Impute);
    impute.fit.solver.seed = impute.seed;
    encoder.seed = component_seed(seed, SeedStream::Encoder);
    train.seed = component_seed(seed, SeedStream::Train);
    train.jobs = jobs;
    bench.seed = component_seed(seed, SeedStream::Bench);
}

namespace {

// Component validators name bare fields; qualify them with the config section.
template <class F>
void within(const char* section, F&& check)
{
    try {
        check();
    } catch (const Error& e) {
        const std::string what = e.what();
        const auto colon = what.find(": ");
        throw Error(e.kind(), std::string(section) + "." + what.substr(colon == std::string::npos ? 0 : colon + 2));
    }
}

} // namespace

void RunConfig::validate() const
{
    require(jobs >= 1, ErrorKind::ConfigInvalid, "jobs must be >= 1");
    within("data", [&] { data.validate(); });
    double sum = 0.0;
    for (double f : split) {
        require(f >= 0.0, ErrorKind::ConfigInvalid, "split must hold non-negative fractions");
        sum += f;
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::ConfigInvalid, "split fractions must sum to 1");
    require(impute.poolSize >= 1, ErrorKind::ConfigInvalid, "impute.poolSize must be >= 1");
    require(impute.initialLengthscale >= 0.0, ErrorKind::ConfigInvalid, "impute.initialLengthscale must be >= 0");
    require(impute.fit.adam.learningRate > 0.0, ErrorKind::ConfigInvalid, "impute.learningRate must be positive");
    require(impute.fit.solver.probes >= 1, ErrorKind::ConfigInvalid, "impute.solver.probes must be >= 1");
    within("encoder", [&] { encoder.validate(); });
    within("train", [&] { train.validate(); });
    require(threshold >= 0.0 && threshold <= 1.0, ErrorKind::ConfigInvalid, "eval.threshold must lie in [0, 1]");
    require(bench.repetitions >= 1, ErrorKind::ConfigInvalid, "bench.repetitions must be >= 1");
}

namespace {

std::string_view convention_name(synth::ArConvention c)
{
    return c == synth::ArConvention::LagPolynomial ? "lag-polynomial" : "recursion";
}

json to_json_impl(const RunConfig& c)
{
    json j;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["data"] = {{"nObs", c.data.nObs},
                 {"subTime", c.data.subTime},
                 {"nVariables", c.data.nVariables},
                 {"nSamples", c.data.nSamples},
                 {"percentNegative", c.data.percentNegative},
                 {"missingRateMin", c.data.missingRateMin},
                 {"missingRateMax", c.data.missingRateMax},
                 {"arConvention", convention_name(c.data.arConvention)}};
    j["split"] = c.split;
    const auto& s = c.impute.fit.solver;
    j["impute"] = {{"method", pipeline::to_string(c.impute.method)},
                   {"mask", c.impute.mask},
                   {"rank", c.impute.rank},
                   {"poolSize", c.impute.poolSize},
                   {"initialLengthscale", c.impute.initialLengthscale},
                   {"refitPerRecord", c.impute.refitPerRecord},
                   {"maxIterations", c.impute.fit.maxIterations},
                   {"learningRate", c.impute.fit.adam.learningRate},
                   {"gradientTolerance", c.impute.fit.gradientTolerance},
                   {"solver",
                    {{"method", s.method == mgp::SolveMethod::Dense ? "dense" : "mpcg"},
                     {"probes", s.probes},
                     {"preconditionerRank", s.preconditionerRank},
                     {"maxIterations", s.maxIterations},
                     {"tolerance", s.tolerance}}}};
    j["encoder"] = {{"nHeads", c.encoder.nHeads},
                    {"nBlocks", c.encoder.nBlocks},
                    {"feedForwardWidth", c.encoder.feedForwardWidth},
                    {"nBranches", c.encoder.nBranches},
                    {"dropout", c.encoder.dropout},
                    {"reZeroTimes", c.encoder.reZeroTimes}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batchSize", c.train.batchSize},
                  {"learningRate", c.train.adam.learningRate},
                  {"beta1", c.train.adam.beta1},
                  {"beta2", c.train.adam.beta2},
                  {"epsilon", c.train.adam.epsilon},
                  {"weightDecay", c.train.adam.weightDecay},
                  {"lrStepEpochs", c.train.lrStepEpochs},
                  {"lrDecay", c.train.lrDecay}};
    j["eval"] = {{"threshold", c.threshold}};
    j["attention"] = {{"layer", c.attentionLayer ? json(*c.attentionLayer) : json(nullptr)}};
    j["bench"] = {{"sizes", c.benchSizes},
                  {"repetitions", c.bench.repetitions},
                  {"preconditionerRank", c.bench.preconditionerRank},
                  {"maxIterations", c.bench.maxIterations},
                  {"tolerance", c.bench.tolerance}};
    return j;
}

bool non_negative_integer(const json& value)
{
    return value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
}

bool compatible(const json& schema, const json& value)
{
    if (schema.is_null()) {
        return value.is_null() || non_negative_integer(value);
    }
    if (schema.is_number_float()) {
        return value.is_number();
    }
    if (schema.is_number_unsigned() || schema.is_number_integer()) {
        return non_negative_integer(value);
    }
    if (schema.is_array()) {
        if (!value.is_array()) {
            return false;
        }
        for (const auto& v : value) {
            if (!v.is_number()) {
                return false;
            }
        }
        return true;
    }
    return schema.type() == value.type();
}

std::string expected_name(const json& schema)
{
    if (schema.is_null()) {
        return "non-negative integer or null";
    }
    if (schema.is_number_integer()) {
        return "non-negative integer";
    }
    return schema.is_array() ? "array of numbers" : schema.type_name();
}

void check_against(const json& schema, const json& doc, const std::string& prefix)
{
    require(doc.is_object(), ErrorKind::ConfigInvalid,
            (prefix.empty() ? std::string("config") : prefix) + " must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        require(schema.contains(key), ErrorKind::ConfigInvalid, "unknown config field " + path);
        const json& s = schema.at(key);
        if (s.is_object()) {
            check_against(s, value, path);
        } else {
            require(compatible(s, value), ErrorKind::ConfigInvalid,
                    path + " has the wrong type (expected " + expected_name(s) +
                        ")");
        }
    }
}

// Not merge_patch: there a null deletes the key, here it is a value (attention.layer).
void overlay(json& target, const json& patch)
{
    for (const auto& [key, value] : patch.items()) {
        if (value.is_object()) {
            overlay(target[key], value);
        } else {
            target[key] = value;
        }
    }
}

double num(const json& j, const char* key)
{
    return j.at(key).get<double>();
}

std::size_t count(const json& j, const char* key)
{
    return j.at(key).get<std::size_t>();
}

} // namespace

json to_json(const RunConfig& config)
{
    return to_json_impl(config);
}

RunConfig config_from_json(const json& document)
{
    RunConfig defaults;
    json merged = to_json_impl(defaults);
    check_against(merged, document, "");
    overlay(merged, document);

    RunConfig c;
    c.seed = merged.at("seed").get<std::uint64_t>();
    c.jobs = count(merged, "jobs");
    const auto& d = merged.at("data");
    c.data.nObs = count(d, "nObs");
    c.data.subTime = count(d, "subTime");
    c.data.nVariables = count(d, "nVariables");
    c.data.nSamples = count(d, "nSamples");
    c.data.percentNegative = num(d, "percentNegative");
    c.data.missingRateMin = num(d, "missingRateMin");
    c.data.missingRateMax = num(d, "missingRateMax");
    const auto conv = d.at("arConvention").get<std::string>();
    require(conv == "lag-polynomial" || conv == "recursion", ErrorKind::ConfigInvalid,
            "data.arConvention must be lag-polynomial or recursion");
    c.data.arConvention = conv == "recursion" ? synth::ArConvention::Recursion : synth::ArConvention::LagPolynomial;
    const auto& split = merged.at("split");
    require(split.size() == 3, ErrorKind::ConfigInvalid, "split must list three fractions");
    for (std::size_t i = 0; i < 3; ++i) {
        c.split[i] = split[i].get<double>();
    }
    const auto& im = merged.at("impute");
    c.impute.method = pipeline::parse_impute_method(im.at("method").get<std::string>());
    c.impute.mask = im.at("mask").get<bool>();
    c.impute.rank = count(im, "rank");
    c.impute.poolSize = count(im, "poolSize");
    c.impute.initialLengthscale = num(im, "initialLengthscale");
    c.impute.refitPerRecord = im.at("refitPerRecord").get<bool>();
    c.impute.fit.maxIterations = count(im, "maxIterations");
    c.impute.fit.adam.learningRate = num(im, "learningRate");
    c.impute.fit.gradientTolerance = num(im, "gradientTolerance");
    const auto& so = im.at("solver");
    const auto method = so.at("method").get<std::string>();
    require(method == "dense" || method == "mpcg", ErrorKind::ConfigInvalid, "impute.solver.method must be dense or mpcg");
    c.impute.fit.solver.method = method == "dense" ? mgp::SolveMethod::Dense : mgp::SolveMethod::Mpcg;
    c.impute.fit.solver.probes = count(so, "probes");
    c.impute.fit.solver.preconditionerRank = count(so, "preconditionerRank");
    c.impute.fit.solver.maxIterations = count(so, "maxIterations");
    c.impute.fit.solver.tolerance = num(so, "tolerance");
    const auto& en = merged.at("encoder");
    c.encoder.nHeads = count(en, "nHeads");
    c.encoder.nBlocks = count(en, "nBlocks");
    c.encoder.feedForwardWidth = count(en, "feedForwardWidth");
    c.encoder.nBranches = count(en, "nBranches");
    c.encoder.dropout = num(en, "dropout");
    c.encoder.reZeroTimes = en.at("reZeroTimes").get<bool>();
    c.encoder.nVariables = c.data.nVariables;
    const auto& tr = merged.at("train");
    c.train.epochs = count(tr, "epochs");
    c.train.batchSize = count(tr, "batchSize");
    c.train.adam.learningRate = num(tr, "learningRate");
    c.train.adam.beta1 = num(tr, "beta1");
    c.train.adam.beta2 = num(tr, "beta2");
    c.train.adam.epsilon = num(tr, "epsilon");
    c.train.adam.weightDecay = num(tr, "weightDecay");
    c.train.lrStepEpochs = count(tr, "lrStepEpochs");
    c.train.lrDecay = num(tr, "lrDecay");
    c.threshold = num(merged.at("eval"), "threshold");
    const auto& layer = merged.at("attention").at("layer");
    c.attentionLayer = layer.is_null() ? std::nullopt : std::optional<std::size_t>(layer.get<std::size_t>());
    const auto& be = merged.at("bench");
    c.benchSizes.clear();
    for (const auto& s : be.at("sizes")) {
        require(non_negative_integer(s), ErrorKind::ConfigInvalid, "bench.sizes must hold non-negative integers");
        c.benchSizes.push_back(s.get<std::size_t>());
    }
    c.bench.repetitions = count(be, "repetitions");
    c.bench.preconditionerRank = count(be, "preconditionerRank");
    c.bench.maxIterations = count(be, "maxIterations");
    c.bench.tolerance = num(be, "tolerance");
    c.propagate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    const std::string text = read_text(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const RunConfig& config)
{
    return fnv1a_hex(to_json(config).dump());
}

} // namespace muse::io
