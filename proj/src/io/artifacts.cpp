// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/io/artifacts.hpp"

#include "muse/error.hpp"
#include "muse/io/records.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace muse::io {

using nlohmann::json;

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(std::string_view text)
{
    if (text == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (text == "inf" || text == "-inf") {
        return text[0] == '-' ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    require(r.ec == std::errc() && r.ptr == text.data() + text.size(), ErrorKind::ParseError,
            "not a number: \"" + std::string(text) + "\"");
    return v;
}

json hyperparameters_to_json(const mgp::MgpHyperparameters& hp)
{
    json b = json::array();
    for (std::size_t i = 0; i < hp.taskFactor.rows(); ++i) {
        const auto row = hp.taskFactor.row(i);
        b.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return {{"B", b}, {"sigma2", hp.noiseVariances}, {"theta", hp.lengthscale}, {"q", hp.rank()}, {"M", hp.tasks()}};
}

mgp::MgpHyperparameters hyperparameters_from_json(const json& j)
{
    try {
        mgp::MgpHyperparameters hp;
        const auto m = j.at("M").get<std::size_t>();
        const auto q = j.at("q").get<std::size_t>();
        const auto& b = j.at("B");
        require(b.size() == m, ErrorKind::ParseError, "B must have M rows");
        hp.taskFactor = Matrix(m, q);
        for (std::size_t i = 0; i < m; ++i) {
            require(b[i].size() == q, ErrorKind::ParseError, "B rows must have q entries");
            for (std::size_t k = 0; k < q; ++k) {
                hp.taskFactor(i, k) = b[i][k].get<double>();
            }
        }
        hp.noiseVariances = j.at("sigma2").get<std::vector<double>>();
        hp.lengthscale = j.at("theta").get<double>();
        hp.validate();
        return hp;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("hyperparameter file: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, std::string("hyperparameter file: ") + e.what());
    }
}

namespace {

json encoder_json(const net::EncoderConfig& c)
{
    return {{"nVariables", c.nVariables}, {"nHeads", c.nHeads},       {"nBlocks", c.nBlocks},
            {"feedForwardWidth", c.feedForwardWidth}, {"nBranches", c.nBranches}, {"dropout", c.dropout},
            {"seed", c.seed},               {"useMaskStream", c.useMaskStream}, {"reZeroTimes", c.reZeroTimes}};
}

net::EncoderConfig encoder_from(const json& j)
{
    net::EncoderConfig c;
    c.nVariables = j.at("nVariables").get<std::size_t>();
    c.nHeads = j.at("nHeads").get<std::size_t>();
    c.nBlocks = j.at("nBlocks").get<std::size_t>();
    c.feedForwardWidth = j.at("feedForwardWidth").get<std::size_t>();
    c.nBranches = j.at("nBranches").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.useMaskStream = j.at("useMaskStream").get<bool>();
    c.reZeroTimes = j.at("reZeroTimes").get<bool>();
    return c;
}

json train_json(const net::TrainConfig& c)
{
    return {{"epochs", c.epochs},
            {"batchSize", c.batchSize},
            {"learningRate", c.adam.learningRate},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"epsilon", c.adam.epsilon},
            {"weightDecay", c.adam.weightDecay},
            {"lrStepEpochs", c.lrStepEpochs},
            {"lrDecay", c.lrDecay},
            {"seed", c.seed},
            {"jobs", c.jobs}};
}

net::TrainConfig train_from(const json& j)
{
    net::TrainConfig c;
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batchSize = j.at("batchSize").get<std::size_t>();
    c.adam.learningRate = j.at("learningRate").get<double>();
    c.adam.beta1 = j.at("beta1").get<double>();
    c.adam.beta2 = j.at("beta2").get<double>();
    c.adam.epsilon = j.at("epsilon").get<double>();
    c.adam.weightDecay = j.at("weightDecay").get<double>();
    c.lrStepEpochs = j.at("lrStepEpochs").get<std::size_t>();
    c.lrDecay = j.at("lrDecay").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.jobs = j.at("jobs").get<std::size_t>();
    return c;
}

void put_le(std::string& out, double v)
{
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>(bits & 0xFF));
        bits >>= 8;
    }
}

double get_le(const unsigned char* p)
{
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
        bits = (bits << 8) | p[i];
    }
    return std::bit_cast<double>(bits);
}

std::vector<std::vector<std::string>> split_csv(const std::string& text, const std::string& header)
{
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line == header, ErrorKind::ParseError,
            "expected CSV header \"" + header + "\"");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
            cells.push_back(line.substr(start, pos - start));
        }
        cells.push_back(line.substr(start));
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::size_t parse_size(const std::string& s)
{
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    require(r.ec == std::errc() && r.ptr == s.data() + s.size(), ErrorKind::ParseError, "not an integer: " + s);
    return v;
}

net::Stream parse_stream(const std::string& s)
{
    require(s == "values" || s == "masks", ErrorKind::ParseError, "unknown stream " + s);
    return s == "values" ? net::Stream::Values : net::Stream::Masks;
}

} // namespace

void write_checkpoint(const std::filesystem::path& manifest, const Checkpoint& cp)
{
    const auto blobName = manifest.stem().string() + ".bin";
    json slots = json::array();
    for (const auto& s : cp.parameters.slots()) {
        slots.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}, {"offset", s.offset}});
    }
    json j = {{"format", "muse-checkpoint"},
              {"version", kVersion},
              {"encoder", encoder_json(cp.encoder)},
              {"train", train_json(cp.train)},
              {"standardizer", {{"mean", cp.standardizer.mean()}, {"scale", cp.standardizer.scale()}}},
              {"epoch", cp.epoch},
              {"configHash", cp.configHash},
              {"blob", {{"file", blobName}, {"dtype", "float64-le"}, {"count", cp.parameters.size()}}},
              {"parameters", slots}};
    write_text(manifest, j.dump(2) + "\n");
    std::string blob;
    blob.reserve(cp.parameters.size() * 8);
    for (double v : cp.parameters.values()) {
        put_le(blob, v);
    }
    write_text(manifest.parent_path() / blobName, blob);
}

Checkpoint read_checkpoint(const std::filesystem::path& manifest)
{
    try {
        const json j = json::parse(read_text(manifest));
        require(j.at("format") == "muse-checkpoint", ErrorKind::ParseError, "not a checkpoint manifest");
        Checkpoint cp;
        cp.encoder = encoder_from(j.at("encoder"));
        cp.train = train_from(j.at("train"));
        const auto& st = j.at("standardizer");
        const auto mean = st.at("mean").get<std::vector<double>>();
        const auto scale = st.at("scale").get<std::vector<double>>();
        if (!mean.empty() || !scale.empty()) {
            cp.standardizer = net::Standardizer(mean, scale);
        }
        cp.epoch = j.at("epoch").get<std::size_t>();
        cp.configHash = j.at("configHash").get<std::string>();
        for (const auto& s : j.at("parameters")) {
            const std::size_t slot =
                cp.parameters.add(s.at("name").get<std::string>(), s.at("rows").get<std::size_t>(),
                                  s.at("cols").get<std::size_t>());
            require(cp.parameters.slots()[slot].offset == s.at("offset").get<std::size_t>(), ErrorKind::ParseError,
                    "parameter offsets are not contiguous");
        }
        const std::string blob = read_text(manifest.parent_path() / j.at("blob").at("file").get<std::string>());
        require(blob.size() == cp.parameters.size() * 8 &&
                    j.at("blob").at("count").get<std::size_t>() == cp.parameters.size(),
                ErrorKind::ParseError, "parameter blob length does not match the manifest");
        const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
        for (std::size_t i = 0; i < cp.parameters.size(); ++i) {
            cp.parameters.values()[i] = get_le(p + 8 * i);
        }
        return cp;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, manifest.string() + ": " + e.what());
    }
}

std::string trace_csv(const std::vector<net::EpochMetrics>& trace)
{
    std::string out = "epoch,train_loss,learning_rate,auroc,auprc,f1,recall\n";
    for (const auto& m : trace) {
        out += std::to_string(m.epoch) + "," + format_double(m.trainLoss) + "," + format_double(m.learningRate) +
               "," + format_double(m.auroc) + "," + format_double(m.auprc) + "," + format_double(m.f1) + "," +
               format_double(m.recall) + "\n";
    }
    return out;
}

std::vector<net::EpochMetrics> parse_trace_csv(const std::string& text)
{
    std::vector<net::EpochMetrics> out;
    for (const auto& c : split_csv(text, "epoch,train_loss,learning_rate,auroc,auprc,f1,recall")) {
        require(c.size() == 7, ErrorKind::ParseError, "metrics rows need 7 fields");
        out.push_back({parse_size(c[0]), parse_double(c[1]), parse_double(c[2]), parse_double(c[3]),
                       parse_double(c[4]), parse_double(c[5]), parse_double(c[6])});
    }
    return out;
}

std::string report_csv(const eval::ClassificationReport& r)
{
    return "auroc,auprc,f1,recall\n" + format_double(r.auroc) + "," + format_double(r.auprc) + "," +
           format_double(r.f1) + "," + format_double(r.recall) + "\n";
}

eval::ClassificationReport parse_report_csv(const std::string& text)
{
    const auto rows = split_csv(text, "auroc,auprc,f1,recall");
    require(rows.size() == 1 && rows[0].size() == 4, ErrorKind::ParseError, "report CSV needs one 4-field row");
    return {parse_double(rows[0][0]), parse_double(rows[0][1]), parse_double(rows[0][2]), parse_double(rows[0][3])};
}

std::string attention_csv(const net::AttentionSummary& summary)
{
    std::string out = "layer,stream,row,col,value\n";
    for (const auto& la : summary.layers) {
        for (std::size_t i = 0; i < la.mean.rows(); ++i) {
            for (std::size_t j = 0; j < la.mean.cols(); ++j) {
                out += std::to_string(la.layer) + "," + std::string(net::to_string(la.stream)) + "," +
                       std::to_string(i) + "," + std::to_string(j) + "," + format_double(la.mean(i, j)) + "\n";
            }
        }
    }
    return out;
}

std::string column_sums_csv(const net::AttentionSummary& summary)
{
    std::string out = "layer,stream,class,col,value\n";
    for (const auto& la : summary.layers) {
        for (int c = 0; c < 2; ++c) {
            for (std::size_t j = 0; j < la.classColumnSums[c].size(); ++j) {
                out += std::to_string(la.layer) + "," + std::string(net::to_string(la.stream)) + "," +
                       std::to_string(c) + "," + std::to_string(j) + "," + format_double(la.classColumnSums[c][j]) +
                       "\n";
            }
        }
    }
    return out;
}

net::AttentionSummary parse_attention_csv(const std::string& maps, const std::string& columnSums)
{
    net::AttentionSummary out;
    auto layer_for = [&](std::size_t layer, net::Stream stream) -> net::LayerAttention& {
        for (auto& la : out.layers) {
            if (la.layer == layer && la.stream == stream) {
                return la;
            }
        }
        net::LayerAttention la;
        la.layer = layer;
        la.stream = stream;
        out.layers.push_back(std::move(la));
        return out.layers.back();
    };
    const auto mapRows = split_csv(maps, "layer,stream,row,col,value");
    // First pass sizes each map.
    for (const auto& c : mapRows) {
        require(c.size() == 5, ErrorKind::ParseError, "attention rows need 5 fields");
        auto& la = layer_for(parse_size(c[0]), parse_stream(c[1]));
        const std::size_t n = std::max({la.mean.rows(), parse_size(c[2]) + 1, parse_size(c[3]) + 1});
        if (n != la.mean.rows()) {
            Matrix grown(n, n);
            for (std::size_t i = 0; i < la.mean.rows(); ++i) {
                for (std::size_t j = 0; j < la.mean.cols(); ++j) {
                    grown(i, j) = la.mean(i, j);
                }
            }
            la.mean = std::move(grown);
        }
        la.mean(parse_size(c[2]), parse_size(c[3])) = parse_double(c[4]);
    }
    for (const auto& c : split_csv(columnSums, "layer,stream,class,col,value")) {
        require(c.size() == 5, ErrorKind::ParseError, "column-sum rows need 5 fields");
        auto& la = layer_for(parse_size(c[0]), parse_stream(c[1]));
        const std::size_t cls = parse_size(c[2]);
        require(cls <= 1, ErrorKind::ParseError, "class must be 0 or 1");
        auto& v = la.classColumnSums[cls];
        const std::size_t j = parse_size(c[3]);
        if (v.size() <= j) {
            v.resize(j + 1, 0.0);
        }
        v[j] = parse_double(c[4]);
    }
    return out;
}

std::string bench_csv(const std::vector<eval::BenchRow>& rows)
{
    std::string out = "size,cholesky_seconds,mpcg_seconds,relative_error,iterations\n";
    for (const auto& r : rows) {
        out += std::to_string(r.size) + "," + format_double(r.choleskySeconds) + "," + format_double(r.mpcgSeconds) +
               "," + format_double(r.relativeError) + "," + std::to_string(r.iterations) + "\n";
    }
    return out;
}

std::vector<eval::BenchRow> parse_bench_csv(const std::string& text)
{
    std::vector<eval::BenchRow> out;
    for (const auto& c : split_csv(text, "size,cholesky_seconds,mpcg_seconds,relative_error,iterations")) {
        require(c.size() == 5, ErrorKind::ParseError, "bench rows need 5 fields");
        eval::BenchRow r;
        r.size = parse_size(c[0]);
        r.choleskySeconds = parse_double(c[1]);
        r.mpcgSeconds = parse_double(c[2]);
        r.relativeError = parse_double(c[3]);
        r.iterations = parse_size(c[4]);
        out.push_back(r);
    }
    return out;
}

std::string predictions_csv(const std::vector<ImputedRecord>& records, const std::vector<double>& scores)
{
    require(records.size() == scores.size(), ErrorKind::LengthMismatch, "one score per record");
    std::string out = "id,label,score\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        out += records[i].id + "," + std::to_string(records[i].label) + "," + format_double(scores[i]) + "\n";
    }
    return out;
}

json run_manifest(const std::string& command, const RunConfig& config, const std::vector<std::string>& outputs)
{
    return {{"command", command},      {"version", kVersion}, {"configHash", config_hash(config)},
            {"seed", config.seed},     {"config", to_json(config)}, {"outputs", outputs}};
}

json synth_metadata(const synth::SyntheticDataset& dataset, const RunConfig& config)
{
    std::size_t negatives = 0;
    for (const auto& r : dataset.records) {
        negatives += r.label() == 0 ? 1 : 0;
    }
    return {{"records", dataset.records.size()},
            {"negatives", negatives},
            {"positives", dataset.records.size() - negatives},
            {"steps", dataset.config.subTime},
            {"variables", dataset.config.nVariables},
            {"baselineStationary", dataset.baselineStationary},
            {"configHash", config_hash(config)},
            {"data", to_json(config).at("data")}};
}

} // namespace muse::io
