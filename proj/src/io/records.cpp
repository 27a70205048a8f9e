// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#include "muse/io/records.hpp"

#include "muse/error.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>

namespace muse::io {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what)
{
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

json grid_to_json(const Matrix& values, const LongitudinalRecord* observed)
{
    json rows = json::array();
    for (std::size_t t = 0; t < values.rows(); ++t) {
        json row = json::array();
        for (std::size_t m = 0; m < values.cols(); ++m) {
            if (observed != nullptr && !observed->is_observed(t, m)) {
                row.push_back(nullptr);
            } else {
                row.push_back(values(t, m));
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> read_times(const json& j)
{
    std::vector<double> times;
    for (const auto& t : j.at("times")) {
        times.push_back(t.get<double>());
    }
    return times;
}

int read_label(const json& j)
{
    const int label = j.at("label").get<int>();
    require(label == 0 || label == 1, ErrorKind::ParseError, "label must be 0 or 1");
    return label;
}

template <typename Fn>
auto with_line_context(std::size_t line, Fn&& fn)
{
    try {
        return fn();
    } catch (const json::exception& e) {
        parse_fail(line, e.what());
    } catch (const Error& e) {
        parse_fail(line, e.what());
    }
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::IoError, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::IoError, "cannot write " + path.string());
    return out;
}

} // namespace

std::string record_to_line(const LongitudinalRecord& record)
{
    json j;
    j["id"] = record.id();
    j["label"] = record.label();
    j["times"] = record.times();
    j["values"] = grid_to_json(record.values(), &record);
    return j.dump();
}

LongitudinalRecord record_from_line(const std::string& line)
{
    const json j = json::parse(line);
    const auto times = read_times(j);
    std::vector<std::vector<std::optional<double>>> cells;
    for (const auto& row : j.at("values")) {
        auto& out = cells.emplace_back();
        for (const auto& v : row) {
            out.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
        }
    }
    return LongitudinalRecord::from_cells(j.at("id").get<std::string>(), read_label(j), times, cells);
}

void write_records(std::ostream& out, const Dataset& records)
{
    for (const auto& r : records) {
        out << record_to_line(r) << '\n';
    }
}

Dataset read_records(std::istream& in)
{
    Dataset out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.empty()) {
            continue;
        }
        out.push_back(with_line_context(n, [&] { return record_from_line(line); }));
    }
    return out;
}

void write_records(const std::filesystem::path& path, const Dataset& records)
{
    auto out = open_out(path);
    write_records(out, records);
    require(out.good(), ErrorKind::IoError, "failed writing " + path.string());
}

Dataset read_records(const std::filesystem::path& path)
{
    auto in = open_in(path);
    try {
        return read_records(in);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void write_imputed(std::ostream& out, const ImputedFile& file)
{
    for (const auto& r : file.records) {
        json j;
        j["id"] = r.id;
        j["label"] = r.label;
        j["times"] = r.times;
        j["values"] = grid_to_json(r.imputed, nullptr);
        if (file.hasMasks) {
            json mask = json::array();
            for (std::size_t t = 0; t < r.mask.rows(); ++t) {
                json row = json::array();
                for (std::size_t m = 0; m < r.mask.cols(); ++m) {
                    row.push_back(r.mask(t, m) != 0.0 ? 1 : 0);
                }
                mask.push_back(std::move(row));
            }
            j["mask"] = std::move(mask);
        }
        out << j.dump() << '\n';
    }
}

ImputedFile read_imputed(std::istream& in)
{
    ImputedFile file;
    bool first = true;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.empty()) {
            continue;
        }
        file.records.push_back(with_line_context(n, [&] {
            const json j = json::parse(line);
            ImputedRecord r;
            r.id = j.at("id").get<std::string>();
            r.label = read_label(j);
            r.times = read_times(j);
            const auto& values = j.at("values");
            require(values.size() == r.times.size(), ErrorKind::ParseError, "values rows must match times");
            const std::size_t m = values.empty() ? 0 : values.front().size();
            r.imputed = Matrix(r.times.size(), m);
            r.mask = Matrix(r.times.size(), m);
            for (std::size_t t = 0; t < values.size(); ++t) {
                require(values[t].size() == m, ErrorKind::ParseError, "ragged values grid");
                for (std::size_t k = 0; k < m; ++k) {
                    require(!values[t][k].is_null(), ErrorKind::ParseError, "imputed files cannot hold nulls");
                    r.imputed(t, k) = values[t][k].get<double>();
                }
            }
            const bool has = j.contains("mask");
            require(first || has == file.hasMasks, ErrorKind::ParseError, "mask present on some lines only");
            file.hasMasks = has;
            first = false;
            if (has) {
                const auto& mask = j.at("mask");
                require(mask.size() == r.times.size(), ErrorKind::ParseError, "mask rows must match times");
                for (std::size_t t = 0; t < mask.size(); ++t) {
                    require(mask[t].size() == m, ErrorKind::ParseError, "ragged mask grid");
                    for (std::size_t k = 0; k < m; ++k) {
                        const int v = mask[t][k].get<int>();
                        require(v == 0 || v == 1, ErrorKind::ParseError, "mask entries must be 0 or 1");
                        r.mask(t, k) = v;
                    }
                }
            }
            return r;
        }));
    }
    return file;
}

void write_imputed(const std::filesystem::path& path, const ImputedFile& file)
{
    auto out = open_out(path);
    write_imputed(out, file);
    require(out.good(), ErrorKind::IoError, "failed writing " + path.string());
}

ImputedFile read_imputed(const std::filesystem::path& path)
{
    auto in = open_in(path);
    try {
        return read_imputed(in);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto out = open_out(path);
    out << text;
    require(out.good(), ErrorKind::IoError, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path)
{
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace muse::io
