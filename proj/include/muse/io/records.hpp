// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/record.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace muse::io {

// Longitudinal Record File: one JSON object per line,
//   {"id": str, "label": 0|1, "times": [t...], "values": [[v|null ...] per time]}
// Imputed files use the same layout with every value present plus an optional
//   "mask": [[0|1 ...] per time]   (1 = the cell was imputed)

std::string record_to_line(const LongitudinalRecord& record);
LongitudinalRecord record_from_line(const std::string& line);

void write_records(std::ostream& out, const Dataset& records);
Dataset read_records(std::istream& in);
void write_records(const std::filesystem::path& path, const Dataset& records);
Dataset read_records(const std::filesystem::path& path);

struct ImputedFile {
    std::vector<ImputedRecord> records;
    /// False when the file was written without masks (records then carry zero masks).
    bool hasMasks = true;

    friend bool operator==(const ImputedFile&, const ImputedFile&) = default;
};

void write_imputed(std::ostream& out, const ImputedFile& file);
ImputedFile read_imputed(std::istream& in);
void write_imputed(const std::filesystem::path& path, const ImputedFile& file);
ImputedFile read_imputed(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories; throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace muse::io
