/*
 * Copyright 2026 The acmenet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "acme/design.hpp"
#include "json.hpp"

namespace acme::io {

using Json = nlohmann::ordered_json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// A header row is required. Throws IoError on malformed input.
Table parse_csv(std::istream& in, const std::string& source);
Table read_csv(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Reads a main-effect table. Entries must be all in {-1,+1} or all in
/// {0,1}; the latter is relabeled 0 -> -1 and a notice is written to
/// `notice` when it is non-null.
MainEffectMatrix read_main_effects(const std::filesystem::path& path,
                                   std::ostream* notice);
void write_main_effects(const std::filesystem::path& path,
                        const MainEffectMatrix& me);

/// Single-column numeric table.
std::vector<double> read_response(const std::filesystem::path& path);
void write_response(const std::filesystem::path& path,
                    std::span<const double> y);

/// Pretty-printed JSON with insertion-ordered keys and 17-digit floats.
/// Non-finite floats become null.
void write_json(std::ostream& out, const Json& value);
void save_json(const std::filesystem::path& path, const Json& value);
Json load_json(const std::filesystem::path& path);

/// Opens a file for writing, creating parent directories.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace acme::io
