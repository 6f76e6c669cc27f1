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

#include "acme/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "acme/errors.hpp"

namespace acme::io {
namespace {

double parse_number(const std::string& field, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw IoError(where + ": '" + field + "' is not a number");
  }
  if (used != field.size())
    throw IoError(where + ": '" + field + "' is not a number");
  return v;
}

void write_value(std::ostream& out, const Json& v, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << Json(it.key()).dump() << ": ";
        write_value(out, it.value(), depth + 1);
      }
      out << '\n' << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const Json& e : v) flat = flat && !e.is_structured();
      out << '[';
      bool first = true;
      for (const Json& e : v) {
        if (!first) out << (flat ? ", " : ",");
        first = false;
        if (!flat) out << '\n' << pad;
        write_value(out, e, depth + 1);
      }
      if (!flat) out << '\n' << close;
      out << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out << (std::isfinite(d) ? format_double(d) : "null");
      return;
    }
    default:
      out << v.dump();
  }
}

}  // namespace

Table parse_csv(std::istream& in, const std::string& source) {
  Table t;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  bool any = false;
  std::size_t line = 1;
  auto end_row = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
    if (t.header.empty() && t.rows.empty() && !any) {
      t.header = std::move(row);
    } else if (!(row.size() == 1 && row[0].empty())) {
      t.rows.push_back(std::move(row));
    }
    any = true;
    row.clear();
  };
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (field_started)
        throw IoError(source + ":" + std::to_string(line) + ": stray quote");
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
      field_started = false;
    } else if (c == '\r') {
      if (in.peek() == '\n') continue;
      end_row();
      ++line;
    } else if (c == '\n') {
      end_row();
      ++line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw IoError(source + ": unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  if (t.header.empty()) throw IoError(source + ": missing header row");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size())
      throw IoError(source + ": row " + std::to_string(r + 1) + " has " +
                    std::to_string(t.rows[r].size()) + " fields, header has " +
                    std::to_string(t.header.size()));
  }
  return t;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MainEffectMatrix read_main_effects(const std::filesystem::path& path,
                                   std::ostream* notice) {
  const Table t = read_csv(path);
  const std::size_t n = t.rows.size();
  const std::size_t p = t.header.size();
  if (n == 0) throw IoError(path.string() + ": no data rows");
  std::vector<double> values(n * p);
  bool binary01 = true;
  bool signs = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double v = parse_number(t.rows[i][j], path.string() + ":" +
                                                      std::to_string(i + 2));
      values[j * n + i] = v;
      binary01 = binary01 && (v == 0.0 || v == 1.0);
      signs = signs && (v == -1.0 || v == 1.0);
    }
  }
  if (!signs) {
    if (!binary01)
      throw IoError(path.string() +
                    ": main effects must be coded -1/+1 or 0/1");
    for (double& v : values) v = v == 0.0 ? -1.0 : 1.0;
    if (notice != nullptr)
      *notice << "note: " << path.string()
              << " is coded 0/1; relabeled to -1/+1 (0 -> -1)\n";
  }
  return MainEffectMatrix(n, p, std::move(values), t.header);
}

void write_main_effects(const std::filesystem::path& path,
                        const MainEffectMatrix& me) {
  std::ofstream out = open_output(path);
  for (std::size_t j = 0; j < me.p(); ++j)
    out << (j ? "," : "") << csv_field(me.names()[j]);
  out << '\n';
  for (std::size_t i = 0; i < me.n(); ++i) {
    for (std::size_t j = 0; j < me.p(); ++j)
      out << (j ? "," : "") << (me(i, j) > 0 ? "1" : "-1");
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_response(const std::filesystem::path& path) {
  const Table t = read_csv(path);
  if (t.header.size() != 1)
    throw IoError(path.string() + ": response file needs exactly one column");
  std::vector<double> y;
  y.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    y.push_back(parse_number(t.rows[i][0], path.string() + ":" + std::to_string(i + 2)));
  if (y.empty()) throw IoError(path.string() + ": no data rows");
  return y;
}

void write_response(const std::filesystem::path& path,
                    std::span<const double> y) {
  std::ofstream out = open_output(path);
  out << "y\n";
  for (double v : y) out << format_double(v) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_json(std::ostream& out, const Json& value) {
  write_value(out, value, 0);
  out << '\n';
}

void save_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out = open_output(path);
  write_json(out, value);
  if (!out) throw IoError("write failed: " + path.string());
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace acme::io
