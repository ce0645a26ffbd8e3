/*
 * Copyright 2026 The TaskProbe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// File formats.
//
// Embedding files are comma-separated text with a mandatory header
//   task_id[,split],e_0,...,e_{d-1}
// one embedding per row. `split` (values `in` / `out`) is optional; without
// it the file can be scored but not evaluated. Lines end in '\n'.
//
// Result tables are written either as CSV (header row + rows) or as a JSON
// array of row objects. Numbers use the shortest representation that reads
// back to the same double.
//
// Model and dataset checkpoints are JSON documents; every matrix is stored as
// {"rows": r, "cols": c, "data": [row-major values]}.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "taskprobe/attacks.hpp"
#include "taskprobe/error.hpp"
#include "taskprobe/numerics.hpp"
#include "taskprobe/synthmtl.hpp"

namespace taskprobe {

inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorKind::kIo, "cannot format number");
  return std::string(buf, ptr);
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline Error parse_error(std::size_t line, const std::string& what) {
  return Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + what);
}

inline double parse_number(std::string_view text, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw parse_error(line, "'" + std::string(text) + "' is not a number");
  if (!std::isfinite(value)) throw parse_error(line, "non-finite value");
  return value;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

struct EmbeddingFile {
  std::vector<EmbeddingSet> sets;  // first-appearance order of task ids
  bool has_labels = false;
  int dim = 0;
};

// Reads an embedding file line by line; each row is appended to its task's
// buffer, so memory stays proportional to the parsed values.
inline EmbeddingFile read_embedding_file(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw detail::parse_error(1, "missing header");
  detail::strip_cr(line);
  const auto header = detail::split_fields(line);
  {
    std::map<std::string_view, std::size_t> seen;
    for (std::size_t i = 0; i < header.size(); ++i)
      if (!seen.emplace(header[i], i).second)
        throw detail::parse_error(1, "duplicate column '" + std::string(header[i]) + "'");
  }
  if (header.empty() || header[0] != "task_id")
    throw detail::parse_error(1, "first column must be 'task_id'");
  EmbeddingFile file;
  file.has_labels = header.size() > 1 && header[1] == "split";
  const std::size_t first_value = file.has_labels ? 2 : 1;
  if (header.size() <= first_value) throw detail::parse_error(1, "no embedding columns");
  for (std::size_t i = first_value; i < header.size(); ++i) {
    const std::string expected = "e_" + std::to_string(i - first_value);
    if (header[i] != expected)
      throw detail::parse_error(1, "expected column '" + expected + "', found '" +
                                       std::string(header[i]) + "'");
  }
  file.dim = static_cast<int>(header.size() - first_value);

  struct Pending {
    std::vector<double> values;
    std::optional<Membership> label;
  };
  std::vector<Pending> pending;
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> index;

  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != header.size())
      throw detail::parse_error(line_no, "expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) throw detail::parse_error(line_no, "empty task_id");
    const std::string id(fields[0]);
    auto [it, inserted] = index.emplace(id, pending.size());
    if (inserted) {
      pending.emplace_back();
      order.push_back(id);
    }
    Pending& task = pending[it->second];
    if (file.has_labels) {
      Membership label;
      try {
        label = parse_membership(fields[1]);
      } catch (const Error&) {
        throw detail::parse_error(line_no, "unknown split '" + std::string(fields[1]) + "'");
      }
      if (task.label && *task.label != label)
        throw detail::parse_error(line_no, "task '" + id + "' has conflicting split labels");
      task.label = label;
    }
    for (std::size_t i = first_value; i < fields.size(); ++i)
      task.values.push_back(detail::parse_number(fields[i], line_no));
  }

  file.sets.reserve(pending.size());
  for (std::size_t t = 0; t < pending.size(); ++t) {
    auto& p = pending[t];
    const auto rows = static_cast<Eigen::Index>(p.values.size()) / file.dim;
    EmbeddingSet set{order[t], Matrix(rows, file.dim), p.label};
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < file.dim; ++c)
        set.embeddings(r, c) = p.values[static_cast<std::size_t>(r * file.dim + c)];
    std::vector<double>().swap(p.values);
    file.sets.push_back(std::move(set));
  }
  return file;
}

inline EmbeddingFile load_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return read_embedding_file(in);
}

// Writes the split column only when every set carries a label.
inline void write_embedding_file(std::ostream& out, std::span<const EmbeddingSet> sets) {
  detail::require(!sets.empty(), ErrorKind::kParameter, "no embedding sets to write");
  const auto dim = sets.front().embeddings.cols();
  bool labeled = true;
  for (const auto& s : sets) {
    detail::require(s.embeddings.cols() == dim, ErrorKind::kDimension,
                    "embedding dimension differs across tasks");
    detail::require(!s.task_id.empty() && s.task_id.find_first_of(",\n\r") == std::string::npos,
                    ErrorKind::kParameter, "task id '" + s.task_id + "' cannot be written");
    labeled = labeled && s.label.has_value();
  }
  out << "task_id";
  if (labeled) out << ",split";
  for (Eigen::Index c = 0; c < dim; ++c) out << ",e_" << c;
  out << '\n';
  for (const auto& s : sets) {
    for (Eigen::Index r = 0; r < s.embeddings.rows(); ++r) {
      out << s.task_id;
      if (labeled) out << ',' << to_string(*s.label);
      for (Eigen::Index c = 0; c < dim; ++c) out << ',' << format_double(s.embeddings(r, c));
      out << '\n';
    }
  }
}

inline void save_embedding_file(const std::filesystem::path& path,
                                std::span<const EmbeddingSet> sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  write_embedding_file(out, sets);
}

// ---------------------------------------------------------------------------
// Result tables

enum class TableFormat { kCsv, kJson };

inline std::string_view to_string(TableFormat f) { return f == TableFormat::kCsv ? "csv" : "json"; }

inline TableFormat parse_table_format(std::string_view text) {
  if (text == "csv") return TableFormat::kCsv;
  if (text == "json") return TableFormat::kJson;
  throw Error(ErrorKind::kParse, "unknown format '" + std::string(text) + "'");
}

using Cell = std::variant<std::string, double, long long>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    detail::require(row.size() == columns.size(), ErrorKind::kDimension, "row width mismatch");
    rows.push_back(std::move(row));
  }
};

inline void write_table_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit([&out](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, double>) out << format_double(v);
        else out << v;
      }, row[i]);
    }
    out << '\n';
  }
}

inline nlohmann::json table_to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      std::visit([&](const auto& v) { obj[table.columns[i]] = v; }, row[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

// Writes <dir>/<stem>.csv or <dir>/<stem>.json. Returns the file path.
inline std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& stem,
                                         const Table& table, TableFormat format) {
  const auto path = dir / (stem + (format == TableFormat::kCsv ? ".csv" : ".json"));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  if (format == TableFormat::kCsv) write_table_csv(out, table);
  else out << table_to_json(table).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
  return path;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

inline nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  detail::require(rows >= 0 && cols >= 0 && data.size() == static_cast<std::size_t>(rows * cols),
                  ErrorKind::kParse, "matrix data length does not match its dimensions");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
  return m;
}

inline nlohmann::json vector_to_json(const Vector& v) { return matrix_to_json(v.transpose()); }

inline Vector vector_from_json(const nlohmann::json& j) {
  const Matrix m = matrix_from_json(j);
  detail::require(m.rows() == 1 || m.size() == 0, ErrorKind::kParse, "expected a row vector");
  return m.transpose();
}

inline nlohmann::json parameters_to_json(const MtlParameters& p) {
  return {{"layer1_weights", matrix_to_json(p.layer1_weights)},
          {"layer1_bias", vector_to_json(p.layer1_bias)},
          {"projection", matrix_to_json(p.projection)},
          {"heads", matrix_to_json(p.heads)}};
}

inline MtlParameters parameters_from_json(const nlohmann::json& j) {
  MtlParameters p{matrix_from_json(j.at("layer1_weights")), vector_from_json(j.at("layer1_bias")),
                  matrix_from_json(j.at("projection")), matrix_from_json(j.at("heads"))};
  detail::require(p.layer1_bias.size() == p.hidden() && p.projection.cols() == p.hidden() &&
                      p.heads.cols() == p.embed_dim(),
                  ErrorKind::kParse, "inconsistent model dimensions");
  return p;
}

inline nlohmann::json model_to_json(const MtlModel& model) {
  return {{"format", "taskprobe-mtl-model"},
          {"version", 1},
          {"parameters", parameters_to_json(model.params)},
          {"optimizer",
           {{"step", model.optimizer.step},
            {"first_moment", parameters_to_json(model.optimizer.first)},
            {"second_moment", parameters_to_json(model.optimizer.second)}}}};
}

inline MtlModel model_from_json(const nlohmann::json& j) {
  try {
    detail::require(j.at("format") == "taskprobe-mtl-model", ErrorKind::kParse,
                    "not a model checkpoint");
    MtlModel model;
    model.params = parameters_from_json(j.at("parameters"));
    const auto& opt = j.at("optimizer");
    model.optimizer.step = opt.at("step").get<long>();
    model.optimizer.first = parameters_from_json(opt.at("first_moment"));
    model.optimizer.second = parameters_from_json(opt.at("second_moment"));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("model checkpoint: ") + e.what());
  }
}

inline nlohmann::json dataset_to_json(const SyntheticDataset& data) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : data.tasks) {
    tasks.push_back({{"task_id", t.task_id},
                     {"membership", to_string(t.membership)},
                     {"train_inputs", matrix_to_json(t.train_inputs)},
                     {"train_labels", vector_to_json(t.train_labels)},
                     {"holdout_inputs", matrix_to_json(t.holdout_inputs)},
                     {"holdout_labels", vector_to_json(t.holdout_labels)},
                     {"true_head", vector_to_json(t.true_head)},
                     {"task_mean", vector_to_json(t.task_mean)}});
  }
  return {{"format", "taskprobe-synthetic-dataset"},
          {"version", 1},
          {"projection", matrix_to_json(data.projection)},
          {"tasks", tasks}};
}

inline SyntheticDataset dataset_from_json(const nlohmann::json& j) {
  try {
    detail::require(j.at("format") == "taskprobe-synthetic-dataset", ErrorKind::kParse,
                    "not a dataset file");
    SyntheticDataset data;
    data.projection = matrix_from_json(j.at("projection"));
    for (const auto& t : j.at("tasks")) {
      SyntheticTaskData task;
      task.task_id = t.at("task_id").get<std::string>();
      task.membership = parse_membership(t.at("membership").get<std::string>());
      task.train_inputs = matrix_from_json(t.at("train_inputs"));
      task.train_labels = vector_from_json(t.at("train_labels"));
      task.holdout_inputs = matrix_from_json(t.at("holdout_inputs"));
      task.holdout_labels = vector_from_json(t.at("holdout_labels"));
      task.true_head = vector_from_json(t.at("true_head"));
      task.task_mean = vector_from_json(t.at("task_mean"));
      data.tasks.push_back(std::move(task));
    }
    return data;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("dataset file: ") + e.what());
  }
}

}  // namespace taskprobe
