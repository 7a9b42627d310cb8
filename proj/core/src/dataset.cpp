#include "creditbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <fstream>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"
#include "creditbench/random.hpp"

namespace creditbench {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::target: return "target";
    case ColumnKind::ignored: return "ignored";
  }
  return "?";
}

ColumnKind column_kind_from_string(std::string_view text) {
  if (text == "numeric") return ColumnKind::numeric;
  if (text == "categorical") return ColumnKind::categorical;
  if (text == "target") return ColumnKind::target;
  if (text == "ignored") return ColumnKind::ignored;
  throw DataError("unknown column kind '" + std::string(text) + "'");
}

bool ColumnSchema::is_missing_token(std::string_view cell) const {
  return std::find(missing_tokens.begin(), missing_tokens.end(), cell) != missing_tokens.end();
}

void DatasetSchema::validate() const {
  std::set<std::string> names;
  std::size_t targets = 0;
  for (const auto& c : columns) {
    if (!names.insert(c.name).second) throw DataError("duplicate column '" + c.name + "' in schema " + name);
    if (c.kind == ColumnKind::target) ++targets;
  }
  if (targets != 1) {
    throw DataError("schema " + name + " must declare exactly one target column, found " + std::to_string(targets));
  }
  if (default_label.empty() && non_default_label.empty()) {
    throw DataError("schema " + name + " does not declare target labels");
  }
  if (default_label == non_default_label) throw DataError("schema " + name + ": target labels must differ");
}

const ColumnSchema& DatasetSchema::target() const {
  for (const auto& c : columns) {
    if (c.kind == ColumnKind::target) return c;
  }
  throw DataError("schema " + name + " has no target column");
}

TabularDataset::TabularDataset(std::string name, std::vector<Column> predictors, Labels target, bool allow_degenerate)
    : name_(std::move(name)), predictors_(std::move(predictors)), target_(std::move(target)) {
  if (target_.empty()) throw DataError("dataset " + name_ + " has no rows");
  for (int y : target_) {
    if (y != 0 && y != 1) throw DataError("dataset " + name_ + ": target must be 0/1");
  }
  for (const auto& c : predictors_) {
    if (c.size() != target_.size()) throw DataError("dataset " + name_ + ": column " + c.name + " has wrong length");
  }
  if (!allow_degenerate && (class_count(0) == 0 || class_count(1) == 0)) {
    throw DataError("dataset " + name_ + " contains a single class");
  }
}

double TabularDataset::default_rate() const {
  return static_cast<double>(class_count(1)) / static_cast<double>(rows());
}

std::size_t TabularDataset::missing_cells() const {
  std::size_t n = 0;
  for (const auto& c : predictors_) n += static_cast<std::size_t>(std::count(c.missing.begin(), c.missing.end(), 1));
  return n;
}

bool TabularDataset::all_numeric() const {
  return std::all_of(predictors_.begin(), predictors_.end(),
                     [](const Column& c) { return c.kind == ColumnKind::numeric; });
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(predictors_.size());
  for (const auto& src : predictors_) {
    Column c;
    c.name = src.name;
    c.kind = src.kind;
    c.missing.reserve(rows.size());
    for (auto r : rows) c.missing.push_back(src.missing.at(r));
    if (src.kind == ColumnKind::numeric) {
      c.numeric.reserve(rows.size());
      for (auto r : rows) c.numeric.push_back(src.numeric[r]);
    } else {
      c.categorical.reserve(rows.size());
      for (auto r : rows) c.categorical.push_back(src.categorical[r]);
    }
    cols.push_back(std::move(c));
  }
  return TabularDataset(name_, std::move(cols), select_labels(target_, rows), true);
}

Matrix TabularDataset::to_matrix() const {
  std::vector<std::size_t> all(rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return to_matrix(all);
}

Matrix TabularDataset::to_matrix(std::span<const std::size_t> rows) const {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(predictors_.size()));
  for (std::size_t j = 0; j < predictors_.size(); ++j) {
    const auto& c = predictors_[j];
    if (c.kind != ColumnKind::numeric) throw DataError("column " + c.name + " is not numeric");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.numeric[rows[i]];
    }
  }
  return m;
}

TabularDataset parse_csv(std::istream& in, const DatasetSchema& schema) {
  schema.validate();
  const CsvTable table = read_csv(in);

  for (const auto& h : table.header) {
    const bool declared = std::any_of(schema.columns.begin(), schema.columns.end(),
                                      [&](const ColumnSchema& c) { return c.name == h; });
    if (!declared) throw DataError("unknown column '" + h + "' (not declared in schema " + schema.name + ")");
  }

  std::vector<Column> predictors;
  std::vector<long> positions;
  long target_pos = -1;
  const ColumnSchema* target_schema = nullptr;
  for (const auto& cs : schema.columns) {
    const long pos = table.column(cs.name);
    if (pos < 0) throw DataError("unknown column '" + cs.name + "': declared in schema " + schema.name + " but absent from file");
    if (cs.kind == ColumnKind::target) {
      target_pos = pos;
      target_schema = &cs;
    } else if (cs.kind != ColumnKind::ignored) {
      Column c;
      c.name = cs.name;
      c.kind = cs.kind;
      predictors.push_back(std::move(c));
      positions.push_back(pos);
    }
  }

  std::vector<const ColumnSchema*> predictor_schema;
  for (const auto& cs : schema.columns) {
    if (cs.kind == ColumnKind::numeric || cs.kind == ColumnKind::categorical) predictor_schema.push_back(&cs);
  }

  Labels target;
  target.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string& label = row[static_cast<std::size_t>(target_pos)];
    if (label == schema.default_label) {
      target.push_back(1);
    } else if (label == schema.non_default_label) {
      target.push_back(0);
    } else if (target_schema->is_missing_token(label)) {
      throw DataError("row " + std::to_string(r + 1) + ": missing target value");
    } else {
      throw DataError("row " + std::to_string(r + 1) + ": target value '" + label +
                      "' is outside the declared labels {" + schema.default_label + ", " +
                      schema.non_default_label + "}");
    }
    for (std::size_t j = 0; j < predictors.size(); ++j) {
      auto& c = predictors[j];
      const std::string& cell = row[static_cast<std::size_t>(positions[j])];
      const bool missing = predictor_schema[j]->is_missing_token(cell);
      c.missing.push_back(missing ? 1 : 0);
      if (c.kind == ColumnKind::numeric) {
        double v = std::numeric_limits<double>::quiet_NaN();
        if (!missing && !parse_double(cell, v)) {
          throw DataError("row " + std::to_string(r + 1) + ": column " + c.name + " value '" + cell +
                          "' is not numeric");
        }
        c.numeric.push_back(v);
      } else {
        c.categorical.push_back(missing ? std::string() : cell);
      }
    }
  }
  return TabularDataset(schema.name, std::move(predictors), std::move(target));
}

TabularDataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, schema);
}

void write_csv(std::ostream& out, const TabularDataset& data, const DatasetSchema& schema) {
  std::vector<std::string> header;
  for (const auto& c : data.predictors()) header.push_back(c.name);
  header.push_back(schema.target().name);
  write_csv_row(out, header);
  std::vector<std::string> fields(header.size());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t j = 0; j < data.columns(); ++j) {
      const auto& c = data.predictor(j);
      if (c.is_missing(r)) {
        fields[j] = "NA";
      } else if (c.kind == ColumnKind::numeric) {
        fields[j] = format_double(c.numeric[r]);
      } else {
        fields[j] = c.categorical[r];
      }
    }
    fields.back() = data.target()[r] == 1 ? schema.default_label : schema.non_default_label;
    write_csv_row(out, fields);
  }
}

std::size_t stratified_count(std::size_t class_size, double fraction) {
  // The epsilon keeps exact products such as 0.75 * 700 from rounding up.
  const double raw = fraction * static_cast<double>(class_size);
  return std::min(class_size, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

namespace {

std::vector<std::size_t> class_indices(const Labels& y, int label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == label) idx.push_back(i);
  }
  return idx;
}

}  // namespace

TabularDataset stratified_subset(const TabularDataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DataError("subset fraction must lie in (0, 1]");
  Rng rng(seed, hash_name("stratified_subset"));
  std::vector<std::size_t> chosen;
  for (int label : {0, 1}) {
    auto idx = class_indices(data.target(), label);
    if (idx.empty()) continue;
    if (fraction * static_cast<double>(idx.size()) < 2.0 && fraction < 1.0) {
      throw DataError("subset fraction " + std::to_string(fraction) + " would leave class " + std::to_string(label) +
                      " with fewer than 2 rows");
    }
    rng.shuffle(idx.begin(), idx.end());
    idx.resize(stratified_count(idx.size(), fraction));
    chosen.insert(chosen.end(), idx.begin(), idx.end());
  }
  std::sort(chosen.begin(), chosen.end());
  return data.subset(chosen);
}

SplitIndices stratified_split(const TabularDataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw DataError("train fraction must lie in (0, 1)");
  Rng rng(seed, hash_name("stratified_split"));
  SplitIndices split;
  split.seed = seed;
  for (int label : {0, 1}) {
    auto idx = class_indices(data.target(), label);
    if (idx.size() < 2) {
      throw DataError("class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                      " rows; at least 2 are needed to split");
    }
    rng.shuffle(idx.begin(), idx.end());
    std::size_t n_train = stratified_count(idx.size(), train_fraction);
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<long>(n_train));
    split.test.insert(split.test.end(), idx.begin() + static_cast<long>(n_train), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace creditbench
