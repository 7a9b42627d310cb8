#include "creditbench/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"

namespace creditbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Column numeric_column(std::string name, std::size_t rows) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::numeric;
  c.numeric.assign(rows, 0.0);
  c.missing.assign(rows, 0);
  return c;
}

TabularDataset with_columns(const TabularDataset& data, std::vector<Column> cols) {
  return TabularDataset(data.name(), std::move(cols), data.target(), true);
}

TabularDataset drop_columns(const TabularDataset& data, const std::set<std::string>& names) {
  std::vector<Column> cols;
  for (const auto& c : data.predictors()) {
    if (!names.contains(c.name)) cols.push_back(c);
  }
  return with_columns(data, std::move(cols));
}

}  // namespace

std::string_view to_string(RemovalReason reason) {
  return reason == RemovalReason::near_zero_variance ? "near_zero_variance" : "high_correlation";
}

std::vector<DummyEncoding> learn_dummy_encodings(const TabularDataset& data) {
  std::vector<DummyEncoding> out;
  for (const auto& c : data.predictors()) {
    if (c.kind != ColumnKind::categorical) continue;
    std::set<std::string> levels;
    for (std::size_t r = 0; r < c.size(); ++r) {
      if (!c.is_missing(r)) levels.insert(c.categorical[r]);
    }
    if (levels.size() < 2) {
      throw DataError("categorical column '" + c.name + "' has " + std::to_string(levels.size()) +
                      " observed level(s); dummy encoding needs at least 2");
    }
    DummyEncoding e;
    e.column = c.name;
    e.base_level = *levels.begin();
    e.levels.assign(std::next(levels.begin()), levels.end());
    out.push_back(std::move(e));
  }
  return out;
}

TabularDataset apply_dummy_encodings(const TabularDataset& data, const std::vector<DummyEncoding>& encodings) {
  std::vector<Column> cols;
  for (const auto& c : data.predictors()) {
    if (c.kind == ColumnKind::numeric) {
      cols.push_back(c);
      continue;
    }
    auto it = std::find_if(encodings.begin(), encodings.end(), [&](const DummyEncoding& e) { return e.column == c.name; });
    if (it == encodings.end()) throw DataError("no dummy encoding for categorical column '" + c.name + "'");
    for (const auto& level : it->levels) {
      Column d = numeric_column(c.name + "=" + level, c.size());
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (c.is_missing(r)) {
          d.numeric[r] = kNaN;
          d.missing[r] = 1;
        } else {
          // Levels unseen when the encoding was learned fall on the base row.
          d.numeric[r] = c.categorical[r] == level ? 1.0 : 0.0;
        }
      }
      cols.push_back(std::move(d));
    }
  }
  return with_columns(data, std::move(cols));
}

TabularDataset encode_dummies(const TabularDataset& data) {
  return apply_dummy_encodings(data, learn_dummy_encodings(data));
}

bool is_near_zero_variance(std::span<const double> values, double freq_ratio_cut, double unique_pct_cut) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (!std::isnan(x)) v.push_back(x);
  }
  if (v.empty()) return true;
  std::sort(v.begin(), v.end());
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    counts.push_back(j - i);
    i = j;
  }
  if (counts.size() == 1) return true;
  std::partial_sort(counts.begin(), counts.begin() + 2, counts.end(), std::greater<>());
  const double freq_ratio = static_cast<double>(counts[0]) / static_cast<double>(counts[1]);
  const double unique_pct = 100.0 * static_cast<double>(counts.size()) / static_cast<double>(values.size());
  return freq_ratio > freq_ratio_cut && unique_pct < unique_pct_cut;
}

FilterResult filter_near_zero_variance(const TabularDataset& data, double freq_ratio_cut, double unique_pct_cut) {
  std::set<std::string> drop;
  std::vector<RemovedColumn> removed;
  for (const auto& c : data.predictors()) {
    if (c.kind != ColumnKind::numeric) throw DataError("near-zero-variance filter expects numeric column '" + c.name + "'");
    if (is_near_zero_variance(c.numeric, freq_ratio_cut, unique_pct_cut)) {
      drop.insert(c.name);
      removed.push_back({c.name, RemovalReason::near_zero_variance});
    }
  }
  return {drop_columns(data, drop), std::move(removed)};
}

std::vector<std::size_t> correlated_removals(const Eigen::MatrixXd& correlation, double threshold) {
  const auto p = static_cast<std::size_t>(correlation.rows());
  std::vector<bool> alive(p, true);
  std::vector<std::size_t> removed;
  while (true) {
    double worst = threshold;
    std::size_t a = p, b = p;
    for (std::size_t i = 0; i < p; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < p; ++j) {
        if (!alive[j]) continue;
        const double r = std::abs(correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        if (r > worst) {
          worst = r;
          a = i;
          b = j;
        }
      }
    }
    if (a == p) break;
    auto mean_abs = [&](std::size_t col) {
      double s = 0.0;
      std::size_t n = 0;
      for (std::size_t k = 0; k < p; ++k) {
        if (k == col || !alive[k]) continue;
        s += std::abs(correlation(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(k)));
        ++n;
      }
      return n ? s / static_cast<double>(n) : 0.0;
    };
    const std::size_t victim = mean_abs(a) > mean_abs(b) ? a : b;
    alive[victim] = false;
    removed.push_back(victim);
  }
  return removed;
}

Eigen::MatrixXd complete_case_correlation(const Matrix& data) {
  std::vector<Eigen::Index> complete;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    if (!data.row(r).array().isNaN().any()) complete.push_back(r);
  }
  const Eigen::Index p = data.cols();
  if (complete.size() < 2) throw DataError("correlation filter needs at least two complete rows");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(complete.size()), p);
  for (std::size_t i = 0; i < complete.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = data.row(complete[i]);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::VectorXd sd = x.colwise().norm();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(sd(j) > 0.0)) {
      throw DataError("column " + std::to_string(j) + " has zero variance over complete cases; run the near-zero-variance filter first");
    }
  }
  Eigen::MatrixXd corr = (x.transpose() * x).array() / (sd * sd.transpose()).array();
  corr.diagonal().setOnes();
  return corr;
}

FilterResult filter_correlated(const TabularDataset& data, double threshold) {
  if (!data.all_numeric()) throw DataError("correlation filter expects an all-numeric dataset");
  if (data.columns() < 2) return {data, {}};
  const auto removals = correlated_removals(complete_case_correlation(data.to_matrix()), threshold);
  std::set<std::string> drop;
  std::vector<RemovedColumn> removed;
  for (auto idx : removals) {
    drop.insert(data.predictor(idx).name);
    removed.push_back({data.predictor(idx).name, RemovalReason::high_correlation});
  }
  return {drop_columns(data, drop), std::move(removed)};
}

std::vector<ScalingBounds> fit_scaling(const Matrix& train) {
  std::vector<ScalingBounds> bounds(static_cast<std::size_t>(train.cols()));
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      const double v = train(i, j);
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo > hi) lo = hi = 0.0;  // column entirely missing
    bounds[static_cast<std::size_t>(j)] = {lo, hi};
  }
  return bounds;
}

Matrix apply_scaling(std::span<const ScalingBounds> bounds, const Matrix& data) {
  if (bounds.size() != static_cast<std::size_t>(data.cols())) throw DataError("scaling bounds do not match column count");
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const auto& b = bounds[static_cast<std::size_t>(j)];
    const double range = b.max - b.min;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const double v = data(i, j);
      if (std::isnan(v)) {
        out(i, j) = v;
      } else {
        out(i, j) = range > 0.0 ? (v - b.min) / range : 0.0;
      }
    }
  }
  return out;
}

Matrix impute_knn(const Matrix& rows, const Matrix& donors, int k, bool rows_are_donors,
                  std::vector<std::string>* warnings) {
  if (k < 1) throw DataError("imputation k must be positive");
  if (rows.cols() != donors.cols()) throw DataError("imputation donors have a different column count");
  const Eigen::Index p = rows.cols();
  Matrix out = rows;
  std::vector<std::pair<double, Eigen::Index>> dist;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    if (!rows.row(r).array().isNaN().any()) continue;
    dist.clear();
    for (Eigen::Index d = 0; d < donors.rows(); ++d) {
      if (rows_are_donors && d == r) continue;
      double s = 0.0;
      Eigen::Index used = 0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double a = rows(r, j);
        const double b = donors(d, j);
        if (std::isnan(a) || std::isnan(b)) continue;
        s += (a - b) * (a - b);
        ++used;
      }
      const double d2 = used ? s * static_cast<double>(p) / static_cast<double>(used)
                             : std::numeric_limits<double>::infinity();
      dist.emplace_back(d2, d);
    }
    std::sort(dist.begin(), dist.end());
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isnan(rows(r, j))) continue;
      double sum = 0.0;
      int found = 0;
      for (const auto& [d2, d] : dist) {
        const double v = donors(d, j);
        if (std::isnan(v)) continue;
        sum += v;
        if (++found == k) break;
      }
      if (found == 0) {
        throw DataError("no donor row observes column " + std::to_string(j) + "; cannot impute");
      }
      if (found < k && warnings) {
        warnings->push_back("imputation used " + std::to_string(found) + " neighbours instead of " +
                            std::to_string(k) + " for row " + std::to_string(r) + ", column " + std::to_string(j));
      }
      out(r, j) = sum / found;
    }
  }
  return out;
}

Matrix impute_knn(const Matrix& data, int k, std::vector<std::string>* warnings) {
  return impute_knn(data, data, k, true, warnings);
}

std::string PreprocessPlan::report() const {
  std::ostringstream out;
  out << "dummy encodings: " << encodings.size() << '\n';
  for (const auto& e : encodings) {
    out << "  " << e.column << ": base=" << e.base_level << " levels=";
    for (std::size_t i = 0; i < e.levels.size(); ++i) out << (i ? "|" : "") << e.levels[i];
    out << '\n';
  }
  out << "removed columns: " << removed_columns.size() << '\n';
  for (const auto& r : removed_columns) out << "  " << r.name << " (" << to_string(r.reason) << ")\n";
  out << "kept columns: " << kept_columns.size() << '\n';
  for (std::size_t i = 0; i < kept_columns.size(); ++i) {
    out << "  " << kept_columns[i] << " [" << format_double(scaling_bounds[i].min) << ", "
        << format_double(scaling_bounds[i].max) << "]\n";
  }
  out << "imputation: k=" << imputation_k << " nearest neighbours, donors=" << imputation_donors.rows() << " rows\n";
  return out.str();
}

namespace {

Matrix select_kept(const TabularDataset& encoded, const std::vector<std::string>& kept, std::span<const std::size_t> rows) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t j = 0; j < encoded.columns(); ++j) pos[encoded.predictor(j).name] = j;
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& col = encoded.predictor(pos.at(kept[k]));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col.numeric[rows[i]];
    }
  }
  return m;
}

}  // namespace

PreprocessPlan fit_preprocess(const TabularDataset& data, std::span<const std::size_t> train_rows,
                              const PreprocessOptions& options) {
  PreprocessPlan plan;
  plan.imputation_k = options.imputation_k;
  const TabularDataset train = data.subset(train_rows);

  plan.encodings = learn_dummy_encodings(train);
  TabularDataset encoded = apply_dummy_encodings(train, plan.encodings);

  auto nzv = filter_near_zero_variance(encoded, options.freq_ratio_cut, options.unique_pct_cut);
  plan.removed_columns = nzv.removed;
  auto corr = filter_correlated(nzv.data, options.correlation_threshold);
  plan.removed_columns.insert(plan.removed_columns.end(), corr.removed.begin(), corr.removed.end());
  if (corr.data.columns() == 0) throw DataError("preprocessing removed every predictor of " + data.name());

  for (const auto& c : corr.data.predictors()) plan.kept_columns.push_back(c.name);
  const Matrix raw = corr.data.to_matrix();
  plan.scaling_bounds = fit_scaling(raw);
  plan.imputation_donors = apply_scaling(plan.scaling_bounds, raw);
  return plan;
}

Matrix transform(const PreprocessPlan& plan, const TabularDataset& data, std::span<const std::size_t> rows,
                 std::vector<std::string>* warnings) {
  const TabularDataset encoded = apply_dummy_encodings(data.subset(rows), plan.encodings);
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Matrix scaled = apply_scaling(plan.scaling_bounds, select_kept(encoded, plan.kept_columns, all));
  return impute_knn(scaled, plan.imputation_donors, plan.imputation_k, false, warnings);
}

PreparedData prepare(const TabularDataset& data, const SplitIndices& split, const PreprocessOptions& options) {
  PreparedData out;
  out.plan = fit_preprocess(data, split.train, options);
  out.train.features = impute_knn(out.plan.imputation_donors, out.plan.imputation_k, &out.warnings);
  out.train.labels = select_labels(data.target(), split.train);
  out.test.features = transform(out.plan, data, split.test, &out.warnings);
  out.test.labels = select_labels(data.target(), split.test);
  return out;
}

}  // namespace creditbench
