#include "creditbench/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"
#include "creditbench/random.hpp"

namespace creditbench {

namespace {

std::vector<std::size_t> rows_with_label(const Labels& y, int label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == label) out.push_back(i);
  }
  return out;
}

void require_two_classes(const TrainingSet& train) {
  if (train.features.rows() != static_cast<Eigen::Index>(train.labels.size())) {
    throw DataError("training features and labels differ in length");
  }
  if (count_label(train.labels, 0) == 0 || count_label(train.labels, 1) == 0) {
    throw DataError("resampling needs both classes in the training set");
  }
  if (train.features.array().isNaN().any()) throw DataError("resampling needs a complete numeric matrix");
}

// Appends input row `src` with the given provenance.
class Builder {
 public:
  explicit Builder(const TrainingSet& in) : in_(in) {}

  void copy(std::size_t src, Provenance p) {
    rows_.push_back(in_.features.row(static_cast<Eigen::Index>(src)));
    labels_.push_back(in_.labels[src]);
    provenance_.push_back(p);
    parent_.push_back(src);
  }

  void add(const Eigen::RowVectorXd& x, int label, Provenance p, std::size_t parent) {
    rows_.push_back(x);
    labels_.push_back(label);
    provenance_.push_back(p);
    parent_.push_back(parent);
  }

  ResampledSet finish(std::vector<std::string> warnings = {}) {
    ResampledSet out;
    out.data.features.resize(static_cast<Eigen::Index>(rows_.size()), in_.features.cols());
    for (std::size_t i = 0; i < rows_.size(); ++i) out.data.features.row(static_cast<Eigen::Index>(i)) = rows_[i];
    out.data.labels = std::move(labels_);
    out.provenance = std::move(provenance_);
    out.parent = std::move(parent_);
    out.warnings = std::move(warnings);
    return out;
  }

 private:
  const TrainingSet& in_;
  std::vector<Eigen::RowVectorXd> rows_;
  Labels labels_;
  std::vector<Provenance> provenance_;
  std::vector<std::size_t> parent_;
};

Eigen::RowVectorXd interpolate(const Matrix& x, std::size_t from, std::size_t to, double u) {
  const Eigen::RowVectorXd a = x.row(static_cast<Eigen::Index>(from));
  return a + u * (x.row(static_cast<Eigen::Index>(to)) - a);
}

}  // namespace

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::none: return "original";
    case SamplerKind::down: return "down";
    case SamplerKind::up: return "up";
    case SamplerKind::smote: return "smote";
    case SamplerKind::bsmote: return "bsmote";
    case SamplerKind::rose: return "rose";
  }
  return "?";
}

SamplerKind sampler_from_string(std::string_view text) {
  if (text == "none" || text == "original") return SamplerKind::none;
  for (auto k : {SamplerKind::down, SamplerKind::up, SamplerKind::smote, SamplerKind::bsmote, SamplerKind::rose}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown sampler '" + std::string(text) + "'");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::original: return "original";
    case Provenance::duplicate: return "duplicate";
    case Provenance::synthetic: return "synthetic";
  }
  return "?";
}

void SamplerConfig::validate() const {
  if (smote_over_pct <= 0) throw ConfigError("smote_over_pct must be positive");
  if (smote_under_pct < 0) throw ConfigError("smote_under_pct must be non-negative");
  if (smote_k < 1) throw ConfigError("smote_k must be at least 1");
  if (bsmote_m < smote_k) throw ConfigError("bsmote_m must be at least smote_k");
  if (!(rose_shrink >= 0.0)) throw ConfigError("rose_shrink must be non-negative");
  if (down_cap && *down_cap == 0) throw ConfigError("down_cap must be positive");
}

int minority_label(const Labels& y) {
  return count_label(y, 0) < count_label(y, 1) ? 0 : 1;
}

ResampledSet identity_sample(const TrainingSet& train) {
  Builder b(train);
  for (std::size_t i = 0; i < train.rows(); ++i) b.copy(i, Provenance::original);
  return b.finish();
}

ResampledSet downsample(const TrainingSet& train, std::uint64_t seed, std::optional<std::size_t> cap) {
  require_two_classes(train);
  const int minority = minority_label(train.labels);
  auto minor = rows_with_label(train.labels, minority);
  auto major = rows_with_label(train.labels, 1 - minority);
  std::size_t target = minor.size();
  if (cap) target = std::min(target, *cap);
  Rng rng(seed, hash_name("downsample"));
  rng.shuffle(major.begin(), major.end());
  major.resize(target);
  if (target < minor.size()) {
    rng.shuffle(minor.begin(), minor.end());
    minor.resize(target);
  }
  std::vector<std::size_t> keep = minor;
  keep.insert(keep.end(), major.begin(), major.end());
  std::sort(keep.begin(), keep.end());
  Builder b(train);
  for (auto i : keep) b.copy(i, Provenance::original);
  return b.finish();
}

ResampledSet upsample(const TrainingSet& train, std::uint64_t seed) {
  require_two_classes(train);
  const int minority = minority_label(train.labels);
  const auto minor = rows_with_label(train.labels, minority);
  const std::size_t extra = train.rows() - 2 * minor.size();
  Rng rng(seed, hash_name("upsample"));
  Builder b(train);
  for (std::size_t i = 0; i < train.rows(); ++i) b.copy(i, Provenance::original);
  for (std::size_t i = 0; i < extra; ++i) b.copy(minor[rng.index(minor.size())], Provenance::duplicate);
  return b.finish();
}

ResampledSet smote(const TrainingSet& train, const SamplerConfig& config) {
  config.validate();
  require_two_classes(train);
  const int minority = minority_label(train.labels);
  const auto minor = rows_with_label(train.labels, minority);
  const auto major = rows_with_label(train.labels, 1 - minority);
  const auto k = static_cast<std::size_t>(config.smote_k);
  if (minor.size() <= k) {
    throw DataError("SMOTE needs more than k=" + std::to_string(k) + " minority rows, found " +
                    std::to_string(minor.size()));
  }

  // Parents: every minority row over/100 times, or a random subset when
  // over < 100.
  std::vector<std::pair<std::size_t, std::size_t>> parents;  // (row, copies)
  if (config.smote_over_pct >= 100) {
    const auto per = static_cast<std::size_t>(config.smote_over_pct / 100);
    for (auto r : minor) parents.emplace_back(r, per);
  } else {
    auto pool = minor;
    Rng rng(config.seed, hash_name("smote_parents"));
    rng.shuffle(pool.begin(), pool.end());
    pool.resize(static_cast<std::size_t>(config.smote_over_pct / 100.0 * static_cast<double>(minor.size())));
    std::sort(pool.begin(), pool.end());
    for (auto r : pool) parents.emplace_back(r, 1);
  }

  Builder b(train);
  for (auto r : minor) b.copy(r, Provenance::original);
  std::size_t synthetic = 0;
  for (const auto& [row, copies] : parents) {
    const auto nn = nearest_rows(train.features, minor, train.features.row(static_cast<Eigen::Index>(row)), k, row);
    Rng rng(config.seed, derive_seed(hash_name("smote"), row));
    for (std::size_t c = 0; c < copies; ++c) {
      const std::size_t target = nn[rng.index(nn.size())];
      b.add(interpolate(train.features, row, target, rng.uniform_open()), minority, Provenance::synthetic, row);
      ++synthetic;
    }
  }

  const auto n_major = static_cast<std::size_t>(static_cast<double>(config.smote_under_pct) / 100.0 *
                                                static_cast<double>(synthetic));
  Rng rng(config.seed, hash_name("smote_majority"));
  std::vector<char> seen(train.rows(), 0);
  for (std::size_t i = 0; i < n_major; ++i) {
    const std::size_t r = major[rng.index(major.size())];
    b.copy(r, seen[r] ? Provenance::duplicate : Provenance::original);
    seen[r] = 1;
  }
  return b.finish();
}

std::vector<std::size_t> danger_set(const TrainingSet& train, int m) {
  if (m < 1) throw ConfigError("borderline m must be at least 1");
  const int minority = minority_label(train.labels);
  std::vector<std::size_t> all(train.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    if (train.labels[i] != minority) continue;
    const auto nn = nearest_rows(train.features, all, train.features.row(static_cast<Eigen::Index>(i)),
                                 static_cast<std::size_t>(m), i);
    const auto majority = static_cast<std::size_t>(
        std::count_if(nn.begin(), nn.end(), [&](std::size_t j) { return train.labels[j] != minority; }));
    if (2 * majority >= nn.size() && majority < nn.size()) out.push_back(i);
  }
  return out;
}

ResampledSet borderline_smote(const TrainingSet& train, const SamplerConfig& config) {
  config.validate();
  require_two_classes(train);
  const int minority = minority_label(train.labels);
  const auto minor = rows_with_label(train.labels, minority);
  const auto k = static_cast<std::size_t>(config.smote_k);
  if (minor.size() <= k) {
    throw DataError("borderline SMOTE needs more than k=" + std::to_string(k) + " minority rows, found " +
                    std::to_string(minor.size()));
  }
  const std::size_t target = config.bsmote_target.value_or(train.rows() - minor.size());
  const auto danger = danger_set(train, config.bsmote_m);

  Builder b(train);
  for (std::size_t i = 0; i < train.rows(); ++i) b.copy(i, Provenance::original);
  if (danger.empty()) return b.finish({"borderline SMOTE: empty DANGER set, training set left unchanged"});
  if (target <= minor.size()) return b.finish({"borderline SMOTE: minority already at target, nothing generated"});

  const std::size_t needed = target - minor.size();
  const std::size_t base = needed / danger.size();
  const std::size_t extra = needed % danger.size();
  for (std::size_t d = 0; d < danger.size(); ++d) {
    const std::size_t row = danger[d];
    const std::size_t copies = base + (d < extra ? 1 : 0);
    if (copies == 0) continue;
    const auto nn = nearest_rows(train.features, minor, train.features.row(static_cast<Eigen::Index>(row)), k, row);
    Rng rng(config.seed, derive_seed(hash_name("bsmote"), row));
    for (std::size_t c = 0; c < copies; ++c) {
      const std::size_t to = nn[rng.index(nn.size())];
      b.add(interpolate(train.features, row, to, rng.uniform_open()), minority, Provenance::synthetic, row);
    }
  }
  return b.finish();
}

ResampledSet rose(const TrainingSet& train, const SamplerConfig& config) {
  config.validate();
  require_two_classes(train);
  const Eigen::Index d = train.features.cols();
  std::vector<std::string> warnings;
  std::array<std::vector<std::size_t>, 2> members{rows_with_label(train.labels, 0), rows_with_label(train.labels, 1)};
  std::array<Eigen::RowVectorXd, 2> bandwidth;
  for (int c = 0; c < 2; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    bandwidth[static_cast<std::size_t>(c)] = Eigen::RowVectorXd::Zero(d);
    if (idx.size() < 2) {
      warnings.push_back("ROSE: class " + std::to_string(c) + " has a single member; using zero bandwidth");
      continue;
    }
    const Matrix x = select_rows(train.features, idx);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::RowVectorXd sd =
        ((x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(idx.size() - 1)).sqrt();
    const double factor = config.rose_shrink * std::pow(4.0 / ((static_cast<double>(d) + 2.0) * static_cast<double>(idx.size())),
                                                        1.0 / (static_cast<double>(d) + 4.0));
    bandwidth[static_cast<std::size_t>(c)] = factor * sd;
  }

  Builder b(train);
  for (std::size_t r = 0; r < train.rows(); ++r) {
    Rng rng(config.seed, derive_seed(hash_name("rose"), r));
    const int label = rng.bernoulli(0.5) ? 1 : 0;
    const auto& idx = members[static_cast<std::size_t>(label)];
    const std::size_t src = idx[rng.index(idx.size())];
    const auto& h = bandwidth[static_cast<std::size_t>(label)];
    if ((h.array() == 0.0).all()) {
      b.copy(src, Provenance::duplicate);
      continue;
    }
    Eigen::RowVectorXd x = train.features.row(static_cast<Eigen::Index>(src));
    for (Eigen::Index j = 0; j < d; ++j) x(j) += h(j) * rng.normal();
    b.add(x, label, Provenance::synthetic, src);
  }
  return b.finish(std::move(warnings));
}

ResampledSet resample(const TrainingSet& train, const SamplerConfig& config) {
  switch (config.kind) {
    case SamplerKind::none: return identity_sample(train);
    case SamplerKind::down: return downsample(train, config.seed, config.down_cap);
    case SamplerKind::up: return upsample(train, config.seed);
    case SamplerKind::smote: return smote(train, config);
    case SamplerKind::bsmote: return borderline_smote(train, config);
    case SamplerKind::rose: return rose(train, config);
  }
  throw ConfigError("unknown sampler kind");
}

void write_resampled_csv(std::ostream& out, const ResampledSet& set) {
  std::vector<std::string> fields;
  for (Eigen::Index j = 0; j < set.data.features.cols(); ++j) fields.push_back("x" + std::to_string(j));
  fields.insert(fields.end(), {"label", "provenance", "parent"});
  write_csv_row(out, fields);
  for (std::size_t i = 0; i < set.rows(); ++i) {
    fields.clear();
    for (Eigen::Index j = 0; j < set.data.features.cols(); ++j) {
      fields.push_back(format_double(set.data.features(static_cast<Eigen::Index>(i), j)));
    }
    fields.push_back(std::to_string(set.data.labels[i]));
    fields.emplace_back(to_string(set.provenance[i]));
    fields.push_back(set.parent[i] == kNoRow ? "NA" : std::to_string(set.parent[i]));
    write_csv_row(out, fields);
  }
}

}  // namespace creditbench
