#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "creditbench/errors.hpp"
#include "model_impl.hpp"

namespace creditbench::detail {

namespace {

class KnnModel final : public FittedModel {
 public:
  KnnModel(std::size_t features, double prior, Matrix x, Labels y, std::size_t k)
      : FittedModel(features, prior), x_(std::move(x)), y_(std::move(y)), k_(k) {
    all_.resize(y_.size());
    std::iota(all_.begin(), all_.end(), std::size_t{0});
  }

  Family family() const override { return Family::knn; }

  void save_body(std::ostream& out) const override {
    out << k_ << '\n';
    write_matrix(out, x_);
    out << y_.size() << '\n';
    for (std::size_t i = 0; i < y_.size(); ++i) out << (i ? " " : "") << y_[i];
    out << '\n';
  }

 protected:
  Vector score_impl(const Matrix& x) const override {
    Vector s(x.rows());
    const std::size_t k = std::min(k_, y_.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto nn = nearest_rows(x_, all_, x.row(i), k);
      std::size_t good = 0;
      for (auto j : nn) good += is_good(y_[j]) ? 1 : 0;
      s(i) = static_cast<double>(good) / static_cast<double>(nn.size());
    }
    return s;
  }

 private:
  Matrix x_;
  Labels y_;
  std::size_t k_;
  std::vector<std::size_t> all_;
};

/// Class-conditional independence with a Gaussian or kernel density per
/// feature and class.
class NaiveBayesModel final : public FittedModel {
 public:
  struct FeatureDensity {
    double mean = 0.0;
    double sd = 1.0;
    std::vector<double> sample;  // kernel mode only
    double bandwidth = 0.0;
  };

  NaiveBayesModel(std::size_t features, double prior, bool kernel, std::array<double, 2> log_prior,
                  std::array<std::vector<FeatureDensity>, 2> dens)
      : FittedModel(features, prior), kernel_(kernel), log_prior_(log_prior), dens_(std::move(dens)) {}

  Family family() const override { return Family::gaussian_nb; }

  void save_body(std::ostream& out) const override {
    out << (kernel_ ? 1 : 0) << '\n';
    write_values(out, log_prior_.data(), 2);
    for (const auto& per_class : dens_) {
      for (const auto& f : per_class) {
        write_values(out, &f.mean, 1);
        write_values(out, &f.sd, 1);
        write_values(out, &f.bandwidth, 1);
        out << f.sample.size() << '\n';
        write_values(out, f.sample.data(), f.sample.size());
      }
    }
  }

  static std::shared_ptr<NaiveBayesModel> load(std::istream& in, std::size_t features, double prior) {
    int kernel = 0;
    if (!(in >> kernel)) throw ModelError("truncated naive Bayes record");
    std::array<double, 2> lp{};
    read_values(in, lp.data(), 2);
    std::array<std::vector<FeatureDensity>, 2> dens;
    for (auto& per_class : dens) {
      per_class.resize(features);
      for (auto& f : per_class) {
        read_values(in, &f.mean, 1);
        read_values(in, &f.sd, 1);
        read_values(in, &f.bandwidth, 1);
        std::size_t n = 0;
        if (!(in >> n)) throw ModelError("truncated naive Bayes record");
        f.sample.resize(n);
        read_values(in, f.sample.data(), n);
      }
    }
    return std::make_shared<NaiveBayesModel>(features, prior, kernel != 0, lp, std::move(dens));
  }

 protected:
  Vector score_impl(const Matrix& x) const override {
    Vector s(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::array<double, 2> ll = log_prior_;
      for (int c = 0; c < 2; ++c) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
          ll[static_cast<std::size_t>(c)] += log_density(dens_[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)], x(i, j));
        }
      }
      s(i) = logistic(ll[0] - ll[1]);  // class 0 = good
    }
    return s;
  }

 private:
  double log_density(const FeatureDensity& f, double v) const {
    constexpr double kLogFloor = -700.0;
    if (!kernel_) {
      const double z = (v - f.mean) / f.sd;
      return -0.5 * z * z - std::log(f.sd) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    double sum = 0.0;
    for (double xi : f.sample) {
      const double z = (v - xi) / f.bandwidth;
      sum += std::exp(-0.5 * z * z);
    }
    const double dens = sum / (static_cast<double>(f.sample.size()) * f.bandwidth * std::sqrt(2.0 * std::numbers::pi));
    return dens > 0.0 ? std::max(std::log(dens), kLogFloor) : kLogFloor;
  }

  bool kernel_;
  std::array<double, 2> log_prior_;
  std::array<std::vector<FeatureDensity>, 2> dens_;
};

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Silverman's rule of thumb with R's fallbacks for degenerate samples.
double silverman_bandwidth(std::vector<double> v, double sd) {
  std::sort(v.begin(), v.end());
  const double iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
  double lo = std::min(sd, iqr / 1.34);
  if (!(lo > 0.0)) lo = sd;
  if (!(lo > 0.0)) lo = std::abs(v.front());
  if (!(lo > 0.0)) lo = 1.0;
  return 0.9 * lo * std::pow(static_cast<double>(v.size()), -0.2);
}

}  // namespace

ModelPtr fit_knn(const ModelSpec& spec, const TrainingSet& train) {
  return std::make_shared<KnnModel>(static_cast<std::size_t>(train.features.cols()), good_rate(train.labels),
                                    train.features, train.labels, static_cast<std::size_t>(spec.get("k")));
}

ModelPtr fit_naive_bayes(const ModelSpec& spec, const TrainingSet& train) {
  const bool kernel = spec.get("usekernel") != 0.0;
  const double adjust = spec.get("adjust");
  const double min_sd = spec.get("min_sd");
  const double fl = spec.get("fL");
  const auto d = static_cast<std::size_t>(train.features.cols());
  const double n = static_cast<double>(train.rows());
  std::array<double, 2> log_prior{};
  std::array<std::vector<NaiveBayesModel::FeatureDensity>, 2> dens;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      if (train.labels[i] == c) rows.push_back(i);
    }
    const double nc = static_cast<double>(rows.size());
    log_prior[static_cast<std::size_t>(c)] = std::log((nc + fl) / (n + 2.0 * fl));
    auto& per_class = dens[static_cast<std::size_t>(c)];
    per_class.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> v;
      v.reserve(rows.size());
      for (auto r : rows) v.push_back(train.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / nc;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = rows.size() > 1 ? std::sqrt(ss / (nc - 1.0)) : 0.0;
      auto& f = per_class[j];
      f.mean = mean;
      f.sd = std::max(sd, min_sd);
      if (kernel) {
        f.bandwidth = std::max(adjust * silverman_bandwidth(v, sd), min_sd);
        f.sample = std::move(v);
      }
    }
  }
  return std::make_shared<NaiveBayesModel>(d, good_rate(train.labels), kernel, log_prior, std::move(dens));
}

ModelPtr load_knn(std::istream& in, std::size_t features, double prior) {
  std::size_t k = 0, n = 0;
  if (!(in >> k)) throw ModelError("truncated knn record");
  Matrix x = read_matrix(in);
  if (!(in >> n) || n != static_cast<std::size_t>(x.rows())) throw ModelError("knn label count mismatch");
  Labels y(n);
  for (auto& v : y) {
    if (!(in >> v)) throw ModelError("truncated knn labels");
  }
  return std::make_shared<KnnModel>(features, prior, std::move(x), std::move(y), k);
}

ModelPtr load_naive_bayes(std::istream& in, std::size_t features, double prior) {
  return NaiveBayesModel::load(in, features, prior);
}

}  // namespace creditbench::detail
