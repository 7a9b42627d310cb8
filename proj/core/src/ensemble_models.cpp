#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "creditbench/errors.hpp"
#include "creditbench/random.hpp"
#include "creditbench/tree.hpp"
#include "creditbench/tune.hpp"
#include "model_impl.hpp"

namespace creditbench {

namespace detail {

namespace {

/// cart, bagged_cart, random_forest, adaboost and sgb share a tree list and
/// differ only in how leaf values combine.
class TreeEnsembleModel final : public FittedModel {
 public:
  TreeEnsembleModel(Family f, std::size_t features, double prior, std::vector<RegressionTree> trees,
                    std::vector<double> alphas, double offset)
      : FittedModel(features, prior), family_(f), trees_(std::move(trees)), alphas_(std::move(alphas)), offset_(offset) {}

  Family family() const override { return family_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  void save_body(std::ostream& out) const override {
    out << trees_.size() << '\n';
    write_values(out, &offset_, 1);
    write_values(out, alphas_.data(), alphas_.size());
    for (const auto& t : trees_) t.save(out);
  }

  static ModelPtr load(Family f, std::istream& in, std::size_t features, double prior) {
    std::size_t n = 0;
    if (!(in >> n)) throw ModelError("truncated tree ensemble record");
    double offset = 0.0;
    read_values(in, &offset, 1);
    std::vector<double> alphas(f == Family::adaboost ? n : 0);
    read_values(in, alphas.data(), alphas.size());
    std::vector<RegressionTree> trees;
    for (std::size_t i = 0; i < n; ++i) trees.push_back(RegressionTree::load(in));
    return std::make_shared<TreeEnsembleModel>(f, features, prior, std::move(trees), std::move(alphas), offset);
  }

  // Margin after the first `stages` trees (sgb and adaboost).
  Vector staged(const Matrix& x, std::size_t stages) const {
    stages = std::min(stages, trees_.size());
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double acc = offset_;
      for (std::size_t t = 0; t < stages; ++t) {
        const double leaf = trees_[t].predict_row(x.row(i));
        acc += family_ == Family::adaboost ? alphas_[t] * (leaf >= 0.5 ? 1.0 : -1.0) : leaf;
      }
      out(i) = logistic(acc);
    }
    return out;
  }

 protected:
  Vector score_impl(const Matrix& x) const override {
    if (family_ == Family::sgb || family_ == Family::adaboost) return staged(x, trees_.size());
    Vector out = Vector::Zero(x.rows());
    for (const auto& t : trees_) out += t.predict(x);
    return out / static_cast<double>(trees_.size());
  }

 private:
  Family family_;
  std::vector<RegressionTree> trees_;
  std::vector<double> alphas_;
  double offset_;
};

ModelPtr make_tree_model(Family f, const TrainingSet& train, std::vector<RegressionTree> trees,
                         std::vector<double> alphas = {}, double offset = 0.0) {
  return std::make_shared<TreeEnsembleModel>(f, static_cast<std::size_t>(train.features.cols()),
                                             good_rate(train.labels), std::move(trees), std::move(alphas), offset);
}

std::vector<RegressionTree> grow_bootstrap_trees(const TrainingSet& train, std::uint64_t seed, std::size_t count,
                                                 const TreeParams& params) {
  const auto y = good_indicator(train.labels);
  std::vector<RegressionTree> trees;
  trees.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    Rng rng(seed, derive_seed(hash_name("bootstrap"), t));
    const auto w = bootstrap_weights(train.rows(), rng);
    trees.push_back(RegressionTree::fit(train.features, y, w, params, &rng));
  }
  return trees;
}

class AverageModel final : public FittedModel {
 public:
  AverageModel(Family f, std::vector<ModelPtr> members, std::vector<double> weights)
      : FittedModel(members.front()->feature_count(), members.front()->prior_good()),
        family_(f),
        members_(std::move(members)),
        weights_(std::move(weights)) {}

  Family family() const override { return family_; }

  void save_body(std::ostream& out) const override {
    out << members_.size() << '\n';
    write_values(out, weights_.data(), weights_.size());
    for (const auto& m : members_) save_model(out, *m);
  }

 protected:
  Vector score_impl(const Matrix& x) const override {
    Vector out = Vector::Zero(x.rows());
    double total = 0.0;
    for (std::size_t i = 0; i < members_.size(); ++i) {
      out += weights_[i] * members_[i]->score(x);
      total += weights_[i];
    }
    return out / total;
  }

 private:
  Family family_;
  std::vector<ModelPtr> members_;
  std::vector<double> weights_;
};

}  // namespace

class StackingModel final : public FittedModel {
 public:
  StackingModel(std::vector<ModelPtr> members, ModelPtr meta, Matrix meta_features, double prior)
      : FittedModel(members.front()->feature_count(), prior),
        members_(std::move(members)),
        meta_(std::move(meta)),
        meta_features_(std::move(meta_features)) {}

  Family family() const override { return Family::stacking; }
  const Matrix& meta_features() const { return meta_features_; }

  void save_body(std::ostream& out) const override {
    out << members_.size() << '\n';
    for (const auto& m : members_) save_model(out, *m);
    save_model(out, *meta_);
    write_matrix(out, meta_features_);
  }

 protected:
  Vector score_impl(const Matrix& x) const override {
    Matrix z(x.rows(), static_cast<Eigen::Index>(members_.size()));
    for (std::size_t m = 0; m < members_.size(); ++m) z.col(static_cast<Eigen::Index>(m)) = members_[m]->score(x);
    return meta_->score(z);
  }

 private:
  std::vector<ModelPtr> members_;
  ModelPtr meta_;
  Matrix meta_features_;
};

ModelPtr fit_cart(const ModelSpec& spec, const TrainingSet& train) {
  TreeParams p;
  p.min_leaf = spec.get("min_leaf");
  p.min_split = spec.get("min_split");
  const auto y = good_indicator(train.labels);
  const std::vector<double> w(train.rows(), 1.0);
  auto tree = RegressionTree::fit(train.features, y, w, p);
  tree.prune_cost_complexity(spec.get("cp"));
  return make_tree_model(Family::cart, train, {std::move(tree)});
}

ModelPtr fit_bagged(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed) {
  TreeParams p;  // fully grown
  return make_tree_model(Family::bagged_cart, train,
                         grow_bootstrap_trees(train, seed, static_cast<std::size_t>(spec.get("n_bags")), p));
}

ModelPtr fit_forest(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed) {
  TreeParams p;
  p.min_leaf = spec.get("min_leaf");
  p.min_split = 2.0 * p.min_leaf;
  p.mtry = resolve_mtry(spec.get("mtry"), static_cast<std::size_t>(train.features.cols()));
  return make_tree_model(Family::random_forest, train,
                         grow_bootstrap_trees(train, seed, static_cast<std::size_t>(spec.get("n_trees")), p));
}

ModelPtr fit_adaboost(const ModelSpec& spec, const TrainingSet& train) {
  const auto n_iter = static_cast<std::size_t>(spec.get("n_iter"));
  TreeParams p;
  p.max_depth = static_cast<int>(spec.get("max_depth"));
  p.min_leaf = 1e-9;
  p.min_split = 1e-9;
  const auto y = good_indicator(train.labels);
  const std::size_t n = train.rows();
  std::vector<double> w(n, 1.0);
  std::vector<RegressionTree> trees;
  std::vector<double> alphas;
  for (std::size_t m = 0; m < n_iter; ++m) {
    auto tree = RegressionTree::fit(train.features, y, w, p);
    std::vector<char> wrong(n);
    double err = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pred_good = tree.predict_row(train.features.row(static_cast<Eigen::Index>(i))) >= 0.5;
      wrong[i] = pred_good != (y[i] == 1.0);
      err += wrong[i] ? w[i] : 0.0;
      total += w[i];
    }
    err /= total;
    if (err >= 0.5) {
      if (trees.empty()) {
        trees.push_back(std::move(tree));
        alphas.push_back(0.0);
      }
      break;
    }
    constexpr double kMinErr = 1e-10;
    const double alpha = std::log((1.0 - std::max(err, kMinErr)) / std::max(err, kMinErr));
    trees.push_back(std::move(tree));
    alphas.push_back(alpha);
    if (err == 0.0) break;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (wrong[i]) w[i] *= std::exp(alpha);
      sum += w[i];
    }
    for (auto& wi : w) wi *= static_cast<double>(n) / sum;
  }
  return make_tree_model(Family::adaboost, train, std::move(trees), std::move(alphas));
}

ModelPtr fit_sgb(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed) {
  const auto n_trees = static_cast<std::size_t>(spec.get("n_trees"));
  const double shrinkage = spec.get("shrinkage");
  const double fraction = spec.get("subsample_fraction");
  TreeParams p;
  p.max_depth = static_cast<int>(spec.get("interaction_depth"));
  p.min_leaf = spec.get("min_obs_in_node");
  p.min_split = 2.0 * p.min_leaf;
  const auto y = good_indicator(train.labels);
  const std::size_t n = train.rows();
  const double prior = good_rate(train.labels);
  const double f0 = std::log(prior / (1.0 - prior));
  std::vector<double> f(n, f0), residual(n), w(n);
  const auto n_sub = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, hash_name("sgb"));
  std::vector<RegressionTree> trees;
  trees.reserve(n_trees);
  for (std::size_t m = 0; m < n_trees; ++m) {
    std::fill(w.begin(), w.end(), 0.0);
    if (n_sub < n) {
      for (std::size_t i = 0; i < n_sub; ++i) std::swap(order[i], order[i + rng.index(n - i)]);
      for (std::size_t i = 0; i < n_sub; ++i) w[order[i]] = 1.0;
    } else {
      std::fill(w.begin(), w.end(), 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - logistic(f[i]);
    auto tree = RegressionTree::fit(train.features, residual, w, p);
    // Newton step per leaf over the subsample.
    auto& nodes = tree.mutable_nodes();
    std::vector<double> num(nodes.size(), 0.0), den(nodes.size(), 0.0);
    std::vector<int> leaf(n);
    for (std::size_t i = 0; i < n; ++i) {
      leaf[i] = tree.leaf_index(train.features.row(static_cast<Eigen::Index>(i)));
      if (w[i] == 0.0) continue;
      const double pi = logistic(f[i]);
      num[static_cast<std::size_t>(leaf[i])] += residual[i];
      den[static_cast<std::size_t>(leaf[i])] += pi * (1.0 - pi);
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (!nodes[k].is_leaf()) continue;
      const double gamma = den[k] > 1e-12 ? num[k] / den[k] : 0.0;
      nodes[k].value = shrinkage * std::clamp(gamma, -20.0, 20.0);
    }
    for (std::size_t i = 0; i < n; ++i) f[i] += nodes[static_cast<std::size_t>(leaf[i])].value;
    trees.push_back(std::move(tree));
  }
  return make_tree_model(Family::sgb, train, std::move(trees), {}, f0);
}

ModelPtr load_tree_model(Family f, std::istream& in, std::size_t features, double prior) {
  return TreeEnsembleModel::load(f, in, features, prior);
}

ModelPtr load_average(Family f, std::istream& in, std::size_t, double) {
  std::size_t n = 0;
  if (!(in >> n) || n == 0) throw ModelError("malformed average record");
  std::vector<double> weights(n);
  read_values(in, weights.data(), n);
  std::vector<ModelPtr> members;
  for (std::size_t i = 0; i < n; ++i) members.push_back(load_model(in));
  return std::make_shared<AverageModel>(f, std::move(members), std::move(weights));
}

ModelPtr load_stacking(std::istream& in, std::size_t, double prior) {
  std::size_t n = 0;
  if (!(in >> n) || n == 0) throw ModelError("malformed stacking record");
  std::vector<ModelPtr> members;
  for (std::size_t i = 0; i < n; ++i) members.push_back(load_model(in));
  ModelPtr meta = load_model(in);
  Matrix z = read_matrix(in);
  return std::make_shared<StackingModel>(std::move(members), std::move(meta), std::move(z), prior);
}

}  // namespace detail

Vector staged_scores(const FittedModel& model, const Matrix& x, std::size_t stages) {
  const auto* t = dynamic_cast<const detail::TreeEnsembleModel*>(&model);
  if (t == nullptr || (model.family() != Family::sgb && model.family() != Family::adaboost)) {
    throw ModelError("staged scores need an sgb or adaboost model");
  }
  if (static_cast<std::size_t>(x.cols()) != model.feature_count()) throw ModelError("feature count mismatch");
  return t->staged(x, stages);
}

ModelPtr make_average(std::vector<ModelPtr> members, std::vector<double> weights) {
  if (members.empty()) throw ModelError("average needs at least one member");
  if (weights.size() != members.size()) throw ModelError("average needs one weight per member");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ModelError("average weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ModelError("average weights must not all be zero");
  for (const auto& m : members) {
    if (m->feature_count() != members.front()->feature_count()) throw ModelError("average members disagree on features");
  }
  const bool uniform = std::all_of(weights.begin(), weights.end(), [&](double w) { return w == weights.front(); });
  return std::make_shared<detail::AverageModel>(uniform ? Family::avg_simple : Family::avg_weighted, std::move(members),
                                                std::move(weights));
}

ModelPtr fit_stacking(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed) {
  if (spec.family != Family::stacking) throw ModelError("fit_stacking needs a stacking spec");
  spec.validate();
  detail::require_trainable(train);
  const auto k = static_cast<std::size_t>(spec.get("n_meta_folds"));
  const auto folds = stratified_folds(train.labels, k, derive_seed(seed, hash_name("stacking_folds")));
  const std::size_t m_count = spec.members.size();
  Matrix z(static_cast<Eigen::Index>(train.rows()), static_cast<Eigen::Index>(m_count));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> fit_rows;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) fit_rows.insert(fit_rows.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(fit_rows.begin(), fit_rows.end());
    const TrainingSet part = select(train, fit_rows);
    const Matrix held = select_rows(train.features, folds[f]);
    for (std::size_t m = 0; m < m_count; ++m) {
      const auto model = fit(spec.members[m], part, derive_seed(seed, derive_seed(m + 1, f + 1)));
      const Vector s = model->score(held);
      for (std::size_t i = 0; i < folds[f].size(); ++i) {
        z(static_cast<Eigen::Index>(folds[f][i]), static_cast<Eigen::Index>(m)) = s(static_cast<Eigen::Index>(i));
      }
    }
  }
  std::vector<ModelPtr> members;
  for (std::size_t m = 0; m < m_count; ++m) members.push_back(fit(spec.members[m], train, derive_seed(seed, m + 1)));

  ModelSpec meta;
  meta.family = Family::sgb;
  for (const char* name : {"n_trees", "interaction_depth", "shrinkage", "min_obs_in_node", "subsample_fraction"}) {
    meta.params[name] = spec.get(std::string("meta_") + name);
  }
  const TrainingSet meta_train{z, train.labels};
  auto meta_model = fit(meta, meta_train, derive_seed(seed, hash_name("stacking_meta")));
  return std::make_shared<detail::StackingModel>(std::move(members), std::move(meta_model), std::move(z),
                                                 detail::good_rate(train.labels));
}

const Matrix& stacking_meta_features(const FittedModel& model) {
  const auto* s = dynamic_cast<const detail::StackingModel*>(&model);
  if (s == nullptr) throw ModelError("not a stacking model");
  return s->meta_features();
}

std::vector<double> ensemble_bootstrap(std::size_t rows, std::uint64_t seed, std::size_t t) {
  Rng rng(seed, derive_seed(hash_name("bootstrap"), t));
  return bootstrap_weights(rows, rng);
}

std::size_t resolve_mtry(double mtry, std::size_t d) {
  if (d == 0) return 0;
  std::size_t m = 0;
  if (mtry == 0.0) m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))));
  else if (mtry < 1.0) m = static_cast<std::size_t>(std::floor(mtry * static_cast<double>(d)));
  else m = static_cast<std::size_t>(mtry);
  return std::clamp<std::size_t>(m, 1, d);
}

}  // namespace creditbench
