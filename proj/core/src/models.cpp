#include "creditbench/models.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "creditbench/csv.hpp"
#include "creditbench/errors.hpp"
#include "creditbench/random.hpp"
#include "model_impl.hpp"

namespace creditbench {

namespace {

struct FamilyInfo {
  Family family;
  std::string_view name;
  Hyperparameters defaults;
};

const std::vector<FamilyInfo>& families() {
  static const std::vector<FamilyInfo> info{
      {Family::logreg, "logreg", {{"l2", 1e-6}, {"max_iter", 100}, {"tol", 1e-8}}},
      {Family::lda, "lda", {{"eps_scale", 1e-6}}},
      {Family::qda, "qda", {{"eps_scale", 1e-6}}},
      {Family::gaussian_nb, "gaussian_nb", {{"fL", 0}, {"usekernel", 0}, {"adjust", 1}, {"min_sd", 1e-3}}},
      {Family::knn, "knn", {{"k", 5}}},
      {Family::cart, "cart", {{"cp", 0.01}, {"min_leaf", 7}, {"min_split", 20}}},
      {Family::bagged_cart, "bagged_cart", {{"n_bags", 25}}},
      {Family::random_forest, "random_forest", {{"n_trees", 500}, {"mtry", 0}, {"min_leaf", 1}}},
      {Family::adaboost, "adaboost", {{"n_iter", 50}, {"max_depth", 3}}},
      {Family::sgb,
       "sgb",
       {{"n_trees", 100},
        {"interaction_depth", 1},
        {"shrinkage", 0.1},
        {"min_obs_in_node", 10},
        {"subsample_fraction", 0.5}}},
      {Family::avg_simple, "avg_simple", {}},
      {Family::avg_weighted, "avg_weighted", {}},
      {Family::stacking,
       "stacking",
       {{"n_meta_folds", 5},
        {"meta_n_trees", 100},
        {"meta_interaction_depth", 1},
        {"meta_shrinkage", 0.1},
        {"meta_min_obs_in_node", 10},
        {"meta_subsample_fraction", 0.5}}},
  };
  return info;
}

const FamilyInfo& info(Family f) {
  for (const auto& i : families()) {
    if (i.family == f) return i;
  }
  throw ConfigError("unknown model family");
}

void require(bool ok, const ModelSpec& spec, const std::string& what) {
  if (!ok) throw ConfigError(std::string(to_string(spec.family)) + ": " + what);
}

bool is_integer(double v) { return std::floor(v) == v; }

}  // namespace

std::string_view to_string(Family f) { return info(f).name; }

Family family_from_string(std::string_view text) {
  for (const auto& i : families()) {
    if (i.name == text) return i.family;
  }
  throw ConfigError("unknown model family '" + std::string(text) + "'");
}

bool is_heterogeneous(Family f) {
  return f == Family::avg_simple || f == Family::avg_weighted || f == Family::stacking;
}

const std::vector<Family>& base_families() {
  static const std::vector<Family> base{Family::logreg,      Family::lda,         Family::qda,
                                        Family::gaussian_nb, Family::knn,         Family::cart,
                                        Family::bagged_cart, Family::random_forest, Family::adaboost,
                                        Family::sgb};
  return base;
}

const Hyperparameters& default_hyperparameters(Family f) { return info(f).defaults; }

double ModelSpec::get(const std::string& name) const {
  if (auto it = params.find(name); it != params.end()) return it->second;
  const auto& d = default_hyperparameters(family);
  if (auto it = d.find(name); it != d.end()) return it->second;
  throw ConfigError(std::string(to_string(family)) + " has no hyperparameter '" + name + "'");
}

void ModelSpec::validate() const {
  const auto& d = default_hyperparameters(family);
  for (const auto& [name, value] : params) {
    require(d.contains(name), *this, "unknown hyperparameter '" + name + "'");
    require(std::isfinite(value), *this, "hyperparameter '" + name + "' must be finite");
  }
  auto positive_int = [&](const char* n) {
    require(get(n) >= 1 && is_integer(get(n)), *this, std::string(n) + " must be a positive integer");
  };
  switch (family) {
    case Family::logreg:
      require(get("l2") >= 0, *this, "l2 must be non-negative");
      positive_int("max_iter");
      require(get("tol") > 0, *this, "tol must be positive");
      break;
    case Family::lda:
    case Family::qda: require(get("eps_scale") >= 0, *this, "eps_scale must be non-negative"); break;
    case Family::gaussian_nb:
      require(get("fL") >= 0, *this, "fL must be non-negative");
      require(get("usekernel") == 0 || get("usekernel") == 1, *this, "usekernel must be 0 or 1");
      require(get("adjust") > 0, *this, "adjust must be positive");
      require(get("min_sd") > 0, *this, "min_sd must be positive");
      break;
    case Family::knn: positive_int("k"); break;
    case Family::cart:
      require(get("cp") >= 0, *this, "cp must be non-negative");
      positive_int("min_leaf");
      positive_int("min_split");
      break;
    case Family::bagged_cart: positive_int("n_bags"); break;
    case Family::random_forest:
      positive_int("n_trees");
      require(get("mtry") >= 0, *this, "mtry must be non-negative");
      positive_int("min_leaf");
      break;
    case Family::adaboost:
      positive_int("n_iter");
      positive_int("max_depth");
      break;
    case Family::sgb:
      positive_int("n_trees");
      positive_int("interaction_depth");
      positive_int("min_obs_in_node");
      require(get("shrinkage") > 0 && get("shrinkage") <= 1, *this, "shrinkage must lie in (0, 1]");
      require(get("subsample_fraction") > 0 && get("subsample_fraction") <= 1, *this,
              "subsample_fraction must lie in (0, 1]");
      break;
    case Family::avg_simple:
    case Family::avg_weighted:
    case Family::stacking:
      require(!members.empty(), *this, "needs at least one member");
      for (const auto& m : members) {
        require(!is_heterogeneous(m.family), *this, "members must not be heterogeneous ensembles");
        m.validate();
      }
      if (family == Family::avg_weighted) {
        require(member_weights.size() == members.size(), *this, "needs one weight per member");
        double total = 0.0;
        for (double w : member_weights) {
          require(w >= 0 && std::isfinite(w), *this, "weights must be non-negative");
          total += w;
        }
        require(total > 0, *this, "weights must not all be zero");
      }
      if (family == Family::stacking) {
        require(get("n_meta_folds") >= 2 && is_integer(get("n_meta_folds")), *this, "n_meta_folds must be >= 2");
        positive_int("meta_n_trees");
        positive_int("meta_interaction_depth");
        positive_int("meta_min_obs_in_node");
        require(get("meta_shrinkage") > 0 && get("meta_shrinkage") <= 1, *this, "meta_shrinkage must lie in (0, 1]");
        require(get("meta_subsample_fraction") > 0 && get("meta_subsample_fraction") <= 1, *this,
                "meta_subsample_fraction must lie in (0, 1]");
      }
      break;
  }
}

std::string ModelSpec::describe() const {
  std::ostringstream out;
  out << to_string(family) << '(';
  bool first = true;
  for (const auto& [name, value] : default_hyperparameters(family)) {
    out << (first ? "" : ", ") << name << '=' << format_double(get(name));
    first = false;
  }
  out << ')';
  return out.str();
}

std::string ModelSpec::param_string() const {
  std::string s;
  for (const auto& [name, value] : params) {
    if (!s.empty()) s += ';';
    s += name + "=" + format_double(value);
  }
  return s;
}

Vector FittedModel::score(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != features_) {
    throw ModelError(std::string(to_string(family())) + " was trained on " + std::to_string(features_) +
                     " features but received " + std::to_string(x.cols()));
  }
  Vector s = score_impl(x);
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::clamp(s(i), 0.0, 1.0);
  return s;
}

ModelPtr fit(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed) {
  spec.validate();
  detail::require_trainable(train);
  switch (spec.family) {
    case Family::logreg: return detail::fit_logreg(spec, train);
    case Family::lda: return detail::fit_lda(spec, train);
    case Family::qda: return detail::fit_qda(spec, train);
    case Family::gaussian_nb: return detail::fit_naive_bayes(spec, train);
    case Family::knn: return detail::fit_knn(spec, train);
    case Family::cart: return detail::fit_cart(spec, train);
    case Family::bagged_cart: return detail::fit_bagged(spec, train, seed);
    case Family::random_forest: return detail::fit_forest(spec, train, seed);
    case Family::adaboost: return detail::fit_adaboost(spec, train);
    case Family::sgb: return detail::fit_sgb(spec, train, seed);
    case Family::avg_simple:
    case Family::avg_weighted: {
      std::vector<ModelPtr> members;
      for (std::size_t i = 0; i < spec.members.size(); ++i) {
        members.push_back(fit(spec.members[i], train, derive_seed(seed, hash_name(to_string(spec.members[i].family)) + i)));
      }
      std::vector<double> w = spec.family == Family::avg_weighted ? spec.member_weights
                                                                  : std::vector<double>(members.size(), 1.0);
      return make_average(std::move(members), std::move(w));
    }
    case Family::stacking: return fit_stacking(spec, train, seed);
  }
  throw ConfigError("unknown model family");
}

void save_model(std::ostream& out, const FittedModel& model) {
  out << "creditbench-model " << kModelFormatVersion << '\n'
      << to_string(model.family()) << '\n'
      << std::setprecision(17) << model.feature_count() << ' ' << model.prior_good() << '\n';
  model.save_body(out);
  out << "end\n";
}

ModelPtr load_model(std::istream& in) {
  std::string tag, family_name;
  int version = 0;
  if (!(in >> tag >> version) || tag != "creditbench-model") throw ModelError("not a creditbench model file");
  if (version != kModelFormatVersion) {
    throw ModelError("unsupported model format version " + std::to_string(version));
  }
  std::size_t features = 0;
  double prior = 0.0;
  if (!(in >> family_name >> features >> prior)) throw ModelError("truncated model header");
  const Family f = family_from_string(family_name);
  ModelPtr model;
  switch (f) {
    case Family::logreg: model = detail::load_logreg(in, features, prior); break;
    case Family::lda:
    case Family::qda: model = detail::load_discriminant(f, in, features, prior); break;
    case Family::gaussian_nb: model = detail::load_naive_bayes(in, features, prior); break;
    case Family::knn: model = detail::load_knn(in, features, prior); break;
    case Family::cart:
    case Family::bagged_cart:
    case Family::random_forest:
    case Family::adaboost:
    case Family::sgb: model = detail::load_tree_model(f, in, features, prior); break;
    case Family::avg_simple:
    case Family::avg_weighted: model = detail::load_average(f, in, features, prior); break;
    case Family::stacking: model = detail::load_stacking(in, features, prior); break;
  }
  detail::expect_token(in, "end");
  return model;
}

namespace detail {

std::vector<double> good_indicator(const Labels& y) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = is_good(y[i]) ? 1.0 : 0.0;
  return out;
}

double good_rate(const Labels& y) {
  return static_cast<double>(count_label(y, 0)) / static_cast<double>(y.size());
}

void require_trainable(const TrainingSet& train) {
  if (train.features.rows() != static_cast<Eigen::Index>(train.labels.size())) {
    throw ModelError("training features and labels differ in length");
  }
  if (count_label(train.labels, 0) == 0 || count_label(train.labels, 1) == 0) {
    throw ModelError("training set must contain both classes (empty class)");
  }
  if (!train.features.allFinite()) throw ModelError("training features must be finite and complete");
}

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void write_values(std::ostream& out, const double* data, std::size_t n) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < n; ++i) out << (i ? " " : "") << data[i];
  out << '\n';
}

void read_values(std::istream& in, double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> data[i])) throw ModelError("truncated model values");
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  out << "vector " << v.size() << '\n';
  write_values(out, v.data(), static_cast<std::size_t>(v.size()));
}

Vector read_vector(std::istream& in) {
  expect_token(in, "vector");
  Eigen::Index n = 0;
  if (!(in >> n) || n < 0) throw ModelError("bad vector size");
  Vector v(n);
  read_values(in, v.data(), static_cast<std::size_t>(n));
  return v;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << "matrix " << m.rows() << ' ' << m.cols() << '\n';
  write_values(out, m.data(), static_cast<std::size_t>(m.size()));
}

Matrix read_matrix(std::istream& in) {
  expect_token(in, "matrix");
  Eigen::Index r = 0, c = 0;
  if (!(in >> r >> c) || r < 0 || c < 0) throw ModelError("bad matrix shape");
  Matrix m(r, c);
  read_values(in, m.data(), static_cast<std::size_t>(m.size()));
  return m;
}

void expect_token(std::istream& in, const char* token) {
  std::string t;
  if (!(in >> t) || t != token) throw ModelError(std::string("expected '") + token + "' in model file, found '" + t + "'");
}

}  // namespace detail

}  // namespace creditbench
