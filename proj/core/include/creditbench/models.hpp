#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "creditbench/matrix.hpp"

namespace creditbench {

enum class Family {
  logreg,
  lda,
  qda,
  gaussian_nb,
  knn,
  cart,
  bagged_cart,
  random_forest,
  adaboost,
  sgb,
  avg_simple,
  avg_weighted,
  stacking
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view text);
bool is_heterogeneous(Family f);
const std::vector<Family>& base_families();  // the ten non-heterogeneous families

using Hyperparameters = std::map<std::string, double>;

/// Family plus hyperparameters. Unset hyperparameters take the family
/// default; names outside the family schema are rejected by validate().
struct ModelSpec {
  Family family = Family::logreg;
  Hyperparameters params;
  std::vector<ModelSpec> members;     // heterogeneous ensembles only
  std::vector<double> member_weights;  // avg_weighted only

  double get(const std::string& name) const;
  void validate() const;
  // "family(a=1, b=2)" with defaults filled in.
  std::string describe() const;
  // "a=1;b=2" of the explicitly set parameters, sorted by name.
  std::string param_string() const;
};

// Name -> default value for every hyperparameter of a family.
const Hyperparameters& default_hyperparameters(Family f);

/// A trained classifier. score() returns p(good | x) for every row.
class FittedModel {
 public:
  virtual ~FittedModel() = default;

  virtual Family family() const = 0;
  Vector score(const Matrix& x) const;

  std::size_t feature_count() const noexcept { return features_; }
  double prior_good() const noexcept { return prior_good_; }

  // Family-specific learned state, one token stream.
  virtual void save_body(std::ostream& out) const = 0;

 protected:
  FittedModel(std::size_t features, double prior_good) : features_(features), prior_good_(prior_good) {}
  virtual Vector score_impl(const Matrix& x) const = 0;

 private:
  std::size_t features_;
  double prior_good_;
};

using ModelPtr = std::shared_ptr<const FittedModel>;

ModelPtr fit(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed);

// Heterogeneous averages over already fitted members.
ModelPtr make_average(std::vector<ModelPtr> members, std::vector<double> weights);

// Stacking with the given member specs; members are refit on each meta fold
// and on the full set.
ModelPtr fit_stacking(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed);

// Out-of-fold member scores used as stacking meta-features (rows x members).
const Matrix& stacking_meta_features(const FittedModel& model);

// Per-row multiplicities of the bootstrap drawn for tree `t` of a bagged
// ensemble or forest fitted with `seed`.
std::vector<double> ensemble_bootstrap(std::size_t rows, std::uint64_t seed, std::size_t t);

// sgb or adaboost scores using only the first `stages` trees.
Vector staged_scores(const FittedModel& model, const Matrix& x, std::size_t stages);

// mtry rule: 0 -> floor(sqrt(d)); (0, 1) -> fraction of d; >= 1 -> count.
std::size_t resolve_mtry(double mtry, std::size_t d);

inline constexpr int kModelFormatVersion = 1;

void save_model(std::ostream& out, const FittedModel& model);
ModelPtr load_model(std::istream& in);

}  // namespace creditbench
