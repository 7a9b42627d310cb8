#include <cmath>
#include <istream>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "creditbench/errors.hpp"
#include "model_impl.hpp"

namespace creditbench::detail {

namespace {

class LogisticModel final : public FittedModel {
 public:
  LogisticModel(std::size_t features, double prior, Vector beta, int iterations)
      : FittedModel(features, prior), beta_(std::move(beta)), iterations_(iterations) {}

  Family family() const override { return Family::logreg; }
  const Vector& coefficients() const { return beta_; }

  void save_body(std::ostream& out) const override {
    out << iterations_ << '\n';
    write_vector(out, beta_);
  }

 protected:
  Vector score_impl(const Matrix& x) const override {
    Vector s(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) s(i) = logistic(beta_(0) + x.row(i).dot(beta_.tail(beta_.size() - 1)));
    return s;
  }

 private:
  Vector beta_;  // intercept first
  int iterations_;
};

// Symmetric positive semi-definite matrix with a regularized inverse.
struct Covariance {
  Eigen::MatrixXd inverse;
  double log_det = 0.0;
  bool regularized = false;
};

Covariance invert_covariance(Eigen::MatrixXd sigma, double eps_scale, const char* what) {
  const Eigen::Index d = sigma.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  const double lmin = lambda.minCoeff();
  Covariance out;
  if (!(lmax > 0.0) || lmin <= 0.0 || lmax / lmin > 1e12) {
    const double eps = eps_scale * sigma.trace() / static_cast<double>(d);
    if (!(eps > 0.0)) throw ModelError(std::string(what) + ": covariance matrix is singular and regularization is disabled");
    lambda.array() += eps;
    out.regularized = true;
    if (lambda.minCoeff() <= 0.0) throw ModelError(std::string(what) + ": covariance matrix is singular");
  }
  out.inverse = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  out.log_det = lambda.array().log().sum();
  return out;
}

/// LDA and QDA share the class-density form: per class a mean, an inverse
/// covariance and a log determinant (shared for LDA).
class DiscriminantModel final : public FittedModel {
 public:
  struct ClassDensity {
    Vector mean;
    Eigen::MatrixXd inverse;
    double log_det = 0.0;
    double log_prior = 0.0;
  };

  DiscriminantModel(Family f, std::size_t features, double prior, ClassDensity bad, ClassDensity good)
      : FittedModel(features, prior), family_(f), bad_(std::move(bad)), good_(std::move(good)) {}

  Family family() const override { return family_; }

  void save_body(std::ostream& out) const override {
    for (const auto* c : {&bad_, &good_}) {
      write_vector(out, c->mean);
      write_matrix(out, c->inverse);
      write_values(out, &c->log_det, 1);
      write_values(out, &c->log_prior, 1);
    }
  }

  static ClassDensity read_density(std::istream& in) {
    ClassDensity c;
    c.mean = read_vector(in);
    c.inverse = read_matrix(in);
    read_values(in, &c.log_det, 1);
    read_values(in, &c.log_prior, 1);
    return c;
  }

 protected:
  Vector score_impl(const Matrix& x) const override {
    Vector s(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Vector row = x.row(i).transpose();
      s(i) = logistic(log_density(good_, row) - log_density(bad_, row));
    }
    return s;
  }

 private:
  static double log_density(const ClassDensity& c, const Vector& x) {
    const Vector diff = x - c.mean;
    return c.log_prior - 0.5 * c.log_det - 0.5 * diff.dot(c.inverse * diff);
  }

  Family family_;
  ClassDensity bad_;
  ClassDensity good_;
};

struct ClassStats {
  Vector mean;
  Eigen::MatrixXd scatter;  // sum of outer products of deviations
  std::size_t n = 0;
};

ClassStats class_stats(const TrainingSet& train, int label) {
  const Eigen::Index d = train.features.cols();
  ClassStats s;
  s.mean = Vector::Zero(d);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    if (train.labels[i] != label) continue;
    s.mean += train.features.row(static_cast<Eigen::Index>(i)).transpose();
    ++s.n;
  }
  s.mean /= static_cast<double>(s.n);
  s.scatter = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    if (train.labels[i] != label) continue;
    const Vector diff = train.features.row(static_cast<Eigen::Index>(i)).transpose() - s.mean;
    s.scatter.selfadjointView<Eigen::Lower>().rankUpdate(diff);
  }
  s.scatter = s.scatter.selfadjointView<Eigen::Lower>();
  return s;
}

ModelPtr fit_discriminant(Family f, const ModelSpec& spec, const TrainingSet& train) {
  const ClassStats good = class_stats(train, 0);
  const ClassStats bad = class_stats(train, 1);
  const double n = static_cast<double>(train.rows());
  const double eps_scale = spec.get("eps_scale");
  DiscriminantModel::ClassDensity g{good.mean, {}, 0.0, std::log(static_cast<double>(good.n) / n)};
  DiscriminantModel::ClassDensity b{bad.mean, {}, 0.0, std::log(static_cast<double>(bad.n) / n)};
  if (f == Family::lda) {
    if (train.rows() < 3) throw ModelError("lda needs at least 3 rows");
    const auto cov = invert_covariance((good.scatter + bad.scatter) / (n - 2.0), eps_scale, "lda");
    g.inverse = b.inverse = cov.inverse;
    g.log_det = b.log_det = cov.log_det;
  } else {
    for (auto* pair : {&good, &bad}) {
      if (pair->n < 2) throw ModelError("qda needs at least 2 rows per class");
    }
    const auto cg = invert_covariance(good.scatter / static_cast<double>(good.n - 1), eps_scale, "qda");
    const auto cb = invert_covariance(bad.scatter / static_cast<double>(bad.n - 1), eps_scale, "qda");
    g.inverse = cg.inverse;
    g.log_det = cg.log_det;
    b.inverse = cb.inverse;
    b.log_det = cb.log_det;
  }
  return std::make_shared<DiscriminantModel>(f, static_cast<std::size_t>(train.features.cols()), good_rate(train.labels),
                                             std::move(b), std::move(g));
}

}  // namespace

ModelPtr fit_logreg(const ModelSpec& spec, const TrainingSet& train) {
  const double l2 = spec.get("l2");
  const int max_iter = static_cast<int>(spec.get("max_iter"));
  const double tol = spec.get("tol");
  const Eigen::Index n = train.features.rows();
  const Eigen::Index p = train.features.cols() + 1;
  Eigen::MatrixXd x(n, p);
  x.col(0).setOnes();
  x.rightCols(p - 1) = train.features;
  const auto yv = good_indicator(train.labels);
  const Eigen::Map<const Vector> y(yv.data(), n);

  Vector penalty = Vector::Constant(p, l2);
  penalty(0) = 0.0;
  auto objective = [&](const Vector& beta) {
    const Vector eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log(1 + exp(eta)) computed stably
      const double e = eta(i);
      const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      ll += y(i) * e - softplus;
    }
    return ll - 0.5 * (penalty.array() * beta.array().square()).sum();
  };

  Vector beta = Vector::Zero(p);
  double current = objective(beta);
  for (int it = 1; it <= max_iter; ++it) {
    const Vector eta = x * beta;
    Vector prob(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = logistic(eta(i));
      w(i) = std::max(prob(i) * (1.0 - prob(i)), 1e-12);
    }
    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    h.diagonal() += penalty;
    const Vector g = x.transpose() * (y - prob) - penalty.cwiseProduct(beta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) throw ModelError("logreg: Hessian factorization failed");
    Vector step = ldlt.solve(g);
    if (!step.allFinite()) throw ModelError("logreg: singular design; increase l2");
    // Halve the step until the penalized likelihood does not decrease.
    double next = objective(beta + step);
    for (int h_it = 0; h_it < 30 && next < current - 1e-12 * std::abs(current); ++h_it) {
      step *= 0.5;
      next = objective(beta + step);
    }
    beta += step;
    current = next;
    if (step.cwiseAbs().maxCoeff() < tol) {
      return std::make_shared<LogisticModel>(static_cast<std::size_t>(p - 1), good_rate(train.labels), beta, it);
    }
  }
  throw ConvergenceError("logreg did not converge within " + std::to_string(max_iter) +
                         " iterations (tolerance " + std::to_string(tol) + " on coefficient change)");
}

ModelPtr fit_lda(const ModelSpec& spec, const TrainingSet& train) { return fit_discriminant(Family::lda, spec, train); }
ModelPtr fit_qda(const ModelSpec& spec, const TrainingSet& train) { return fit_discriminant(Family::qda, spec, train); }

ModelPtr load_logreg(std::istream& in, std::size_t features, double prior) {
  int iterations = 0;
  if (!(in >> iterations)) throw ModelError("truncated logreg record");
  Vector beta = read_vector(in);
  if (static_cast<std::size_t>(beta.size()) != features + 1) throw ModelError("logreg coefficient count mismatch");
  return std::make_shared<LogisticModel>(features, prior, std::move(beta), iterations);
}

ModelPtr load_discriminant(Family f, std::istream& in, std::size_t features, double prior) {
  auto bad = DiscriminantModel::read_density(in);
  auto good = DiscriminantModel::read_density(in);
  if (static_cast<std::size_t>(bad.mean.size()) != features) throw ModelError("discriminant feature count mismatch");
  return std::make_shared<DiscriminantModel>(f, features, prior, std::move(bad), std::move(good));
}

}  // namespace creditbench::detail
