#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "creditbench/models.hpp"

namespace creditbench::detail {

std::vector<double> good_indicator(const Labels& y);
double good_rate(const Labels& y);
void require_trainable(const TrainingSet& train);
double logistic(double z);

void write_values(std::ostream& out, const double* data, std::size_t n);
void read_values(std::istream& in, double* data, std::size_t n);
void write_vector(std::ostream& out, const Vector& v);
Vector read_vector(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);
void expect_token(std::istream& in, const char* token);

ModelPtr fit_logreg(const ModelSpec& spec, const TrainingSet& train);
ModelPtr fit_lda(const ModelSpec& spec, const TrainingSet& train);
ModelPtr fit_qda(const ModelSpec& spec, const TrainingSet& train);
ModelPtr fit_naive_bayes(const ModelSpec& spec, const TrainingSet& train);
ModelPtr fit_knn(const ModelSpec& spec, const TrainingSet& train);
ModelPtr fit_cart(const ModelSpec& spec, const TrainingSet& train);
ModelPtr fit_bagged(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed);
ModelPtr fit_forest(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed);
ModelPtr fit_adaboost(const ModelSpec& spec, const TrainingSet& train);
ModelPtr fit_sgb(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed);

ModelPtr load_logreg(std::istream& in, std::size_t features, double prior);
ModelPtr load_discriminant(Family f, std::istream& in, std::size_t features, double prior);
ModelPtr load_naive_bayes(std::istream& in, std::size_t features, double prior);
ModelPtr load_knn(std::istream& in, std::size_t features, double prior);
ModelPtr load_tree_model(Family f, std::istream& in, std::size_t features, double prior);
ModelPtr load_average(Family f, std::istream& in, std::size_t features, double prior);
ModelPtr load_stacking(std::istream& in, std::size_t features, double prior);

}  // namespace creditbench::detail
