// Writes synthetic stand-ins shaped like the Taiwanese Credit and Give Me
// Some Credit subsets (same columns, row counts and default counts).
//
//   make_standin tc   data/taiwan_credit_standin.csv
//   make_standin gmsc data/gmsc_standin.csv

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "creditbench/csv.hpp"
#include "creditbench/random.hpp"

namespace cb = creditbench;

namespace {

std::vector<int> shuffled_labels(std::size_t good, std::size_t bad, cb::Rng& rng) {
  std::vector<int> y(good, 0);
  y.insert(y.end(), bad, 1);
  rng.shuffle(y.begin(), y.end());
  return y;
}

std::string num(double v) { return v == std::round(v) && std::abs(v) < 1e15 ? std::to_string(static_cast<long long>(v)) : cb::format_double(v); }
double clampd(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

void taiwan(std::ostream& out, std::uint64_t seed) {
  cb::Rng rng(seed, cb::hash_name("tc"));
  const auto y = shuffled_labels(2337, 664, rng);
  std::vector<std::string> header{"ID", "LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE"};
  for (const char* p : {"PAY_0", "PAY_2", "PAY_3", "PAY_4", "PAY_5", "PAY_6"}) header.emplace_back(p);
  for (int i = 1; i <= 6; ++i) header.push_back("BILL_AMT" + std::to_string(i));
  for (int i = 1; i <= 6; ++i) header.push_back("PAY_AMT" + std::to_string(i));
  header.emplace_back("default.payment.next.month");
  cb::write_csv_row(out, header);
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double risk = rng.normal() + (y[r] ? 1.1 : 0.0);
    std::vector<std::string> row{std::to_string(r + 1)};
    const double limit = std::round(std::exp(11.8 - 0.35 * risk + 0.7 * rng.normal()) / 10000.0) * 10000.0;
    row.push_back(num(std::max(10000.0, limit)));
    row.push_back(std::to_string(rng.bernoulli(0.6) ? 2 : 1));
    row.push_back(std::to_string(1 + static_cast<int>(clampd(std::floor(1.2 + 0.25 * risk + rng.normal() * 0.8), 0, 3))));
    row.push_back(std::to_string(rng.bernoulli(0.53) ? 2 : (rng.bernoulli(0.97) ? 1 : 3)));
    row.push_back(std::to_string(static_cast<int>(clampd(std::round(35 + 9 * rng.normal()), 21, 75))));
    double pay = risk;
    for (int m = 0; m < 6; ++m) {
      pay = 0.7 * pay + 0.7 * rng.normal();
      row.push_back(std::to_string(static_cast<int>(clampd(std::round(pay * 1.1 - 0.6), -2, 8))));
    }
    double bill = std::max(0.0, limit * (0.3 + 0.15 * risk + 0.3 * rng.normal()));
    std::vector<double> bills;
    for (int m = 0; m < 6; ++m) {
      bills.push_back(std::round(bill));
      bill = std::max(0.0, bill * (0.95 + 0.1 * rng.normal()));
    }
    for (double b : bills) row.push_back(num(b));
    for (int m = 0; m < 6; ++m) {
      const double paid = bills[static_cast<std::size_t>(m)] * clampd(0.12 - 0.04 * risk + 0.08 * rng.normal(), 0.0, 1.0);
      row.push_back(num(std::round(paid)));
    }
    row.push_back(std::to_string(y[r]));
    cb::write_csv_row(out, row);
  }
}

void gmsc(std::ostream& out, std::uint64_t seed) {
  cb::Rng rng(seed, cb::hash_name("gmsc"));
  const auto y = shuffled_labels(6999, 502, rng);
  cb::write_csv_row(out, {"SeriousDlqin2yrs", "RevolvingUtilizationOfUnsecuredLines", "age",
                          "NumberOfTime30-59DaysPastDueNotWorse", "DebtRatio", "MonthlyIncome",
                          "NumberOfOpenCreditLinesAndLoans", "NumberOfTimes90DaysLate", "NumberRealEstateLoansOrLines",
                          "NumberOfTime60-89DaysPastDueNotWorse", "NumberOfDependents"});
  auto poisson = [&](double mean) {
    return std::poisson_distribution<int>(std::max(1e-6, mean))(rng.engine());
  };
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double risk = rng.normal() + (y[r] ? 1.4 : 0.0);
    std::vector<std::string> row{std::to_string(y[r])};
    const double util = 1.0 / (1.0 + std::exp(-(-1.2 + 1.1 * risk + 0.8 * rng.normal())));
    row.push_back(num(std::round(util * 1e6) / 1e6));
    row.push_back(std::to_string(static_cast<int>(clampd(std::round(52 - 4 * risk + 14 * rng.normal()), 21, 100))));
    row.push_back(std::to_string(poisson(0.15 * std::exp(0.9 * risk))));
    row.push_back(num(std::round(std::exp(-1.0 + 0.2 * risk + 0.9 * rng.normal()) * 1e4) / 1e4));
    if (rng.bernoulli(0.2)) row.emplace_back("NA");
    else row.push_back(num(std::round(std::exp(8.6 - 0.15 * risk + 0.6 * rng.normal()))));
    row.push_back(std::to_string(poisson(8.0 - 0.5 * risk)));
    row.push_back(std::to_string(poisson(0.05 * std::exp(1.2 * risk))));
    row.push_back(std::to_string(poisson(1.0)));
    row.push_back(std::to_string(poisson(0.05 * std::exp(1.0 * risk))));
    if (rng.bernoulli(0.026)) row.emplace_back("NA");
    else row.push_back(std::to_string(poisson(0.75)));
    cb::write_csv_row(out, row);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic stand-in data sets"};
  std::string which, path;
  std::uint64_t seed = 20190901;
  app.add_option("dataset", which, "tc or gmsc")->required()->check(CLI::IsMember({"tc", "gmsc"}));
  app.add_option("output", path, "CSV to write")->required();
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << path << '\n';
    return 2;
  }
  if (which == "tc") taiwan(out, seed);
  else gmsc(out, seed);
  return 0;
}
