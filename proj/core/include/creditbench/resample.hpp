#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "creditbench/matrix.hpp"

namespace creditbench {

enum class SamplerKind { none, down, up, smote, bsmote, rose };

std::string_view to_string(SamplerKind kind);
SamplerKind sampler_from_string(std::string_view text);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::none;
  std::uint64_t seed = 0;
  int smote_over_pct = 200;
  int smote_under_pct = 200;
  int smote_k = 5;
  int bsmote_m = 10;
  double rose_shrink = 1.0;
  // Down-sampling: optional per-class cap below the minority count.
  std::optional<std::size_t> down_cap;
  // Borderline-SMOTE: minority count to reach; default is the majority count.
  std::optional<std::size_t> bsmote_target;

  // Throws ConfigError on out-of-range parameters.
  void validate() const;
};

enum class Provenance { original, duplicate, synthetic };
std::string_view to_string(Provenance p);

struct ResampledSet {
  TrainingSet data;
  std::vector<Provenance> provenance;
  // Input row each output row was copied from or grown from; kNoRow for none.
  std::vector<std::size_t> parent;
  std::vector<std::string> warnings;

  std::size_t rows() const noexcept { return data.rows(); }
};

// Minority = the smaller class; on a tie, the default class.
int minority_label(const Labels& y);

ResampledSet identity_sample(const TrainingSet& train);
ResampledSet downsample(const TrainingSet& train, std::uint64_t seed, std::optional<std::size_t> cap = std::nullopt);
ResampledSet upsample(const TrainingSet& train, std::uint64_t seed);
ResampledSet smote(const TrainingSet& train, const SamplerConfig& config);
ResampledSet borderline_smote(const TrainingSet& train, const SamplerConfig& config);
ResampledSet rose(const TrainingSet& train, const SamplerConfig& config);
ResampledSet resample(const TrainingSet& train, const SamplerConfig& config);

// Minority rows whose m nearest neighbours hold m' majority rows with
// m/2 <= m' < m, in ascending row order.
std::vector<std::size_t> danger_set(const TrainingSet& train, int m);

// Columns x0..x{d-1}, label, provenance, parent.
void write_resampled_csv(std::ostream& out, const ResampledSet& set);

}  // namespace creditbench
