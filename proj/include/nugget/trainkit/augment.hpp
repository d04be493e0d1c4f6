#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nugget/core/json.hpp"
#include "nugget/core/types.hpp"

namespace nugget::trainkit {

// (support, partial_support, not_support) counts of one list.
using Composition = std::array<std::size_t, 3>;

// Every composition of n into three non-negative parts, ordered by support
// count descending, then partial count descending: C(n+2, 2) entries.
std::vector<Composition> enumerate_compositions(std::size_t n);

struct AugmentProvenance {
  std::string block_key;
  Composition composition{};
  bool downsampled = false;
};

struct AugmentedRecord {
  GoldRecord record;
  AugmentProvenance provenance;
};

void to_json(Json& j, const AugmentedRecord& r);
void from_json(const Json& j, AugmentedRecord& r);

struct AugmentOptions {
  std::size_t max_list_length = 10;
  // Lists longer than this with a not_support majority lose some of them.
  std::size_t downsample_min_length = 5;
  double downsample_rate = 0.2;
};

// Relabels the gold data into lists with every feasible label mix. Per block
// the rubrics are pooled by gold label; for each length 1..10 and each
// composition the pools can supply, rubrics are drawn without replacement
// and shuffled. Long not_support-heavy lists are thinned, then a random
// `sample_fraction` of the lists (at least one) is kept in emission order.
// Deterministic for a given seed.
std::vector<AugmentedRecord> augment(std::span<const GoldRecord> records, std::uint64_t seed, double sample_fraction,
                                     const AugmentOptions& options = {});

}  // namespace nugget::trainkit
