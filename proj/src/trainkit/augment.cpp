#include "nugget/trainkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nugget/core/error.hpp"
#include "nugget/core/hash.hpp"
#include "nugget/core/rng.hpp"

namespace nugget::trainkit {

namespace {

struct Pooled {
  std::string rubric_id;
  SupportLabel label;
};

struct BlockPool {
  std::string key;
  std::string question_id;
  Block block;
  std::array<std::vector<Pooled>, 3> by_label;  // support, partial, not
};

std::size_t pool_slot(SupportLabel label) {
  switch (label) {
    case SupportLabel::support:
      return 0;
    case SupportLabel::partial_support:
      return 1;
    case SupportLabel::not_support:
      break;
  }
  return 2;
}

std::string block_key(const GoldRecord& r) {
  return r.question_id + "#" + std::to_string(r.block.index) + "#" + short_hash(r.block.text, 12);
}

// First `count` items of a random permutation of `pool`.
std::vector<Pooled> draw(const std::vector<Pooled>& pool, std::size_t count, Rng& rng) {
  std::vector<Pooled> items = pool;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(items.size() - i));
    std::swap(items[i], items[j]);
  }
  items.resize(count);
  return items;
}

}  // namespace

std::vector<Composition> enumerate_compositions(std::size_t n) {
  std::vector<Composition> out;
  out.reserve((n + 1) * (n + 2) / 2);
  for (std::size_t a = n + 1; a-- > 0;)
    for (std::size_t b = n - a + 1; b-- > 0;) out.push_back({a, b, n - a - b});
  return out;
}

void to_json(Json& j, const AugmentedRecord& r) {
  j = Json(r.record);
  j["provenance"] = Json{{"block_key", r.provenance.block_key},
                         {"composition", r.provenance.composition},
                         {"downsampled", r.provenance.downsampled}};
}

void from_json(const Json& j, AugmentedRecord& r) {
  r.record = j.get<GoldRecord>();
  try {
    const auto& p = j.at("provenance");
    p.at("block_key").get_to(r.provenance.block_key);
    r.provenance.composition = p.at("composition").get<Composition>();
    p.at("downsampled").get_to(r.provenance.downsampled);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("augmented record: ") + e.what());
  }
}

std::vector<AugmentedRecord> augment(std::span<const GoldRecord> records, std::uint64_t seed, double sample_fraction,
                                     const AugmentOptions& options) {
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
    throw Error(ErrorCode::ConfigError, "sample fraction must be in (0, 1]");

  std::vector<BlockPool> pools;
  std::map<std::string, std::size_t> pool_index;
  for (const auto& r : records) {
    r.validate();
    const auto key = block_key(r);
    auto [it, inserted] = pool_index.emplace(key, pools.size());
    if (inserted) pools.push_back(BlockPool{key, r.question_id, r.block, {}});
    auto& pool = pools[it->second];
    for (std::size_t i = 0; i < r.rubric_ids.size(); ++i) {
      bool known = false;
      for (const auto& slot : pool.by_label)
        for (const auto& p : slot) known = known || p.rubric_id == r.rubric_ids[i];
      if (!known) pool.by_label[pool_slot(r.gold_labels[i])].push_back({r.rubric_ids[i], r.gold_labels[i]});
    }
  }

  Rng rng(seed);
  std::vector<AugmentedRecord> emitted;
  for (const auto& pool : pools) {
    for (std::size_t n = 1; n <= options.max_list_length; ++n) {
      for (const auto& comp : enumerate_compositions(n)) {
        if (comp[0] > pool.by_label[0].size() || comp[1] > pool.by_label[1].size() ||
            comp[2] > pool.by_label[2].size())
          continue;
        std::vector<Pooled> list;
        for (std::size_t k = 0; k < 3; ++k)
          for (auto& p : draw(pool.by_label[k], comp[k], rng)) list.push_back(std::move(p));
        rng.shuffle(std::span(list));

        bool downsampled = false;
        const std::size_t negatives = comp[2];
        if (n > options.downsample_min_length && 2 * negatives > n) {
          const auto remove = static_cast<std::size_t>(std::ceil(options.downsample_rate * static_cast<double>(negatives)));
          std::vector<std::size_t> positions;
          for (std::size_t i = 0; i < list.size(); ++i)
            if (list[i].label == SupportLabel::not_support) positions.push_back(i);
          const auto chosen = [&] {
            std::vector<std::size_t> p = positions;
            for (std::size_t i = 0; i < remove; ++i) {
              const std::size_t j = i + static_cast<std::size_t>(rng.below(p.size() - i));
              std::swap(p[i], p[j]);
            }
            p.resize(remove);
            std::sort(p.begin(), p.end());
            return p;
          }();
          for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) list.erase(list.begin() + static_cast<std::ptrdiff_t>(*it));
          downsampled = remove > 0;
        }

        AugmentedRecord out;
        out.record.question_id = pool.question_id;
        out.record.block = pool.block;
        for (const auto& p : list) {
          out.record.rubric_ids.push_back(p.rubric_id);
          out.record.gold_labels.push_back(p.label);
        }
        out.provenance = AugmentProvenance{pool.key, comp, downsampled};
        emitted.push_back(std::move(out));
      }
    }
  }
  if (emitted.empty()) return emitted;

  auto keep = static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(emitted.size())));
  keep = std::clamp<std::size_t>(keep, 1, emitted.size());
  std::vector<std::size_t> order(emitted.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  order.resize(keep);
  std::sort(order.begin(), order.end());
  std::vector<AugmentedRecord> retained;
  retained.reserve(keep);
  for (auto i : order) retained.push_back(std::move(emitted[i]));
  return retained;
}

}  // namespace nugget::trainkit
