#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "nugget/core/json.hpp"
#include "nugget/judge/judge.hpp"
#include "nugget/mining/tree.hpp"
#include "nugget/retrieval/calibration.hpp"
#include "nugget/retrieval/index.hpp"

namespace nugget::mining {

struct MiningBudget {
  // Nodes attached below the root.
  std::size_t max_nodes = 500;
  // Depth of the deepest passage node (seed passages have depth 1).
  std::size_t max_depth = 12;
  std::size_t max_judge_calls = 5000;
  std::chrono::seconds wall_clock_limit{3600};

  // Throws ConfigError unless every cap is positive.
  void validate() const;
};

struct MiningStats {
  std::size_t retrievals = 0;
  std::size_t rewrites = 0;
  std::size_t judge_calls = 0;
  std::size_t dedup_rejections = 0;
  // Subset of dedup_rejections settled by exact text match, without the judge.
  std::size_t exact_duplicates = 0;
  std::size_t temporal_rejections = 0;
  std::size_t already_seen = 0;
  std::size_t depth_cutoffs = 0;
  std::size_t budget_exhaustions = 0;
  std::string stop_reason;
};

struct MiningReport {
  std::vector<Passage> passages;
  SearchTree tree;
  MiningStats stats;
};

void to_json(Json& j, const MiningBudget& b);
void from_json(const Json& j, MiningBudget& b);
void to_json(Json& j, const MiningStats& s);
void from_json(const Json& j, MiningStats& s);
void to_json(Json& j, const MiningReport& r);
MiningReport report_from_json(const Json& j);

// Breadth-first pending queue of passage node indices.
class Frontier {
 public:
  void push(std::size_t node) { items_.push_back(node); }
  std::size_t pop();
  bool empty() const noexcept { return head_ == items_.size(); }
  std::size_t size() const noexcept { return items_.size() - head_; }

 private:
  std::vector<std::size_t> items_;
  std::size_t head_ = 0;
};

// Grows the query/passage tree from the question: seed passages are the
// temporally valid relevant hits for the question itself; each popped
// passage asks the judge for rewrites of its parent query, drops duplicates,
// and retrieves new, temporally valid, unseen passages for the survivors.
// A path ends when its query finds nothing new or all its rewrites are
// duplicates. Any exhausted cap stops the run and returns the partial tree.
MiningReport mine_passages(const Question& question, const retrieval::VectorIndex& index,
                           const retrieval::ThresholdCalibration& calibration, judge::Judge& judge,
                           const MiningBudget& budget, std::size_t max_new_queries = 3, std::size_t k_max = 20);

}  // namespace nugget::mining
