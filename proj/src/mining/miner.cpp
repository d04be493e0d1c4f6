#include "nugget/mining/miner.hpp"

#include <spdlog/spdlog.h>

#include "nugget/core/error.hpp"

namespace nugget::mining {

void MiningBudget::validate() const {
  if (max_nodes == 0 || max_depth == 0 || max_judge_calls == 0 || wall_clock_limit.count() <= 0)
    throw Error(ErrorCode::ConfigError, "every mining budget cap must be positive");
}

std::size_t Frontier::pop() {
  if (empty()) throw Error(ErrorCode::ConfigError, "pop from an empty frontier");
  return items_[head_++];
}

namespace {

// Thrown internally when a cap is hit; unwinds to mine_passages.
struct BudgetExhausted {
  std::string reason;
};

class Run {
 public:
  Run(const Question& question, const retrieval::VectorIndex& index,
      const retrieval::ThresholdCalibration& calibration, judge::Judge& judge, const MiningBudget& budget,
      std::size_t max_new_queries, std::size_t k_max)
      : question_(question),
        index_(index),
        calibration_(calibration),
        judge_(judge),
        budget_(budget),
        max_new_(max_new_queries),
        k_max_(k_max),
        tree_(question.text),
        started_(std::chrono::steady_clock::now()) {}

  MiningReport execute() {
    try {
      expand_query(0);
      while (!frontier_.empty()) {
        check_clock();
        process_passage(frontier_.pop());
      }
      stats_.stop_reason = "frontier empty";
    } catch (const BudgetExhausted& e) {
      ++stats_.budget_exhaustions;
      stats_.stop_reason = e.reason;
      spdlog::info("mining for {} stopped early: {}", question_.id, e.reason);
    }
    tree_.validate();
    auto passages = tree_.passages();
    return MiningReport{std::move(passages), std::move(tree_), std::move(stats_)};
  }

 private:
  void check_clock() {
    if (std::chrono::steady_clock::now() - started_ >= budget_.wall_clock_limit)
      throw BudgetExhausted{"wall-clock limit reached"};
  }

  void before_judge_call() {
    check_clock();
    if (stats_.judge_calls >= budget_.max_judge_calls) throw BudgetExhausted{"judge call limit reached"};
    ++stats_.judge_calls;
  }

  void before_attach() {
    if (tree_.size() - 1 >= budget_.max_nodes) throw BudgetExhausted{"node limit reached"};
  }

  // Retrieves for a query node and attaches every new, temporally valid hit.
  void expand_query(std::size_t query_node) {
    const std::string query = tree_.node(query_node).query;
    check_clock();
    auto hits = retrieval::retrieve_relevant(index_, query, calibration_, k_max_);
    ++stats_.retrievals;
    for (auto& hit : hits) {
      if (tree_.has_passage(hit.passage.id)) {
        ++stats_.already_seen;
        continue;
      }
      before_judge_call();
      if (!judge_.check_temporal(query, hit.passage)) {
        ++stats_.temporal_rejections;
        continue;
      }
      before_attach();
      frontier_.push(tree_.attach_passage(query_node, std::move(hit.passage)));
    }
  }

  void process_passage(std::size_t passage_node) {
    const Node& node = tree_.node(passage_node);
    if (node.depth + 2 > budget_.max_depth) {
      ++stats_.depth_cutoffs;
      return;
    }
    const Passage passage = *node.passage;
    const std::string parent_query = tree_.node(*node.parent).query;

    before_judge_call();
    auto rewrites = judge_.rewrite_queries(question_, parent_query, passage, max_new_);
    stats_.rewrites += rewrites.size();

    std::vector<std::size_t> fresh;
    for (auto& candidate : rewrites) {
      if (tree_.has_query(candidate)) {
        ++stats_.dedup_rejections;
        ++stats_.exact_duplicates;
        continue;
      }
      const auto existing = tree_.query_texts();
      before_judge_call();
      if (judge_.is_duplicate_query(candidate, existing)) {
        ++stats_.dedup_rejections;
        continue;
      }
      before_attach();
      fresh.push_back(tree_.attach_query(passage_node, std::move(candidate)));
    }
    for (std::size_t q : fresh) expand_query(q);
  }

  const Question& question_;
  const retrieval::VectorIndex& index_;
  const retrieval::ThresholdCalibration& calibration_;
  judge::Judge& judge_;
  const MiningBudget& budget_;
  std::size_t max_new_;
  std::size_t k_max_;
  SearchTree tree_;
  Frontier frontier_;
  MiningStats stats_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace

MiningReport mine_passages(const Question& question, const retrieval::VectorIndex& index,
                           const retrieval::ThresholdCalibration& calibration, judge::Judge& judge,
                           const MiningBudget& budget, std::size_t max_new_queries, std::size_t k_max) {
  budget.validate();
  if (max_new_queries == 0 || k_max == 0)
    throw Error(ErrorCode::ConfigError, "max_new_queries and k_max must be positive");
  return Run(question, index, calibration, judge, budget, max_new_queries, k_max).execute();
}

void to_json(Json& j, const MiningBudget& b) {
  j = Json{{"max_nodes", b.max_nodes},
           {"max_depth", b.max_depth},
           {"max_judge_calls", b.max_judge_calls},
           {"wall_clock_limit_seconds", b.wall_clock_limit.count()}};
}

void from_json(const Json& j, MiningBudget& b) {
  try {
    b.max_nodes = j.value("max_nodes", b.max_nodes);
    b.max_depth = j.value("max_depth", b.max_depth);
    b.max_judge_calls = j.value("max_judge_calls", b.max_judge_calls);
    b.wall_clock_limit = std::chrono::seconds(j.value("wall_clock_limit_seconds", b.wall_clock_limit.count()));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("mining budget: ") + e.what());
  }
}

void to_json(Json& j, const MiningStats& s) {
  j = Json{{"retrievals", s.retrievals},
           {"rewrites", s.rewrites},
           {"judge_calls", s.judge_calls},
           {"dedup_rejections", s.dedup_rejections},
           {"exact_duplicates", s.exact_duplicates},
           {"temporal_rejections", s.temporal_rejections},
           {"already_seen", s.already_seen},
           {"depth_cutoffs", s.depth_cutoffs},
           {"budget_exhaustions", s.budget_exhaustions},
           {"stop_reason", s.stop_reason}};
}

void from_json(const Json& j, MiningStats& s) {
  try {
    j.at("retrievals").get_to(s.retrievals);
    j.at("rewrites").get_to(s.rewrites);
    j.at("judge_calls").get_to(s.judge_calls);
    j.at("dedup_rejections").get_to(s.dedup_rejections);
    j.at("exact_duplicates").get_to(s.exact_duplicates);
    j.at("temporal_rejections").get_to(s.temporal_rejections);
    j.at("already_seen").get_to(s.already_seen);
    j.at("depth_cutoffs").get_to(s.depth_cutoffs);
    j.at("budget_exhaustions").get_to(s.budget_exhaustions);
    j.at("stop_reason").get_to(s.stop_reason);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("mining stats: ") + e.what());
  }
}

void to_json(Json& j, const MiningReport& r) {
  j = Json{{"passages", r.passages}, {"tree", r.tree}, {"stats", r.stats}};
}

MiningReport report_from_json(const Json& j) {
  try {
    auto tree = tree_from_json(j.at("tree"));
    auto passages = tree.passages();
    const auto listed = j.at("passages").get<std::vector<Passage>>();
    if (listed.size() != passages.size())
      throw Error(ErrorCode::SchemaViolation, "report passages disagree with its tree");
    for (std::size_t i = 0; i < listed.size(); ++i)
      if (listed[i].id != passages[i].id)
        throw Error(ErrorCode::SchemaViolation, "report passages disagree with its tree");
    return MiningReport{std::move(passages), std::move(tree), j.at("stats").get<MiningStats>()};
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("mining report: ") + e.what());
  }
}

}  // namespace nugget::mining
