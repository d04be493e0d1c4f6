#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "nugget/core/rng.hpp"
#include "nugget/judge/mock_backend.hpp"
#include "nugget/trainkit/augment.hpp"
#include "nugget/trainkit/gold.hpp"
#include "nugget/trainkit/metrics.hpp"
#include "nugget/trainkit/reward.hpp"
#include "support.hpp"

using namespace nugget;
using namespace nugget::trainkit;
using nugget::testing::code_of;
using nugget::testing::ScriptedBackend;
using nugget::testing::wrap;

namespace {

constexpr auto S = SupportLabel::support;
constexpr auto P = SupportLabel::partial_support;
constexpr auto N = SupportLabel::not_support;

using Labels = std::vector<SupportLabel>;

GoldRecord gold_record(const std::string& qid, std::size_t block, const Labels& labels, std::size_t id_base = 0) {
  GoldRecord g{qid, {block, "block text " + std::to_string(block)}, {}, labels, "why"};
  for (std::size_t i = 0; i < labels.size(); ++i) g.rubric_ids.push_back("r" + std::to_string(id_base + i));
  return g;
}

Composition composition_of(const Labels& labels) {
  Composition c{};
  for (auto l : labels) ++c[l == S ? 0 : l == P ? 1 : 2];
  return c;
}

}  // namespace

TEST_CASE("vote priorities") {
  CHECK(vote(Labels{S, S, N}) == S);
  CHECK(vote(Labels{S, N}) == N);
  CHECK(vote(Labels{P, S}) == P);
  CHECK(vote(Labels{P, N}) == N);
  CHECK(vote(Labels{P}) == P);
  CHECK(code_of([] { vote(Labels{}); }) == ErrorCode::DegenerateInput);
}

TEST_CASE("exact match of label lists") {
  CHECK(exact_match_labels(Labels{S, N}, Labels{S, N}) == 1);
  CHECK(exact_match_labels(Labels{S, P}, Labels{S, N}) == 0);
  CHECK(exact_match_labels(Labels{S}, Labels{S, N}) == 0);
}

TEST_CASE("composite reward terms") {
  CompositeRewardInput in;
  in.gold_labels = {S, N, P};
  in.pred_labels = {S, N, P};
  in.reasoning_status = ReasoningStatus::well_formed_nonempty;
  in.output_format_ok = true;
  in.response_length = 10;
  CHECK(composite_reward(in) == 1.0);

  in.pred_labels = {N, P, S};
  CHECK(composite_reward(in) == 0.3);

  CompositeRewardInput bad;
  bad.gold_labels = {S};
  CHECK(composite_reward(bad) == 0.0);

  // one of two correct over two present classes: F1 = 0.5 per class
  CompositeRewardInput half;
  half.gold_labels = {S, N};
  half.pred_labels = {S, S};
  half.reasoning_status = ReasoningStatus::well_formed_empty;
  half.output_format_ok = true;
  CHECK(composite_reward(half) == doctest::Approx((35.0 * (2.0 / 3.0 + 0.0) / 2.0 + 10.0 + 10.0) / 100.0));

  CompositeRewardInput mismatch = in;
  mismatch.pred_labels = {S};
  CHECK(code_of([&] { composite_reward(mismatch); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("overlength penalty is a ramp") {
  CHECK(overlength_penalty(2048, 4096, 2048, 1.0) == 0.0);
  CHECK(overlength_penalty(3072, 4096, 2048, 1.0) == 0.5);
  CHECK(overlength_penalty(4096, 4096, 2048, 1.0) == 1.0);
  CHECK(overlength_penalty(9000, 4096, 2048, 0.5) == 0.5);
  CHECK(overlength_penalty(10, 100, 200, 1.0) == doctest::Approx(0.05));

  CompositeRewardInput in;
  in.gold_labels = {S};
  in.pred_labels = {S};
  in.reasoning_status = ReasoningStatus::well_formed_nonempty;
  in.output_format_ok = true;
  in.response_length = 5000;
  CHECK(composite_reward(in) == 0.0);
  in.pred_labels.clear();
  in.output_format_ok = false;
  in.reasoning_status = ReasoningStatus::malformed;
  CHECK(composite_reward(in) == -1.0);
}

TEST_CASE("score_response reads tags and payload") {
  const Labels gold{S, N};
  auto ok = score_response("<reasoning>because</reasoning>\nsupport,not_support", gold, judge::LabelFormat::csv,
                           JudgeMode::ternary, 5);
  CHECK(ok.reasoning_status == ReasoningStatus::well_formed_nonempty);
  CHECK(ok.output_format_ok);
  CHECK(ok.pred_labels == gold);
  CHECK(composite_reward(ok) == 1.0);

  auto empty = score_response("<reasoning> </reasoning>support,not_support", gold, judge::LabelFormat::csv,
                              JudgeMode::ternary, 5);
  CHECK(empty.reasoning_status == ReasoningStatus::well_formed_empty);

  auto broken = score_response("support", gold, judge::LabelFormat::csv, JudgeMode::ternary, 5);
  CHECK(broken.reasoning_status == ReasoningStatus::malformed);
  CHECK_FALSE(broken.output_format_ok);
  CHECK(broken.pred_labels.empty());
  CHECK(composite_reward(broken) == 0.0);
}

TEST_CASE("dynamic sampling keeps mixed accuracy only") {
  CHECK_FALSE(dynamic_sampling_keep(Labels{S, N}, Labels{S, N}));
  CHECK_FALSE(dynamic_sampling_keep(Labels{N, S}, Labels{S, N}));
  CHECK(dynamic_sampling_keep(Labels{S, S}, Labels{S, N}));
}

TEST_CASE("group advantage standardises") {
  const auto a = group_advantage(std::vector<double>{1.0, 0.5});
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(-1.0));
  CHECK(group_advantage(std::vector<double>{0.3, 0.3, 0.3}) == std::vector<double>{0, 0, 0});
  CHECK(code_of([] { group_advantage(std::vector<double>{1.0}); }) == ErrorCode::GroupTooSmall);

  Rng rng(5);
  for (int g = 0; g < 200; ++g) {
    std::vector<double> r(2 + rng.below(10));
    for (auto& x : r) x = rng.unit() * 2 - 1;
    const auto adv = group_advantage(r);
    double mean = 0, var = 0;
    for (double x : adv) mean += x;
    mean /= adv.size();
    for (double x : adv) var += (x - mean) * (x - mean);
    var /= adv.size();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-9);
  }
}

TEST_CASE("reward feed") {
  std::vector<Rollout> rollouts;
  auto add = [&](std::string id, std::string group, std::string response) {
    Rollout r;
    r.sample_id = std::move(id);
    r.group_id = std::move(group);
    r.response = std::move(response);
    r.gold_labels = {S, N};
    r.format = judge::LabelFormat::csv;
    r.response_length = 10;
    rollouts.push_back(r);
  };
  add("a", "g1", "<reasoning>x</reasoning>support,not_support");
  add("b", "g1", "<reasoning>x</reasoning>support,support");
  add("c", "g2", "<reasoning>x</reasoning>support,not_support");
  const auto feed = build_reward_feed(rollouts);
  REQUIRE(feed.size() == 3);
  CHECK(feed[0].composite_reward == 1.0);
  CHECK_FALSE(feed[0].keep);
  CHECK(feed[1].keep);
  CHECK(feed[0].advantage == doctest::Approx(1.0));
  CHECK(feed[1].advantage == doctest::Approx(-1.0));
  CHECK(feed[2].advantage == 0.0);
  CHECK(feed[2].advantage_group_id == "g2");
}

TEST_CASE("rollout parsing defaults") {
  const auto r = Json::parse(R"({"sample_id":"s","group_id":"g","response":"a b  c","gold_labels":["support"]})")
                     .get<Rollout>();
  CHECK(r.format == judge::LabelFormat::json);
  CHECK(r.mode == JudgeMode::ternary);
  CHECK(r.response_length == 3);
  CHECK_THROWS_AS(Json::parse(R"({"sample_id":"s","group_id":"g","response":"","gold_labels":[],"format":"toml"})")
                      .get<Rollout>(),
                  Error);
}

TEST_CASE("macro f1 examples") {
  CHECK(macro_f1(Labels{S, N, P}, Labels{S, N, P}).macro_f1 == 1.0);
  CHECK(macro_f1(Labels{N, N}, Labels{S, S}).macro_f1 == 0.0);

  // pred [S,S,N,P] gold [S,N,N,P]:
  //   S: tp1 fp1 fn0 -> p .5 r 1 f1 2/3
  //   P: tp1         -> 1 1 1
  //   N: tp1 fp0 fn1 -> p 1 r .5 f1 2/3
  const auto m = macro_f1(Labels{S, S, N, P}, Labels{S, N, N, P});
  std::map<SupportLabel, ClassMetrics> by;
  for (const auto& c : m.per_class) by[c.label] = c;
  CHECK(by[S].precision == 0.5);
  CHECK(by[S].recall == 1.0);
  CHECK(by[N].recall == 0.5);
  CHECK(by[P].f1 == 1.0);
  CHECK(by[N].support == 2);
  CHECK(m.macro_f1 == doctest::Approx((2.0 / 3 + 1.0 + 2.0 / 3) / 3));
  CHECK(m.count == 4);
  CHECK(code_of([] { macro_f1(Labels{S}, Labels{S, N}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { macro_f1(Labels{}, Labels{}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("pearson") {
  std::vector<double> x, y, z;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i + 1.0);
    z.push_back(-i);
  }
  CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(x, z) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(code_of([] { pearson(std::vector<double>{1, 2}, std::vector<double>{1}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { pearson(std::vector<double>{1}, std::vector<double>{1}); }) == ErrorCode::DegenerateInput);
  CHECK(code_of([] { pearson(std::vector<double>{1, 1}, std::vector<double>{1, 2}); }) == ErrorCode::DegenerateInput);
}

TEST_CASE("sample level metrics max-pool first") {
  auto lj = [](std::string rubric, std::size_t block, SupportLabel pred, SupportLabel gold) {
    return LabeledJudgment{"q", "a", std::move(rubric), block, pred, gold};
  };
  // single block: both levels agree
  const std::vector<LabeledJudgment> single{lj("r1", 0, S, S), lj("r2", 0, N, P)};
  const auto one = sample_level_metrics(single);
  CHECK(one.rubric_level.macro_f1 == one.sample_level.macro_f1);

  // two blocks: rubric level sees 4 pairs, sample level 2 pooled pairs
  const std::vector<LabeledJudgment> two{lj("r1", 0, N, N), lj("r1", 1, S, S), lj("r2", 0, P, N), lj("r2", 1, N, N)};
  const auto rep = sample_level_metrics(two);
  CHECK(rep.rubric_level.count == 4);
  CHECK(rep.sample_level.count == 2);
  // pooled: r1 pred S gold S; r2 pred P gold N -> S f1 1, P f1 0, N f1 0
  CHECK(rep.sample_level.macro_f1 == doctest::Approx(1.0 / 3));

  const std::vector<LabeledJudgment> ragged{lj("r1", 0, N, N), lj("r1", 1, S, S), lj("r2", 0, P, N)};
  CHECK(code_of([&] { sample_level_metrics(ragged); }) == ErrorCode::IncompleteCoverage);
}

TEST_CASE("compositions") {
  CHECK(enumerate_compositions(1).size() == 3);
  const auto three = enumerate_compositions(3);
  REQUIRE(three.size() == 10);
  CHECK(three.front() == Composition{3, 0, 0});
  CHECK(three[1] == Composition{2, 1, 0});
  CHECK(three.back() == Composition{0, 0, 3});
  for (std::size_t n = 0; n <= 10; ++n) {
    const auto all = enumerate_compositions(n);
    CHECK(all.size() == (n + 2) * (n + 1) / 2);
    std::set<Composition> unique(all.begin(), all.end());
    CHECK(unique.size() == all.size());
    for (const auto& c : all) CHECK(c[0] + c[1] + c[2] == n);
  }
}

TEST_CASE("augment respects pool sizes") {
  // pools S=0, P=1, N=5
  const std::vector<GoldRecord> records{gold_record("q", 0, Labels{P, N, N, N, N, N})};
  const auto out = augment(records, 1, 1.0);
  std::set<Composition> seen;
  for (const auto& r : out) {
    const auto& c = r.provenance.composition;
    seen.insert(c);
    const auto got = composition_of(r.record.gold_labels);
    if (r.provenance.downsampled) {
      // n > 5 with a not_support majority loses ceil(20%) of its not_support items
      const std::size_t n = c[0] + c[1] + c[2];
      CHECK(n > 5);
      CHECK(2 * c[2] > n);
      CHECK(got == Composition{c[0], c[1], c[2] - (c[2] + 4) / 5});
    } else {
      CHECK(got == c);
    }
    CHECK(r.record.rubric_ids.size() == r.record.gold_labels.size());
    std::set<std::string> ids(r.record.rubric_ids.begin(), r.record.rubric_ids.end());
    CHECK(ids.size() == r.record.rubric_ids.size());
    r.record.validate();
  }
  CHECK(seen.count(Composition{0, 1, 2}) == 1);
  CHECK(seen.count(Composition{1, 0, 2}) == 0);
  for (const auto& c : seen) {
    CHECK(c[0] == 0);
    CHECK(c[1] <= 1);
    CHECK(c[2] <= 5);
  }
}

TEST_CASE("augment pools per block and labels follow rubric ids") {
  const std::vector<GoldRecord> records{gold_record("q", 0, Labels{S, N}, 0), gold_record("q", 0, Labels{P}, 2),
                                        gold_record("q", 1, Labels{S}, 0)};
  std::map<std::pair<std::size_t, std::string>, SupportLabel> truth{
      {{0, "r0"}, S}, {{0, "r1"}, N}, {{0, "r2"}, P}, {{1, "r0"}, S}};
  const auto out = augment(records, 9, 1.0);
  std::set<std::string> keys;
  bool saw_three = false;
  for (const auto& r : out) {
    keys.insert(r.provenance.block_key);
    saw_three |= r.record.rubric_ids.size() == 3;
    for (std::size_t i = 0; i < r.record.rubric_ids.size(); ++i)
      CHECK(truth.at({r.record.block.index, r.record.rubric_ids[i]}) == r.record.gold_labels[i]);
  }
  CHECK(keys.size() == 2);
  CHECK(saw_three);
}

TEST_CASE("augment sampling is seeded and bounded") {
  Labels labels;
  for (int i = 0; i < 8; ++i) labels.push_back(kAllLabels[i % 3]);
  const std::vector<GoldRecord> records{gold_record("q", 0, labels)};
  const auto full = augment(records, 4, 1.0);
  const auto a = augment(records, 4, 0.1);
  const auto b = augment(records, 4, 0.1);
  const auto c = augment(records, 5, 0.1);
  REQUIRE(a.size() == b.size());
  CHECK(a.size() == static_cast<std::size_t>(std::llround(0.1 * full.size())));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(Json(a[i]) == Json(b[i]));
  bool differs = a.size() != c.size();
  for (std::size_t i = 0; i < std::min(a.size(), c.size()); ++i) differs |= Json(a[i]) != Json(c[i]);
  CHECK(differs);
  CHECK(augment(records, 4, 1e-9).size() == 1);
  CHECK(code_of([&] { augment(records, 4, 0.0); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { augment(records, 4, 1.5); }) == ErrorCode::ConfigError);
  CHECK(augment({}, 4, 0.5).empty());
}

TEST_CASE("augmented record json round trip") {
  const std::vector<GoldRecord> records{gold_record("q", 0, Labels{S, N})};
  for (const auto& r : augment(records, 2, 1.0)) {
    const auto back = Json(r).get<AugmentedRecord>();
    CHECK(Json(back) == Json(r));
  }
}

TEST_CASE("gold generation votes over samples") {
  // three samples per batch: S, N, S -> S ; second rubric N, N, P -> N
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{
      wrap("support,not_support"), wrap("not_support,not_support"), wrap("support,partial_support")});
  judge::Judge teacher(backend, judge::JudgeConfig{});
  RubricSet set{"q", {Rubric::make("a", "A", WeightClass::vital), Rubric::make("b", "B", WeightClass::okay)}};
  const std::vector<Block> blocks{{0, "text"}, {1, ""}};
  GoldOptions options;
  options.votes = 3;
  options.workers = 1;
  const auto gold = generate_gold({"q", "Q?", Workload::long_form}, blocks, set, teacher, judge::LabelFormat::csv,
                                  options);
  REQUIRE(gold.size() == 1);
  CHECK(gold[0].gold_labels == Labels{S, N});
  CHECK(gold[0].rubric_ids == std::vector<std::string>{"a", "b"});
  CHECK(gold[0].reasoning == "r");
  CHECK(backend->seen.size() == 3);
}

TEST_CASE("gold generation never imputes labels") {
  judge::JudgeConfig config;
  config.max_retries = 0;
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{wrap("bogus")});
  judge::Judge teacher(backend, config);
  RubricSet set{"q", {Rubric::make("a", "A", WeightClass::vital)}};
  CHECK(code_of([&] {
          generate_gold({"q", "Q?", Workload::long_form}, {{0, "t"}}, set, teacher, judge::LabelFormat::csv);
        }) == ErrorCode::VerificationFailed);
}
