#include "nugget/core/json.hpp"

#include "nugget/core/error.hpp"

namespace nugget {

namespace {

template <typename Enum, typename Parse>
Enum parse_enum(const Json& j, Parse parse, const char* what) {
  if (!j.is_string()) throw Error(ErrorCode::SchemaViolation, std::string(what) + " must be a string");
  auto value = parse(j.get_ref<const std::string&>());
  if (!value) throw Error(ErrorCode::SchemaViolation, "unknown " + std::string(what) + " '" + j.get<std::string>() + "'");
  return *value;
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name))
    throw Error(ErrorCode::SchemaViolation, std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

void to_json(Json& j, SupportLabel label) { j = std::string(to_string(label)); }
void from_json(const Json& j, SupportLabel& label) { label = parse_enum<SupportLabel>(j, label_from_string, "support label"); }
void to_json(Json& j, WeightClass weight_class) { j = std::string(to_string(weight_class)); }
void from_json(const Json& j, WeightClass& weight_class) {
  weight_class = parse_enum<WeightClass>(j, weight_class_from_string, "weight class");
}
void to_json(Json& j, Workload workload) { j = std::string(to_string(workload)); }
void from_json(const Json& j, Workload& workload) { workload = parse_enum<Workload>(j, workload_from_string, "workload"); }

void to_json(Json& j, const Question& q) { j = Json{{"id", q.id}, {"text", q.text}, {"workload", q.workload}}; }
void from_json(const Json& j, Question& q) {
  q.id = field(j, "id").get<std::string>();
  q.text = field(j, "text").get<std::string>();
  q.workload = j.contains("workload") ? j.at("workload").get<Workload>() : Workload::long_form;
}

void to_json(Json& j, const PassageSource& source) {
  if (const auto* c = std::get_if<CorpusSource>(&source))
    j = Json{{"kind", "corpus"}, {"doc_id", c->doc_id}, {"segment_index", c->segment_index}};
  else
    j = Json{{"kind", "web"}, {"url", std::get<WebSource>(source).url}};
}

void from_json(const Json& j, PassageSource& source) {
  const auto kind = field(j, "kind").get<std::string>();
  if (kind == "corpus")
    source = CorpusSource{field(j, "doc_id").get<std::string>(), field(j, "segment_index").get<std::size_t>()};
  else if (kind == "web")
    source = WebSource{field(j, "url").get<std::string>()};
  else
    throw Error(ErrorCode::SchemaViolation, "unknown passage source kind '" + kind + "'");
}

void to_json(Json& j, const Passage& p) {
  j = Json{{"id", p.id}, {"text", p.text}, {"source", p.source}};
  j["score"] = p.score ? Json(*p.score) : Json(nullptr);
}

void from_json(const Json& j, Passage& p) {
  p.text = field(j, "text").get<std::string>();
  p.id = j.contains("id") ? j.at("id").get<std::string>() : passage_id_for(p.text);
  p.source = field(j, "source").get<PassageSource>();
  if (j.contains("score") && !j.at("score").is_null())
    p.score = j.at("score").get<double>();
  else
    p.score.reset();
}

void to_json(Json& j, const Rubric& r) {
  j = Json{{"id", r.id},
           {"text", r.text},
           {"weight_class", r.weight_class},
           {"weight", r.weight},
           {"provenance", r.provenance}};
}

void from_json(const Json& j, Rubric& r) {
  r.id = field(j, "id").get<std::string>();
  r.text = field(j, "text").get<std::string>();
  r.weight_class = field(j, "weight_class").get<WeightClass>();
  r.weight = j.contains("weight") ? j.at("weight").get<double>() : weight_of(r.weight_class);
  r.provenance = j.value("provenance", std::vector<std::string>{});
}

void to_json(Json& j, const RubricSet& s) { j = Json{{"question_id", s.question_id}, {"rubrics", s.rubrics}}; }
void from_json(const Json& j, RubricSet& s) {
  s.question_id = field(j, "question_id").get<std::string>();
  s.rubrics = field(j, "rubrics").get<std::vector<Rubric>>();
  s.validate();
}

void to_json(Json& j, const Block& b) { j = Json{{"index", b.index}, {"text", b.text}}; }
void from_json(const Json& j, Block& b) {
  b.index = field(j, "index").get<std::size_t>();
  b.text = field(j, "text").get<std::string>();
}

void to_json(Json& j, const Judgment& jd) {
  j = Json{{"rubric_id", jd.rubric_id}, {"block_index", jd.block_index}, {"label", jd.label}};
}
void from_json(const Json& j, Judgment& jd) {
  jd.rubric_id = field(j, "rubric_id").get<std::string>();
  jd.block_index = field(j, "block_index").get<std::size_t>();
  jd.label = field(j, "label").get<SupportLabel>();
}

void to_json(Json& j, const Answer& a) {
  j = Json{{"question_id", a.question_id}, {"text", a.text}, {"generator", a.generator}};
}
void from_json(const Json& j, Answer& a) {
  a.question_id = field(j, "question_id").get<std::string>();
  a.text = field(j, "text").get<std::string>();
  a.generator = j.value("generator", std::string{});
}

void to_json(Json& j, const RubricContribution& c) {
  j = Json{{"rubric_id", c.rubric_id}, {"label", c.label}, {"contribution", c.contribution}};
}
void from_json(const Json& j, RubricContribution& c) {
  c.rubric_id = field(j, "rubric_id").get<std::string>();
  c.label = field(j, "label").get<SupportLabel>();
  c.contribution = field(j, "contribution").get<double>();
}

void to_json(Json& j, const RewardScore& r) { j = Json{{"value", r.value}, {"per_rubric", r.per_rubric}}; }
void from_json(const Json& j, RewardScore& r) {
  r.value = field(j, "value").get<double>();
  r.per_rubric = field(j, "per_rubric").get<std::vector<RubricContribution>>();
}

void to_json(Json& j, const GoldRecord& g) {
  j = Json{{"question_id", g.question_id},
           {"block", g.block},
           {"rubric_ids", g.rubric_ids},
           {"gold_labels", g.gold_labels},
           {"reasoning", g.reasoning}};
}
void from_json(const Json& j, GoldRecord& g) {
  g.question_id = field(j, "question_id").get<std::string>();
  g.block = field(j, "block").get<Block>();
  g.rubric_ids = field(j, "rubric_ids").get<std::vector<std::string>>();
  g.gold_labels = field(j, "gold_labels").get<std::vector<SupportLabel>>();
  g.reasoning = j.value("reasoning", std::string{});
  g.validate();
}

}  // namespace nugget
