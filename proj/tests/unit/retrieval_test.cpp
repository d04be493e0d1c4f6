#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "nugget/core/rng.hpp"
#include "nugget/retrieval/calibration.hpp"
#include "nugget/retrieval/embedder.hpp"
#include "nugget/retrieval/index.hpp"
#include "nugget/retrieval/segment.hpp"
#include "nugget/retrieval/web.hpp"
#include "support.hpp"

using namespace nugget;
using namespace nugget::retrieval;
using nugget::testing::code_of;
using nugget::testing::TempDir;

namespace {

// Looks texts up in a fixed table; unknown texts get the zero vector.
class TableEmbedder : public Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, Embedding> table) : table_(std::move(table)) {}
  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    std::vector<Embedding> out;
    for (const auto& t : texts) {
      auto it = table_.find(t);
      out.push_back(it == table_.end() ? Embedding(2, 0.0f) : it->second);
    }
    return out;
  }
  std::string name() const override { return "table"; }

 private:
  std::map<std::string, Embedding> table_;
};

Passage corpus_passage(const std::string& text, std::size_t i = 0) { return Passage::make(text, CorpusSource{"d", i}); }

std::string sentences(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += "Sentence number " + std::to_string(i) + " is here. ";
  return out;
}

// Balanced accuracy of threshold t, computed directly.
double balanced_accuracy(double t, const std::vector<double>& rel, const std::vector<double>& irr) {
  double tp = 0, tn = 0;
  for (double s : rel) tp += s >= t ? 1 : 0;
  for (double s : irr) tn += s < t ? 1 : 0;
  return 0.5 * (tp / rel.size() + tn / irr.size());
}

}  // namespace

TEST_CASE("sentence splitting") {
  const auto s = split_sentences("Dr. Smith arrived.  He met J. R. Tolkien!   Was it 1950? \"Yes.\" Done");
  REQUIRE(s.size() == 5);
  CHECK(s[0] == "Dr. Smith arrived.");
  CHECK(s[1] == "He met J. R. Tolkien!");
  CHECK(s[2] == "Was it 1950?");
  CHECK(s[3] == "\"Yes.\"");
  CHECK(s[4] == "Done");
  CHECK(split_sentences("   ").empty());
  CHECK(split_sentences("Pi is 3.14 roughly.").size() == 1);
  CHECK(split_sentences("See e.g. the docs. Then stop.").size() == 2);
}

TEST_CASE("window sizes follow the segmentation rule") {
  CHECK(window_sizes(10, 5, 10) == std::vector<std::size_t>{10});
  CHECK(window_sizes(12, 5, 10) == std::vector<std::size_t>{7, 5});
  CHECK(window_sizes(0, 5, 10).empty());
  CHECK(window_sizes(3, 5, 10) == std::vector<std::size_t>{3});
  CHECK(code_of([] { window_sizes(5, 0, 3); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { window_sizes(5, 4, 3); }) == ErrorCode::ConfigError);
}

TEST_CASE("window sizes against a brute-force feasibility oracle") {
  for (std::size_t lo = 1; lo <= 6; ++lo) {
    for (std::size_t hi = lo; hi <= 8; ++hi) {
      for (std::size_t n = 1; n <= 60; ++n) {
        const auto sizes = window_sizes(n, lo, hi);
        std::size_t sum = 0;
        for (auto s : sizes) sum += s;
        REQUIRE(sum == n);
        if (n <= hi) {
          CHECK(sizes == std::vector<std::size_t>{n});
          continue;
        }
        // fewest windows k with k*lo <= n <= k*hi, if any
        std::size_t best_k = 0;
        for (std::size_t k = 1; k <= n && !best_k; ++k)
          if (k * lo <= n && n <= k * hi) best_k = k;
        if (best_k) {
          CHECK(sizes.size() == best_k);
          for (auto s : sizes) CHECK((s >= lo && s <= hi));
        } else {
          for (auto s : sizes) CHECK(s >= lo);
          CHECK(sizes.size() == (n + hi - 1) / hi - 1);
        }
      }
    }
  }
}

TEST_CASE("segment_document windows") {
  CHECK(segment_document({"d", ""}).empty());
  const auto one = segment_document({"d", sentences(10)}, 5, 10);
  CHECK(one.size() == 1);
  const auto two = segment_document({"d", sentences(12)}, 5, 10);
  REQUIRE(two.size() == 2);
  CHECK(split_sentences(two[0].text).size() == 7);
  CHECK(std::get<CorpusSource>(two[1].source).segment_index == 1);
  CHECK(std::get<CorpusSource>(two[1].source).doc_id == "d");
}

TEST_CASE("hash embedder") {
  HashEmbedder e(256);
  const std::vector<std::string> texts{"the eiffel tower", "THE  Eiffel tower", "volcanic ash clouds"};
  const auto v = e.embed(texts);
  auto dot = [](const Embedding& a, const Embedding& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  CHECK(v[0].size() == 256);
  CHECK(dot(v[0], v[0]) == doctest::Approx(1.0));
  CHECK(dot(v[0], v[1]) == doctest::Approx(1.0));
  CHECK(std::abs(dot(v[0], v[2])) < 0.3);
  CHECK(e.name() != HashEmbedder(128).name());
}

TEST_CASE("vector index search") {
  auto index = VectorIndex(std::make_shared<HashEmbedder>(1024));
  CHECK(index.search("anything", 3).empty());
  const std::vector<Passage> ps{corpus_passage("the eiffel tower in paris", 0), corpus_passage("honeybee waggle dance", 1),
                                corpus_passage("volcanic eruptions and ash", 2)};
  CHECK(index.add(ps) == 3);
  CHECK(index.add(ps) == 0);
  CHECK(index.size() == 3);
  const auto hits = index.search("honeybee waggle dance", 10);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].passage.id == ps[1].id);
  CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(index.search("x", 2).size() == 2);
  CHECK(index.score("volcanic eruptions and ash", ps[2].id).value() == doctest::Approx(1.0));
  CHECK_FALSE(index.score("x", "missing").has_value());
  CHECK(index.find(ps[0].id)->text == ps[0].text);
}

TEST_CASE("vector index ties keep insertion order and orthogonal scores are zero") {
  auto embedder = std::make_shared<TableEmbedder>(std::map<std::string, Embedding>{
      {"a", {1, 0}}, {"b", {1, 0}}, {"c", {0, 1}}, {"query", {1, 0}}});
  VectorIndex index(embedder);
  const std::vector<Passage> ps{corpus_passage("c"), corpus_passage("b"), corpus_passage("a")};
  index.add(ps);
  const auto hits = index.search("query", 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].passage.text == "b");
  CHECK(hits[1].passage.text == "a");
  CHECK(hits[2].passage.text == "c");
  CHECK(std::abs(hits[2].score) < 1e-6);
}

TEST_CASE("vector index save and load") {
  TempDir dir;
  auto embedder = std::make_shared<HashEmbedder>(64);
  VectorIndex index(embedder);
  const std::vector<Passage> ps{corpus_passage("alpha beta", 0), corpus_passage("gamma delta", 1)};
  index.add(ps);
  index.save(dir / "index.jsonl");
  const auto loaded = VectorIndex::load(dir / "index.jsonl", embedder);
  CHECK(loaded->size() == 2);
  CHECK(loaded->search("gamma delta", 1)[0].passage.id == ps[1].id);
  CHECK(code_of([&] { VectorIndex::load(dir / "index.jsonl", std::make_shared<HashEmbedder>(32)); }) ==
        ErrorCode::ConfigError);
}

TEST_CASE("threshold calibration examples") {
  const std::vector<double> rel{0.9, 0.8}, irr{0.2, 0.1};
  const auto c = calibrate_from_scores(rel, irr);
  CHECK(c.threshold > 0.2);
  CHECK(c.threshold <= 0.8);
  CHECK(c.balanced_accuracy == 1.0);
  CHECK(c.relevant.count == 2);
  CHECK(c.irrelevant.mean == doctest::Approx(0.15));

  const std::vector<double> same{0.5, 0.5};
  const auto d = calibrate_from_scores(same, same);
  CHECK(d.threshold == 0.5);
  CHECK(d.balanced_accuracy == 0.5);

  CHECK(code_of([&] { calibrate_from_scores(rel, {}); }) == ErrorCode::InsufficientLabels);
}

TEST_CASE("threshold calibration matches an exhaustive sweep") {
  Rng rng(99);
  for (int round = 0; round < 300; ++round) {
    std::vector<double> rel(1 + rng.below(6)), irr(1 + rng.below(6));
    for (auto& s : rel) s = static_cast<double>(rng.below(10)) / 10.0;
    for (auto& s : irr) s = static_cast<double>(rng.below(10)) / 10.0;
    std::vector<double> all(rel);
    all.insert(all.end(), irr.begin(), irr.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::vector<double> candidates{all.front()};
    for (std::size_t i = 1; i < all.size(); ++i) candidates.push_back((all[i - 1] + all[i]) / 2);
    double best_t = candidates.front(), best = balanced_accuracy(best_t, rel, irr);
    for (double t : candidates) {
      const double b = balanced_accuracy(t, rel, irr);
      if (b > best + 1e-12) {
        best = b;
        best_t = t;
      }
    }
    const auto c = calibrate_from_scores(rel, irr);
    CHECK(c.balanced_accuracy == doctest::Approx(best));
    CHECK(c.threshold == doctest::Approx(best_t));
  }
}

TEST_CASE("calibrate_threshold scores qrels through the index") {
  auto embedder = std::make_shared<TableEmbedder>(std::map<std::string, Embedding>{
      {"p1", {1, 0}}, {"p2", {0, 1}}, {"q", {1, 0}}});
  VectorIndex index(embedder);
  const std::vector<Passage> ps{corpus_passage("p1"), corpus_passage("p2")};
  index.add(ps);
  const std::vector<QrelRecord> qrels{{"q", ps[0].id, true}, {"q", ps[1].id, false}, {"q", "unknown", true}};
  const auto c = calibrate_threshold(qrels, index);
  CHECK(c.balanced_accuracy == 1.0);
  CHECK(c.relevant.count == 1);
}

TEST_CASE("retrieve_relevant filters with a best-hit fallback") {
  auto embedder = std::make_shared<TableEmbedder>(std::map<std::string, Embedding>{
      {"hi", {0.9f, 0.43589f}}, {"lo", {0.3f, 0.95394f}}, {"q", {1, 0}}, {"weak1", {0.4f, 0.91652f}}});
  VectorIndex index(embedder);
  const std::vector<Passage> ps{corpus_passage("hi"), corpus_passage("lo")};
  index.add(ps);
  ThresholdCalibration cal;
  cal.threshold = 0.5;
  const auto hits = retrieve_relevant(index, "q", cal);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].passage.text == "hi");

  VectorIndex weak(embedder);
  const std::vector<Passage> ws{corpus_passage("weak1"), corpus_passage("lo")};
  weak.add(ws);
  const auto fallback = retrieve_relevant(weak, "q", cal);
  REQUIRE(fallback.size() == 1);
  CHECK(fallback[0].passage.text == "weak1");

  VectorIndex empty(embedder);
  CHECK(retrieve_relevant(empty, "q", cal).empty());
}

TEST_CASE("html_to_text and url_encode") {
  const auto text = html_to_text("<html><head><style>p{}</style></head><body><h1>Title</h1><p>A &lt;b&gt; &quot;c&quot;"
                                 "</p><div>Next</div></body></html>");
  CHECK(text.find("Title") != std::string::npos);
  CHECK(text.find("A <b> \"c\"") != std::string::npos);
  CHECK(text.find("p{}") == std::string::npos);
  CHECK(text.find("Next") != std::string::npos);
  CHECK(url_encode("a b&c/é") == "a%20b%26c%2F%C3%A9");
  CHECK(url_encode("Az09-_.~") == "Az09-_.~");
}

namespace {

struct FakeProvider : SearchProvider {
  std::vector<SearchResult> results;
  std::vector<SearchResult> search(const std::string&, std::size_t) override { return results; }
};

struct FakeReader : PageReader {
  std::map<std::string, std::string> pages;
  std::string read(const std::string& url) override {
    auto it = pages.find(url);
    if (it == pages.end()) throw Error(ErrorCode::ProviderUnavailable, "404 " + url);
    return it->second;
  }
};

}  // namespace

TEST_CASE("web_fetch segments pages and skips failures") {
  FakeProvider provider;
  FakeReader reader;
  CHECK(web_fetch(provider, reader, "q", 3).empty());
  provider.results = {{"https://a", "A", ""}, {"https://missing", "M", ""}, {"https://b", "B", ""}};
  reader.pages = {{"https://a", sentences(6)}, {"https://b", sentences(14)}};
  const auto passages = web_fetch(provider, reader, "q", 3);
  REQUIRE(passages.size() == 3);
  CHECK(std::get<WebSource>(passages[0].source).url == "https://a");
  for (std::size_t i = 1; i < 3; ++i) {
    const auto n = split_sentences(passages[i].text).size();
    CHECK((n >= 5 && n <= 10));
  }
  CHECK(web_fetch(provider, reader, "q", 1).size() == 1);
}
