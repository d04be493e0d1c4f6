#include "nugget/retrieval/segment.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "nugget/core/error.hpp"
#include "nugget/core/text.hpp"

namespace nugget::retrieval {

namespace {

constexpr std::array<std::string_view, 26> kAbbreviations{
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "inc", "ltd", "co", "corp",
    "no", "fig", "al", "approx", "dept", "est", "gen", "gov", "jan", "feb", "aug", "sept", "oct"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// `word` is the token that ends in the '.' under consideration (dot excluded).
bool is_abbreviation(std::string_view word) {
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\''))
    word.remove_prefix(1);
  if (word.empty()) return false;
  if (word.size() == 1) return std::isalpha(static_cast<unsigned char>(word[0])) != 0;
  // Dotted initialisms such as "e.g", "i.e", "U.S".
  if (word.find('.') != std::string_view::npos) {
    bool all_single = true;
    for (auto part : text::split(word, '.')) all_single = all_single && part.size() == 1;
    if (all_single) return true;
  }
  const auto lower = text::to_lower(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

}  // namespace

void to_json(Json& j, const CorpusDocument& d) { j = Json{{"doc_id", d.doc_id}, {"text", d.text}}; }

void from_json(const Json& j, CorpusDocument& d) {
  try {
    j.at("doc_id").get_to(d.doc_id);
    j.at("text").get_to(d.text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("corpus document: ") + e.what());
  }
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto sentence = text::collapse_whitespace(s.substr(start, end - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = end;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < s.size() && (s[j] == '.' || s[j] == '!' || s[j] == '?' || is_closer(s[j]))) ++j;
    if (j < s.size() && !is_space(s[j])) continue;
    if (c == '.' && j == i + 1) {
      std::size_t w = i;
      while (w > start && !is_space(s[w - 1])) --w;
      if (is_abbreviation(s.substr(w, i - w))) continue;
    }
    emit(j);
    i = j - 1;
  }
  emit(s.size());
  return out;
}

std::vector<std::size_t> window_sizes(std::size_t n, std::size_t min_sentences, std::size_t max_sentences) {
  if (min_sentences < 1 || min_sentences > max_sentences)
    throw Error(ErrorCode::ConfigError, "segmentation needs 1 <= min_sentences <= max_sentences");
  if (n == 0) return {};
  if (n <= max_sentences) return {n};
  const std::size_t k = (n + max_sentences - 1) / max_sentences;
  std::vector<std::size_t> sizes(k, max_sentences);
  sizes.back() = n - (k - 1) * max_sentences;
  std::size_t deficit = sizes.back() < min_sentences ? min_sentences - sizes.back() : 0;
  for (std::size_t i = k - 1; deficit > 0 && i-- > 0;) {
    const std::size_t give = std::min(deficit, sizes[i] - min_sentences);
    sizes[i] -= give;
    sizes.back() += give;
    deficit -= give;
  }
  if (deficit > 0) {
    const std::size_t tail = sizes.back();
    sizes.pop_back();
    sizes.back() += tail;
  }
  return sizes;
}

std::vector<std::string> segment_text(std::string_view text, std::size_t min_sentences, std::size_t max_sentences) {
  const auto sentences = split_sentences(text);
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (std::size_t size : window_sizes(sentences.size(), min_sentences, max_sentences)) {
    std::string window;
    for (std::size_t i = pos; i < pos + size; ++i) {
      if (i > pos) window += ' ';
      window += sentences[i];
    }
    out.push_back(std::move(window));
    pos += size;
  }
  return out;
}

std::vector<Passage> segment_document(const CorpusDocument& doc, std::size_t min_sentences,
                                      std::size_t max_sentences) {
  std::vector<Passage> out;
  auto windows = segment_text(doc.text, min_sentences, max_sentences);
  for (std::size_t i = 0; i < windows.size(); ++i)
    out.push_back(Passage::make(std::move(windows[i]), CorpusSource{doc.doc_id, i}));
  return out;
}

}  // namespace nugget::retrieval
