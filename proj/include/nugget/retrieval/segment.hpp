#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nugget/core/json.hpp"
#include "nugget/core/types.hpp"

namespace nugget::retrieval {

struct CorpusDocument {
  std::string doc_id;
  std::string text;
};

void to_json(Json& j, const CorpusDocument& d);
void from_json(const Json& j, CorpusDocument& d);

// Splits on '.', '!' or '?' (plus any closing quotes or brackets) followed by
// whitespace or end of text. Common abbreviations and single-letter initials
// do not end a sentence. Sentences come back with whitespace collapsed.
std::vector<std::string> split_sentences(std::string_view text);

// Window sizes for `sentence_count` sentences: as few windows as possible,
// each of at most `max_sentences`; a short tail borrows sentences from the
// windows before it until it reaches `min_sentences`. Only when no valid
// split exists is the tail folded into the previous window.
std::vector<std::size_t> window_sizes(std::size_t sentence_count, std::size_t min_sentences,
                                      std::size_t max_sentences);

// One passage per window, text = the window's sentences joined by spaces.
// Throws ConfigError unless 1 <= min_sentences <= max_sentences.
std::vector<Passage> segment_document(const CorpusDocument& doc, std::size_t min_sentences = 5,
                                      std::size_t max_sentences = 10);

// Same windows for text that did not come from the corpus.
std::vector<std::string> segment_text(std::string_view text, std::size_t min_sentences, std::size_t max_sentences);

}  // namespace nugget::retrieval
