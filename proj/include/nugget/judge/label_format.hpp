#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nugget/core/labels.hpp"

namespace nugget::judge {

// The ten answer layouts the verifier is trained and prompted with.
enum class LabelFormat {
  json,
  csv,
  python_list,
  yaml,
  markdown,
  xml,
  tsv,
  numbered,
  comma_separated,
  pipe_separated,
};

inline constexpr std::array<LabelFormat, 10> kAllFormats{
    LabelFormat::json,     LabelFormat::csv, LabelFormat::python_list, LabelFormat::yaml,
    LabelFormat::markdown, LabelFormat::xml, LabelFormat::tsv,         LabelFormat::numbered,
    LabelFormat::comma_separated, LabelFormat::pipe_separated};

std::string_view to_string(LabelFormat format) noexcept;
std::optional<LabelFormat> label_format_from_string(std::string_view id) noexcept;

// Sentence substituted for {format_instruction} in the verification prompts.
std::string_view instruction_text(LabelFormat format) noexcept;

// Canonical rendering, e.g. yaml -> "- support\n- not_support".
std::string serialize_labels(std::span<const SupportLabel> labels, LabelFormat format);

// Parses exactly `expected` labels laid out in `format`.
//
// Tokens are matched case-insensitively after trimming whitespace, but only
// the three snake_case label names are accepted. A surrounding ``` fence is
// ignored. Errors, checked in this order:
//   FormatViolation  - the container or line layout is malformed
//   UnknownToken     - an item is not a label name
//   CountMismatch    - the number of labels differs from `expected`
//   BinaryViolation  - partial_support appears under JudgeMode::binary
std::vector<SupportLabel> parse_labels(std::string_view payload, LabelFormat format,
                                       std::size_t expected, JudgeMode mode = JudgeMode::ternary);

}  // namespace nugget::judge
