#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace nugget {

// Ternary support verdict of a rubric against a piece of text. The enumerator
// order is the label order: not_support < partial_support < support.
enum class SupportLabel : std::uint8_t { not_support = 0, partial_support = 1, support = 2 };

inline constexpr std::array<SupportLabel, 3> kAllLabels{
    SupportLabel::not_support, SupportLabel::partial_support, SupportLabel::support};

// Points a verdict contributes to a rubric reward.
constexpr double label_value(SupportLabel label) noexcept {
  switch (label) {
    case SupportLabel::support:
      return 1.0;
    case SupportLabel::partial_support:
      return 0.5;
    case SupportLabel::not_support:
      break;
  }
  return 0.0;
}

// Max-pooling operator; not_support is the identity.
constexpr SupportLabel label_max(SupportLabel a, SupportLabel b) noexcept { return a < b ? b : a; }

std::string_view to_string(SupportLabel label) noexcept;

// Exact snake_case spelling only ("support", "partial_support", "not_support").
std::optional<SupportLabel> label_from_string(std::string_view text) noexcept;

enum class WeightClass : std::uint8_t { vital, okay };

constexpr double weight_of(WeightClass weight_class) noexcept {
  return weight_class == WeightClass::vital ? 1.0 : 0.5;
}

std::string_view to_string(WeightClass weight_class) noexcept;
std::optional<WeightClass> weight_class_from_string(std::string_view text) noexcept;

enum class Workload : std::uint8_t { short_form, long_form };

std::string_view to_string(Workload workload) noexcept;
std::optional<Workload> workload_from_string(std::string_view text) noexcept;

// Ternary judging allows partial_support; binary judging does not.
enum class JudgeMode : std::uint8_t { ternary, binary };

std::string_view to_string(JudgeMode mode) noexcept;
std::optional<JudgeMode> judge_mode_from_string(std::string_view text) noexcept;

}  // namespace nugget
