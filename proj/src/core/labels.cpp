#include "nugget/core/labels.hpp"

namespace nugget {

std::string_view to_string(SupportLabel label) noexcept {
  switch (label) {
    case SupportLabel::support: return "support";
    case SupportLabel::partial_support: return "partial_support";
    case SupportLabel::not_support: break;
  }
  return "not_support";
}

std::optional<SupportLabel> label_from_string(std::string_view text) noexcept {
  for (SupportLabel label : kAllLabels)
    if (to_string(label) == text) return label;
  return std::nullopt;
}

std::string_view to_string(WeightClass weight_class) noexcept {
  return weight_class == WeightClass::vital ? "vital" : "okay";
}

std::optional<WeightClass> weight_class_from_string(std::string_view text) noexcept {
  if (text == "vital") return WeightClass::vital;
  if (text == "okay") return WeightClass::okay;
  return std::nullopt;
}

std::string_view to_string(Workload workload) noexcept {
  return workload == Workload::short_form ? "short_form" : "long_form";
}

std::optional<Workload> workload_from_string(std::string_view text) noexcept {
  if (text == "short_form") return Workload::short_form;
  if (text == "long_form") return Workload::long_form;
  return std::nullopt;
}

std::string_view to_string(JudgeMode mode) noexcept {
  return mode == JudgeMode::binary ? "binary" : "ternary";
}

std::optional<JudgeMode> judge_mode_from_string(std::string_view text) noexcept {
  if (text == "ternary") return JudgeMode::ternary;
  if (text == "binary") return JudgeMode::binary;
  return std::nullopt;
}

}  // namespace nugget
