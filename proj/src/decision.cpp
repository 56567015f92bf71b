// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/decision.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "arc/errors.hpp"

namespace arc {

std::string_view to_string(LrDecision d) {
  switch (d) {
    case LrDecision::kDecrease: return "Decrease";
    case LrDecision::kConstant: return "Constant";
    case LrDecision::kIncrease: return "Increase";
  }
  return "?";
}

LrDecision parse_decision(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "decrease") return LrDecision::kDecrease;
  if (lower == "constant") return LrDecision::kConstant;
  if (lower == "increase") return LrDecision::kIncrease;
  throw DataError("unknown decision '" + std::string(name) + "'");
}

}  // namespace arc
