// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace arc {

// Class index order matches the reward/penalty table: Decrease, Constant, Increase.
enum class LrDecision : std::uint8_t { kDecrease = 0, kConstant = 1, kIncrease = 2 };

inline constexpr std::size_t kNumDecisions = 3;
inline constexpr std::array<LrDecision, kNumDecisions> kAllDecisions = {
    LrDecision::kDecrease, LrDecision::kConstant, LrDecision::kIncrease};

// Priority used whenever two decisions tie: Constant first, then Decrease.
inline constexpr std::array<LrDecision, kNumDecisions> kTieBreakOrder = {
    LrDecision::kConstant, LrDecision::kDecrease, LrDecision::kIncrease};

inline constexpr double kIncreaseFactor = 1.618;
inline constexpr double kDecreaseFactor = 0.618;

constexpr double multiplier(LrDecision d) {
  switch (d) {
    case LrDecision::kDecrease: return kDecreaseFactor;
    case LrDecision::kConstant: return 1.0;
    case LrDecision::kIncrease: return kIncreaseFactor;
  }
  return 1.0;
}

constexpr std::size_t index_of(LrDecision d) { return static_cast<std::size_t>(d); }

constexpr LrDecision decision_at(std::size_t index) { return kAllDecisions.at(index); }

std::string_view to_string(LrDecision d);

// Accepts "Decrease" / "Constant" / "Increase" (case-insensitive).
LrDecision parse_decision(std::string_view name);

}  // namespace arc
