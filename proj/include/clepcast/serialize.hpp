#pragma once

// Versioned JSON documents: the ingested panel artifact, resumable ensemble
// state and backtest reports. Doubles are written in shortest round-trip form
// so parse(serialize(x)) == x exactly.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clepcast/core.hpp"
#include "clepcast/engine.hpp"
#include "clepcast/evalharness.hpp"

namespace clepcast {

inline constexpr int kPanelFormatVersion = 1;
inline constexpr int kEnsembleFormatVersion = 1;
inline constexpr int kBacktestFormatVersion = 1;

std::string serialize_panel(const Panel& panel);
Panel parse_panel(std::string_view json_text);

std::string serialize_ensemble_states(std::span<const EnsembleState> states);
std::vector<EnsembleState> parse_ensemble_states(std::string_view json_text);

std::string serialize_backtest(std::span<const BacktestReport> reports);

}  // namespace clepcast
