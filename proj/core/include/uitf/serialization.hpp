#pragma once

#include <filesystem>
#include <string>

#include "uitf/attention.hpp"
#include "uitf/extrapolation.hpp"
#include "uitf/harness.hpp"
#include "uitf/rope.hpp"

namespace uitf::ser {

/// The cross-command schedule document:
/// { "base", "axis_dim", "index_origin", "freqs", "corrections":
///   [{"index", "old", "new"}] }.
/// Emitted sorted and indented, so identical schedules produce identical
/// bytes. Parsing accepts missing index_origin (1) and corrections ([]);
/// a document without "freqs" yields the canonical schedule for its config.
std::string schedule_to_json(const rope::FrequencySchedule& schedule);
rope::FrequencySchedule schedule_from_json(const std::string& text);

void save_schedule(const std::filesystem::path& path, const rope::FrequencySchedule& schedule);
rope::FrequencySchedule load_schedule(const std::filesystem::path& path);

/// {"per_head":[...], "h_min":..., "h_max":...}
std::string entropy_to_json(const attn::EntropyReport& report);

/// {"per_head":[...]}
std::string focus_to_json(const attn::FocusMap& map);

std::string grid_stats_to_json(const harness::GridStats& stats);

/// One iteration per line, then one closing status line.
std::string rdfc_log_to_json_lines(const extrap::RdfcLog& log);

/// {"seed", "heads", "feature_dim", "head_dim", "value_dim"} -> seeded layer.
harness::ToyLayer layer_from_json(const std::string& text);

} // namespace uitf::ser
