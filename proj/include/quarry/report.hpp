#pragma once

#include <map>
#include <string>
#include <vector>

#include "quarry/context.hpp"

namespace quarry {

inline constexpr const char* kToolVersion = "0.1.0";

struct DocumentReport {
  std::string input;
  std::string sha256;
  std::string output;
  bool loaded = true;
  std::vector<Event> events;
  std::map<std::string, std::size_t> block_counts;
  std::map<std::string, std::size_t> rule_fires;

  Severity status() const;
};

struct Report {
  std::string tool_version = kToolVersion;
  std::string ruleset;
  std::vector<std::string> ruleset_warnings;
  std::vector<DocumentReport> documents;

  Severity status() const;
};

/// Green for no events at all above green, else the worst severity seen.
Severity worst(const std::vector<Event>& events);

enum class ReportFormat { json, text };

/// JSON: keys sorted, two-space indent, no timestamps. Text: one line per event.
std::string render_report(const Report& report, ReportFormat format);

}  // namespace quarry
