#include "quarry/report.hpp"

#include <algorithm>

#include <json.hpp>

namespace quarry {

Severity worst(const std::vector<Event>& events) {
  Severity s = Severity::green;
  for (const auto& e : events) s = std::max(s, e.severity);
  return s;
}

Severity DocumentReport::status() const { return loaded ? worst(events) : Severity::red; }

Severity Report::status() const {
  Severity s = Severity::green;
  for (const auto& d : documents) s = std::max(s, d.status());
  return s;
}

namespace {

nlohmann::json event_json(const Event& e) {
  return {{"severity", std::string(to_string(e.severity))},
          {"code", e.code},
          {"ruleset", e.ruleset},
          {"block", e.block_type},
          {"rule", e.rule},
          {"action", e.action},
          {"message", e.message},
          {"location", e.location}};
}

std::string render_json(const Report& r) {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : r.documents) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : d.events) events.push_back(event_json(e));
    docs.push_back({{"input", d.input},
                    {"sha256", d.sha256},
                    {"output", d.output},
                    {"loaded", d.loaded},
                    {"status", std::string(to_string(d.status()))},
                    {"block_counts", d.block_counts},
                    {"rule_fires", d.rule_fires},
                    {"events", std::move(events)}});
  }
  nlohmann::json j = {{"tool", {{"name", "quarry"}, {"version", r.tool_version}}},
                      {"ruleset", {{"id", r.ruleset}, {"warnings", r.ruleset_warnings}}},
                      {"status", std::string(to_string(r.status()))},
                      {"documents", std::move(docs)}};
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

const char* marker(Severity s) {
  switch (s) {
    case Severity::green: return "[ ok ]";
    case Severity::yellow: return "[warn]";
    case Severity::red: return "[FAIL]";
  }
  return "[????]";
}

std::string render_text(const Report& r) {
  std::string out = "quarry " + r.tool_version + "  ruleset " + r.ruleset + "  status " +
                    std::string(to_string(r.status())) + "\n";
  for (const auto& w : r.ruleset_warnings) out += "  ruleset warning: " + w + "\n";
  for (const auto& d : r.documents) {
    out += std::string(marker(d.status())) + " " + d.input;
    if (!d.output.empty()) out += " -> " + d.output;
    out += "\n";
    for (const auto& e : d.events) {
      out += "  " + std::string(marker(e.severity)) + " " + e.code;
      std::string who = e.block_type;
      if (!e.rule.empty()) who += (who.empty() ? "" : "/") + e.rule;
      if (!e.action.empty()) who += (who.empty() ? "" : " ") + std::string("(") + e.action + ")";
      if (!who.empty()) out += " " + who;
      out += ": " + e.message;
      if (!e.location.empty()) out += " @ " + e.location;
      out += "\n";
    }
  }
  return out;
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
  return format == ReportFormat::json ? render_json(report) : render_text(report);
}

}  // namespace quarry
