#include "quarry/context.hpp"

#include <stdexcept>

namespace quarry {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::green: return "green";
    case Severity::yellow: return "yellow";
    case Severity::red: return "red";
  }
  return "red";
}

std::set<std::string, std::less<>> default_paragraph_elements() {
  return {"text:p", "text:h", "p", "h1", "h2", "h3", "h4", "h5", "h6"};
}

ExtractionContext::ExtractionContext(RunConfig config) : config_(std::move(config)) {}

std::any ExtractionContext::pop() {
  if (stack_.empty()) throw std::logic_error("user-object stack underflow");
  std::any top = std::move(stack_.back());
  stack_.pop_back();
  return top;
}

void ExtractionContext::emit(Severity severity, std::string code, std::string message,
                             NodeRef where) {
  Event e;
  e.severity = severity;
  e.code = std::move(code);
  e.ruleset = ruleset_;
  e.block_type = block_type_;
  e.rule = rule_;
  e.action = action_;
  e.message = std::move(message);
  e.location = node_path(where);
  // Red events always name who raised them.
  if (e.severity == Severity::red && e.rule.empty() && e.action.empty()) e.action = "engine";
  if (config_.trace && config_.trace_stream) {
    *config_.trace_stream << "[" << to_string(e.severity) << "] " << e.code << ": " << e.message
                          << '\n';
  }
  events_.push_back(std::move(e));
}

ExtractionContext::Attribution::Attribution(ExtractionContext& ctx, std::string ruleset,
                                             std::string block_type, std::string rule,
                                             std::string action)
    : ctx_(ctx), saved_(ctx.ruleset_, ctx.block_type_, ctx.rule_, ctx.action_) {
  ctx_.ruleset_ = std::move(ruleset);
  ctx_.block_type_ = std::move(block_type);
  ctx_.rule_ = std::move(rule);
  ctx_.action_ = std::move(action);
}

ExtractionContext::Attribution::~Attribution() {
  std::tie(ctx_.ruleset_, ctx_.block_type_, ctx_.rule_, ctx_.action_) = std::move(saved_);
}

}  // namespace quarry
