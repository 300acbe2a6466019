#include "quarry/rulemodel.hpp"
#include "quarry/xmlout.hpp"

namespace quarry {

Registry& register_builtin(Registry& r) {
  r.add_selector({"identity", "de.knowit.phoenix.selectors.IdentitySelector"},
                 make_identity_selector);
  r.add_selector({"position", "de.knowit.phoenix.selectors.PositionSelector"},
                 make_position_selector);
  r.add_selector({"start", "example.selectors.StartingNodeSelector"}, make_start_node_selector);
  r.add_selector({"xpath", "de.knowit.phoenix.selectors.XPathSelector"}, make_xpath_selector);
  r.add_selector({"regexp", "de.knowit.phoenix.selectors.RegExpSelector",
                  "de.knowit.phoenix.selectors.RegexpSelector"},
                 make_regexp_selector);
  r.add_selector({"styled"}, make_styled_selector);

  r.add_action({"trace", "de.knowit.phoenix.actions.Trace"},
               [](const Params& params, const std::optional<SelectorSpec>& source) {
                 check_param_keys(params, {}, "trace");
                 if (source) throw ConfigError("trace takes no <Source>");
                 return std::make_shared<const TraceAction>();
               });
  r.add_action({"descend", "de.knowit.phoenix.xmlUserObject.DescendNodePreAction"},
               DescendNodeAction::create);
  r.add_action({"set-node", "de.knowit.phoenix.xmlUserObject.SetNodeAction"},
               SetNodeAction::create);
  return r;
}

}  // namespace quarry
