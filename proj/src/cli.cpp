#include "quarry/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "quarry/caseimport.hpp"
#include "quarry/engine.hpp"
#include "quarry/report.hpp"
#include "quarry/text.hpp"
#include "quarry/xmlout.hpp"

namespace quarry {

namespace fs = std::filesystem;

std::string numbered_output(const std::string& path, std::size_t index, std::size_t count) {
  if (count <= 1) return path;
  fs::path p(path);
  std::string name = p.stem().string() + "-" + std::to_string(index) + p.extension().string();
  return (p.parent_path() / name).string();
}

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

struct Options {
  std::string ruleset;
  std::vector<std::string> inputs;
  std::string output;
  std::string report;
  std::string format = "json";
  std::string input_format = "auto";
  bool trace = false;
  std::string paragraph_elements;
  bool parallel = false;
  std::string root_element;
  std::string output_dir;
};

struct Job {
  DocumentReport report;
  std::string xml;
  std::string trace;
};

Job process(const RuleSet& rs, const Options& opt, const std::string& input,
            const std::string& output, InputFormat format, const RunConfig& base) {
  Job job;
  job.report.input = input;
  auto load_failure = [&](const std::string& msg) {
    job.report.loaded = false;
    job.report.events.push_back(
        {Severity::red, "load-error", rs.id, "", "", "loader", msg, ""});
    return job;
  };

  auto bytes = read_file(input);
  if (!bytes) return load_failure("cannot read " + input);
  job.report.sha256 = sha256_hex(*bytes);
  DocumentPtr doc;
  try {
    doc = load_document(*bytes, format);
  } catch (const LoadError& e) {
    return load_failure(e.what());
  }

  std::ostringstream trace;
  RunConfig cfg = base;
  cfg.trace_stream = &trace;
  ExtractionContext ctx(cfg);
  ctx.document = doc;
  std::string root = !opt.root_element.empty() ? opt.root_element
                     : !rs.output_root.empty() ? rs.output_root
                                               : "output";
  std::any result;
  try {
    result = run(rs, ctx, make_output(root));
  } catch (const std::exception& e) {
    ctx.emit(Severity::red, "engine-failed", e.what());
  }
  job.report.events = ctx.take_events();
  job.report.block_counts = std::move(ctx.block_counts);
  job.report.rule_fires = std::move(ctx.rule_fires);
  job.trace = trace.str();
  if (auto* c = std::any_cast<OutputCursor>(&result); c && c->doc) {
    job.xml = c->doc->serialize();
    job.report.output = output;
  }
  return job;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const RegistryExtension& extension) {
  Options opt;
  CLI::App app{"Rule-based extraction from office and XML documents", "quarry"};
  app.add_option("--ruleset,-r", opt.ruleset, "Rule-set XML file")->required();
  app.add_option("--input,-i,inputs", opt.inputs, "Input documents (XML or zip container)");
  app.add_option("--output,-o", opt.output,
                 "Output XML file; '-N' is inserted before the extension for several inputs");
  app.add_option("--report", opt.report, "Report file (default: standard output)");
  app.add_option("--format", opt.format, "Report format")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_option("--input-format", opt.input_format, "Input format")
      ->check(CLI::IsMember({"auto", "xml", "container"}));
  app.add_flag("--trace", opt.trace, "Mirror events to standard error");
  app.add_option("--paragraph-elements", opt.paragraph_elements,
                 "Comma-separated element names that count as paragraphs");
  app.add_flag("--parallel", opt.parallel, "Process inputs concurrently");
  app.add_option("--root-element", opt.root_element, "Root element name of the output");
  app.add_option("--output-dir", opt.output_dir,
                 "Directory for extracted media (default: next to --output)");
  app.set_version_flag("--version", std::string("quarry ") + kToolVersion);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (opt.inputs.empty()) {
    err << "quarry: at least one input is required\n";
    return 2;
  }

  Registry registry;
  register_builtin(registry);
  caseimport::register_caseimport(registry);
  if (extension) extension(registry);

  std::shared_ptr<const RuleSet> rs;
  {
    auto text = read_file(opt.ruleset);
    if (!text) {
      err << "quarry: cannot read rule set " << opt.ruleset << "\n";
      return 2;
    }
    try {
      rs = load_ruleset(*text, registry);
    } catch (const RuleSetError& e) {
      err << "quarry: " << opt.ruleset << ": " << e.what() << "\n";
      return 2;
    }
  }

  RunConfig base;
  if (!opt.paragraph_elements.empty()) {
    base.paragraph_elements.clear();
    for (auto name : split(opt.paragraph_elements, ','))
      if (!trim(name).empty()) base.paragraph_elements.emplace(trim(name));
  }
  base.trace = opt.trace;
  if (!opt.output_dir.empty()) {
    base.output_dir = opt.output_dir;
  } else if (!opt.output.empty()) {
    base.output_dir = fs::absolute(opt.output).parent_path();
  }
  InputFormat format = opt.input_format == "xml"         ? InputFormat::xml
                       : opt.input_format == "container" ? InputFormat::container
                                                         : InputFormat::automatic;

  const std::size_t n = opt.inputs.size();
  std::vector<std::string> outputs(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!opt.output.empty()) outputs[i] = numbered_output(opt.output, i + 1, n);

  std::vector<Job> jobs(n);
  if (opt.parallel && n > 1) {
    std::vector<std::future<Job>> futures;
    for (std::size_t i = 0; i < n; ++i)
      futures.push_back(std::async(std::launch::async, process, std::cref(*rs), std::cref(opt),
                                   std::cref(opt.inputs[i]), std::cref(outputs[i]), format,
                                   std::cref(base)));
    for (std::size_t i = 0; i < n; ++i) jobs[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < n; ++i)
      jobs[i] = process(*rs, opt, opt.inputs[i], outputs[i], format, base);
  }

  Report report;
  report.ruleset = rs->id;
  report.ruleset_warnings = rs->warnings;
  bool load_failed = false;
  for (auto& job : jobs) {
    err << job.trace;
    load_failed = load_failed || !job.report.loaded;
    if (!job.report.output.empty()) {
      std::ofstream o(job.report.output, std::ios::binary);
      o << job.xml;
      if (!o) {
        err << "quarry: cannot write " << job.report.output << "\n";
        return 2;
      }
    }
    report.documents.push_back(std::move(job.report));
  }

  std::string rendered =
      render_report(report, opt.format == "text" ? ReportFormat::text : ReportFormat::json);
  if (opt.report.empty() || opt.report == "-") {
    out << rendered;
  } else {
    std::ofstream o(opt.report, std::ios::binary);
    o << rendered;
    if (!o) {
      err << "quarry: cannot write report " << opt.report << "\n";
      return 2;
    }
  }

  if (load_failed) return 2;
  return report.status() == Severity::red ? 1 : 0;
}

}  // namespace quarry
