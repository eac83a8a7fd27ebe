// procline - scope, assemble, and instantiate software process lines.
//
// Single binary, subcommand style. Configuration comes from flags and files
// only, so every run is reproducible from its command line.

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "procline/charmap.hpp"
#include "procline/dot.hpp"
#include "procline/error.hpp"
#include "procline/fixture.hpp"
#include "procline/instantiate.hpp"
#include "procline/json_io.hpp"
#include "procline/line.hpp"
#include "procline/metrics.hpp"
#include "procline/model.hpp"
#include "procline/rules.hpp"
#include "procline/scoping.hpp"

namespace fs = std::filesystem;
using procline::Error;
using procline::Finding;

namespace {

void print_findings(const std::vector<Finding>& findings) {
  for (const auto& f : findings)
    std::cerr << f.code << " " << f.element << ": " << f.message << "\n";
}

bool has_hard_findings(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.code.rfind("W_", 0) != 0;
  });
}

std::string counts_summary(const procline::ProcessModel& model) {
  size_t pf_views = 0, cf_views = 0;
  for (const auto& v : model.views)
    (v.kind == procline::ViewKind::product_flow ? pf_views : cf_views) += 1;
  return std::to_string(model.activities.size()) + "/" +
         std::to_string(model.work_products.size()) + "/" +
         std::to_string(pf_views) + "/" + std::to_string(cf_views);
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, const std::string& format) {
  const auto doc = procline::parse_model_document(procline::read_file(path));
  std::vector<Finding> findings = procline::validate_model(doc.model);
  if (!doc.variation_points.empty() || !doc.ruleset_text.empty()) {
    const auto line = procline::to_line(doc);
    const auto line_findings = procline::validate_line(line);
    findings.insert(findings.end(), line_findings.begin(), line_findings.end());
  }
  print_findings(findings);

  const std::string summary = counts_summary(doc.model);
  if (format == "json") {
    procline::json out;
    out["valid"] = findings.empty();
    out["summary"] = summary;
    out["counts"] = {
        {"activities", doc.model.activities.size()},
        {"work_products", doc.model.work_products.size()},
        {"product_flow", doc.model.product_flow.size()},
        {"control_flow", doc.model.control_flow.size()},
        {"views", doc.model.views.size()},
        {"variation_points", doc.variation_points.size()},
    };
    out["findings"] = procline::json::array();
    for (const auto& f : findings)
      out["findings"].push_back(procline::finding_to_json(f));
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "counts: " << summary
              << " (activities/work_products/product_flow_views/"
                 "control_flow_views)\n";
    for (const auto& f : findings)
      std::cout << f.code << " " << f.element << ": " << f.message << "\n";
    std::cout << (findings.empty()
                      ? "OK: model is valid\n"
                      : "INVALID: " + std::to_string(findings.size()) +
                            " finding(s)\n");
  }
  return findings.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct ScopeArgs {
  std::vector<std::string> map_paths;
  std::string defs_path;
  std::string mapping_path;
  std::string constraints_path;
  std::string threshold = "1";
  int min_score = 4;
  std::string out;
  std::string format = "text";
};

int cmd_scope(const ScopeArgs& args) {
  const auto defs = procline::parse_defs(procline::read_file(args.defs_path));
  const auto mapping =
      procline::parse_mapping(procline::read_file(args.mapping_path), defs);

  std::vector<Finding> findings;
  std::vector<procline::CharacterizationMap> demand_maps;
  std::optional<procline::CharacterizationMap> process_map;
  for (const auto& path : args.map_paths) {
    auto map = procline::load_map(procline::read_file(path), defs, std::nullopt,
                                  &findings);
    if (map.kind == procline::MapKind::process) {
      if (process_map)
        throw Error("E_SCHEMA", "more than one process map given");
      process_map = std::move(map);
    } else {
      demand_maps.push_back(std::move(map));
    }
  }

  auto result = procline::demand_profile(demand_maps, mapping);
  findings.insert(findings.end(), result.findings.begin(), result.findings.end());

  std::vector<procline::ConflictRecord> conflicts;
  if (!args.constraints_path.empty()) {
    const auto constraints = procline::parse_constraints(
        procline::read_file(args.constraints_path), defs);
    auto constrained =
        procline::check_constraints(demand_maps, result.profile, constraints);
    result.profile = std::move(constrained.profile);
    conflicts = std::move(constrained.conflicts);
    findings.insert(findings.end(), constrained.findings.begin(),
                    constrained.findings.end());
  }

  const auto scope = procline::scope_capabilities(
      result.profile, procline::Fraction::parse(args.threshold), args.min_score);

  procline::ScopeDocument doc;
  doc.attributes = defs;
  doc.profile = result.profile;
  doc.scope = scope;
  doc.conflicts = conflicts;
  doc.findings = findings;
  if (process_map)
    doc.coverage = procline::match_processes(scope, *process_map);

  print_findings(findings);
  for (const auto& c : conflicts)
    std::cerr << "CONFLICT " << c.kept << " over " << c.dropped
              << " (score " << c.winning_score << ")\n";

  const std::string json_text = procline::print_scope_document(doc);
  if (!args.out.empty()) procline::write_file(args.out, json_text);
  if (args.format == "json") {
    std::cout << json_text;
  } else {
    const size_t total = result.profile.entities.size();
    for (const auto& [cap, decision] : scope.capabilities)
      std::cout << to_string(decision.klass) << " " << cap << " ("
                << to_string(decision.kind) << ", score " << decision.max_score
                << ", " << decision.provenance.size() << "/" << total
                << " entities)\n";
    for (const auto& c : conflicts)
      std::cout << "conflict: kept " << c.kept << ", dropped " << c.dropped
                << ", winning score " << c.winning_score << "\n";
    if (doc.coverage) {
      std::cout << "coverage: minimal cover {";
      for (size_t i = 0; i < doc.coverage->minimal_cover.size(); ++i)
        std::cout << (i ? ", " : "") << doc.coverage->minimal_cover[i];
      std::cout << "}";
      if (!doc.coverage->gaps.empty()) {
        std::cout << ", gaps {";
        for (size_t i = 0; i < doc.coverage->gaps.size(); ++i)
          std::cout << (i ? ", " : "") << doc.coverage->gaps[i];
        std::cout << "}";
      }
      std::cout << "\n";
    }
  }
  return has_hard_findings(findings) || !conflicts.empty() ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct BuildLineArgs {
  std::string model_path, scope_path, rules_path, binding_path;
  std::string defs_path;
  std::string out;
  std::string format = "text";
};

int cmd_build_line(const BuildLineArgs& args) {
  const auto scope_doc =
      procline::parse_scope_document(procline::read_file(args.scope_path));
  const auto defs = args.defs_path.empty()
                        ? scope_doc.attributes
                        : procline::parse_defs(procline::read_file(args.defs_path));
  const auto model_doc =
      procline::parse_model_document(procline::read_file(args.model_path));
  if (const auto report = procline::validate_model(model_doc.model);
      !report.empty()) {
    print_findings(report);
    return 1;
  }
  const auto ruleset =
      procline::parse_rules(procline::read_file(args.rules_path), defs);
  const auto binding_file =
      procline::parse_bindings(procline::read_file(args.binding_path));

  const auto line =
      procline::build_line(model_doc.model, scope_doc.scope, ruleset,
                           binding_file.bindings,
                           binding_file.parametric_defaults, defs);
  if (const auto report = procline::validate_line(line); !report.empty()) {
    print_findings(report);
    return 1;
  }

  const std::string json_text =
      procline::print_model_document(procline::from_line(line));
  if (!args.out.empty()) procline::write_file(args.out, json_text);
  if (args.format == "json") {
    std::cout << json_text;
  } else {
    const auto stats = procline::line_stats(line);
    std::cout << "core=" << stats.core_count;
    for (const auto& [vp, count] : stats.variant_counts)
      std::cout << " " << vp << "=" << count;
    std::cout << " total=" << stats.total << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct InstantiateArgs {
  std::string line_path;
  std::vector<std::string> context_paths;
  std::string out;
  std::string demands_path;
  std::string entity;
  std::string format = "text";
};

int cmd_instantiate(const InstantiateArgs& args) {
  const auto doc =
      procline::parse_model_document(procline::read_file(args.line_path));
  const auto line = procline::to_line(doc);
  if (const auto report = procline::validate_line(line); !report.empty()) {
    print_findings(report);
    return 1;
  }

  std::optional<procline::ParamMap> overlay;
  if (!args.demands_path.empty()) {
    if (args.entity.empty())
      throw Error("E_SCHEMA", "--demands requires --entity");
    const auto scope_doc =
        procline::parse_scope_document(procline::read_file(args.demands_path));
    const auto it = scope_doc.profile.entities.find(args.entity);
    if (it == scope_doc.profile.entities.end())
      throw Error("E_SCHEMA", "entity " + args.entity +
                                  " is not in the scope document");
    overlay = procline::apply_parametrics(line, it->second);
  }

  struct Result {
    std::string stem;
    procline::InstantiatedModel instance;
  };
  auto run_one = [&](const std::string& path) {
    const auto ctx =
        procline::parse_context(procline::read_file(path), line.attributes);
    Result r;
    r.stem = fs::path(path).stem().string();
    r.instance =
        procline::instantiate(line, ctx, overlay ? &*overlay : nullptr);
    return r;
  };

  // Multiple contexts run concurrently against the shared immutable line.
  std::vector<Result> results;
  if (args.context_paths.size() == 1) {
    results.push_back(run_one(args.context_paths.front()));
  } else {
    std::vector<std::future<Result>> futures;
    for (const auto& path : args.context_paths)
      futures.push_back(
          std::async(std::launch::async, [&run_one, path] { return run_one(path); }));
    for (auto& f : futures) results.push_back(f.get());
  }

  const bool multi = results.size() > 1;
  for (const auto& r : results) {
    print_findings(r.instance.warnings);
    const std::string json_text =
        procline::print_model_document(procline::from_instance(r.instance));
    std::string out_path;
    if (multi) {
      const fs::path dir = args.out.empty() ? fs::path(".") : fs::path(args.out);
      fs::create_directories(dir);
      out_path = (dir / (r.stem + ".inst.json")).string();
    } else if (!args.out.empty()) {
      out_path = args.out;
    }
    if (!out_path.empty()) procline::write_file(out_path, json_text);

    if (args.format == "json" && out_path.empty()) {
      std::cout << json_text;
    } else {
      std::cout << r.stem << ": included=[";
      for (size_t i = 0; i < r.instance.included_vps.size(); ++i)
        std::cout << (i ? ", " : "") << r.instance.included_vps[i];
      std::cout << "] excluded=[";
      for (size_t i = 0; i < r.instance.excluded_vps.size(); ++i)
        std::cout << (i ? ", " : "") << r.instance.excluded_vps[i];
      std::cout << "] elements="
                << procline::model_elements(r.instance.model).size();
      if (!out_path.empty()) std::cout << " -> " << out_path;
      std::cout << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_diff(const std::string& a_path, const std::string& b_path,
             const std::string& format) {
  const auto a = procline::to_instance(
      procline::parse_model_document(procline::read_file(a_path)));
  const auto b = procline::to_instance(
      procline::parse_model_document(procline::read_file(b_path)));
  const auto diff = procline::diff_instances(a, b);
  if (format == "json") {
    procline::json out;
    out["added"] = std::vector<std::string>(diff.added.begin(), diff.added.end());
    out["removed"] =
        std::vector<std::string>(diff.removed.begin(), diff.removed.end());
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& e : diff.added) std::cout << "+ " << e << "\n";
    for (const auto& e : diff.removed) std::cout << "- " << e << "\n";
    if (diff.added.empty() && diff.removed.empty())
      std::cout << "identical element sets\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_metrics(const std::string& line_path,
                const std::vector<std::string>& inst_paths,
                const std::string& format) {
  const auto line = procline::to_line(
      procline::parse_model_document(procline::read_file(line_path)));
  std::vector<procline::InstantiatedModel> instances;
  for (const auto& p : inst_paths)
    instances.push_back(procline::to_instance(
        procline::parse_model_document(procline::read_file(p))));

  procline::MetricsReport report;
  report.ratio = procline::commonality_ratio(instances);
  report.effort = procline::effort_comparison(line, instances);
  for (size_t i = 0; i < instances.size(); ++i)
    for (size_t j = i + 1; j < instances.size(); ++j)
      report.diffs.push_back({fs::path(inst_paths[i]).stem().string(),
                              fs::path(inst_paths[j]).stem().string(),
                              procline::diff_instances(instances[i], instances[j])});

  if (format == "json") {
    std::cout << procline::metrics_report_to_json(report).dump(2) << "\n";
  } else {
    std::cout << "commonality: " << report.ratio.intersection_size << "/"
              << report.ratio.union_size << " = " << report.ratio.value() << "\n"
              << "line effort: " << report.effort.line_effort << "\n"
              << "separate effort: " << report.effort.separate_effort << "\n"
              << "savings: " << report.effort.savings << "\n";
    for (const auto& d : report.diffs)
      std::cout << "diff " << d.a << " -> " << d.b << ": +"
                << d.diff.added.size() << " -" << d.diff.removed.size() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_export_dot(const std::string& path, const std::string& out) {
  const auto doc = procline::parse_model_document(procline::read_file(path));
  const std::string dot = procline::export_dot(doc.model, doc.variation_points);
  if (out.empty())
    std::cout << dot;
  else
    procline::write_file(out, dot);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_gen_fixture(const procline::FixtureSpec& spec, const std::string& out_dir) {
  const auto fixture = procline::gen_fixture(spec);
  const fs::path dir(out_dir.empty() ? "." : out_dir);
  fs::create_directories(dir);
  procline::write_file((dir / "line.json").string(),
                       procline::print_model_document(fixture.line));
  for (const auto& [name, text] : fixture.contexts)
    procline::write_file((dir / name).string(), text);
  std::cout << "wrote line.json (" << counts_summary(fixture.line.model)
            << ") and " << fixture.contexts.size() << " context files to "
            << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"software process line scoping and instantiation engine"};
  app.require_subcommand(1);

  std::string validate_path, validate_format = "text";
  auto* validate = app.add_subcommand("validate", "validate a model or line file");
  validate->add_option("model", validate_path, "model JSON file")->required();
  validate->add_option("--format", validate_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  ScopeArgs scope_args;
  auto* scope = app.add_subcommand(
      "scope", "derive capability demands and classify CORE/OPTIONAL/OUT");
  scope->add_option("maps", scope_args.map_paths, "characterization map CSVs")
      ->required()
      ->expected(-1);
  scope->add_option("--defs", scope_args.defs_path, "attribute definitions JSON")
      ->required();
  scope->add_option("--mapping", scope_args.mapping_path, "capability mapping JSON")
      ->required();
  scope->add_option("--constraints", scope_args.constraints_path,
                    "interdependency constraints JSON");
  scope->add_option("--threshold", scope_args.threshold,
                    "CORE coverage fraction (e.g. 1, 0.75, 2/3)");
  scope->add_option("--min-score", scope_args.min_score,
                    "minimum priority score for CORE");
  scope->add_option("-o,--out", scope_args.out, "write scope document here");
  scope->add_option("--format", scope_args.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  BuildLineArgs build_args;
  auto* build = app.add_subcommand("build-line",
                                   "bind scoped capabilities into a process line");
  build->add_option("model", build_args.model_path, "combined model JSON")->required();
  build->add_option("scope", build_args.scope_path, "scope document JSON")->required();
  build->add_option("rules", build_args.rules_path, "rule DSL file")->required();
  build->add_option("binding", build_args.binding_path, "capability binding JSON")
      ->required();
  build->add_option("--defs", build_args.defs_path,
                    "attribute definitions (defaults to the scope document's)");
  build->add_option("-o,--out", build_args.out, "write line JSON here");
  build->add_option("--format", build_args.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  InstantiateArgs inst_args;
  auto* inst = app.add_subcommand("instantiate",
                                  "resolve all variability for project contexts");
  inst->add_option("line", inst_args.line_path, "process line JSON")->required();
  inst->add_option("contexts", inst_args.context_paths, "context JSON files")
      ->required()
      ->expected(-1);
  inst->add_option("-o,--out", inst_args.out,
                   "output file (one context) or directory (several)");
  inst->add_option("--demands", inst_args.demands_path,
                   "scope document with parametric demands");
  inst->add_option("--entity", inst_args.entity,
                   "entity whose parametric demands apply");
  inst->add_option("--format", inst_args.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::string diff_a, diff_b, diff_format = "text";
  auto* diff = app.add_subcommand("diff", "element-set diff of two instances");
  diff->add_option("a", diff_a, "left instance JSON")->required();
  diff->add_option("b", diff_b, "right instance JSON")->required();
  diff->add_option("--format", diff_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::string metrics_line, metrics_format = "text";
  std::vector<std::string> metrics_insts;
  auto* metrics = app.add_subcommand("metrics",
                                     "commonality ratio and effort comparison");
  metrics->add_option("line", metrics_line, "process line JSON")->required();
  metrics->add_option("instances", metrics_insts, "instance JSON files")
      ->required()
      ->expected(-1);
  metrics->add_option("--format", metrics_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::string dot_path, dot_out;
  auto* dot = app.add_subcommand("export-dot", "Graphviz export, one digraph per view");
  dot->add_option("file", dot_path, "model or line JSON")->required();
  dot->add_option("-o,--out", dot_out, "write DOT text here");

  procline::FixtureSpec fixture_spec;
  std::string fixture_out;
  auto* gen = app.add_subcommand("gen-fixture",
                                 "generate a seeded desk-scale line with contexts");
  gen->add_option("--activities", fixture_spec.activities, "activity count");
  gen->add_option("--artifacts", fixture_spec.artifacts, "work product count");
  gen->add_option("--pf-views", fixture_spec.pf_views, "product-flow view count");
  gen->add_option("--cf-views", fixture_spec.cf_views, "control-flow view count");
  gen->add_option("--seed", fixture_spec.seed, "RNG seed");
  gen->add_option("-o,--out", fixture_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (*validate) return cmd_validate(validate_path, validate_format);
    if (*scope) return cmd_scope(scope_args);
    if (*build) return cmd_build_line(build_args);
    if (*inst) return cmd_instantiate(inst_args);
    if (*diff) return cmd_diff(diff_a, diff_b, diff_format);
    if (*metrics) return cmd_metrics(metrics_line, metrics_insts, metrics_format);
    if (*dot) return cmd_export_dot(dot_path, dot_out);
    if (*gen) return cmd_gen_fixture(fixture_spec, fixture_out);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
