#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aceei/circuit.hpp"
#include "aceei/gadgets.hpp"
#include "aceei/grid_search.hpp"
#include "aceei/json_io.hpp"
#include "aceei/market.hpp"
#include "aceei/oracle.hpp"
#include "aceei/pipeline.hpp"
#include "aceei/sat.hpp"
#include "aceei/tatonnement.hpp"

#ifndef ACEEI_VERSION
#define ACEEI_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace aceei;

namespace {

enum Exit : int { kOk = 0, kVerifyFailed = 1, kParse = 2, kBudget = 3, kThreshold = 4 };

struct Options {
  std::string economy_path, solution_path, circuit_path, cnf_path, out_dir;
  std::string alpha = "0", beta = "1/10", epsilon = "1/10";
  std::string grid_step, price_max, threshold;
  std::string method = "oracle";
  std::vector<std::string> pins;
  std::uint64_t seed = 1;
  std::uint64_t max_enum = 1'000'000;
  std::uint64_t max_nodes = 200'000'000;
  std::size_t max_grid_points = 2'000'000, max_vertices = 2'000'000;
  std::int64_t n_x = 512;
  bool float_view = false;
  bool all_solutions = false;
  // generate / sweep
  std::size_t students = 20, courses = 10, max_bundle = 3, count = 100;
};

class Run {
 public:
  Run(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {
    if (!opt_.out_dir.empty()) fs::create_directories(opt_.out_dir);
    manifest_["command"] = command_;
    manifest_["inputs"] = Json::array();
    manifest_["config"] = Json::object();
    manifest_["tool_version"] = ACEEI_VERSION;
    manifest_["seed"] = opt_.seed;
    manifest_["threads"] = lab_threads();
  }
  // Exactly one manifest per run, whatever the exit path.
  ~Run() {
    manifest_["exit_code"] = exit_code;
    try {
      if (to_dir()) {
        write_json_file(fs::path(opt_.out_dir) / "manifest.json", manifest_);
        return;
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
    }
    std::cerr << manifest_.dump() << '\n';
  }

  void input(const std::string& path) { manifest_["inputs"].push_back(path); }
  Json& config() { return manifest_["config"]; }
  bool to_dir() const { return !opt_.out_dir.empty(); }
  fs::path path(const std::string& name) const { return fs::path(opt_.out_dir) / name; }

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path(name).string() + "'");
    out << text;
  }

  int exit_code = kOk;

 private:
  std::string command_;
  const Options& opt_;
  Json manifest_;
};

Rational flag_rational(const std::string& name, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw FormatError("--" + name + ": " + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string table_header() { return "method\talpha_sq\talpha\texistence_bound\twithin_bound\tpassed"; }

std::string table_row(const std::string& method, const Economy& e, const ClearingReport& r) {
  const bool within = r.alpha_sq <= existence_bound_sq(e);
  return method + "\t" + to_string(r.alpha_sq) + "\t" + fmt_double(r.alpha) + "\t" + fmt_double(existence_bound(e)) +
         "\t" + (within ? "yes" : "no") + "\t" + (r.passed() ? "yes" : "no");
}

Json solution_record(const Economy& e, const Solution& s, const ClearingReport& r, bool float_view) {
  Json doc;
  doc["solution"] = solution_to_json(e, s);
  doc["report"] = report_to_json(e, r, float_view);
  return doc;
}

// ---- verify ----

int cmd_verify(const Options& opt, Run& run) {
  run.input(opt.economy_path);
  run.input(opt.solution_path);
  const Rational alpha = flag_rational("alpha", opt.alpha);
  const Rational beta = flag_rational("beta", opt.beta);
  run.config()["alpha"] = to_string(alpha);
  run.config()["beta"] = to_string(beta);
  const Economy e = economy_from_json(read_json_file(opt.economy_path));
  const Solution s = solution_from_json(e, read_json_file(opt.solution_path));
  const ClearingReport r = verify_aceei(e, s, AlphaBound::of(alpha), beta);
  const Json doc = report_to_json(e, r, opt.float_view);
  std::cout << doc.dump(2) << '\n';
  if (run.to_dir()) write_json_file(run.path("report.json"), doc);
  run.exit_code = r.passed() ? kOk : kVerifyFailed;
  return run.exit_code;
}

// ---- solve ----

int cmd_solve(const Options& opt, Run& run) {
  run.input(opt.economy_path);
  const Rational beta = flag_rational("beta", opt.beta);
  const Economy e = economy_from_json(read_json_file(opt.economy_path));
  run.config()["method"] = opt.method;
  run.config()["beta"] = to_string(beta);

  std::vector<std::pair<Solution, ClearingReport>> found;
  if (opt.method == "oracle") {
    OracleOptions o;
    o.max_enumeration = opt.max_enum;
    run.config()["max_enum"] = opt.max_enum;
    run.config()["all"] = opt.all_solutions;
    std::vector<Solution> sols;
    if (opt.all_solutions) {
      sols = enumerate_all_exact_ceei(e, beta, o);
    } else if (auto s = enumerate_exact_ceei(e, beta, o)) {
      sols.push_back(std::move(*s));
    }
    for (auto& s : sols) {
      auto r = verify_aceei(e, s, AlphaBound::of(0), beta);
      found.emplace_back(std::move(s), std::move(r));
    }
  } else if (opt.method == "grid") {
    const Rational alpha = flag_rational("alpha", opt.alpha);
    GridSpec grid;
    grid.step = opt.grid_step.empty() ? make_rational(1, 20) : flag_rational("grid-step", opt.grid_step);
    grid.price_max = opt.price_max.empty() ? Rational(1 + beta) : flag_rational("price-max", opt.price_max);
    grid.max_nodes = opt.max_nodes;
    Json pins = Json::object();
    for (const auto& pin : opt.pins) {
      const auto eq = pin.find('=');
      if (eq == std::string::npos) throw FormatError("--pin expects course=price, got '" + pin + "'");
      const std::string id = pin.substr(0, eq);
      const auto j = e.find_course(id);
      if (!j) throw FormatError("--pin: unknown course '" + id + "'");
      grid.pinned[*j] = flag_rational("pin", pin.substr(eq + 1));
      pins[id] = to_string(grid.pinned[*j]);
    }
    run.config()["alpha"] = to_string(alpha);
    run.config()["grid_step"] = to_string(grid.step);
    run.config()["price_max"] = to_string(grid.price_max);
    run.config()["pinned"] = pins;
    run.config()["max_nodes"] = opt.max_nodes;
    for (auto& s : grid_price_search(e, grid, beta, AlphaBound::of(alpha))) {
      // Pinned courses are exogenous, so the report's alpha skips them like the search does.
      auto r = clearing_error(e, s.prices, s.allocation);
      r.alpha_sq = grid_alpha_sq(e, grid, s.prices, s.allocation);
      r.alpha = std::sqrt(to_double(r.alpha_sq));
      found.emplace_back(std::move(s), std::move(r));
    }
  } else if (opt.method == "tatonnement") {
    TatonnementConfig t;
    t.seed = opt.seed;
    run.config()["step_up"] = to_string(t.step_up);
    run.config()["step_down"] = to_string(t.step_down);
    run.config()["max_iters"] = t.max_iters;
    run.config()["restart_seeds"] = t.restart_seeds;
    run.config()["budget_spread"] = to_string(t.budget_spread);
    auto res = tatonnement_solve(e, t, beta);
    found.emplace_back(std::move(res.solution), std::move(res.report));
  } else {
    throw FormatError("--method must be oracle, grid or tatonnement");
  }

  Json out = Json::array();
  for (const auto& [s, r] : found) out.push_back(solution_record(e, s, r, opt.float_view));
  std::ostringstream table;
  table << table_header() << '\n';
  for (const auto& [s, r] : found) table << table_row(opt.method, e, r) << '\n';

  if (run.to_dir()) {
    write_json_file(run.path("solutions.json"), out);
    if (!found.empty()) {
      write_json_file(run.path("solution.json"), out[0]["solution"]);
      write_json_file(run.path("report.json"), out[0]["report"]);
    }
    run.write_text("table.tsv", table.str());
    std::cout << table.str();
  } else {
    std::cout << out.dump(2) << '\n';
    std::cerr << table.str();
  }
  run.exit_code = found.empty() ? kVerifyFailed : kOk;
  return run.exit_code;
}

// ---- compile ----

int cmd_compile(const Options& opt, Run& run) {
  if (opt.circuit_path.empty() == opt.cnf_path.empty()) throw FormatError("give exactly one of --circuit, --cnf");
  Json doc, economy;
  std::string inventory;
  if (!opt.circuit_path.empty()) {
    run.input(opt.circuit_path);
    CircuitScale scale;
    scale.n_x = opt.n_x;
    scale.beta = opt.beta.empty() ? make_rational(1, 20) : flag_rational("beta", opt.beta);
    if (!opt.epsilon.empty()) scale.epsilon = flag_rational("epsilon", opt.epsilon);
    if (!opt.alpha.empty()) scale.alpha_target = flag_rational("alpha", opt.alpha);
    const auto compiled = compile_circuit(parse_circuit(read_text(opt.circuit_path)), scale);
    run.config()["n_x"] = compiled.n_x;
    run.config()["beta"] = to_string(compiled.beta);
    run.config()["epsilon"] = to_string(compiled.epsilon);
    run.config()["alpha_target"] = to_string(compiled.alpha_target);
    doc = compiled_circuit_to_json(compiled);
    economy = economy_to_json(compiled.economy);
    inventory = gadget_inventory(compiled);
  } else {
    run.input(opt.cnf_path);
    const auto compiled = compile_sat(parse_dimacs(read_text(opt.cnf_path)));
    doc = compiled_sat_to_json(compiled);
    economy = economy_to_json(compiled.economy);
    inventory = sat_inventory(compiled);
  }
  if (!inventory.empty() && inventory.back() != '\n') inventory += '\n';
  if (run.to_dir()) {
    write_json_file(run.path("compiled.json"), doc);
    write_json_file(run.path("economy.json"), economy);
    run.write_text("inventory.txt", inventory);
    std::cout << inventory;
  } else {
    std::cout << doc.dump(2) << '\n';
    std::cerr << inventory;
  }
  return kOk;
}

// ---- pipeline ----

int cmd_pipeline(const Options& opt, Run& run) {
  run.input(opt.economy_path);
  PipelineConfig config;
  config.beta = flag_rational("beta", opt.beta);
  config.epsilon = flag_rational("epsilon", opt.epsilon);
  if (!opt.grid_step.empty()) config.grid_step = flag_rational("grid-step", opt.grid_step);
  if (!opt.threshold.empty()) config.threshold = flag_rational("threshold", opt.threshold);
  config.max_grid_points = opt.max_grid_points;
  config.max_vertex_candidates = opt.max_vertices;
  try {
    config.validate();
  } catch (const PipelineError& e) {
    throw FormatError(e.what());
  }
  run.config()["max_grid_points"] = opt.max_grid_points;
  run.config()["max_vertices"] = opt.max_vertices;
  run.config()["beta"] = to_string(config.beta);
  run.config()["epsilon"] = to_string(config.epsilon);
  run.config()["grid_step"] = to_string(config.desk_grid_step());
  const Economy e = economy_from_json(read_json_file(opt.economy_path));

  const PipelineResult res = run_pipeline(e, config);
  Solution solution = res.solution;
  ClearingReport report = res.report;
  if (!res.certified) {
    // Best grid point, demand under the rounded budgets.
    solution.prices = res.fixed_point.grid_point;
    solution.budgets = res.rounded_budgets;
    solution.allocation.clear();
    for (StudentIndex i = 0; i < e.num_students(); ++i) {
      solution.allocation.push_back(demand(e, i, solution.prices, solution.budgets[i]));
    }
    report = clearing_error(e, solution.prices, solution.allocation);
  }
  const Rational bound_sq = pipeline_bound_sq(e);
  Json summary;
  summary["step"] = "summary";
  summary["certified"] = res.certified;
  summary["alpha_sq"] = to_string(report.alpha_sq);
  summary["alpha"] = report.alpha;
  summary["sigma"] = res.problem.sigma;
  summary["bound_sq"] = to_string(bound_sq);
  summary["bound"] = std::sqrt(to_double(bound_sq));
  summary["within_bound"] = report.alpha_sq <= bound_sq;
  summary["conditions"] = {report.condition1, report.condition2, report.condition3};
  summary["pivotal_students"] = res.problem.pivotal.size();

  std::string trace;
  for (const auto& rec : res.trace) trace += rec.dump() + "\n";
  if (run.to_dir()) {
    write_json_file(run.path("solution.json"), solution_to_json(e, solution));
    write_json_file(run.path("report.json"), report_to_json(e, report, opt.float_view));
    write_json_file(run.path("summary.json"), summary);
    run.write_text("trace.jsonl", trace);
    std::cout << summary.dump() << '\n';
  } else {
    summary["solution"] = solution_to_json(e, solution);
    summary["report"] = report_to_json(e, report, opt.float_view);
    std::cout << trace << summary.dump() << '\n';
  }
  run.exit_code = res.certified ? kOk : kThreshold;
  return run.exit_code;
}

// ---- generate / sweep ----

RandomEconomySpec random_spec(const Options& opt) {
  RandomEconomySpec spec;
  spec.students = opt.students;
  spec.courses = opt.courses;
  spec.max_bundle = opt.max_bundle;
  return spec;
}

int cmd_generate(const Options& opt, Run& run) {
  const auto spec = random_spec(opt);
  run.config()["students"] = spec.students;
  run.config()["courses"] = spec.courses;
  run.config()["k"] = spec.max_bundle;
  const Json doc = economy_to_json(random_economy(spec, opt.seed));
  if (run.to_dir()) {
    write_json_file(run.path("economy.json"), doc);
  } else {
    std::cout << doc.dump(2) << '\n';
  }
  return kOk;
}

// Tatonnement over `count` seeded random economies, one table row each.
int cmd_sweep(const Options& opt, Run& run) {
  const auto spec = random_spec(opt);
  const Rational beta = flag_rational("beta", opt.beta);
  run.config()["students"] = spec.students;
  run.config()["courses"] = spec.courses;
  run.config()["k"] = spec.max_bundle;
  run.config()["count"] = opt.count;
  run.config()["beta"] = to_string(beta);
  std::ostringstream table;
  table << "seed\t" << table_header() << '\n';
  std::size_t within = 0;
  double worst = 0;
  for (std::size_t s = 0; s < opt.count; ++s) {
    const std::uint64_t seed = opt.seed + s;
    const Economy e = random_economy(spec, seed);
    TatonnementConfig t;
    t.seed = seed;
    const auto res = tatonnement_solve(e, t, beta);
    within += res.report.alpha_sq <= existence_bound_sq(e);
    worst = std::max(worst, res.report.alpha);
    table << seed << '\t' << table_row("tatonnement", e, res.report) << '\n';
  }
  table << "# within_bound " << within << "/" << opt.count << ", worst alpha " << fmt_double(worst) << '\n';
  if (run.to_dir()) run.write_text("table.tsv", table.str());
  std::cout << table.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate competitive equilibrium lab"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", opt.out_dir, "Write outputs and manifest.json here");
    sub->add_option("--seed", opt.seed, "Deterministic seed");
  };

  auto* verify = app.add_subcommand("verify", "Check an (alpha, beta)-CEEI");
  verify->add_option("economy", opt.economy_path)->required();
  verify->add_option("solution", opt.solution_path)->required();
  verify->add_option("--alpha", opt.alpha, "Clearing error bound (rational)")->capture_default_str();
  verify->add_option("--beta", opt.beta, "Budget spread (rational)")->capture_default_str();
  verify->add_flag("--float-view", opt.float_view, "Add decimal alpha to the report");
  common(verify);

  auto* solve = app.add_subcommand("solve", "Search for an equilibrium");
  solve->add_option("economy", opt.economy_path)->required();
  solve->add_option("--method", opt.method)->check(CLI::IsMember({"oracle", "grid", "tatonnement"}))->capture_default_str();
  solve->add_option("--alpha", opt.alpha, "Grid: clearing error bound")->capture_default_str();
  solve->add_option("--beta", opt.beta)->capture_default_str();
  solve->add_option("--grid-step", opt.grid_step, "Grid: price step (default 1/20)");
  solve->add_option("--price-max", opt.price_max, "Grid: largest price (default 1+beta)");
  solve->add_option("--pin", opt.pins, "Grid: course=price, held fixed");
  solve->add_option("--max-enum", opt.max_enum, "Oracle: allocation space limit")->capture_default_str();
  solve->add_option("--max-nodes", opt.max_nodes, "Grid: search node limit")->capture_default_str();
  solve->add_flag("--all", opt.all_solutions, "Oracle: list every exact CEEI");
  solve->add_flag("--float-view", opt.float_view);
  common(solve);

  auto* compile = app.add_subcommand("compile", "Compile a circuit or a 3SAT-5 formula to an economy");
  compile->add_option("--circuit", opt.circuit_path);
  compile->add_option("--cnf", opt.cnf_path);
  compile->add_option("--n-x", opt.n_x, "Circuit: base gadget size")->capture_default_str();
  compile->add_option("--beta", opt.beta, "Circuit: beta (default 1/20)");
  compile->add_option("--epsilon", opt.epsilon, "Circuit: epsilon (default beta/2)");
  compile->add_option("--alpha", opt.alpha, "Circuit: alpha target (default derived)");
  common(compile);

  auto* pipeline = app.add_subcommand("pipeline", "Run the constructive existence pipeline");
  pipeline->add_option("economy", opt.economy_path)->required();
  pipeline->add_option("--beta", opt.beta)->capture_default_str();
  pipeline->add_option("--epsilon", opt.epsilon)->capture_default_str();
  pipeline->add_option("--grid-step", opt.grid_step, "Default beta_bar");
  pipeline->add_option("--threshold", opt.threshold, "Grid displacement accepted (default one step)");
  pipeline->add_option("--max-grid-points", opt.max_grid_points)->capture_default_str();
  pipeline->add_option("--max-vertices", opt.max_vertices, "Vertex candidates before giving up certification")
      ->capture_default_str();
  pipeline->add_flag("--float-view", opt.float_view);
  common(pipeline);

  auto* generate = app.add_subcommand("generate", "Seeded random economy");
  generate->add_option("--students", opt.students)->capture_default_str();
  generate->add_option("--courses", opt.courses)->capture_default_str();
  generate->add_option("--k", opt.max_bundle, "Largest bundle")->capture_default_str();
  common(generate);

  auto* sweep = app.add_subcommand("sweep", "Tatonnement on seeded random economies, as a table");
  sweep->add_option("--count", opt.count)->capture_default_str();
  sweep->add_option("--students", opt.students)->capture_default_str();
  sweep->add_option("--courses", opt.courses)->capture_default_str();
  sweep->add_option("--k", opt.max_bundle)->capture_default_str();
  sweep->add_option("--beta", opt.beta)->capture_default_str();
  common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  // compile's scale flags default to "use the library default".
  if (compile->parsed()) {
    if (compile->count("--beta") == 0) opt.beta.clear();
    if (compile->count("--epsilon") == 0) opt.epsilon.clear();
    if (compile->count("--alpha") == 0) opt.alpha.clear();
  }

  std::string name = app.get_subcommands().front()->get_name();
  std::optional<Run> run;
  auto fail = [&](int code, const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (run) run->exit_code = code;
    return code;
  };
  try {
    run.emplace(name, opt);
    if (verify->parsed()) return cmd_verify(opt, *run);
    if (solve->parsed()) return cmd_solve(opt, *run);
    if (compile->parsed()) return cmd_compile(opt, *run);
    if (pipeline->parsed()) return cmd_pipeline(opt, *run);
    if (generate->parsed()) return cmd_generate(opt, *run);
    if (sweep->parsed()) return cmd_sweep(opt, *run);
  } catch (const EnumerationBudgetExceeded& e) {
    return fail(kBudget, e);
  } catch (const GridBudgetExceeded& e) {
    return fail(kBudget, e);
  } catch (const PipelineBudgetExceeded& e) {
    return fail(kBudget, e);
  } catch (const std::invalid_argument& e) {
    return fail(kParse, e);
  } catch (const std::exception& e) {
    // PipelineError included: a guarantee that should hold did not verify.
    return fail(kVerifyFailed, e);
  }
  return kParse;
}
