#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "drugmcts/backend.hpp"
#include "drugmcts/corpus.hpp"
#include "drugmcts/dataset.hpp"
#include "drugmcts/error.hpp"
#include "drugmcts/evaluation.hpp"
#include "drugmcts/json_io.hpp"
#include "drugmcts/mcts.hpp"
#include "drugmcts/similarity.hpp"

namespace drugmcts::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CorpusArgs {
  std::string molecules;
  std::string proteins;
  std::string interactions;
  bool lenient = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--molecules", molecules, "molecules.jsonl")->required();
    cmd.add_option("--proteins", proteins, "proteins.jsonl")->required();
    cmd.add_option("--interactions", interactions, "interactions.jsonl")->required();
    cmd.add_flag("--lenient", lenient, "Warn about unknown record fields instead of rejecting them");
  }

  Corpus load(std::ostream& err) const {
    for (const auto& p : {molecules, proteins, interactions}) {
      if (!fs::exists(p)) throw IoError("file not found: " + p);
    }
    auto corpus = load_corpus(molecules, proteins, interactions, {!lenient});
    for (const auto& w : corpus.warnings()) err << "warning: " << w << '\n';
    return corpus;
  }
};

std::vector<ProblemInstance> load_instances(const std::string& path, bool lenient,
                                            std::ostream& err) {
  if (!fs::exists(path)) throw IoError("file not found: " + path);
  io::ReadContext ctx{!lenient, {}};
  auto out = io::read_instances(path, ctx);
  for (const auto& w : ctx.warnings) err << "warning: " << w << '\n';
  return out;
}

/// File-name-safe rendering of an id.
std::string file_stem(const std::string& id) {
  std::string out = id;
  for (auto& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  CorpusArgs corpus;
  std::string instances;
  std::uint64_t seed = 0;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  Corpus corpus;
  try {
    corpus = a.corpus.load(err);
  } catch (const ConsistencyError& e) {
    out << "corpus: " << e.what() << '\n';
    return kValidationFailure;
  }
  out << "corpus: " << corpus.molecules().size() << " molecules, " << corpus.proteins().size()
      << " proteins, " << corpus.interactions().size() << " interactions\n";
  if (a.instances.empty()) return kOk;

  const auto instances = load_instances(a.instances, a.corpus.lenient, err);
  std::size_t bad = 0;
  for (const auto& inst : instances) {
    const auto violations = validate_instance(inst, corpus);
    if (violations.empty()) continue;
    ++bad;
    for (const auto& v : violations) out << inst.query_molecule_id << ": " << v << '\n';
  }
  out << "instances: " << instances.size() << " checked, " << bad << " with violations\n";
  return bad == 0 ? kOk : kValidationFailure;
}

// ----------------------------------------------------------- build-dataset

struct BuildArgs {
  CorpusArgs corpus;
  std::string out_dir;
  bool baseline = false;
  BuilderRules rules;
  std::uint64_t seed = 0;
};

int cmd_build_dataset(const BuildArgs& a, std::ostream& out, std::ostream& err) {
  const auto corpus = a.corpus.load(err);
  auto built = build_instances(corpus, a.rules);
  const fs::path dir(a.out_dir);
  io::write_jsonl(dir / "instances.jsonl", built.instances);
  if (a.baseline) io::write_jsonl(dir / "baseline.jsonl", build_baseline_dataset(built.instances));
  io::write_text(dir / "build_report.json", built.report.to_json().dump(2) + "\n");

  out << "accepted " << built.report.accepted << " of " << built.report.queries << " queries\n";
  for (const auto& [reason, n] : built.report.rejected) out << "  rejected " << reason << ": " << n << '\n';
  return kOk;
}

// ------------------------------------------------------------------ search

struct SearchArgs {
  CorpusArgs corpus;
  std::string instances;
  std::string config_path;
  std::string backend = "mock";
  std::string script;
  std::string base_url;
  std::string model;
  std::string templates_dir;
  std::string out_dir;
  std::string trace_dir;
  std::string mode = "mcts";
  std::optional<std::uint64_t> seed;
  std::optional<int> rollouts;
  std::optional<int> ps_branching;
  std::optional<std::string> reward;
  std::optional<std::string> selection_pool;
  std::optional<double> temperature;
  std::optional<int> k_samples;
  bool no_molecule_analysis = false;
  bool no_interaction_analysis = false;
  int mock_variety = 0;
  int jobs = 1;
};

SearchConfig resolve_config(const SearchArgs& a) {
  SearchConfig config;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw IoError("cannot open config " + a.config_path);
    try {
      config = config_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw ConfigError("config " + a.config_path + ": " + e.what());
    }
  }
  if (a.seed) config.seed = *a.seed;
  if (a.rollouts) config.rollouts = *a.rollouts;
  if (a.temperature) config.temperature = *a.temperature;
  if (a.k_samples) config.k_samples = *a.k_samples;
  if (a.ps_branching) config.branching.protein_selection = *a.ps_branching;
  if (a.reward) config.reward_mode = reward_mode_from_string(*a.reward);
  if (a.selection_pool) config.selection_pool = selection_pool_from_string(*a.selection_pool);
  if (a.no_molecule_analysis) config.ablation.enable_molecule_analysis = false;
  if (a.no_interaction_analysis) config.ablation.enable_interaction_analysis = false;
  if (!a.base_url.empty()) config.http.base_url = a.base_url;
  if (!a.model.empty()) config.http.model = a.model;
  config.validate();
  return config;
}

std::unique_ptr<Backend> make_backend(const SearchArgs& a, const SearchConfig& config) {
  if (a.backend == "mock") {
    MockBackend::Options o;
    o.seed = config.seed;
    o.answer_variety = a.mock_variety;
    return std::make_unique<MockBackend>(o);
  }
  if (a.backend == "scripted") {
    if (a.script.empty()) throw ConfigError("--backend scripted needs --script");
    return ScriptedBackend::from_file(a.script);
  }
  if (a.backend == "http") return std::make_unique<HttpBackend>(config.http);
  throw ConfigError("unknown backend '" + a.backend + "'");
}

std::string trace_jsonl(const TraceLog& trace) {
  std::string buf;
  for (const auto& r : trace.records) buf += io::to_line(to_json(r)) + "\n";
  return buf;
}

int cmd_search(const SearchArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = resolve_config(a);
  const auto mode = search_mode_from_string(a.mode);
  const auto corpus = a.corpus.load(err);
  const auto instances = load_instances(a.instances, a.corpus.lenient, err);
  auto templates = TemplateLibrary::defaults();
  if (!a.templates_dir.empty()) templates.load_directory(a.templates_dir);
  auto backend = make_backend(a, config);

  const fs::path out_dir(a.out_dir);
  const fs::path trace_dir = a.trace_dir.empty() ? out_dir / "traces" : fs::path(a.trace_dir);
  fs::create_directories(out_dir);
  fs::create_directories(trace_dir);
  io::write_text(out_dir / "config.json", to_json(config).dump(2) + "\n");

  std::atomic<std::size_t> next{0};
  std::atomic<int> aborted{0};
  std::mutex log_mu;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= instances.size()) return;
      try {
        const auto& inst = instances[i];
        auto run = mode == SearchMode::kMcts
                       ? run_search(inst, corpus, *backend, templates, config)
                       : run_single_shot(inst, corpus, *backend, templates, config, mode);
        const auto stem = file_stem(inst.query_molecule_id);
        io::write_text(out_dir / (stem + ".result.json"), to_json(run.result).dump(2) + "\n");
        io::write_text(out_dir / (stem + ".tree.json"), run.tree.snapshot().dump(2) + "\n");
        io::write_text(trace_dir / (stem + ".trace.jsonl"), trace_jsonl(run.trace));

        std::lock_guard lock(log_mu);
        if (run.result.aborted) {
          ++aborted;
          err << inst.query_molecule_id << ": aborted: " << *run.result.aborted << '\n';
        }
        out << inst.query_molecule_id << ": " << run.result.rollout_outcomes.size()
            << " rollouts, " << run.result.ranked_answers.size() << " ranked answers, "
            << run.result.total_tokens << " tokens\n";
      } catch (...) {
        std::lock_guard lock(log_mu);
        if (!failure) failure = std::current_exception();
        next = instances.size();
        return;
      }
    }
  };

  const int jobs = std::max(1, a.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return aborted > 0 ? kBackendFailure : kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string results_dir;
  std::string instances;
  std::string topk = "gt";
  std::string out_dir;
  std::uint64_t seed = 0;
  bool lenient = false;
};

std::vector<SearchResult> load_results(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("results directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 12 && name.ends_with(".result.json")) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<SearchResult> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    try {
      out.push_back(search_result_from_json(json::parse(in)));
    } catch (const json::parse_error& e) {
      throw SchemaError(f.string(), 0, e.what());
    } catch (const Error& e) {
      throw SchemaError(f.string(), 0, e.what());
    }
  }
  return out;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto mode = topk_mode_from_string(a.topk);
  const auto results = load_results(a.results_dir);
  const auto instances = load_instances(a.instances, a.lenient, err);
  EvaluationReport report;
  try {
    report = evaluate_run(results, instances, mode);
  } catch (const ConsistencyError& e) {
    err << "alignment error: " << e.what() << '\n';
    return kValidationFailure;
  }
  const fs::path dir = a.out_dir.empty() ? fs::path(a.results_dir) : fs::path(a.out_dir);
  const std::string suffix = mode == TopKMode::kGt ? "gt" : "gt_plus_3";
  io::write_text(dir / ("report_" + suffix + ".json"), report.to_json().dump(2) + "\n");
  io::write_text(dir / ("report_" + suffix + ".csv"), report.to_csv());
  out << "mean recall (" << to_string(mode) << "): " << report.mean_recall << " over "
      << report.rows.size() << " instances, " << report.total_tokens << " tokens\n";
  return kOk;
}

// ---------------------------------------------------------------- retrieve

struct RetrieveArgs {
  CorpusArgs corpus;
  std::vector<std::string> queries;
  std::size_t k = 10;
  std::string out_path;
  std::uint64_t seed = 0;
};

int cmd_retrieve(const RetrieveArgs& a, std::ostream& out, std::ostream& err) {
  const auto corpus = a.corpus.load(err);
  std::vector<std::string> queries = a.queries;
  if (queries.empty()) {
    for (const auto& m : corpus.molecules()) queries.push_back(m.id);
  }
  std::string buf;
  for (const auto& qid : queries) {
    const auto& q = corpus.molecule(qid);
    for (auto metric : {Metric::kTanimoto, Metric::kCosine}) {
      for (const auto& h : top_k(q, corpus, metric, a.k).hits) {
        buf += io::to_line({{"query_id", qid},
                            {"metric", to_string(metric)},
                            {"rank", h.rank},
                            {"molecule_id", h.molecule_id},
                            {"score", h.score}});
        buf += '\n';
      }
    }
  }
  if (a.out_path.empty()) {
    out << buf;
  } else {
    io::write_text(a.out_path, buf);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo tree search over a multi-agent drug repositioning pipeline"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check corpus files and problem instances");
  va.corpus.add_to(*validate);
  validate->add_option("--instances", va.instances, "instances.jsonl to check against the corpus");
  validate->add_option("--seed", va.seed, "Accepted for uniformity; validation is deterministic");

  BuildArgs ba;
  auto* build = app.add_subcommand("build-dataset", "Construct problem instances from a corpus");
  ba.corpus.add_to(*build);
  build->add_option("--out", ba.out_dir, "Output directory")->required();
  build->add_flag("--baseline", ba.baseline, "Also write baseline.jsonl (candidate molecules removed)");
  build->add_option("--query-min-proteins", ba.rules.query_min_proteins)->capture_default_str();
  build->add_option("--query-max-proteins", ba.rules.query_max_proteins)->capture_default_str();
  build->add_option("--candidate-min-proteins", ba.rules.candidate_min_proteins)->capture_default_str();
  build->add_option("--candidate-max-proteins", ba.rules.candidate_max_proteins)->capture_default_str();
  build->add_option("--max-candidates", ba.rules.max_candidates)->capture_default_str();
  build->add_option("--gt-min", ba.rules.gt_min)->capture_default_str();
  build->add_option("--gt-max", ba.rules.gt_max)->capture_default_str();
  build->add_option("--gt-max-ratio", ba.rules.gt_max_ratio)->capture_default_str();
  build->add_option("--per-metric", ba.rules.per_metric, "Retrieval depth per similarity metric")
      ->capture_default_str();
  build->add_option("--seed", ba.seed, "Accepted for uniformity; building is deterministic");

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "Run the search for every problem instance");
  sa.corpus.add_to(*search);
  search->add_option("--instances", sa.instances, "instances.jsonl")->required();
  search->add_option("--out", sa.out_dir, "Directory for result and tree files")->required();
  search->add_option("--config", sa.config_path, "JSON search configuration");
  search->add_option("--backend", sa.backend, "mock | scripted | http")
      ->check(CLI::IsMember({"mock", "scripted", "http"}))
      ->capture_default_str();
  search->add_option("--script", sa.script, "Reply script for the scripted backend");
  search->add_option("--base-url", sa.base_url, "HTTP backend base URL (overrides config)");
  search->add_option("--model", sa.model, "HTTP backend model name (overrides config)");
  search->add_option("--templates", sa.templates_dir, "Directory of prompt template overrides");
  search->add_option("--trace-dir", sa.trace_dir, "Trace directory (default <out>/traces)");
  search->add_option("--mode", sa.mode, "mcts | baseline | enhanced")
      ->check(CLI::IsMember({"mcts", "baseline", "enhanced"}))
      ->capture_default_str();
  search->add_option("--seed", sa.seed, "Search and mock-backend seed");
  search->add_option("--rollouts", sa.rollouts, "Rollouts per instance");
  search->add_option("--temperature", sa.temperature, "Sampling temperature");
  search->add_option("--k-samples", sa.k_samples, "Reward samples per rollout");
  search->add_option("--ps-branching", sa.ps_branching, "Children per protein-selection expansion");
  search->add_option("--reward", sa.reward, "combined | relative-only")
      ->check(CLI::IsMember({"combined", "relative-only", "relative_only"}));
  search->add_option("--selection-pool", sa.selection_pool, "reference | candidates")
      ->check(CLI::IsMember({"reference", "candidates"}));
  search->add_flag("--no-molecule-analysis", sa.no_molecule_analysis, "Remove the molecule analysis step");
  search->add_flag("--no-interaction-analysis", sa.no_interaction_analysis,
                   "Remove the interaction analysis step");
  search->add_option("--mock-variety", sa.mock_variety,
                     "Mock backend: cap on distinct answers per request (0 = unbounded)");
  search->add_option("--jobs", sa.jobs, "Instances searched in parallel")->capture_default_str();

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Compute recall for a directory of results");
  evaluate->add_option("--results", ea.results_dir, "Directory of *.result.json files")->required();
  evaluate->add_option("--instances", ea.instances, "instances.jsonl")->required();
  evaluate->add_option("--topk", ea.topk, "gt | gt+3")
      ->check(CLI::IsMember({"gt", "gt+3", "gt_plus_3"}))
      ->capture_default_str();
  evaluate->add_option("--out", ea.out_dir, "Report directory (default: the results directory)");
  evaluate->add_option("--seed", ea.seed, "Accepted for uniformity; evaluation is deterministic");
  evaluate->add_flag("--lenient", ea.lenient, "Warn about unknown instance fields");

  RetrieveArgs ra;
  auto* retrieve = app.add_subcommand("retrieve", "Write ranked similarity hits as JSONL");
  ra.corpus.add_to(*retrieve);
  retrieve->add_option("--query", ra.queries, "Query molecule id (repeatable; default all)");
  retrieve->add_option("--k", ra.k, "Hits per metric")->capture_default_str();
  retrieve->add_option("--out", ra.out_path, "Output file (default stdout)");
  retrieve->add_option("--seed", ra.seed, "Accepted for uniformity; retrieval is deterministic");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrConfigError;
  }

  try {
    if (*validate) return cmd_validate(va, out, err);
    if (*build) return cmd_build_dataset(ba, out, err);
    if (*search) return cmd_search(sa, out, err);
    if (*evaluate) return cmd_evaluate(ea, out, err);
    if (*retrieve) return cmd_retrieve(ra, out, err);
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << '\n';
    return kBackendFailure;
  } catch (const ConsistencyError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrConfigError;
  }
  return kIoOrConfigError;
}

}  // namespace drugmcts::cli
