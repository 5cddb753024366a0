// Python bindings. Structured values cross the boundary as JSON text; the
// drugmcts package converts them to and from dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "drugmcts/dataset.hpp"
#include "drugmcts/error.hpp"
#include "drugmcts/evaluation.hpp"
#include "drugmcts/json_io.hpp"
#include "drugmcts/similarity.hpp"

namespace py = pybind11;
using namespace drugmcts;
using nlohmann::json;

namespace {

BitVector to_bits(const std::vector<int>& bits) {
  BitVector out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out.set(i);
  }
  return out;
}

ProblemInstance parse_instance(const std::string& text) {
  io::ReadContext ctx;
  return io::instance_from_json(json::parse(text), ctx);
}

Metric parse_metric(const std::string& s) {
  if (s == "tanimoto") return Metric::kTanimoto;
  if (s == "cosine") return Metric::kCosine;
  throw ConfigError("unknown metric '" + s + "'");
}

BuilderRules parse_rules(const std::string& text) {
  BuilderRules r;
  const auto j = json::parse(text);
  for (const auto& [key, value] : j.items()) {
    if (key == "query_min_proteins") r.query_min_proteins = value.get<std::size_t>();
    else if (key == "query_max_proteins") r.query_max_proteins = value.get<std::size_t>();
    else if (key == "candidate_min_proteins") r.candidate_min_proteins = value.get<std::size_t>();
    else if (key == "candidate_max_proteins") r.candidate_max_proteins = value.get<std::size_t>();
    else if (key == "max_candidates") r.max_candidates = value.get<std::size_t>();
    else if (key == "gt_min") r.gt_min = value.get<std::size_t>();
    else if (key == "gt_max") r.gt_max = value.get<std::size_t>();
    else if (key == "gt_max_ratio") r.gt_max_ratio = value.get<double>();
    else if (key == "per_metric") r.per_metric = value.get<std::size_t>();
    else throw ConfigError("builder rules: unknown key '" + key + "'");
  }
  return r;
}

std::string search(const Corpus& corpus, const std::string& instance_text,
                   const std::string& config_text, const std::string& backend_name,
                   const std::optional<std::string>& script_text, const std::string& mode_name,
                   int mock_variety) {
  const auto instance = parse_instance(instance_text);
  const auto config = config_from_json(json::parse(config_text));
  const auto mode = search_mode_from_string(mode_name);
  std::unique_ptr<Backend> backend;
  if (backend_name == "mock") {
    MockBackend::Options opts;
    opts.seed = config.seed;
    opts.answer_variety = mock_variety;
    backend = std::make_unique<MockBackend>(opts);
  } else if (backend_name == "scripted") {
    if (!script_text) throw ConfigError("the scripted backend needs a script");
    backend = ScriptedBackend::from_json(json::parse(*script_text));
  } else if (backend_name == "http") {
    backend = std::make_unique<HttpBackend>(config.http);
  } else {
    throw ConfigError("unknown backend '" + backend_name + "'");
  }
  const auto templates = TemplateLibrary::defaults();
  SearchRun run = [&] {
    py::gil_scoped_release release;
    return mode == SearchMode::kMcts
               ? run_search(instance, corpus, *backend, templates, config)
               : run_single_shot(instance, corpus, *backend, templates, config, mode);
  }();
  json trace = json::array();
  for (const auto& r : run.trace.records) trace.push_back(to_json(r));
  return json{{"result", to_json(run.result)}, {"tree", run.tree.snapshot()}, {"trace", trace}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the drugmcts package";

  auto base = py::register_exception<Error>(m, "DrugMctsError");
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", base.ptr());
  py::register_exception<MetricError>(m, "MetricError", base.ptr());
  py::register_exception<BackendError>(m, "BackendError", base.ptr());
  py::register_exception<TemplateError>(m, "TemplateError", base.ptr());

  m.def("tanimoto", [](const std::vector<int>& a, const std::vector<int>& b) {
    return tanimoto(to_bits(a), to_bits(b));
  }, py::arg("a"), py::arg("b"), "Tanimoto coefficient of two 0/1 sequences.");
  m.def("cosine", [](const std::vector<double>& a, const std::vector<double>& b) {
    return cosine(a, b);
  }, py::arg("a"), py::arg("b"));
  m.def("uct_score", &uct_score, py::arg("total_reward"), py::arg("visits"),
        py::arg("parent_visits"), py::arg("c") = 1.41421356);
  m.def("final_reward", [](double r_relative, double r_absolute, const std::string& mode) {
    return final_reward(r_relative, r_absolute, reward_mode_from_string(mode));
  }, py::arg("r_relative"), py::arg("r_absolute"), py::arg("mode") = "combined");
  m.def("tally_selections", [](const std::vector<std::optional<std::string>>& selections,
                               const std::string& rollout_selection) {
    const auto r = tally_selections(selections, rollout_selection);
    return py::make_tuple(r.p_star, r.r_relative);
  }, py::arg("selections"), py::arg("rollout_selection"));

  py::class_<Corpus>(m, "Corpus")
      .def_static("load", [](const std::string& molecules, const std::string& proteins,
                             const std::string& interactions, bool strict) {
        return load_corpus(molecules, proteins, interactions, LoadOptions{strict});
      }, py::arg("molecules"), py::arg("proteins"), py::arg("interactions"), py::arg("strict") = true)
      .def_property_readonly("n_molecules", [](const Corpus& c) { return c.molecules().size(); })
      .def_property_readonly("n_proteins", [](const Corpus& c) { return c.proteins().size(); })
      .def_property_readonly("n_interactions", [](const Corpus& c) { return c.interactions().size(); })
      .def_property_readonly("warnings", &Corpus::warnings)
      .def("proteins_of", [](const Corpus& c, const std::string& id) {
        const auto& s = c.proteins_of(id);
        return std::vector<std::string>(s.begin(), s.end());
      })
      .def("retrieve_candidates", [](const Corpus& c, const std::string& query, std::size_t per_metric) {
        const auto s = retrieve_candidates(c.molecule(query), c, per_metric);
        return std::vector<std::string>(s.begin(), s.end());
      }, py::arg("query"), py::arg("per_metric") = 10)
      .def("top_k", [](const Corpus& c, const std::string& query, const std::string& metric, std::size_t k) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& h : top_k(c.molecule(query), c, parse_metric(metric), k).hits) {
          out.emplace_back(h.molecule_id, h.score);
        }
        return out;
      }, py::arg("query"), py::arg("metric"), py::arg("k") = 10)
      .def("validate_instance_json", [](const Corpus& c, const std::string& text) {
        return validate_instance(parse_instance(text), c);
      });

  m.def("build_instances_json", [](const Corpus& corpus, const std::string& rules) {
    const auto built = build_instances(corpus, parse_rules(rules));
    json instances = json::array();
    for (const auto& inst : built.instances) instances.push_back(io::to_json(inst));
    return json{{"instances", instances}, {"report", built.report.to_json()}}.dump();
  });
  m.def("search_json", &search, py::arg("corpus"), py::arg("instance"), py::arg("config"),
        py::arg("backend"), py::arg("script"), py::arg("mode"), py::arg("mock_variety"));
  m.def("evaluate_json", [](const std::vector<std::string>& results,
                            const std::vector<std::string>& instances, const std::string& topk) {
    std::vector<SearchResult> rs;
    for (const auto& r : results) rs.push_back(search_result_from_json(json::parse(r)));
    std::vector<ProblemInstance> is;
    for (const auto& i : instances) is.push_back(parse_instance(i));
    return evaluate_run(rs, is, topk_mode_from_string(topk)).to_json().dump();
  });
  m.def("default_config_json", [] { return to_json(SearchConfig{}).dump(); });
  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "drugmcts");
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command-line tool in process; returns (code, stdout, stderr).");
}
