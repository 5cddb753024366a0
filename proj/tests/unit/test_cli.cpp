#include <doctest.h>

#include <set>

#include <json.hpp>

#include "test_support.hpp"

using nlohmann::json;
using testing::run_cli;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> corpus_args(const std::string& name) {
  const auto dir = testing::fixture_dir() / name;
  return {"--molecules", (dir / "molecules.jsonl").string(),
          "--proteins", (dir / "proteins.jsonl").string(),
          "--interactions", (dir / "interactions.jsonl").string()};
}

std::vector<std::string> cmd(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

std::string instances_path(const std::string& name) {
  return (testing::fixture_dir() / name / "instances.jsonl").string();
}

testing::CliResult search(const std::string& fixture, const fs::path& out,
                          std::vector<std::string> extra = {}) {
  auto args = cmd({"search"}, corpus_args(fixture));
  args = cmd(args, {"--instances", instances_path(fixture), "--out", out.string(), "--seed", "7"});
  return run_cli(cmd(args, extra));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate accepts the shipped fixtures") {
  for (const char* name : {"toy", "oracle"}) {
    const auto r = run_cli(cmd(cmd({"validate"}, corpus_args(name)), {"--instances", instances_path(name)}));
    CAPTURE(r.out);
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(r.out.find("0 with violations") != std::string::npos);
  }
}

TEST_CASE("validate names the broken rule") {
  testing::TempDir tmp;
  testing::write_file(tmp / "bad.jsonl",
                      R"({"query_molecule_id":"Q1","candidate_molecule_ids":["M1","M2"],)"
                      R"("candidate_protein_ids":["P1","P2","P3","P4","P5","P6","P7","P8"],)"
                      R"("ground_truth_protein_ids":["P1","P2","P3","P4","P5","P6"]})"
                      "\n");
  const auto r = run_cli(cmd(cmd({"validate"}, corpus_args("toy")), {"--instances", (tmp / "bad.jsonl").string()}));
  CHECK(r.code == 1);
  CHECK(r.out.find("between 1 and 5") != std::string::npos);
}

TEST_CASE("validate reports a missing file") {
  auto args = corpus_args("toy");
  args[1] = "/nonexistent/molecules.jsonl";
  const auto r = run_cli(cmd({"validate"}, args));
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/molecules.jsonl") != std::string::npos);
}

TEST_CASE("build-dataset writes instances and a report") {
  testing::TempDir tmp;
  const auto r = run_cli(cmd(cmd({"build-dataset"}, corpus_args("oracle")),
                             {"--out", tmp.path().string(), "--baseline"}));
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  const auto report = json::parse(testing::read_file(tmp / "build_report.json"));
  const auto instances = testing::read_lines(tmp / "instances.jsonl");
  const auto baseline = testing::read_lines(tmp / "baseline.jsonl");
  CHECK(report.at("accepted") == instances.size());
  CHECK(baseline.size() == instances.size());
  CHECK(instances.size() > 0);
  for (const auto& line : baseline) CHECK_FALSE(json::parse(line).contains("candidate_molecule_ids"));
  CHECK(r.out.find("accepted " + std::to_string(instances.size())) != std::string::npos);

  // The emitted file validates against the same corpus.
  const auto v = run_cli(cmd(cmd({"validate"}, corpus_args("oracle")),
                             {"--instances", (tmp / "instances.jsonl").string()}));
  CHECK(v.code == 0);

  testing::TempDir tight;
  const auto t = run_cli(cmd(cmd({"build-dataset"}, corpus_args("oracle")),
                             {"--out", tight.path().string(), "--max-candidates", "2"}));
  REQUIRE(t.code == 0);
  const auto tight_report = json::parse(testing::read_file(tight / "build_report.json"));
  CHECK(tight_report.at("accepted").get<int>() < report.at("accepted").get<int>());
  CHECK(tight_report.at("rejected").at("too_many_candidates").get<int>() > 0);
}

TEST_CASE("search is reproducible under a fixed seed") {
  testing::TempDir a, b;
  const auto ra = search("toy", a.path());
  const auto rb = search("toy", b.path());
  CAPTURE(ra.err);
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  for (const char* f : {"Q1.result.json", "Q1.tree.json", "traces/Q1.trace.jsonl"}) {
    CAPTURE(f);
    CHECK(testing::read_file(a / f) == testing::read_file(b / f));
  }
  CHECK(ra.out.find("Q1: 12 rollouts") != std::string::npos);
}

TEST_CASE("search honours the rollout budget") {
  testing::TempDir out;
  const auto r = search("toy", out.path(), {"--rollouts", "24"});
  REQUIRE(r.code == 0);
  const auto tree = json::parse(testing::read_file(out / "Q1.tree.json"));
  CHECK(tree.at("nodes").at(0).at("n") == 24);
  const auto result = json::parse(testing::read_file(out / "Q1.result.json"));
  CHECK(result.at("rollout_outcomes").size() == 24);
}

TEST_CASE("baseline mode makes one call per instance") {
  testing::TempDir out;
  const auto r = search("oracle", out.path(), {"--mode", "baseline"});
  REQUIRE(r.code == 0);
  for (const auto& line : testing::read_lines(instances_path("oracle"))) {
    const auto id = json::parse(line).at("query_molecule_id").get<std::string>();
    CHECK(testing::read_lines(out / ("traces/" + id + ".trace.jsonl")).size() == 1);
  }
}

TEST_CASE("an exhausted script aborts with exit code 3") {
  testing::TempDir out;
  testing::write_file(out / "script.json", R"({"replies": ["Analysis."]})");
  const auto r = search("toy", out.path(), {"--backend", "scripted", "--script", (out / "script.json").string()});
  CHECK(r.code == 3);
}

TEST_CASE("evaluate matches a recall computed from the result files") {
  testing::TempDir out;
  REQUIRE(search("oracle", out.path(), {"--rollouts", "6"}).code == 0);

  std::map<std::string, std::vector<std::string>> ranked;
  for (const auto& e : fs::directory_iterator(out.path())) {
    const auto name = e.path().filename().string();
    if (!name.ends_with(".result.json")) continue;
    const auto j = json::parse(testing::read_file(e.path()));
    auto& v = ranked[j.at("query_molecule_id").get<std::string>()];
    for (const auto& a : j.at("ranked_answers")) v.push_back(a.at("protein_id").get<std::string>());
  }
  double sum_gt = 0.0, sum_wide = 0.0;
  std::size_t count = 0;
  for (const auto& line : testing::read_lines(instances_path("oracle"))) {
    const auto inst = json::parse(line);
    const auto gt = inst.at("ground_truth_protein_ids").get<std::set<std::string>>();
    const auto& r = ranked.at(inst.at("query_molecule_id").get<std::string>());
    auto hits = [&](std::size_t k) {
      std::size_t h = 0;
      for (std::size_t i = 0; i < r.size() && i < k; ++i) h += gt.count(r[i]);
      return static_cast<double>(h) / static_cast<double>(gt.size());
    };
    sum_gt += hits(gt.size());
    sum_wide += hits(gt.size() + 3);
    ++count;
  }

  const auto ev = run_cli({"evaluate", "--results", out.path().string(), "--instances",
                           instances_path("oracle"), "--topk", "gt"});
  REQUIRE(ev.code == 0);
  const auto report = json::parse(testing::read_file(out / "report_gt.json"));
  CHECK(report.at("mean_recall").get<double>() == doctest::Approx(sum_gt / count).epsilon(1e-12));
  CHECK(testing::read_file(out / "report_gt.csv").rfind("instance_id,", 0) == 0);

  const auto ev3 = run_cli({"evaluate", "--results", out.path().string(), "--instances",
                            instances_path("oracle"), "--topk", "gt+3"});
  REQUIRE(ev3.code == 0);
  const auto wide = json::parse(testing::read_file(out / "report_gt_plus_3.json"));
  CHECK(wide.at("mean_recall").get<double>() == doctest::Approx(sum_wide / count).epsilon(1e-12));
  CHECK(wide.at("mean_recall").get<double>() >= report.at("mean_recall").get<double>());
}

TEST_CASE("evaluate fails on a missing results directory") {
  const auto r = run_cli({"evaluate", "--results", "/nonexistent/results", "--instances",
                          instances_path("oracle")});
  CHECK(r.code != 0);
}

TEST_CASE("retrieve emits one line per hit") {
  testing::TempDir out;
  const auto r = run_cli(cmd(cmd({"retrieve"}, corpus_args("toy")),
                             {"--query", "Q1", "--k", "3", "--out", (out / "hits.jsonl").string()}));
  REQUIRE(r.code == 0);
  const auto lines = testing::read_lines(out / "hits.jsonl");
  CHECK(lines.size() == 6);
  CHECK(json::parse(lines[0]).at("rank") == 1);
}

TEST_CASE("argument errors and help") {
  CHECK(run_cli({"search", "--bogus"}).code == 2);
  CHECK(run_cli({}).code == 2);
  const auto help = run_cli({"search", "--help"});
  CHECK(help.code == 0);
  for (const char* flag : {"--rollouts", "--seed", "--backend", "--mode", "--reward",
                           "--no-molecule-analysis", "--ps-branching"}) {
    CHECK(help.out.find(flag) != std::string::npos);
  }
}

}  // TEST_SUITE
