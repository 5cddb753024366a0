#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "drugmcts/backend.hpp"
#include "drugmcts/corpus.hpp"

namespace testing {

namespace fs = std::filesystem;

fs::path fixture_dir();
drugmcts::Corpus load_fixture_corpus(const std::string& name);
std::vector<drugmcts::ProblemInstance> load_fixture_instances(const std::string& name);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& path);
std::vector<std::string> read_lines(const fs::path& path);
void write_file(const fs::path& path, const std::string& content);

drugmcts::BitVector random_bits(std::mt19937_64& rng, std::size_t n_bits, double density);
std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim);

/// Molecules "m000".. with random fingerprints and embeddings, and random
/// positive interactions against proteins "p000"..
struct RandomCorpusSpec {
  std::size_t molecules = 20;
  std::size_t proteins = 10;
  std::size_t n_bits = 128;
  std::size_t dim = 8;
  double density = 0.2;
  std::size_t max_partners = 4;
  std::uint64_t seed = 1;
};
drugmcts::Corpus random_corpus(const RandomCorpusSpec& spec);

drugmcts::Molecule bare_molecule(const std::string& id);
drugmcts::Protein bare_protein(const std::string& id);

/// Runs the command-line tool in process.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(std::vector<std::string> args);

/// Policy-driven stand-in for an agent that knows the answer. It lists every
/// option when asked to pick several, names a ground-truth protein from the
/// offered pool when asked to pick one, always answers yes, and writes free
/// text that differs per sample index. A new selection question gets the
/// least-chosen ground-truth protein, so distinct questions walk through the
/// whole ground truth; a repeated question gets the same answer as before.
class OracleBackend final : public drugmcts::Backend {
 public:
  explicit OracleBackend(drugmcts::IdSet ground_truth) : truth_(std::move(ground_truth)) {}

  drugmcts::SamplingResponse sample(const drugmcts::SamplingRequest& request) override;
  std::string name() const override { return "oracle"; }

 private:
  drugmcts::IdSet truth_;
  std::map<std::string, int> chosen_;
  std::map<std::uint64_t, std::string> answered_;
  std::mutex mu_;
};

/// Counts calls and forwards to another backend.
class CountingBackend final : public drugmcts::Backend {
 public:
  explicit CountingBackend(drugmcts::Backend& inner) : inner_(inner) {}

  drugmcts::SamplingResponse sample(const drugmcts::SamplingRequest& request) override;
  std::string name() const override { return inner_.name(); }

  int calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::vector<drugmcts::SamplingRequest> requests;

 private:
  drugmcts::Backend& inner_;
  std::mutex mu_;
};

}  // namespace testing
