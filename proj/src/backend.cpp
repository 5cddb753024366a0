#include "drugmcts/backend.hpp"

#include <cctype>
#include <cstring>
#include <fstream>

#include "drugmcts/error.hpp"

namespace drugmcts {

std::string to_string(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::int64_t approx_tokens(const std::string& text) {
  std::int64_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  // Separator so ("ab","c") and ("a","bc") differ.
  h ^= 0xff;
  h *= kFnvPrime;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Minimal portable generator; std distributions differ across standard libraries.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return splitmix64(state_++ * 0xD1B54A32D192ED03ull); }
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(next() % n); }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

template <std::size_t N>
const char* pick(Stream& s, const char* const (&bank)[N]) {
  return bank[s.below(N)];
}

constexpr const char* kOpeners[] = {
    "The evidence points to a coherent binding hypothesis.",
    "Structural features dominate the interpretation here.",
    "Physicochemical balance is the main consideration.",
    "The scaffold suggests a well-defined pharmacophore.",
    "Polar contacts appear central to recognition.",
    "Hydrophobic complementarity is likely to drive affinity."};
constexpr const char* kMiddles[] = {
    "Hydrogen-bond donors and acceptors are within drug-like ranges.",
    "The lipophilicity favors membrane permeability.",
    "Aromatic rings may support pi stacking in the pocket.",
    "Rotatable bonds are few, limiting entropic penalty.",
    "Charged groups could anchor the ligand to polar residues.",
    "The polar surface area indicates moderate solubility."};
constexpr const char* kClosers[] = {
    "Overall the profile is consistent with target engagement.",
    "Further reference compounds would strengthen this view.",
    "This supports prioritizing proteins with similar ligands.",
    "The analysis favors pockets lined with polar residues.",
    "Selectivity remains the main uncertainty.",
    "These observations should guide target selection."};
constexpr const char* kSelectOneLead[] = {"I select", "The most promising target is",
                                          "Best candidate:", "My choice is",
                                          "After weighing the evidence, I pick"};
constexpr const char* kSelectTail[] = {".", " based on pocket complementarity.",
                                       " given the reference ligands.",
                                       " due to favorable interactions.",
                                       " considering the binding site."};
constexpr const char* kSelectManyLead[] = {"Selected molecules:", "I keep", "Reference set:",
                                           "Retained:"};
constexpr const char* kYes[] = {"Yes, a significant interaction is likely.",
                                "Yes. The pocket residues complement the ligand.",
                                "Yes, binding is plausible given the evidence."};
constexpr const char* kNo[] = {"No, a significant interaction is unlikely.",
                               "No. The pocket does not match the ligand profile.",
                               "No, the evidence does not support binding."};

}  // namespace

std::uint64_t prompt_hash(const std::vector<PromptMessage>& messages) {
  std::uint64_t h = kFnvOffset;
  for (const auto& m : messages) {
    fnv_mix(h, to_string(m.role));
    fnv_mix(h, m.content);
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return out;
}

SamplingResponse MockBackend::sample(const SamplingRequest& request) {
  if (request.n < 1) throw BackendError("sampling request needs n >= 1");
  std::uint64_t h = prompt_hash(request.messages);
  fnv_mix(h, request.template_id);
  std::uint64_t temp_bits = 0;
  static_assert(sizeof(temp_bits) == sizeof(request.temperature));
  std::memcpy(&temp_bits, &request.temperature, sizeof(temp_bits));
  fnv_mix(h, std::to_string(temp_bits));
  fnv_mix(h, std::to_string(static_cast<int>(request.hint.kind)));
  for (const auto& o : request.hint.options) fnv_mix(h, o);
  const std::uint64_t base = splitmix64(h ^ splitmix64(options_.seed));

  SamplingResponse out;
  for (const auto& m : request.messages) out.prompt_tokens += approx_tokens(m.content);
  for (int i = 0; i < request.n; ++i) {
    out.texts.push_back(reply(request, base, request.sample_offset + static_cast<std::uint64_t>(i)));
    out.completion_tokens += approx_tokens(out.texts.back());
  }
  return out;
}

std::string MockBackend::reply(const SamplingRequest& request, std::uint64_t base,
                               std::uint64_t index) const {
  std::uint64_t variant = index;
  if (request.temperature == 0.0) {
    variant = 0;
  } else if (options_.answer_variety > 0) {
    variant = splitmix64(base + index) % static_cast<std::uint64_t>(options_.answer_variety);
  }
  Stream rng(splitmix64(base ^ (variant * 0x9E3779B97F4A7C15ull)));
  const auto& opts = request.hint.options;

  switch (request.hint.kind) {
    case AnswerKind::kSelectOne: {
      if (opts.empty()) return "No suitable candidate.";
      const auto& id = opts[rng.below(opts.size())];
      return std::string(pick(rng, kSelectOneLead)) + " " + id + pick(rng, kSelectTail);
    }
    case AnswerKind::kSelectMany: {
      if (opts.empty()) return "None of the candidates qualify.";
      std::vector<std::string> chosen;
      for (const auto& o : opts) {
        if (rng.unit() < 0.5) chosen.push_back(o);
      }
      if (chosen.empty()) chosen.push_back(opts[rng.below(opts.size())]);
      std::string text = std::string(pick(rng, kSelectManyLead)) + " ";
      for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (i) text += ", ";
        text += chosen[i];
      }
      return text + pick(rng, kSelectTail);
    }
    case AnswerKind::kYesNo:
      return rng.unit() < options_.yes_probability ? pick(rng, kYes) : pick(rng, kNo);
    case AnswerKind::kFreeText:
      break;
  }
  std::string text = pick(rng, kOpeners);
  text += ' ';
  text += pick(rng, kMiddles);
  text += ' ';
  text += pick(rng, kClosers);
  text += " Confidence " + std::to_string(50 + rng.below(50)) + "%.";
  return text;
}

ScriptedBackend::ScriptedBackend(std::map<std::string, std::vector<std::string>> replies,
                                 bool cycle)
    : cycle_(cycle) {
  for (auto& [key, list] : replies) queues_[key].replies = std::move(list);
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> replies, bool cycle)
    : ScriptedBackend(std::map<std::string, std::vector<std::string>>{{"*", std::move(replies)}},
                      cycle) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& j) {
  try {
    if (j.is_array()) {
      return std::make_unique<ScriptedBackend>(j.get<std::vector<std::string>>());
    }
    if (!j.is_object() || !j.contains("replies")) {
      throw ConfigError("script must be an array or an object with 'replies'");
    }
    for (const auto& [key, _] : j.items()) {
      if (key != "replies" && key != "cycle") throw ConfigError("script: unknown key '" + key + "'");
    }
    const bool cycle = j.value("cycle", false);
    const auto& r = j.at("replies");
    if (r.is_array()) {
      return std::make_unique<ScriptedBackend>(r.get<std::vector<std::string>>(), cycle);
    }
    return std::make_unique<ScriptedBackend>(
        r.get<std::map<std::string, std::vector<std::string>>>(), cycle);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed script: ") + e.what());
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open script " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("script " + path.string() + ": " + e.what());
  }
}

SamplingResponse ScriptedBackend::sample(const SamplingRequest& request) {
  if (request.n < 1) throw BackendError("sampling request needs n >= 1");
  std::lock_guard lock(mu_);
  auto it = queues_.find(request.template_id);
  if (it == queues_.end()) it = queues_.find("*");
  if (it == queues_.end()) {
    throw BackendError("script has no replies for template '" + request.template_id + "'");
  }
  auto& q = it->second;
  SamplingResponse out;
  for (const auto& m : request.messages) out.prompt_tokens += approx_tokens(m.content);
  for (int i = 0; i < request.n; ++i) {
    if (q.next >= q.replies.size()) {
      if (!cycle_ || q.replies.empty()) {
        throw BackendError("script exhausted for template '" + request.template_id + "'");
      }
      q.next = 0;
    }
    out.texts.push_back(q.replies[q.next++]);
    out.completion_tokens += approx_tokens(out.texts.back());
  }
  return out;
}

}  // namespace drugmcts
