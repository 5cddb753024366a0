#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "drugmcts/domain.hpp"

namespace drugmcts::io {

using json = nlohmann::json;

/// Collects lenient-mode diagnostics. In strict mode unknown fields throw instead.
struct ReadContext {
  bool strict = true;
  std::vector<std::string> warnings;
};

json to_json(const Molecule& m);
json to_json(const Protein& p);
json to_json(const InteractionRecord& r);
json to_json(const ProblemInstance& inst);
json to_json(const BaselineInstance& inst);

// Each reader throws drugmcts::Error describing the offending field.
Molecule molecule_from_json(const json& j, ReadContext& ctx);
Protein protein_from_json(const json& j, ReadContext& ctx);
InteractionRecord interaction_from_json(const json& j, ReadContext& ctx);
ProblemInstance instance_from_json(const json& j, ReadContext& ctx);
BaselineInstance baseline_from_json(const json& j, ReadContext& ctx);

/// Compact single-line dump; keys sorted, so output is canonical.
std::string to_line(const json& j);

/// Reads one JSON value per nonblank line; parse failures become SchemaError with the line number.
template <class T, class Reader>
std::vector<T> read_jsonl(const std::filesystem::path& path, ReadContext& ctx, Reader&& reader);

std::vector<ProblemInstance> read_instances(const std::filesystem::path& path, ReadContext& ctx);

template <class T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& records);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace drugmcts::io

#include "drugmcts/json_io_impl.hpp"
