#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "drugmcts/config.hpp"
#include "drugmcts/domain.hpp"

namespace drugmcts {

/// Valid ids mentioned in `text`, in order of first mention, deduplicated.
/// A mention must not be flanked by letters, digits or underscores, so "M1"
/// does not match inside "M10"; overlapping mentions resolve to the longest id.
std::vector<std::string> parse_id_list(std::string_view text, const IdSet& valid_ids);

enum class YesNo { kYes, kNo, kIndeterminate };
std::string to_string(YesNo v);

/// Classifies by the first standalone lexicon word (case-insensitive).
YesNo parse_yes_no(std::string_view text, const YesNoLexicon& lexicon = {});

/// Lowercase, whitespace runs collapsed to one space, trimmed. Key for distinct-answer dedup.
std::string normalize_answer(std::string_view text);

}  // namespace drugmcts
