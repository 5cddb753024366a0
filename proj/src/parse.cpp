#include "drugmcts/parse.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace drugmcts {

namespace {

bool word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<std::string> parse_id_list(std::string_view text, const IdSet& valid_ids) {
  struct Mention {
    std::size_t pos;
    std::size_t len;
    const std::string* id;
  };
  std::vector<Mention> mentions;
  for (const auto& id : valid_ids) {
    if (id.empty()) continue;
    for (auto pos = text.find(id); pos != std::string_view::npos; pos = text.find(id, pos + 1)) {
      const auto end = pos + id.size();
      const bool left_ok = pos == 0 || !word_char(text[pos - 1]) || !word_char(id.front());
      const bool right_ok = end == text.size() || !word_char(text[end]) || !word_char(id.back());
      if (left_ok && right_ok) mentions.push_back({pos, id.size(), &id});
    }
  }
  std::sort(mentions.begin(), mentions.end(), [](const Mention& a, const Mention& b) {
    if (a.pos != b.pos) return a.pos < b.pos;
    return a.len > b.len;
  });

  std::vector<std::string> out;
  std::set<std::string_view> seen;
  std::size_t covered = 0;
  for (const auto& m : mentions) {
    if (m.pos < covered) continue;
    covered = m.pos + m.len;
    if (seen.insert(*m.id).second) out.push_back(*m.id);
  }
  return out;
}

std::string to_string(YesNo v) {
  switch (v) {
    case YesNo::kYes: return "yes";
    case YesNo::kNo: return "no";
    case YesNo::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

YesNo parse_yes_no(std::string_view text, const YesNoLexicon& lexicon) {
  std::set<std::string> yes, no;
  for (const auto& w : lexicon.affirmative) yes.insert(lower(w));
  for (const auto& w : lexicon.negative) no.insert(lower(w));

  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !word_char(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && word_char(text[j])) ++j;
    if (j > i) {
      const auto word = lower(text.substr(i, j - i));
      const bool is_yes = yes.count(word) != 0;
      const bool is_no = no.count(word) != 0;
      if (is_yes && is_no) return YesNo::kIndeterminate;
      if (is_yes) return YesNo::kYes;
      if (is_no) return YesNo::kNo;
    }
    i = j;
  }
  return YesNo::kIndeterminate;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace drugmcts
