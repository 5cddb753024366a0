#include "drugmcts/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "drugmcts/error.hpp"

namespace drugmcts {

// Generated at configure time from templates/*.txt.
const std::map<std::string, std::string>& builtin_templates();

namespace {

struct Placeholder {
  std::size_t begin;
  std::size_t end;
  std::string name;
};

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Placeholder> scan(const std::string& text) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string::npos) {
    const auto close = text.find("}}", pos + 2);
    if (close == std::string::npos) break;
    std::size_t a = pos + 2, b = close;
    while (a < b && text[a] == ' ') ++a;
    while (b > a && text[b - 1] == ' ') --b;
    bool valid = a < b;
    for (auto i = a; i < b && valid; ++i) valid = name_char(text[i]);
    if (valid) {
      out.push_back({pos, close + 2, text.substr(a, b - a)});
      pos = close + 2;
    } else {
      pos += 2;
    }
  }
  return out;
}

std::string trim_newlines(std::string s) {
  const auto first = s.find_first_not_of("\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of("\r\n \t");
  return s.substr(first, last - first + 1);
}

/// Drops blank lines left behind by empty optional sections.
std::string collapse_blank_runs(const std::string& s) {
  std::string out;
  int newlines = 0;
  for (char c : s) {
    if (c == '\n') {
      if (++newlines > 2) continue;
    } else if (c != ' ' && c != '\t' && c != '\r') {
      newlines = 0;
    }
    out += c;
  }
  return out;
}

}  // namespace

TemplateLibrary TemplateLibrary::defaults() {
  TemplateLibrary lib;
  for (const auto& [id, text] : builtin_templates()) lib.set(id, text);
  return lib;
}

void TemplateLibrary::set(const std::string& id, std::string text) {
  templates_[id] = std::move(text);
}

const std::string& TemplateLibrary::text(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw TemplateError("unknown template '" + id + "'");
  return it->second;
}

void TemplateLibrary::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("template directory not found: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::stringstream buf;
    buf << in.rdbuf();
    set(entry.path().stem().string(), buf.str());
  }
}

std::vector<std::string> TemplateLibrary::placeholders(const std::string& id) const {
  std::vector<std::string> out;
  for (auto& p : scan(text(id))) {
    if (std::find(out.begin(), out.end(), p.name) == out.end()) out.push_back(p.name);
  }
  return out;
}

std::vector<PromptMessage> render_prompt(const TemplateLibrary& library,
                                         const std::string& template_id,
                                         const Bindings& bindings) {
  const auto& tpl = library.text(template_id);

  std::string rendered;
  std::size_t last = 0;
  for (const auto& p : scan(tpl)) {
    auto it = bindings.find(p.name);
    if (it == bindings.end()) {
      throw TemplateError("template '" + template_id + "' has no binding for placeholder {{" +
                          p.name + "}}");
    }
    rendered.append(tpl, last, p.begin - last);
    rendered += it->second;
    last = p.end;
  }
  rendered.append(tpl, last, std::string::npos);

  // Split into role sections. Headers are matched on the rendered text, so a
  // bound value containing "[user]" on its own line would start a section;
  // callers never bind such values.
  std::vector<PromptMessage> out;
  std::istringstream lines(rendered);
  std::string line;
  std::optional<Role> role;
  std::string body;
  auto flush = [&] {
    auto content = trim_newlines(collapse_blank_runs(body));
    if (role) {
      if (content.empty()) {
        throw TemplateError("template '" + template_id + "' renders an empty " +
                            to_string(*role) + " message");
      }
      out.push_back({*role, std::move(content)});
    } else if (!content.empty()) {
      out.push_back({Role::kUser, std::move(content)});
    }
    body.clear();
  };
  while (std::getline(lines, line)) {
    const auto t = trim_newlines(line);
    std::optional<Role> header;
    if (t == "[system]") header = Role::kSystem;
    if (t == "[user]") header = Role::kUser;
    if (t == "[assistant]") header = Role::kAssistant;
    if (header) {
      flush();
      role = header;
      continue;
    }
    body += line;
    body += '\n';
  }
  flush();
  if (out.empty()) throw TemplateError("template '" + template_id + "' renders no messages");
  return out;
}

}  // namespace drugmcts
