#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "drugmcts/backend.hpp"

namespace drugmcts {

using Bindings = std::map<std::string, std::string>;

/// Prompt templates keyed by id. Template text may be split into
/// "[system]" / "[user]" / "[assistant]" sections; text without section
/// headers is one user message. Placeholders use {{name}} syntax.
class TemplateLibrary {
 public:
  /// The templates shipped in templates/, compiled in.
  static TemplateLibrary defaults();

  void set(const std::string& id, std::string text);
  bool contains(const std::string& id) const { return templates_.count(id) != 0; }
  const std::string& text(const std::string& id) const;

  /// Every <id>.txt in `dir` replaces or adds the template <id>.
  void load_directory(const std::filesystem::path& dir);

  /// Distinct placeholder names in order of first appearance.
  std::vector<std::string> placeholders(const std::string& id) const;

 private:
  std::map<std::string, std::string> templates_;
};

/// Substitutes every placeholder (single pass; substituted values are not rescanned).
/// Throws TemplateError for an unknown template or a placeholder without binding.
std::vector<PromptMessage> render_prompt(const TemplateLibrary& library,
                                         const std::string& template_id,
                                         const Bindings& bindings);

}  // namespace drugmcts
