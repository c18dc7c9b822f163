#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>

namespace arm {

/// Templates use {name} placeholders; "{{" and "}}" stand for literal braces.
struct PromptSet {
  std::string keywords;   // {user_question}; opens the ARM decode and keyword extraction
  std::string verify;     // {user_question}, {draft}
  std::string decompose;  // {user_question}
  std::string react;      // {user_question}
};

PromptSet default_prompts();

/// Replaces the named templates with file contents. Keys: keywords, verify,
/// decompose, react. Throws ConfigError for unknown keys or unreadable files.
PromptSet load_prompts(const std::map<std::string, std::filesystem::path>& files,
                       PromptSet base = default_prompts());

using TemplateVars = std::map<std::string, std::string, std::less<>>;

/// Throws TemplateError on an unknown placeholder or an unbalanced brace.
std::string render_template(std::string_view tmpl, const TemplateVars& vars);

/// Renders the text before and after the single `hole` placeholder.
std::pair<std::string, std::string> render_around(std::string_view tmpl, const TemplateVars& vars,
                                                  std::string_view hole);

}  // namespace arm
