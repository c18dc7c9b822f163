#include "arm/prompts.hpp"

#include <fstream>
#include <sstream>

#include "arm/error.hpp"

namespace arm {

PromptSet default_prompts() {
  PromptSet p;
  p.keywords =
      "You look up tables and passages that together answer a question.\n"
      "Question: {user_question}\n"
      "Pick out the phrases of the question that name things to look up. Keep them in question "
      "order, do not let them overlap, and put | between them.\n"
      "Phrases:";
  p.verify =
      "Question: {user_question}\n"
      "Candidate objects and how they link up:\n"
      "{draft}"
      "Name each object needed for the answer, separated by |, then write <> when done.\n"
      "Needed:";
  p.decompose =
      "Rewrite the question as a few shorter questions, each answerable from one table or "
      "passage. Put each on its own line.\n"
      "Question: {user_question}\n"
      "Shorter questions:";
  p.react =
      "Work on the question step by step. On each line give a short thought and then one "
      "action: Search[terms] looks up objects, Finish[answer] ends the work.\n"
      "Question: {user_question}\n";
  return p;
}

PromptSet load_prompts(const std::map<std::string, std::filesystem::path>& files, PromptSet base) {
  for (const auto& [key, path] : files) {
    std::string* slot = key == "keywords"    ? &base.keywords
                        : key == "verify"    ? &base.verify
                        : key == "decompose" ? &base.decompose
                        : key == "react"     ? &base.react
                                             : nullptr;
    if (!slot) throw ConfigError("unknown prompt template '" + key + "'");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    *slot = ss.str();
  }
  return base;
}

namespace {

// Calls `text` for literal runs and `hole` for each placeholder name.
template <typename Text, typename Hole>
void scan(std::string_view tmpl, Text text, Hole hole) {
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      text("{");
      i += 2;
    } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      text("}");
      i += 2;
    } else if (c == '{') {
      const auto close = tmpl.find('}', i);
      if (close == std::string_view::npos) throw TemplateError("unclosed placeholder in template");
      hole(tmpl.substr(i + 1, close - i - 1));
      i = close + 1;
    } else if (c == '}') {
      throw TemplateError("stray '}' in template");
    } else {
      const auto next = tmpl.find_first_of("{}", i);
      const auto end = next == std::string_view::npos ? tmpl.size() : next;
      text(tmpl.substr(i, end - i));
      i = end;
    }
  }
}

}  // namespace

std::string render_template(std::string_view tmpl, const TemplateVars& vars) {
  std::string out;
  scan(
      tmpl, [&](std::string_view t) { out += t; },
      [&](std::string_view name) {
        auto it = vars.find(name);
        if (it == vars.end()) throw TemplateError("unknown placeholder {" + std::string(name) + "}");
        out += it->second;
      });
  return out;
}

std::pair<std::string, std::string> render_around(std::string_view tmpl, const TemplateVars& vars,
                                                  std::string_view hole) {
  std::string before, after;
  int holes = 0;
  scan(
      tmpl, [&](std::string_view t) { (holes ? after : before) += t; },
      [&](std::string_view name) {
        if (name == hole) {
          if (++holes > 1) throw TemplateError("placeholder {" + std::string(hole) + "} repeated");
          return;
        }
        auto it = vars.find(name);
        if (it == vars.end()) throw TemplateError("unknown placeholder {" + std::string(name) + "}");
        (holes ? after : before) += it->second;
      });
  if (holes == 0) throw TemplateError("template lacks {" + std::string(hole) + "}");
  return {before, after};
}

}  // namespace arm
