#include "prism/prompt.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "prism/errors.hpp"

namespace prism::prompts {

using nlohmann::json;

namespace {

constexpr const char* kUserDelimiter = "===USER===";

const std::regex kPlaceholderPattern(R"(\{([a-z_]+)\})");

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open template file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void validate_placeholders(const std::string& body, const std::string& id) {
    auto begin = std::sregex_iterator(body.begin(), body.end(), kPlaceholderPattern);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::string name = (*it)[1];
        if (name != "question" && name != "candidates" && name != "examples") {
            throw ConfigError("template '" + id + "' uses unknown placeholder {" + name + "}");
        }
    }
}

// Replaces every occurrence of `{name}` with `value`; returns replacement count.
std::size_t substitute(std::string& body, const std::string& name, const std::string& value) {
    const std::string token = "{" + name + "}";
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = body.find(token, pos)) != std::string::npos) {
        body.replace(pos, token.size(), value);
        pos += value.size();
        ++count;
    }
    return count;
}

// Removes a line that consists solely of {examples} together with one
// neighbouring blank line, so surrounding blocks join up cleanly.
void elide_examples_block(std::string& body) {
    const std::string token = "{examples}";
    std::size_t pos;
    while ((pos = body.find(token)) != std::string::npos) {
        std::size_t line_start = body.rfind('\n', pos);
        line_start = line_start == std::string::npos ? 0 : line_start + 1;
        std::size_t line_end = body.find('\n', pos);
        line_end = line_end == std::string::npos ? body.size() : line_end + 1;

        const std::string line = body.substr(line_start, line_end - line_start);
        if (line == token || line == token + "\n") {
            std::size_t erase_end = line_end;
            if (erase_end < body.size() && body[erase_end] == '\n') {
                ++erase_end;  // following blank line
            } else if (line_start >= 1 && body[line_start - 1] == '\n' && line_start >= 2 &&
                       body[line_start - 2] == '\n') {
                line_start -= 1;  // preceding blank line
            }
            body.erase(line_start, erase_end - line_start);
        } else {
            body.erase(pos, token.size());
        }
    }
}

std::string flatten_newlines(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '\n' || c == '\r') {
            if (!out.empty() && out.back() != ' ') {
                out.push_back(' ');
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

TemplateRegistry TemplateRegistry::load(const std::filesystem::path& asset_dir) {
    const auto manifest_path = asset_dir / "prompts" / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) {
        throw ConfigError("cannot open prompt manifest: " + manifest_path.string());
    }
    json manifest = json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.contains("templates")) {
        throw ConfigError("invalid prompt manifest: " + manifest_path.string());
    }

    TemplateRegistry registry;
    for (const json& entry : manifest["templates"]) {
        PromptTemplate tmpl;
        tmpl.id = entry.at("id").get<std::string>();
        auto task = corpus::task_from_string(entry.at("task").get<std::string>());
        if (!task) {
            throw ConfigError("template '" + tmpl.id + "' declares unknown task");
        }
        tmpl.task = *task;
        tmpl.output_schema_id = entry.at("schema").get<std::string>();

        const std::string content =
            read_file(asset_dir / "prompts" / entry.at("file").get<std::string>());
        const std::size_t delim = content.find(kUserDelimiter);
        if (delim == std::string::npos) {
            throw ConfigError("template '" + tmpl.id + "' is missing the " +
                              std::string(kUserDelimiter) + " delimiter");
        }
        tmpl.system_body = content.substr(0, delim);
        while (!tmpl.system_body.empty() && tmpl.system_body.back() == '\n') {
            tmpl.system_body.pop_back();
        }
        std::size_t user_start = content.find('\n', delim);
        user_start = user_start == std::string::npos ? content.size() : user_start + 1;
        tmpl.user_body = content.substr(user_start);
        while (!tmpl.user_body.empty() && tmpl.user_body.back() == '\n') {
            tmpl.user_body.pop_back();
        }

        validate_placeholders(tmpl.system_body, tmpl.id);
        validate_placeholders(tmpl.user_body, tmpl.id);
        if (registry.templates_.contains(tmpl.id)) {
            throw ConfigError("duplicate template id '" + tmpl.id + "'");
        }
        registry.templates_.emplace(tmpl.id, std::move(tmpl));
    }
    return registry;
}

const PromptTemplate& TemplateRegistry::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) {
        throw ConfigError("unknown template id '" + id + "'");
    }
    return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(templates_.size());
    for (const auto& [id, _] : templates_) {
        out.push_back(id);
    }
    return out;
}

std::string format_candidate_lines(std::span<const corpus::Candidate> candidates) {
    std::ostringstream out;
    bool first = true;
    for (const corpus::Candidate& c : candidates) {
        if (!first) {
            out << '\n';
        }
        first = false;
        out << '[' << c.index << ']';
        if (c.doc_type) {
            out << " (" << corpus::to_string(*c.doc_type) << ')';
        }
        const std::string text = flatten_newlines(c.text);
        if (!text.empty()) {
            out << ' ' << text;
        }
    }
    return out.str();
}

RenderedPrompt render_chat(const PromptTemplate& tmpl, const std::string& question,
                           std::span<const corpus::Candidate> candidates,
                           const std::optional<std::string>& examples,
                           const RenderOptions& options) {
    const bool uses_question =
        tmpl.system_body.find("{question}") != std::string::npos ||
        tmpl.user_body.find("{question}") != std::string::npos;
    const bool uses_candidates =
        tmpl.system_body.find("{candidates}") != std::string::npos ||
        tmpl.user_body.find("{candidates}") != std::string::npos;
    if (uses_question && question.empty()) {
        throw ArgumentError("missing value for placeholder {question}");
    }
    if (uses_candidates && candidates.empty()) {
        throw ArgumentError("missing value for placeholder {candidates}");
    }

    RenderedPrompt rendered{tmpl.system_body, tmpl.user_body};
    const std::string candidate_lines = format_candidate_lines(candidates);
    for (std::string* body : {&rendered.system_prompt, &rendered.user_prompt}) {
        substitute(*body, "question", question);
        substitute(*body, "candidates", candidate_lines);
        if (examples && !examples->empty()) {
            substitute(*body, "examples", *examples);
        } else {
            elide_examples_block(*body);
        }
    }

    const std::size_t total = rendered.system_prompt.size() + rendered.user_prompt.size();
    if (total > options.char_budget) {
        throw BudgetError("rendered prompt exceeds character budget by " +
                              std::to_string(total - options.char_budget) + " characters",
                          total - options.char_budget);
    }
    return rendered;
}

std::string render_prompt(const PromptTemplate& tmpl, const std::string& question,
                          std::span<const corpus::Candidate> candidates,
                          const std::optional<std::string>& examples,
                          const RenderOptions& options) {
    return render_chat(tmpl, question, candidates, examples, options).full();
}

}  // namespace prism::prompts
