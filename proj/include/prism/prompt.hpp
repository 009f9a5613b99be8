#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prism/sample.hpp"

namespace prism::prompts {

/// A versioned prompt loaded from a text asset. The asset holds a system
/// section and a user section separated by a line reading `===USER===`.
/// Recognized placeholders: {question}, {candidates}, {examples}.
struct PromptTemplate {
    std::string id;  // "P1.document" .. "P4.chunk", or a role id like "doc.analyzer"
    corpus::Task task = corpus::Task::DocumentRanking;
    std::string system_body;
    std::string user_body;
    std::string output_schema_id;  // "scores_v1" | "filter_v1" | "weights_v1"
};

/// Loads the template assets named by a manifest.json and serves them by id.
/// Immutable after load; safe to share across threads.
class TemplateRegistry {
public:
    static TemplateRegistry load(const std::filesystem::path& asset_dir);

    const PromptTemplate& get(const std::string& id) const;
    bool contains(const std::string& id) const { return templates_.contains(id); }
    std::vector<std::string> ids() const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

struct RenderOptions {
    std::size_t char_budget = 3'500'000;
};

struct RenderedPrompt {
    std::string system_prompt;
    std::string user_prompt;

    std::string full() const { return system_prompt + "\n\n" + user_prompt; }
};

/// One candidate per line: `[index] (doc type) text` for document candidates,
/// `[index] text` for chunks. Newlines inside candidate text are flattened.
std::string format_candidate_lines(std::span<const corpus::Candidate> candidates);

/// Substitutes {question}, {candidates} and optionally {examples} into the
/// template. Deterministic: identical inputs produce identical bytes. When no
/// examples are supplied, a line consisting solely of {examples} is elided
/// along with the blank line that would otherwise be left behind.
RenderedPrompt render_chat(const PromptTemplate& tmpl, const std::string& question,
                           std::span<const corpus::Candidate> candidates,
                           const std::optional<std::string>& examples = std::nullopt,
                           const RenderOptions& options = {});

/// render_chat flattened to a single string (system, blank line, user).
std::string render_prompt(const PromptTemplate& tmpl, const std::string& question,
                          std::span<const corpus::Candidate> candidates,
                          const std::optional<std::string>& examples = std::nullopt,
                          const RenderOptions& options = {});

}  // namespace prism::prompts
