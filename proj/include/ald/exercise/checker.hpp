#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ald/doc/document.hpp"
#include "ald/filters/registry.hpp"
#include "ald/logic/engine.hpp"
#include "ald/tools/runner.hpp"

namespace ald::exercise {

struct ExerciseSpec {
    std::string page;
    std::string cell_id;
    std::string engine_id;
    std::string skeleton;
    std::string solution;
    std::string checker;
    std::string tool_id;                   ///< verify_assert; empty selects the default tool
    std::vector<std::string> tool_options; ///< verify_assert
    std::optional<filters::FilterSpec> filter; ///< verify_assert; warn_error when absent
    std::string query;                     ///< output_match
    int max_answers = 20;                  ///< output_match
};

/// Reads checker wiring from the `solution=` marker options: tool=, opt=
/// (repeatable), filter=, param= (repeatable), query=, answers=.
/// Throws std::invalid_argument for unknown keys or bad values.
ExerciseSpec from_cell(const std::string& page, const doc::CodeCell& cell);

enum class Outcome { pass, fail, error };

std::string to_string(Outcome outcome);

struct Verdict {
    Outcome outcome = Outcome::error;
    std::string feedback;
};

struct CheckerDeps {
    tools::ToolRunner* runner = nullptr; ///< needed by verify_assert
    const filters::FilterRegistry* filters = nullptr;
    std::string default_tool;
    logic::Budget budget;
};

bool is_checker(const std::string& name);

/// Grades a submission. Never throws for problems with the submission or
/// the tool; those become fail or error verdicts.
Verdict check(const ExerciseSpec& spec, const std::string& submission, const CheckerDeps& deps);

/// "Correct!" on pass; otherwise the diagnostic, plus a hint line on fail.
std::string feedback_for(Outcome outcome, const std::string& checker, const std::string& diagnostic);

/// Trailing spaces removed from every line, runs of blank lines collapsed.
std::string normalize_output(std::string_view text);

/// Replaces every occurrence of `secret` (ignoring surrounding blank lines)
/// in `text`.
std::string redact(std::string text, std::string_view secret);

/// Server-side record of a built site's exercises.
struct ExerciseSet {
    std::string default_tool;
    std::string tools_json; ///< resolved tool manifest
    std::vector<ExerciseSpec> exercises;

    const ExerciseSpec* find(const std::string& page, const std::string& cell_id) const;
};

/// Solutions are stored base64-encoded so no solution text appears in the
/// output tree.
std::string to_json(const ExerciseSet& set);
ExerciseSet exercise_set_from_json(const std::string& text);
ExerciseSet load_exercise_set(const std::filesystem::path& path);

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view text);

} // namespace ald::exercise
