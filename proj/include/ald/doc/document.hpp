#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ald::doc {

struct LineSpan {
    int first = 0;
    int last = 0;
    bool operator==(const LineSpan&) const = default;
};

struct Heading {
    int level = 1;
    std::string text;
    bool title_command = false; ///< written as `\title <text>`
    LineSpan span;
    bool operator==(const Heading&) const = default;
};

/// Verbatim source lines, joined with '\n' and without a final newline.
struct Prose {
    std::string text;
    LineSpan span;
    bool operator==(const Prose&) const = default;
};

enum class CellKind { program, query, static_, exercise };

std::string to_string(CellKind kind);

using Options = std::vector<std::pair<std::string, std::string>>;

struct CodeCell {
    CellKind kind = CellKind::static_;
    std::string engine_id;
    std::string fence_info; ///< tag exactly as written after the opening fence
    std::string body;       ///< raw lines between the fences
    std::string visible_text;
    std::optional<std::string> solution_text;
    std::optional<std::string> checker;
    Options checker_options; ///< extra `key=value` items after the checker name
    std::string cell_id;
    LineSpan span;

    bool runnable() const { return kind != CellKind::static_; }
    const std::string* option(std::string_view key) const
    {
        for (const auto& [k, v] : checker_options)
            if (k == key) return &v;
        return nullptr;
    }
    bool operator==(const CodeCell&) const = default;
};

struct FilterDirective {
    std::string code_file;
    std::vector<std::string> tool_options;
    std::string filter_name;
    std::vector<std::string> filter_params;
    std::string tool_id; ///< empty selects the site default
    LineSpan span;
    bool operator==(const FilterDirective&) const = default;
};

using Block = std::variant<Heading, Prose, CodeCell, FilterDirective>;

LineSpan span_of(const Block& block);

struct Document {
    std::string source_path;
    std::optional<std::string> title;
    std::vector<Block> blocks;

    std::vector<const CodeCell*> cells() const;
    bool operator==(const Document&) const = default;
};

/// Source text for the document, one '\n'-terminated line per source line.
std::string serialize(const Document& doc);

/// Text form of one directive, e.g. `@exfilter{a.pl}{V,filter=warn_error}`.
std::string format_directive(const FilterDirective& d);

/// Page stem used in cell ids and output file names: "dir/app.md" -> "app".
std::string page_stem(std::string_view source_path);

} // namespace ald::doc
