#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ald/doc/document.hpp"

namespace ald::doc {

enum class ParseErrorKind { unclosed_fence, bad_directive, bad_solution_marker };

std::string to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message),
          kind_(kind), line_(line), message_(message)
    {
    }
    ParseErrorKind kind() const { return kind_; }
    int line() const { return line_; }
    const std::string& message() const { return message_; }

private:
    ParseErrorKind kind_;
    int line_;
    std::string message_;
};

/// Parses a source page. Throws ParseError.
Document parse(std::string_view source, std::string_view source_path);

/// Builds a cell from its fence tag and raw body. `first_line` is the line
/// of the opening fence and is used for error positions. cell_id and span
/// are left for the caller.
CodeCell classify_cell(std::string_view fence_tag, std::string_view body, int first_line = 1);

/// Parses the text of one `@exfilter{...}{...}` line.
FilterDirective parse_directive(std::string_view line, int line_no = 1);

/// Splits on commas that are not nested inside (), [] or {}.
std::vector<std::string> split_tokens(std::string_view text);

} // namespace ald::doc
