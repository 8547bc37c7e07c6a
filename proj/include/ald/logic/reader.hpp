#pragma once

#include <string_view>
#include <vector>

#include "ald/logic/term.hpp"

namespace ald::logic {

struct ReadResult {
    Term term;
    int line = 1; ///< line of the first token of the term
};

/// Read every '.'-terminated term in `text`. Throws SyntaxError.
std::vector<ReadResult> read_terms(std::string_view text);

/// Read a single term; the terminating '.' is optional.
Term read_term(std::string_view text);

/// Read a top-level query. Accepts an optional leading "?-" and trailing '.'.
Term parse_query(std::string_view text);

} // namespace ald::logic
