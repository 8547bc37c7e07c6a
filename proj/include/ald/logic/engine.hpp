#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ald/logic/term.hpp"

namespace ald::logic {

struct Clause {
    Term head;
    std::vector<Term> body; ///< empty for facts
    int line = 0;
};

struct ModuleDirective {
    std::vector<std::string> packages;
};

enum class TestProp { not_fails, fails };

struct TestDirective {
    Term goal;
    std::optional<Term> post;
    std::vector<TestProp> props;
    int line = 0;

    /// Source-like rendering, e.g. "factorial(0,0) + fails".
    std::string describe() const;
};

using Directive = std::variant<ModuleDirective, TestDirective>;

/// A directive the engine keeps but does not interpret, such as `:- pred ...`.
struct OtherDirective {
    Term term;
    int line = 0;
};

struct Program {
    std::vector<Clause> clauses;
    std::vector<Directive> directives;
    std::vector<OtherDirective> other_directives;
    /// Set when the module's package list loads bf/bfall.
    bool fair_search = false;

    std::vector<TestDirective> tests() const;
};

/// Parse program text. Throws SyntaxError with the offending line.
Program parse_program(std::string_view text);

struct Budget {
    int max_depth = 64;
    std::int64_t max_steps = 1'000'000;
    int max_answers = 1;
};

/// Throws std::invalid_argument unless every limit is positive.
void validate(const Budget& budget);

struct Answer {
    /// Query variables in order of first occurrence; unbound ones are omitted.
    std::vector<std::pair<std::string, Term>> bindings;
    int proof_depth = 0;

    /// "X = s(0), Y = 1" style key, also used for duplicate suppression.
    std::string key() const;
};

struct SolveResult {
    std::vector<Answer> answers;
    /// Stopped because max_answers was reached while more search remained.
    bool more = false;
    /// Search was cut short by the depth or step limit.
    bool budget_hit = false;
    std::int64_t steps = 0;
};

enum class EngineErrorKind { budget_exhausted, instantiation_error, type_error, evaluation_error, cancelled };

std::string_view to_string(EngineErrorKind kind);

class EngineError : public std::runtime_error {
public:
    EngineError(EngineErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
    {
    }
    EngineErrorKind kind() const { return kind_; }

private:
    EngineErrorKind kind_;
};

/// Enumerate answers to `query`. With program.fair_search the search is
/// iterative deepening on proof depth with duplicate answers suppressed;
/// otherwise it is plain depth-first bounded only by max_steps.
/// Throws EngineError.
SolveResult solve(const Program& program, const Term& query, const Budget& budget,
                  std::stop_token stop = {});

struct TestOutcome {
    TestDirective test;
    bool passed = false;
    std::string detail;
};

/// Run every `:- test` directive in the program. Never throws EngineError;
/// engine errors are reported as failures.
std::vector<TestOutcome> run_tests(const Program& program, const Budget& budget = {});

/// Top-level transcript: "Var = Term" lines per answer, " ;" after every
/// answer that may be followed by another, then "yes" or "no".
std::string format_transcript(const SolveResult& result);

} // namespace ald::logic
