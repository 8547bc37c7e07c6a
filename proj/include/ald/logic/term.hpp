#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ald::logic {

/// A first-order term as seen by callers of the engine. Lists use the
/// classic representation: '.'/2 cells terminated by the atom '[]'.
class Term {
public:
    enum class Kind : std::uint8_t { Var, Atom, Integer, Compound };

    Term() : Term(Kind::Atom, "[]") {}

    static Term var(std::string name) { return Term(Kind::Var, std::move(name)); }
    static Term atom(std::string name) { return Term(Kind::Atom, std::move(name)); }
    static Term integer(std::int64_t value)
    {
        Term t(Kind::Integer, {});
        t.value_ = value;
        return t;
    }
    static Term compound(std::string functor, std::vector<Term> args);
    static Term list(std::vector<Term> items, std::optional<Term> tail = std::nullopt);
    static Term nil() { return atom("[]"); }

    Kind kind() const { return kind_; }
    bool is_var() const { return kind_ == Kind::Var; }
    bool is_atom() const { return kind_ == Kind::Atom; }
    bool is_integer() const { return kind_ == Kind::Integer; }
    bool is_compound() const { return kind_ == Kind::Compound; }
    bool is_callable() const { return is_atom() || is_compound(); }

    /// Variable name, atom name, or functor name, depending on kind.
    const std::string& name() const { return name_; }
    std::int64_t value() const { return value_; }
    const std::vector<Term>& args() const { return args_; }
    std::size_t arity() const { return args_.size(); }
    const Term& arg(std::size_t i) const { return args_.at(i); }

    bool is(std::string_view functor, std::size_t arity) const
    {
        return is_callable() && name_ == functor && args_.size() == arity;
    }
    bool is_list_cell() const { return is(".", 2); }
    bool is_nil() const { return is_atom() && name_ == "[]"; }

    friend bool operator==(const Term& a, const Term& b);
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

private:
    Term(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    Kind kind_;
    std::string name_;
    std::int64_t value_ = 0;
    std::vector<Term> args_;
};

/// Canonical text for a term. Operators are written in operator form,
/// lists in bracket notation, and the result reads back to an equal term.
std::string format_term(const Term& t);

/// Replace variables by name. Variables missing from the map stay as is.
Term substitute(const Term& t, const std::vector<std::pair<std::string, Term>>& bindings);

/// Collect distinct variable names in depth-first, left-to-right order.
std::vector<std::string> variable_names(const Term& t);

/// Flatten a ','/2 conjunction into its goals.
std::vector<Term> flatten_conjunction(const Term& t);

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(int line, const std::string& message)
        : std::runtime_error("syntax error line " + std::to_string(line) + ": " + message)
        , line_(line)
        , message_(message)
    {
    }

    int line() const { return line_; }
    const std::string& message() const { return message_; }

private:
    int line_;
    std::string message_;
};

} // namespace ald::logic
