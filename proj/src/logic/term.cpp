#include "ald/logic/term.hpp"

#include <algorithm>
#include <cctype>

#include "operators.hpp"

namespace ald::logic {

using detail::infix_op;
using detail::is_alnum_char;
using detail::is_symbol_char;
using detail::OpType;
using detail::prefix_op;

Term Term::compound(std::string functor, std::vector<Term> args)
{
    if (args.empty()) throw std::invalid_argument("compound term needs at least one argument");
    Term t(Kind::Compound, std::move(functor));
    t.args_ = std::move(args);
    return t;
}

Term Term::list(std::vector<Term> items, std::optional<Term> tail)
{
    Term out = tail ? std::move(*tail) : nil();
    for (auto it = items.rbegin(); it != items.rend(); ++it)
        out = compound(".", {std::move(*it), std::move(out)});
    return out;
}

bool operator==(const Term& a, const Term& b)
{
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
    case Term::Kind::Integer:
        return a.value_ == b.value_;
    case Term::Kind::Var:
    case Term::Kind::Atom:
        return a.name_ == b.name_;
    case Term::Kind::Compound:
        return a.name_ == b.name_ && a.args_ == b.args_;
    }
    return false;
}

namespace {

bool is_solo_atom(std::string_view s)
{
    return s == "[]" || s == "{}" || s == "!" || s == ";";
}

bool needs_quotes(std::string_view s)
{
    if (s.empty()) return true;
    if (is_solo_atom(s)) return false;
    if (std::islower(static_cast<unsigned char>(s[0])))
        return !std::all_of(s.begin(), s.end(), is_alnum_char);
    if (std::all_of(s.begin(), s.end(), is_symbol_char))
        return s.back() == '.' || s.find("/*") != std::string_view::npos;
    return true;
}

std::string format_atom(std::string_view s)
{
    if (!needs_quotes(s)) return std::string(s);
    std::string out = "'";
    for (char c : s) {
        switch (c) {
        case '\'': out += "\\'"; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    out += '\'';
    return out;
}

bool is_operator_atom(std::string_view s)
{
    return infix_op(s).has_value() || prefix_op(s).has_value();
}

bool is_alpha_name(std::string_view s)
{
    return !s.empty() && std::islower(static_cast<unsigned char>(s[0]));
}

bool tight_infix(std::string_view op)
{
    return op == "+" || op == "-" || op == "*" || op == "/" || op == "//";
}

class Writer {
public:
    std::string write(const Term& t, int max_prec)
    {
        switch (t.kind()) {
        case Term::Kind::Var:
            return t.name();
        case Term::Kind::Integer:
            return std::to_string(t.value());
        case Term::Kind::Atom:
            return format_atom(t.name());
        case Term::Kind::Compound:
            return write_compound(t, max_prec);
        }
        return {};
    }

private:
    // Operator atoms are bracketed when they appear as operands.
    std::string operand(const Term& t, int max_prec)
    {
        if (t.is_atom() && is_operator_atom(t.name())) return "(" + format_atom(t.name()) + ")";
        return write(t, max_prec);
    }

    std::string write_compound(const Term& t, int max_prec)
    {
        if (t.is_list_cell()) return write_list(t);
        if (t.is("{}", 1)) return "{" + write(t.arg(0), 1200) + "}";
        if (t.arity() == 2) {
            if (auto op = infix_op(t.name())) {
                int p = op->priority;
                int left_max = op->type == OpType::yfx ? p : p - 1;
                int right_max = op->type == OpType::xfy ? p : p - 1;
                std::string l = operand(t.arg(0), left_max);
                std::string r = operand(t.arg(1), right_max);
                std::string text;
                if (t.name() == ",") {
                    text = l + "," + r;
                } else if (tight_infix(t.name()) && !is_symbol_char(l.back())
                           && !is_symbol_char(r.front())) {
                    text = l + t.name() + r;
                } else {
                    text = l + " " + t.name() + " " + r;
                }
                return p > max_prec ? "(" + text + ")" : text;
            }
        }
        if (t.arity() == 1 && !t.arg(0).is_integer()) {
            if (auto op = prefix_op(t.name())) {
                int p = op->priority;
                int arg_max = op->type == OpType::fy ? p : p - 1;
                std::string a = operand(t.arg(0), arg_max);
                std::string text;
                if (is_alpha_name(t.name()) || is_symbol_char(a.front()) || a.front() == '(')
                    text = t.name() + " " + a;
                else
                    text = t.name() + a;
                return p > max_prec ? "(" + text + ")" : text;
            }
        }
        std::string out = format_atom(t.name()) + "(";
        for (std::size_t i = 0; i < t.arity(); ++i) {
            if (i) out += ',';
            out += write(t.arg(i), 999);
        }
        out += ')';
        return out;
    }

    std::string write_list(const Term& t)
    {
        std::string out = "[";
        const Term* cur = &t;
        bool first = true;
        while (cur->is_list_cell()) {
            if (!first) out += ',';
            first = false;
            out += write(cur->arg(0), 999);
            cur = &cur->arg(1);
        }
        if (!cur->is_nil()) out += "|" + write(*cur, 999);
        out += ']';
        return out;
    }
};

void collect_vars(const Term& t, std::vector<std::string>& out)
{
    if (t.is_var()) {
        if (std::find(out.begin(), out.end(), t.name()) == out.end()) out.push_back(t.name());
    } else if (t.is_compound()) {
        for (const auto& a : t.args()) collect_vars(a, out);
    }
}

} // namespace

std::string format_term(const Term& t)
{
    return Writer{}.write(t, 1200);
}

Term substitute(const Term& t, const std::vector<std::pair<std::string, Term>>& bindings)
{
    if (t.is_var()) {
        for (const auto& [name, value] : bindings)
            if (name == t.name()) return value;
        return t;
    }
    if (!t.is_compound()) return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const auto& a : t.args()) args.push_back(substitute(a, bindings));
    return Term::compound(t.name(), std::move(args));
}

std::vector<std::string> variable_names(const Term& t)
{
    std::vector<std::string> out;
    collect_vars(t, out);
    return out;
}

std::vector<Term> flatten_conjunction(const Term& t)
{
    std::vector<Term> out;
    const Term* cur = &t;
    while (cur->is(",", 2)) {
        auto rest = flatten_conjunction(cur->arg(0));
        out.insert(out.end(), rest.begin(), rest.end());
        cur = &cur->arg(1);
    }
    out.push_back(*cur);
    return out;
}

} // namespace ald::logic
