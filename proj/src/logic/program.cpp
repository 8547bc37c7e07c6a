#include <algorithm>

#include "ald/logic/engine.hpp"
#include "ald/logic/reader.hpp"

namespace ald::logic {
namespace {

bool loads_fair_search(const Term& package)
{
    static const Term bfall = Term::compound("/", {Term::atom("bf"), Term::atom("bfall")});
    if (package == bfall) return true;
    return package.is("library", 1) && package.arg(0) == bfall;
}

std::vector<Term> list_items(const Term& t, int line, const char* what)
{
    std::vector<Term> items;
    const Term* cur = &t;
    while (cur->is_list_cell()) {
        items.push_back(cur->arg(0));
        cur = &cur->arg(1);
    }
    if (!cur->is_nil()) throw SyntaxError(line, std::string(what) + " must be a proper list");
    return items;
}

ModuleDirective read_module(const Term& t, int line, bool& fair)
{
    ModuleDirective m;
    if (t.arity() == 3) {
        for (const auto& p : list_items(t.arg(2), line, "module package list")) {
            fair = fair || loads_fair_search(p);
            m.packages.push_back(format_term(p));
        }
    }
    return m;
}

void read_props(const Term& t, int line, std::vector<TestProp>& out)
{
    if (t.is(",", 2)) {
        read_props(t.arg(0), line, out);
        read_props(t.arg(1), line, out);
    } else if (t.is_list_cell() || t.is_nil()) {
        for (const auto& p : list_items(t, line, "test properties")) read_props(p, line, out);
    } else if (t.is_atom() && t.name() == "not_fails") {
        out.push_back(TestProp::not_fails);
    } else if (t.is_atom() && t.name() == "fails") {
        out.push_back(TestProp::fails);
    } else {
        throw SyntaxError(line, "unsupported test property " + format_term(t));
    }
}

TestDirective read_test(const Term& body, int line)
{
    TestDirective test;
    test.line = line;
    if (body.is("=>", 2)) {
        test.goal = body.arg(0);
        const Term& rest = body.arg(1);
        if (rest.is("+", 2)) {
            test.post = rest.arg(0);
            read_props(rest.arg(1), line, test.props);
        } else {
            test.post = rest;
        }
    } else if (body.is("+", 2)) {
        test.goal = body.arg(0);
        read_props(body.arg(1), line, test.props);
    } else {
        throw SyntaxError(line, "test directive needs a postcondition or properties");
    }
    if (!test.goal.is_callable()) throw SyntaxError(line, "test goal must be callable");
    return test;
}

void check_goal(const Term& goal, int line)
{
    if (goal.is_integer()) throw SyntaxError(line, "goal is not callable: " + format_term(goal));
}

} // namespace

std::string TestDirective::describe() const
{
    std::string out = format_term(goal);
    if (post) out += " => (" + format_term(*post) + ")";
    if (!props.empty()) {
        out += " + ";
        if (props.size() > 1) out += "(";
        for (std::size_t i = 0; i < props.size(); ++i) {
            if (i) out += ",";
            out += props[i] == TestProp::fails ? "fails" : "not_fails";
        }
        if (props.size() > 1) out += ")";
    }
    return out;
}

std::vector<TestDirective> Program::tests() const
{
    std::vector<TestDirective> out;
    for (const auto& d : directives)
        if (const auto* t = std::get_if<TestDirective>(&d)) out.push_back(*t);
    return out;
}

Program parse_program(std::string_view text)
{
    Program program;
    for (auto& [term, line] : read_terms(text)) {
        if (term.is(":-", 1)) {
            const Term& body = term.arg(0);
            if (body.is("module", 2) || body.is("module", 3)) {
                program.directives.emplace_back(read_module(body, line, program.fair_search));
            } else if (body.is("test", 1)) {
                program.directives.emplace_back(read_test(body.arg(0), line));
            } else {
                program.other_directives.push_back({body, line});
            }
            continue;
        }
        if (term.is("?-", 1)) throw SyntaxError(line, "queries are not allowed in program text");
        Clause clause;
        clause.line = line;
        if (term.is(":-", 2)) {
            clause.head = term.arg(0);
            clause.body = flatten_conjunction(term.arg(1));
            for (const auto& g : clause.body) check_goal(g, line);
        } else {
            clause.head = term;
        }
        if (!clause.head.is_callable())
            throw SyntaxError(line, "invalid clause head " + format_term(clause.head));
        program.clauses.push_back(std::move(clause));
    }
    return program;
}

void validate(const Budget& budget)
{
    if (budget.max_depth <= 0 || budget.max_steps <= 0 || budget.max_answers <= 0)
        throw std::invalid_argument("budget limits must be positive");
}

std::string Answer::key() const
{
    std::string out;
    for (const auto& [name, value] : bindings) {
        if (!out.empty()) out += ", ";
        out += name + " = " + format_term(value);
    }
    return out;
}

std::string_view to_string(EngineErrorKind kind)
{
    switch (kind) {
    case EngineErrorKind::budget_exhausted: return "budget_exhausted";
    case EngineErrorKind::instantiation_error: return "instantiation_error";
    case EngineErrorKind::type_error: return "type_error";
    case EngineErrorKind::evaluation_error: return "evaluation_error";
    case EngineErrorKind::cancelled: return "cancelled";
    }
    return "unknown";
}

std::string format_transcript(const SolveResult& result)
{
    std::string out;
    for (std::size_t i = 0; i < result.answers.size(); ++i) {
        const auto& a = result.answers[i];
        bool continues = i + 1 < result.answers.size() || result.more;
        if (a.bindings.empty()) {
            out += "true";
        } else {
            for (std::size_t j = 0; j < a.bindings.size(); ++j) {
                if (j) out += '\n';
                out += a.bindings[j].first + " = " + format_term(a.bindings[j].second);
            }
        }
        out += continues ? " ;\n" : "\n";
    }
    out += result.answers.empty() ? "no\n" : "yes\n";
    return out;
}

} // namespace ald::logic
