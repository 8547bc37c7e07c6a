// Stand-in for an assertion-checking analyzer. Usage:
//   mock_analyzer [ignored options...] <file.pl>
//   mock_analyzer --version
// Each `:- pred Head : Calls => Success.` is exercised on sample list
// inputs for the arguments that Calls declares as lists. Output for a
// readable file never mentions line numbers.

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "ald/logic/engine.hpp"

using namespace ald::logic;

namespace {

struct Assertion {
    Term head;
    std::optional<Term> calls;
    std::optional<Term> success;
};

std::optional<Assertion> decode(const Term& directive)
{
    if (!directive.is("pred", 1)) return std::nullopt;
    Assertion a;
    Term t = directive.arg(0);
    if (t.is("=>", 2)) {
        a.success = t.arg(1);
        t = Term(t.arg(0));
    }
    if (t.is(":", 2)) {
        a.calls = t.arg(1);
        t = Term(t.arg(0));
    }
    if (!t.is_compound()) return std::nullopt;
    std::set<std::string> seen;
    for (const auto& arg : t.args())
        if (!arg.is_var() || !seen.insert(arg.name()).second) return std::nullopt;
    a.head = t;
    return a;
}

bool declares_list(const std::optional<Term>& calls, const std::string& var)
{
    if (!calls) return false;
    for (const auto& g : flatten_conjunction(*calls))
        if (g.is("list", 1) && g.arg(0).is_var() && g.arg(0).name() == var) return true;
    return false;
}

Term conjoin(const std::vector<Term>& goals)
{
    Term out = goals.back();
    for (auto it = goals.rbegin() + 1; it != goals.rend(); ++it) out = Term::compound(",", {*it, out});
    return out;
}

const std::vector<Term>& sample_lists()
{
    static const std::vector<Term> samples = {
        Term::nil(),
        Term::list({Term::atom("a")}),
        Term::list({Term::atom("a"), Term::atom("b")}),
    };
    return samples;
}

std::string shape(const Term& t)
{
    if (t.is_var()) return "var";
    const Term* cur = &t;
    while (cur->is_list_cell()) cur = &cur->arg(1);
    return cur->is_nil() ? "list" : "term";
}

void analyze(const Program& program, const Assertion& a, std::ostream& out)
{
    std::vector<std::vector<Term>> choices;
    for (const auto& arg : a.head.args()) {
        if (declares_list(a.calls, arg.name()))
            choices.push_back(sample_lists());
        else
            choices.push_back({arg});
    }

    std::optional<std::string> counterexample;
    std::vector<std::set<std::string>> shapes(a.head.arity());
    std::vector<std::size_t> idx(choices.size(), 0);
    bool any_answer = false;
    while (true) {
        std::vector<Term> goals;
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (!choices[i][idx[i]].is_var()) goals.push_back(Term::compound("=", {a.head.arg(i), choices[i][idx[i]]}));
        goals.push_back(a.head);
        try {
            SolveResult r = solve(program, conjoin(goals), Budget{64, 100000, 4});
            for (const auto& ans : r.answers) {
                any_answer = true;
                Term instance = substitute(a.head, ans.bindings);
                for (std::size_t i = 0; i < instance.arity(); ++i) shapes[i].insert(shape(instance.arg(i)));
                if (a.success && !counterexample) {
                    Term check = substitute(*a.success, ans.bindings);
                    bool holds = false;
                    try {
                        holds = !solve(program, check, Budget{64, 100000, 1}).answers.empty();
                    } catch (const EngineError&) {
                    }
                    if (!holds) counterexample = format_term(instance);
                }
            }
        } catch (const EngineError&) {
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == choices[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }

    Term lhs = a.calls ? Term::compound(":", {a.head, *a.calls}) : a.head;
    std::string written = format_term(a.success ? Term::compound("=>", {lhs, *a.success}) : lhs);
    if (counterexample) {
        out << "WARNING (ctchecks): False assertion:\n";
        out << "  :- pred " << written << ".\n";
        out << "  success properties do not hold for " << *counterexample << "\n";
    }

    std::vector<Term> props;
    for (std::size_t i = 0; i < a.head.arity(); ++i) {
        std::string s = shapes[i].size() == 1 ? *shapes[i].begin() : "term";
        props.push_back(Term::compound(s, {a.head.arg(i)}));
    }
    if (!any_answer)
        out << ":- true pred " << format_term(lhs) << " + fails.\n";
    else
        out << ":- true pred " << format_term(Term::compound("=>", {lhs, conjoin(props)})) << ".\n";
}

} // namespace

int main(int argc, char** argv)
{
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--version") {
            std::cout << "1.0\n";
            return 0;
        }
    }
    if (argc < 2) {
        std::cerr << "usage: mock_analyzer [options...] <file.pl>\n";
        return 2;
    }
    std::string path = argv[argc - 1];
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open " << path << "\n";
        return 1;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string base = path.substr(path.find_last_of('/') + 1);

    std::cout << "{Reading " << base << "}\n";
    Program program;
    try {
        program = parse_program(ss.str());
    } catch (const SyntaxError& e) {
        std::cout << "ERROR (syntax): " << e.message() << "\n";
        std::cout << "  in clause starting at line " << e.line() << "\n";
        std::cout << "Done.\n";
        return 1;
    }
    for (const auto& d : program.other_directives)
        if (auto a = decode(d.term)) analyze(program, *a, std::cout);
    std::cout << "Done.\n";
    return 0;
}
