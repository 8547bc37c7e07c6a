#include <algorithm>

#include "ald/logic/engine.hpp"

namespace ald::logic {
namespace {

bool has(const TestDirective& t, TestProp p)
{
    return std::find(t.props.begin(), t.props.end(), p) != t.props.end();
}

TestOutcome run_one(const Program& program, const TestDirective& test, Budget budget)
{
    TestOutcome out{test, false, {}};
    budget.max_answers = 1;
    try {
        SolveResult r = solve(program, test.goal, budget);
        bool found = !r.answers.empty();
        if (has(test, TestProp::fails) && found) {
            out.detail = "expected failure, but found an answer";
            if (!r.answers.front().bindings.empty()) out.detail += ": " + r.answers.front().key();
            return out;
        }
        if (has(test, TestProp::not_fails) && !found) {
            out.detail = "goal failed";
            return out;
        }
        if (test.post) {
            if (!found) {
                out.detail = "goal failed, postcondition not checked";
                return out;
            }
            Term post = substitute(*test.post, r.answers.front().bindings);
            if (solve(program, post, budget).answers.empty()) {
                out.detail = "postcondition " + format_term(*test.post) + " failed";
                if (!r.answers.front().bindings.empty()) out.detail += " with " + r.answers.front().key();
                return out;
            }
        }
        out.passed = true;
        out.detail = "passed";
    } catch (const EngineError& e) {
        out.detail = e.what();
    }
    return out;
}

} // namespace

std::vector<TestOutcome> run_tests(const Program& program, const Budget& budget)
{
    validate(budget);
    std::vector<TestOutcome> out;
    for (const auto& test : program.tests()) out.push_back(run_one(program, test, budget));
    return out;
}

} // namespace ald::logic
