#include "ald/exercise/checker.hpp"

#include <set>

#include "ald/logic/reader.hpp"

namespace ald::exercise {

std::string to_string(Outcome outcome)
{
    switch (outcome) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::error: return "error";
    }
    return "error";
}

bool is_checker(const std::string& name)
{
    return name == "run_tests" || name == "verify_assert" || name == "output_match";
}

ExerciseSpec from_cell(const std::string& page, const doc::CodeCell& cell)
{
    if (!cell.checker || !cell.solution_text) throw std::invalid_argument(cell.cell_id + " is not an exercise");
    ExerciseSpec spec;
    spec.page = page;
    spec.cell_id = cell.cell_id;
    spec.engine_id = cell.engine_id;
    spec.skeleton = cell.visible_text;
    spec.solution = *cell.solution_text;
    spec.checker = *cell.checker;
    if (!is_checker(spec.checker)) throw std::invalid_argument("unknown checker '" + spec.checker + "'");
    for (const auto& [key, value] : cell.checker_options) {
        if (key == "tool") {
            spec.tool_id = value;
        } else if (key == "opt") {
            spec.tool_options.push_back(value);
        } else if (key == "filter") {
            if (!spec.filter) spec.filter = filters::FilterSpec{};
            spec.filter->name = value;
        } else if (key == "param") {
            if (!spec.filter) spec.filter = filters::FilterSpec{"warn_error", {}};
            spec.filter->params.push_back(value);
        } else if (key == "query") {
            spec.query = value;
        } else if (key == "answers") {
            try {
                spec.max_answers = std::stoi(value);
            } catch (const std::exception&) {
                spec.max_answers = 0;
            }
            if (spec.max_answers <= 0) throw std::invalid_argument("answers= must be a positive integer");
        } else {
            throw std::invalid_argument("unknown checker option '" + key + "'");
        }
    }
    if (spec.filter && spec.filter->name.empty()) throw std::invalid_argument("empty filter name");
    if (spec.checker == "output_match" && spec.query.empty())
        throw std::invalid_argument("output_match needs a query= option");
    return spec;
}

std::string normalize_output(std::string_view text)
{
    std::string out;
    bool previous_blank = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        bool last = nl == std::string_view::npos;
        std::string_view line = text.substr(pos, last ? std::string_view::npos : nl - pos);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.remove_suffix(1);
        bool is_blank = line.empty();
        if (last) {
            if (!is_blank) out += line;
            break;
        }
        if (!(is_blank && previous_blank)) {
            out += line;
            out += '\n';
        }
        previous_blank = is_blank;
        pos = nl + 1;
    }
    return out;
}

std::string redact(std::string text, std::string_view secret)
{
    while (!secret.empty() && (secret.front() == '\n' || secret.front() == ' ')) secret.remove_prefix(1);
    while (!secret.empty() && (secret.back() == '\n' || secret.back() == ' ')) secret.remove_suffix(1);
    if (secret.empty()) return text;
    constexpr std::string_view mask = "[solution hidden]";
    for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos + mask.size()))
        text.replace(pos, secret.size(), mask);
    return text;
}

std::string feedback_for(Outcome outcome, const std::string& checker, const std::string& diagnostic)
{
    if (outcome == Outcome::pass) return "Correct!";
    std::string text = diagnostic;
    while (!text.empty() && text.back() == '\n') text.pop_back();
    if (outcome == Outcome::error) return text;
    std::string hint = "compare your assertion's success properties";
    if (checker == "run_tests") hint = "look at the test directives that fail";
    if (checker == "output_match") hint = "compare your answers with the expected ones";
    if (!text.empty()) text += '\n';
    return text + "Hint: " + hint;
}

namespace {

struct Graded {
    Outcome outcome;
    std::string diagnostic;
};

Graded grade_run_tests(const ExerciseSpec& spec, const std::string& submission, const CheckerDeps& deps)
{
    logic::Program program = logic::parse_program(submission);
    logic::Program reference = logic::parse_program(spec.solution);
    std::set<std::string> present;
    for (const auto& t : program.tests()) present.insert(t.describe());
    for (const auto& t : reference.tests())
        if (present.insert(t.describe()).second) program.directives.emplace_back(t);

    auto outcomes = logic::run_tests(program, deps.budget);
    if (outcomes.empty()) return {Outcome::error, "no test directives to run"};
    std::string failures;
    for (const auto& o : outcomes) {
        if (o.passed) continue;
        failures += "test failed: " + o.test.describe();
        if (!o.detail.empty()) failures += " (" + o.detail + ")";
        failures += '\n';
    }
    if (failures.empty()) return {Outcome::pass, {}};
    return {Outcome::fail, failures};
}

Graded grade_verify_assert(const ExerciseSpec& spec, const std::string& submission, const CheckerDeps& deps)
{
    logic::parse_program(submission);
    std::string tool = spec.tool_id.empty() ? deps.default_tool : spec.tool_id;
    if (tool.empty()) return {Outcome::error, "no analysis tool configured for " + spec.cell_id};
    if (!deps.runner) return {Outcome::error, "analysis tools are not available"};
    std::string name = spec.cell_id + ".pl";
    tools::Transcript mine = deps.runner->run(tool, submission, spec.tool_options, name);
    if (mine.timed_out()) return {Outcome::error, "analysis of your program timed out"};
    tools::Transcript expected = deps.runner->run(tool, spec.solution, spec.tool_options, name);
    if (expected.timed_out()) return {Outcome::error, "analysis of the reference program timed out"};

    static const filters::FilterRegistry builtin;
    const filters::FilterRegistry& reg = deps.filters ? *deps.filters : builtin;
    filters::FilterSpec f = spec.filter.value_or(filters::FilterSpec{"warn_error", {}});
    std::string got = normalize_output(reg.apply(f, mine.stdout_text, mine.stderr_text));
    std::string want = normalize_output(reg.apply(f, expected.stdout_text, expected.stderr_text));
    if (got == want) return {Outcome::pass, {}};
    if (got.empty()) return {Outcome::fail, "The analysis of your program does not match the expected result."};
    return {Outcome::fail, got};
}

std::set<std::string> answer_keys(const logic::Program& program, const logic::Term& query, const logic::Budget& budget)
{
    std::set<std::string> keys;
    for (const auto& a : logic::solve(program, query, budget).answers) keys.insert(a.key().empty() ? "true" : a.key());
    return keys;
}

Graded grade_output_match(const ExerciseSpec& spec, const std::string& submission, const CheckerDeps& deps)
{
    if (spec.query.empty()) return {Outcome::error, "output_match needs a query"};
    logic::Program mine = logic::parse_program(submission);
    logic::Program reference = logic::parse_program(spec.solution);
    logic::Term query = logic::parse_query(spec.query);
    logic::Budget budget = deps.budget;
    budget.max_answers = spec.max_answers;

    std::set<std::string> got;
    try {
        got = answer_keys(mine, query, budget);
    } catch (const logic::EngineError& e) {
        if (e.kind() != logic::EngineErrorKind::budget_exhausted) throw;
    }
    std::set<std::string> want = answer_keys(reference, query, budget);
    if (got == want) return {Outcome::pass, {}};
    std::string diag = "Your answers to ?- " + spec.query + ":\n";
    if (got.empty()) diag += "  (no answers)\n";
    for (const auto& k : got) diag += "  " + k + "\n";
    diag += "These differ from the expected answers.\n";
    return {Outcome::fail, diag};
}

} // namespace

Verdict check(const ExerciseSpec& spec, const std::string& submission, const CheckerDeps& deps)
{
    Graded g{Outcome::error, {}};
    try {
        if (spec.checker == "run_tests")
            g = grade_run_tests(spec, submission, deps);
        else if (spec.checker == "verify_assert")
            g = grade_verify_assert(spec, submission, deps);
        else if (spec.checker == "output_match")
            g = grade_output_match(spec, submission, deps);
        else
            g = {Outcome::error, "unknown checker '" + spec.checker + "'"};
    } catch (const logic::SyntaxError& e) {
        g = {Outcome::error, e.what()};
    } catch (const logic::EngineError& e) {
        g = {Outcome::error, e.what()};
    } catch (const tools::ToolError& e) {
        g = {Outcome::error, std::string("tool error: ") + e.what()};
    } catch (const filters::FilterError& e) {
        g = {Outcome::error, std::string("filter error: ") + e.what()};
    }
    Verdict v;
    v.outcome = g.outcome;
    v.feedback = redact(feedback_for(g.outcome, spec.checker, g.diagnostic), spec.solution);
    return v;
}

} // namespace ald::exercise
