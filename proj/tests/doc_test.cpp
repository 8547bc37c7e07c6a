#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ald/doc/parser.hpp"

using namespace ald::doc;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fixture(const std::string& name) { return slurp(std::string(ALD_FIXTURES_DIR) + "/site/" + name); }

std::string strip_trailing_ws(const std::string& text)
{
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
        out += line + "\n";
    }
    return out;
}

std::vector<CellKind> kinds(const Document& d)
{
    std::vector<CellKind> out;
    for (const auto* c : d.cells()) out.push_back(c->kind);
    return out;
}

// Counts fenced regions with a plain line scan.
int count_fences(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    bool inside = false;
    int n = 0;
    while (std::getline(in, line)) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (!inside && line.rfind("```", 0) == 0) {
            inside = true;
            ++n;
        } else if (inside && line == "```") {
            inside = false;
        }
    }
    return n;
}

void check_invariants(const Document& d)
{
    int last = 0;
    std::set<std::string> ids;
    for (const auto& b : d.blocks) {
        LineSpan s = span_of(b);
        CHECK(s.first > last);
        CHECK(s.last >= s.first);
        last = s.last;
        if (const auto* c = std::get_if<CodeCell>(&b)) {
            CHECK(ids.insert(c->cell_id).second);
            CHECK((c->kind == CellKind::exercise) == (c->solution_text.has_value() && c->checker.has_value()));
        }
        if (const auto* f = std::get_if<FilterDirective>(&b)) {
            CHECK_FALSE(f->filter_name.empty());
            CHECK_FALSE(f->code_file.empty());
            for (const auto& t : f->tool_options) CHECK(t.find_first_of(" \t") == std::string::npos);
        }
    }
}

} // namespace

TEST_CASE("factorial page")
{
    std::string src = fixture("factorial.md");
    Document d = parse(src, "site/factorial.md");
    CHECK(kinds(d) == std::vector<CellKind>{CellKind::program, CellKind::query, CellKind::query,
                                            CellKind::static_, CellKind::program});
    REQUIRE(d.title);
    CHECK(*d.title == "Exercise: factorial using ISO-Prolog arithmetic");
    auto cells = d.cells();
    CHECK(cells[0]->engine_id == "ciao");
    CHECK(cells[0]->fence_info == "ciao\\_runnable");
    CHECK(cells[3]->engine_id == "ciao");
    CHECK(cells[0]->cell_id == "factorial-cell-1");
    CHECK(cells[4]->cell_id == "factorial-cell-5");
    CHECK(cells[1]->visible_text == "?- factorial(X,s(s(s(s(s(s(0))))))).\n");
    check_invariants(d);

    CHECK(strip_trailing_ws(serialize(d)) == strip_trailing_ws(src));
    CHECK(parse(serialize(d), "site/factorial.md") == d);
}

TEST_CASE("assertions page")
{
    std::string src = fixture("assertions.md");
    Document d = parse(src, "assertions.md");
    std::vector<std::string> shape;
    for (const auto& b : d.blocks) {
        if (const auto* c = std::get_if<CodeCell>(&b)) shape.push_back(to_string(c->kind));
        if (std::holds_alternative<FilterDirective>(b)) shape.push_back("directive");
    }
    CHECK(shape == std::vector<std::string>{"static", "directive", "exercise"});
    CHECK(d.title == "Assertion Checking");

    const FilterDirective* dir = nullptr;
    for (const auto& b : d.blocks)
        if (const auto* f = std::get_if<FilterDirective>(&b)) dir = f;
    REQUIRE(dir);
    CHECK(dir->code_file == "app_assrt_false.pl");
    CHECK(dir->tool_options == std::vector<std::string>{"V"});
    CHECK(dir->filter_name == "warn_error");
    CHECK(dir->tool_id.empty());

    const CodeCell* ex = d.cells().back();
    CHECK(ex->checker == "verify_assert");
    CHECK(ex->visible_text.find("=> var(C)") != std::string::npos);
    CHECK(ex->visible_text.find("=> list(C)") == std::string::npos);
    REQUIRE(ex->solution_text);
    CHECK(ex->solution_text->find("=> list(C)") != std::string::npos);
    CHECK(ex->solution_text->find("solution=") == std::string::npos);
    CHECK(ex->visible_text.find("solution=") == std::string::npos);
    CHECK(ex->solution_text->rfind(":- module", 0) == 0);
    check_invariants(d);

    CHECK(strip_trailing_ws(serialize(d)) == strip_trailing_ws(src));
    CHECK(parse(serialize(d), "assertions.md") == d);
}

TEST_CASE("trivial documents")
{
    Document empty = parse("", "x.md");
    CHECK(empty.blocks.empty());
    CHECK(serialize(empty).empty());
    CHECK_FALSE(empty.title);

    Document one;
    one.blocks.emplace_back(Heading{1, "T", false, {1, 1}});
    CHECK(serialize(one) == "# T\n");
    CHECK(parse("# T\n", "").blocks == one.blocks);
}

TEST_CASE("title command wins over first heading")
{
    CHECK(parse("# First\n\\title Chosen\n", "p.md").title == "Chosen");
    CHECK(parse("# First\n## Second\n", "p.md").title == "First");
    CHECK(parse("## Second\n", "p.md").title == std::nullopt);
    CHECK(parse("#hashtag\n", "p.md").blocks.size() == 1);
    CHECK(std::holds_alternative<Prose>(parse("#hashtag\n", "p.md").blocks[0]));
}

TEST_CASE("classify cell")
{
    CHECK(classify_cell("ciao_runnable", "?- factorial(X,\n  Y).\n").kind == CellKind::query);
    CHECK(classify_cell("ciao_runnable", "\n   ?- p.\n").kind == CellKind::query);
    CHECK(classify_cell("ciao_runnable", "p.\n?- p.\n").kind == CellKind::program);
    CHECK(classify_cell("ciao", "?- p.\n").kind == CellKind::static_);
    CHECK(classify_cell("ciao", " ... Z is X * Y ...\n").kind == CellKind::static_);
    CHECK(classify_cell("ciao\\_runnable", "p.\n").engine_id == "ciao");
    CHECK(classify_cell("swipl_runnable", "p.\n").engine_id == "swipl");
    CHECK(classify_cell("_runnable", "p.\n").kind == CellKind::static_);

    CodeCell ex = classify_cell("ciao_runnable", "\nskel.\n\nsolution=verify_assert\n\nsol.\n\n");
    CHECK(ex.kind == CellKind::exercise);
    CHECK(ex.checker == "verify_assert");
    CHECK(ex.visible_text == "skel.\n");
    CHECK(ex.solution_text == "sol.\n");
    CHECK(ex.checker_options.empty());

    CodeCell opts = classify_cell("ciao_runnable", "a.\nsolution=output_match,query=p(X,Y),tool=eng\nb.\n");
    CHECK(opts.checker == "output_match");
    REQUIRE(opts.option("query"));
    CHECK(*opts.option("query") == "p(X,Y)");
    CHECK(*opts.option("tool") == "eng");
}

TEST_CASE("directive tokens")
{
    FilterDirective d = parse_directive("@exfilter{a.pl}{V,filter=regex,regex:^WARN,tool=mock,-x}");
    CHECK(d.filter_name == "regex");
    CHECK(d.filter_params == std::vector<std::string>{"^WARN"});
    CHECK(d.tool_options == std::vector<std::string>{"V", "-x"});
    CHECK(d.tool_id == "mock");
    CHECK(format_directive(d) == "@exfilter{a.pl}{V,-x,filter=regex,regex:^WARN,tool=mock}");

    FilterDirective q = parse_directive("@exfilter{f.pl}{filter=answers,query=p(X,Y)}");
    CHECK(q.tool_options == std::vector<std::string>{"query=p(X,Y)"});

    CHECK(split_tokens("") == std::vector<std::string>{});
    CHECK(split_tokens("a,f(b,c),[d,e],{x,y}") == std::vector<std::string>{"a", "f(b,c)", "[d,e]", "{x,y}"});
}

TEST_CASE("parse errors carry kind and line")
{
    auto expect = [](const std::string& src, ParseErrorKind kind, int line) {
        try {
            parse(src, "e.md");
            FAIL("no error for: " << src);
        } catch (const ParseError& e) {
            CHECK(e.kind() == kind);
            CHECK(e.line() == line);
        }
    };
    expect("text\n```ciao_runnable\np.\n", ParseErrorKind::unclosed_fence, 2);
    expect("a\n\n@exfilter{x.pl}\n", ParseErrorKind::bad_directive, 3);
    expect("@exfilter{x.pl}{V}\n", ParseErrorKind::bad_directive, 1);
    expect("@exfilter{}{filter=head}\n", ParseErrorKind::bad_directive, 1);
    expect("@exfilter{x.pl}{filter=head,a b}\n", ParseErrorKind::bad_directive, 1);
    expect("@exfilter{x.pl}{filter=head,,V}\n", ParseErrorKind::bad_directive, 1);
    expect("@exfilter{x.pl}{filter=head", ParseErrorKind::bad_directive, 1);
    expect("```ciao\np.\nsolution=verify_assert\nq.\n```\n", ParseErrorKind::bad_solution_marker, 3);
    expect("# h\n```ciao_runnable\np.\nsolution=a\nq.\nsolution=b\nr.\n```\n",
           ParseErrorKind::bad_solution_marker, 6);
    expect("```ciao_runnable\np.\nsolution=\nq.\n```\n", ParseErrorKind::bad_solution_marker, 3);
    expect("```ciao_runnable\np.\nsolution=run_tests\n\n```\n", ParseErrorKind::bad_solution_marker, 3);
    expect("```ciao_runnable\np.\nsolution=x,novalue\nq.\n```\n", ParseErrorKind::bad_solution_marker, 3);
}

TEST_CASE("fuzzed fragments never break the model")
{
    static const char* fragments[] = {
        "```ciao_runnable", "```ciao", "```", "```ciao\\_runnable", "``` ", "solution=verify_assert",
        "solution=run_tests,query=p(X)", "?- p(X).", "p(a).", "", "   ", "# Head", "## Sub", "#",
        "\\title T", "@exfilter{a.pl}{V,filter=warn_error}", "@exfilter{a.pl}{V}", "@exfilter{a.pl",
        "@exfilter{b.pl}{filter=head,head:3,tool=t}", "plain prose", "  indented", "#######", "`` not",
    };
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(fragments) - 1);
    int parsed = 0, rejected = 0;
    for (int round = 0; round < 3000; ++round) {
        std::string src;
        int n = std::uniform_int_distribution<int>(0, 14)(rng);
        for (int i = 0; i < n; ++i) {
            src += fragments[pick(rng)];
            src += '\n';
        }
        try {
            Document d = parse(src, "fuzz.md");
            ++parsed;
            check_invariants(d);
            CHECK(static_cast<int>(d.cells().size()) == count_fences(src));
            Document again = parse(serialize(d), "fuzz.md");
            CHECK_MESSAGE(again == d, src);
        } catch (const ParseError& e) {
            ++rejected;
            CHECK(e.line() >= 1);
            CHECK(e.line() <= n);
        }
    }
    CHECK(parsed > 300);
    CHECK(rejected > 300);
}
