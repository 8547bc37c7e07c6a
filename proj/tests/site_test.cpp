#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ald/doc/parser.hpp"
#include "ald/site/builder.hpp"
#include "ald/site/server.hpp"

namespace fs = std::filesystem;
using namespace ald;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in, path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& data)
{
    fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << data;
}

fs::path temp_dir(const std::string& tag)
{
    std::string tmpl = (fs::temp_directory_path() / ("ald-" + tag + "-XXXXXX")).string();
    REQUIRE(mkdtemp(tmpl.data()) != nullptr);
    return tmpl;
}

std::map<std::string, std::string> snapshot(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
    return files;
}

fs::path write_manifest(const fs::path& dir)
{
    json m{{"tools",
            {{"mock_analyzer",
              {{"command", {ALD_MOCK_ANALYZER, "{options}", "{input}"}},
               {"version_command", {ALD_MOCK_ANALYZER, "--version"}}}}}}};
    fs::path p = dir / "tools.json";
    spit(p, m.dump(2) + "\n");
    return p;
}

site::SiteConfig fixture_config(const fs::path& work)
{
    site::SiteConfig c;
    c.source_dir = ALD_FIXTURES_DIR "/site";
    c.output_dir = work / "out";
    c.manifest_path = write_manifest(work);
    c.cache_dir = work / "cache";
    return c;
}

std::string html_unescape(std::string s)
{
    const std::pair<const char*, const char*> table[] = {{"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&amp;", "&"}};
    for (auto [from, to] : table)
        for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + 1))
            s.replace(pos, std::strlen(from), to);
    return s;
}

json embedded_manifest(const std::string& html)
{
    const std::string open = "<script type=\"application/json\" id=\"ald-manifest\">";
    auto a = html.find(open);
    REQUIRE(a != std::string::npos);
    CHECK(html.find(open, a + 1) == std::string::npos);
    auto b = html.find("</script>", a);
    return json::parse(html.substr(a + open.size(), b - a - open.size()));
}

std::string trimmed(std::string s)
{
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
    return s;
}

std::vector<std::string> solution_texts()
{
    std::vector<std::string> out;
    for (const char* page : {"factorial.md", "assertions.md"}) {
        doc::Document d = doc::parse(slurp(fs::path(ALD_FIXTURES_DIR "/site") / page), page);
        for (const doc::CodeCell* c : d.cells())
            if (c->solution_text) out.push_back(trimmed(*c->solution_text));
    }
    return out;
}

} // namespace

TEST_CASE("fixture site build")
{
    fs::path work = temp_dir("site");
    site::SiteConfig config = fixture_config(work);
    site::BuildReport report = site::build(config);
    CHECK(report.pages_built == 2);
    CHECK(report.tool_requests == 1);
    CHECK(report.self_checks == 1);
    CHECK(report.self_check_failures.empty());

    auto files = snapshot(config.output_dir);
    for (const char* f : {"index.html", "factorial.html", "assertions.html", "assets/ald.css", "assets/ald-runtime.js",
                          ".ald-private/exercises.json"})
        CHECK_MESSAGE(files.count(f) == 1, f);
    CHECK(files.size() == 6);

    std::string b = files["assertions.html"];
    std::string block = trimmed(slurp(ALD_GOLDEN_DIR "/app_assrt_false.warn_error.txt"));
    std::smatch m;
    REQUIRE(std::regex_search(b, m, std::regex("<pre class=\"ald-filter-output\"[^>]*>([^<]*)</pre>")));
    CHECK(html_unescape(m[1].str()) == block + "\n");

    for (const char* page : {"factorial", "assertions"}) {
        std::string html = files[std::string(page) + ".html"];
        doc::Document d = doc::parse(slurp(fs::path(ALD_FIXTURES_DIR "/site") / (std::string(page) + ".md")),
                                     std::string(page) + ".md");
        json manifest = embedded_manifest(html);
        CHECK(manifest["protocol_version"] == 1);
        CHECK(manifest["page"] == page);
        REQUIRE(manifest["cells"].size() == d.cells().size());
        std::size_t divs = 0;
        for (auto pos = html.find("data-cell-id="); pos != std::string::npos; pos = html.find("data-cell-id=", pos + 1))
            ++divs;
        CHECK(divs == d.cells().size());
        for (std::size_t i = 0; i < d.cells().size(); ++i) {
            CHECK(manifest["cells"][i]["cell_id"] == d.cells()[i]->cell_id);
            CHECK(manifest["cells"][i]["kind"] == doc::to_string(d.cells()[i]->kind));
            CHECK(manifest["cells"][i]["initial_text"] == d.cells()[i]->visible_text);
        }
        std::size_t scripts = 0;
        for (auto pos = html.find("<script"); pos != std::string::npos; pos = html.find("<script", pos + 1)) ++scripts;
        CHECK(scripts == 2);
    }
    json a = embedded_manifest(files["factorial.html"]);
    CHECK(a["cells"][1]["query"] == "factorial(X,s(s(s(s(s(s(0)))))))");
    CHECK(a["cells"][1]["program_cell"] == "factorial-cell-1");
    json bm = embedded_manifest(files["assertions.html"]);
    CHECK(bm["cells"][1]["checker"] == "verify_assert");

    std::string index = files["index.html"];
    CHECK(index.find("href=\"assertions.html\"") < index.find("href=\"factorial.html\""));
    CHECK(index.find("Exercise: factorial using ISO-Prolog arithmetic") != std::string::npos);

    auto secrets = solution_texts();
    REQUIRE(secrets.size() == 1);
    for (const auto& [name, data] : files)
        for (const auto& s : secrets) CHECK_MESSAGE(data.find(s) == std::string::npos, name);
    fs::remove_all(work);
}

TEST_CASE("builds are deterministic and the cache is transparent")
{
    fs::path work = temp_dir("det");
    site::SiteConfig config = fixture_config(work);
    site::BuildReport first = site::build(config);
    CHECK(first.tool_invocations == 1);
    auto one = snapshot(config.output_dir);

    site::BuildReport second = site::build(config);
    CHECK(second.tool_invocations == 0);
    CHECK(second.cache_hits == second.tool_requests);
    CHECK(snapshot(config.output_dir) == one);

    site::SiteConfig uncached = config;
    uncached.cache_enabled = false;
    uncached.output_dir = work / "out-nocache";
    uncached.jobs = 1;
    site::BuildReport third = site::build(uncached);
    CHECK(third.cache_hits == 0);
    CHECK(third.tool_invocations == 1);
    CHECK(snapshot(uncached.output_dir) == one);
    fs::remove_all(work);
}

TEST_CASE("build errors")
{
    fs::path work = temp_dir("err");
    site::SiteConfig config = fixture_config(work);

    config.source_dir = work / "empty";
    fs::create_directories(config.source_dir);
    CHECK_THROWS_WITH_AS(site::build(config), doctest::Contains("no sources"), site::BuildError);

    config.source_dir = ALD_FIXTURES_DIR "/corrupt";
    try {
        site::build(config);
        FAIL("corrupted exercise built");
    } catch (const site::BuildError& e) {
        REQUIRE(e.report().self_check_failures.size() == 1);
        CHECK(std::string(e.what()).find("doubling.md:4: self-check of doubling-cell-1 failed") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(config.output_dir / "doubling.html"));

    auto expect_error = [&](const std::string& page, const std::string& needle) {
        fs::path src = work / "src";
        fs::remove_all(src);
        spit(src / "p.md", page);
        spit(src / "a.pl", "p.\n");
        config.source_dir = src;
        try {
            site::build(config);
            FAIL("built " << page);
        } catch (const site::BuildError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
        }
    };
    expect_error("# T\n\n@exfilter{a.pl}{filter=nope}\n", "p.md:3: unknown filter 'nope'");
    expect_error("# T\n@exfilter{a.pl}{filter=identity,tool=ghost}\n", "p.md:2: unknown tool 'ghost'");
    expect_error("# T\n@exfilter{missing.pl}{filter=identity}\n", "p.md:2: cannot read");
    expect_error("x\n```ciao\np.\n", "p.md:2: ");
    expect_error("```ciao_runnable\np.\nsolution=grade_by_hand\np.\n```\n", "p.md:1: unknown checker");

    config.source_dir = ALD_FIXTURES_DIR "/site";
    config.default_tool_id = "ghost";
    CHECK_THROWS_WITH_AS(site::build(config), doctest::Contains("default tool 'ghost'"), site::BuildError);
    config.default_tool_id.clear();
    config.manifest_path.reset();
    CHECK_THROWS_WITH_AS(site::build(config), doctest::Contains("assertions.md:14"), site::BuildError);
    config.output_dir = config.source_dir;
    CHECK_THROWS_AS(site::build(config), site::BuildError);
    fs::remove_all(work);
}

TEST_CASE("html helpers")
{
    CHECK(site::html_escape("<a href=\"x\">&</a>") == "&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;");
    std::string s = site::script_safe(R"({"t":"</script><!--&"})");
    CHECK(s.find('<') == std::string::npos);
    CHECK(json::parse(s)["t"] == "</script><!--&");

    doc::Document d = doc::parse("Some `code` and **bold** <b>.\n  - item `x`\n", "p.md");
    std::string html = site::render_page(site::PageInput{&d, {}});
    CHECK(html.find("<p>Some <code>code</code> and <strong>bold</strong> &lt;b&gt;.</p>") != std::string::npos);
    CHECK(html.find("<li>item <code>x</code></li>") != std::string::npos);
    CHECK(html.find("<title>p</title>") != std::string::npos);
}

TEST_CASE("static paths")
{
    fs::path work = temp_dir("static");
    spit(work / "index.html", "i");
    spit(work / "assets" / "a.js", "a");
    spit(work / ".ald-private" / "exercises.json", "{}");
    CHECK(site::resolve_static(work, "/") == work / "index.html");
    CHECK(site::resolve_static(work, "/assets/a.js?v=1") == work / "assets" / "a.js");
    CHECK_FALSE(site::resolve_static(work, "/.ald-private/exercises.json"));
    CHECK_FALSE(site::resolve_static(work, "/%2eald-private/exercises.json"));
    CHECK_FALSE(site::resolve_static(work, "/assets/../.ald-private/exercises.json"));
    CHECK_FALSE(site::resolve_static(work, "/../etc/passwd"));
    CHECK_FALSE(site::resolve_static(work, "/missing.html"));
    CHECK_FALSE(site::resolve_static(work, "relative"));
    CHECK(site::content_type_for("x.html") == "text/html; charset=utf-8");
    fs::remove_all(work);
}

TEST_CASE("HTTP golden pairs")
{
    fs::path work = temp_dir("http");
    site::SiteConfig config = fixture_config(work);
    site::build(config);
    site::CheckService checks(exercise::load_exercise_set(config.output_dir / ".ald-private" / "exercises.json"));

    site::ServeConfig sc;
    sc.output_dir = config.output_dir;
    sc.port = 0;
    site::Server server(sc);
    server.bind();
    std::thread serving([&] { server.listen(); });
    httplib::Client client("127.0.0.1", server.port());

    const bool update = std::getenv("ALD_UPDATE_GOLDEN") != nullptr;
    int cases = 0;
    std::vector<fs::path> requests;
    for (const auto& e : fs::directory_iterator(ALD_GOLDEN_DIR "/http"))
        if (e.path().string().ends_with(".request.json")) requests.push_back(e.path());
    std::sort(requests.begin(), requests.end());
    for (const auto& req : requests) {
        std::string name = req.filename().string();
        name = name.substr(0, name.size() - std::string(".request.json").size());
        CAPTURE(name);
        std::string body = slurp(req);
        bool is_eval = name.find("_eval_") != std::string::npos;
        site::ApiResponse direct = is_eval ? site::handle_eval(body) : checks.handle(body);
        json got{{"status", direct.status}, {"body", json::parse(direct.body)}};

        auto res = client.Post(is_eval ? "/eval" : "/check", body, "application/json");
        REQUIRE(res);
        CHECK(res->status == direct.status);
        CHECK(json::parse(res->body) == got["body"]);

        fs::path golden = req.parent_path() / (name + ".response.json");
        if (update) spit(golden, got.dump(2) + "\n");
        CHECK(json::parse(slurp(golden)) == got);
        ++cases;
    }
    CHECK(cases >= 6);

    auto page = client.Get("/factorial.html");
    REQUIRE(page);
    CHECK(page->status == 200);
    CHECK(page->body == slurp(config.output_dir / "factorial.html"));
    auto hidden = client.Get("/.ald-private/exercises.json");
    REQUIRE(hidden);
    CHECK(hidden->status == 404);

    site::ServeConfig clash = sc;
    clash.port = server.port();
    site::Server second(clash);
    CHECK_THROWS_WITH(second.bind(), doctest::Contains("in use"));

    server.stop();
    serving.join();
    fs::remove_all(work);
}
