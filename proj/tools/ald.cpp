#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "ald/exercise/checker.hpp"
#include "ald/filters/registry.hpp"
#include "ald/logic/reader.hpp"
#include "ald/site/builder.hpp"
#include "ald/site/server.hpp"

using namespace ald;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string one_line(std::string text)
{
    for (char& c : text)
        if (c == '\n') c = ' ';
    return text;
}

int fail(const std::string& message)
{
    std::cerr << "error: " << one_line(message) << "\n";
    return 1;
}

struct BuildArgs {
    std::string source, output, tools, default_tool, report, cache_dir;
    bool no_cache = false;
    unsigned jobs = 0;
};

int run_build(const BuildArgs& a)
{
    site::SiteConfig config;
    config.source_dir = a.source;
    config.output_dir = a.output;
    if (!a.tools.empty()) config.manifest_path = a.tools;
    config.default_tool_id = a.default_tool;
    config.cache_enabled = !a.no_cache;
    config.cache_dir = a.cache_dir;
    config.jobs = a.jobs;
    try {
        site::BuildReport r = site::build(config);
        if (a.report == "json")
            std::cout << r.to_json();
        else
            std::cout << "built " << r.pages_built << " page(s) in " << a.output << ": " << r.tool_requests
                      << " tool request(s), " << r.tool_invocations << " run(s), " << r.cache_hits << " cache hit(s)\n";
        return 0;
    } catch (const site::BuildError& e) {
        if (a.report == "json") std::cout << e.report().to_json();
        return fail(e.what());
    }
}

int run_serve(const std::string& dir, const std::string& host, int port)
{
    site::ServeConfig config;
    config.output_dir = dir;
    config.host = host;
    config.port = port;
    site::Server server(config);
    server.bind();
    std::cout << "serving " << dir << " at http://" << host << ":" << server.port() << "/" << std::endl;
    server.listen();
    return 0;
}

int run_eval(const std::string& file, const std::string& query_text, logic::Budget budget)
{
    std::string text = read_file(file);
    logic::Program program;
    try {
        program = logic::parse_program(text);
    } catch (const logic::SyntaxError& e) {
        return fail(file + ": " + e.what());
    }
    logic::Term query;
    try {
        query = logic::parse_query(query_text);
    } catch (const logic::SyntaxError& e) {
        return fail(std::string("query: ") + e.what());
    }
    logic::SolveResult r = logic::solve(program, query, budget);
    std::cout << logic::format_transcript(r);
    return 0;
}

int run_filter(const std::string& name, const std::vector<std::string>& params)
{
    std::string input((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    filters::FilterRegistry registry;
    std::cout << registry.apply(filters::FilterSpec{name, params}, input);
    return 0;
}

int run_check(const std::string& exercises, const std::string& cell_id, const std::string& submission_file,
              const std::string& page)
{
    exercise::ExerciseSet set = exercise::load_exercise_set(exercises);
    const exercise::ExerciseSpec* spec = set.find(page, cell_id);
    if (!spec) return fail("unknown exercise " + cell_id);
    tools::ToolManifest manifest;
    if (!set.tools_json.empty()) manifest = tools::parse_manifest(set.tools_json);
    tools::ToolRunner runner(manifest);
    filters::FilterRegistry registry;
    exercise::CheckerDeps deps{&runner, &registry, set.default_tool, {}};
    exercise::Verdict v = exercise::check(*spec, read_file(submission_file), deps);
    std::cout << "verdict: " << exercise::to_string(v.outcome) << "\n" << v.feedback << "\n";
    if (v.outcome == exercise::Outcome::pass) return 0;
    return fail("submission verdict is " + exercise::to_string(v.outcome));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Build and serve active logic documents", "ald"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ald 0.1.0");

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "Build a site from a directory of .md sources");
    build_cmd->add_option("source", build.source, "Source directory")->required();
    build_cmd->add_option("-o,--output", build.output, "Output directory")->required();
    build_cmd->add_option("--tools", build.tools, "Tool manifest (JSON)");
    build_cmd->add_option("--default-tool", build.default_tool, "Tool for directives without tool=");
    build_cmd->add_flag("--no-cache", build.no_cache, "Run every tool, ignoring the cache");
    build_cmd->add_option("--cache-dir", build.cache_dir, "Tool cache directory");
    build_cmd->add_option("--report", build.report, "Report format")->check(CLI::IsMember({"json", "text"}));
    build_cmd->add_option("-j,--jobs", build.jobs, "Pages built in parallel (0: one per core)");

    std::string serve_dir, host = "127.0.0.1";
    int port = 8000;
    auto* serve_cmd = app.add_subcommand("serve", "Serve a built site with the /eval and /check endpoints");
    serve_cmd->add_option("site", serve_dir, "Built site directory")->required();
    serve_cmd->add_option("-p,--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--host", host, "Address to bind");

    std::string eval_file, query;
    logic::Budget budget;
    auto* eval_cmd = app.add_subcommand("eval", "Run a query against a program file");
    eval_cmd->add_option("file", eval_file, "Program file")->required();
    eval_cmd->add_option("-q,--query", query, "Goal to solve")->required();
    eval_cmd->add_option("-n,--answers", budget.max_answers, "Maximum answers")->check(CLI::PositiveNumber);
    eval_cmd->add_option("-d,--depth", budget.max_depth, "Depth limit for fair search")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--steps", budget.max_steps, "Inference step limit")->check(CLI::PositiveNumber);

    std::string filter_name;
    auto* filter_cmd = app.add_subcommand("filter", "Apply a filter to a transcript on stdin");
    filter_cmd->add_option("name", filter_name, "Filter name")->required();
    filter_cmd->prefix_command();

    std::string exercises, cell_id, submission, page;
    auto* check_cmd = app.add_subcommand("check", "Grade a submission against a built site's exercise set");
    check_cmd->add_option("exercises", exercises, "exercises.json from the site's private area")->required();
    check_cmd->add_option("cell_id", cell_id, "Exercise cell id")->required();
    check_cmd->add_option("submission", submission, "Submission file")->required();
    check_cmd->add_option("--page", page, "Page stem, when cell ids are ambiguous");

    if (argc <= 1) {
        std::cerr << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*build_cmd) return run_build(build);
        if (*serve_cmd) return run_serve(serve_dir, host, port);
        if (*eval_cmd) return run_eval(eval_file, query, budget);
        if (*filter_cmd) return run_filter(filter_name, filter_cmd->remaining());
        if (*check_cmd) return run_check(exercises, cell_id, submission, page);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return 2;
}
