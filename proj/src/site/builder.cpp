#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ald/doc/parser.hpp"
#include "ald/exercise/checker.hpp"
#include "ald/filters/registry.hpp"
#include "ald/site/builder.hpp"
#include "ald/tools/runner.hpp"

namespace fs = std::filesystem;

namespace ald::site {

namespace {

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& data)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) throw BuildError("cannot write " + path.string());
}

struct PageResult {
    doc::Document document;
    std::vector<std::string> filter_outputs;
    std::vector<exercise::ExerciseSpec> exercises;
    std::vector<std::string> failures;
    std::exception_ptr error;
};

struct Context {
    const SiteConfig& config;
    tools::ToolRunner& directive_runner;
    tools::ToolRunner& check_runner;
    const filters::FilterRegistry& filters;
    std::string default_tool;
};

std::string first_line(const std::string& text)
{
    return text.substr(0, text.find('\n'));
}

std::string resolve_directive(const Context& ctx, const fs::path& source, const doc::FilterDirective& d)
{
    const std::string file = source.string();
    const int line = d.span.first;
    std::string tool = d.tool_id.empty() ? ctx.default_tool : d.tool_id;
    if (tool.empty()) throw BuildError("@exfilter needs tool= or a default tool", file, line);
    if (!ctx.directive_runner.manifest().tools.count(tool)) throw BuildError("unknown tool '" + tool + "'", file, line);
    if (!ctx.filters.contains(d.filter_name))
        throw BuildError("unknown filter '" + d.filter_name + "'", file, line);

    fs::path code = source.parent_path() / d.code_file;
    std::string input;
    try {
        input = read_file(code);
    } catch (const std::exception& e) {
        throw BuildError(e.what(), file, line);
    }
    tools::Transcript t;
    try {
        t = ctx.directive_runner.run(tool, input, d.tool_options, fs::path(d.code_file).filename().string());
    } catch (const tools::ToolError& e) {
        throw BuildError(e.what(), file, line);
    }
    if (t.timed_out()) throw BuildError(first_line(t.stderr_text), file, line);
    try {
        return ctx.filters.apply(filters::FilterSpec{d.filter_name, d.filter_params}, t.stdout_text, t.stderr_text);
    } catch (const filters::FilterError& e) {
        throw BuildError(e.what(), file, line);
    }
}

PageResult build_page(const Context& ctx, const fs::path& source)
{
    PageResult r;
    const std::string file = source.string();
    std::string text;
    try {
        text = read_file(source);
    } catch (const std::exception& e) {
        throw BuildError(e.what(), file);
    }
    try {
        r.document = doc::parse(text, source.filename().string());
    } catch (const doc::ParseError& e) {
        throw BuildError(e.message(), file, e.line());
    }
    const std::string page = doc::page_stem(r.document.source_path);

    for (const auto& block : r.document.blocks)
        if (auto* d = std::get_if<doc::FilterDirective>(&block))
            r.filter_outputs.push_back(resolve_directive(ctx, source, *d));

    exercise::CheckerDeps deps{&ctx.check_runner, &ctx.filters, ctx.default_tool, ctx.config.engine_budget};
    for (const doc::CodeCell* cell : r.document.cells()) {
        if (cell->kind != doc::CellKind::exercise) continue;
        exercise::ExerciseSpec spec;
        try {
            spec = exercise::from_cell(page, *cell);
        } catch (const std::invalid_argument& e) {
            throw BuildError(e.what(), file, cell->span.first);
        }
        exercise::Verdict v = exercise::check(spec, spec.solution, deps);
        if (v.outcome != exercise::Outcome::pass)
            r.failures.push_back(file + ":" + std::to_string(cell->span.first) + ": self-check of " + spec.cell_id
                                 + " failed: " + first_line(v.feedback));
        r.exercises.push_back(std::move(spec));
    }
    return r;
}

std::vector<fs::path> list_sources(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".md") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

fs::path default_cache_dir()
{
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "ald";
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "ald";
    return ".ald-cache";
}

std::string BuildReport::to_json() const
{
    nlohmann::ordered_json j{{"pages_built", pages_built},
                             {"tool_requests", tool_requests},
                             {"tool_invocations", tool_invocations},
                             {"cache_hits", cache_hits},
                             {"self_checks", self_checks},
                             {"self_check_failures", self_check_failures}};
    return j.dump(2) + "\n";
}

BuildReport build(const SiteConfig& config)
{
    std::error_code ec;
    if (!fs::is_directory(config.source_dir, ec)) throw BuildError("source directory not found", config.source_dir.string());
    if (config.output_dir.empty()) throw BuildError("no output directory given");
    if (fs::weakly_canonical(config.source_dir) == fs::weakly_canonical(config.output_dir))
        throw BuildError("source and output directories must differ");
    std::vector<fs::path> sources = list_sources(config.source_dir);
    if (sources.empty()) throw BuildError("no sources in " + config.source_dir.string());

    tools::ToolManifest manifest;
    std::string tools_json;
    if (config.manifest_path) {
        try {
            tools_json = read_file(*config.manifest_path);
            manifest = tools::parse_manifest(tools_json);
        } catch (const std::exception& e) {
            throw BuildError(e.what(), config.manifest_path->string());
        }
    }
    std::string default_tool = config.default_tool_id;
    if (default_tool.empty() && manifest.tools.size() == 1) default_tool = manifest.tools.begin()->first;
    if (!default_tool.empty() && !manifest.tools.count(default_tool))
        throw BuildError("default tool '" + default_tool + "' is not in the tool manifest");

    std::optional<tools::Cache> cache;
    if (config.cache_enabled) cache.emplace(config.cache_dir.empty() ? default_cache_dir() : config.cache_dir);
    tools::Cache* cache_ptr = cache ? &*cache : nullptr;
    tools::ToolRunner directive_runner(manifest, cache_ptr);
    tools::ToolRunner check_runner(manifest, cache_ptr);
    filters::FilterRegistry registry;
    Context ctx{config, directive_runner, check_runner, registry, default_tool};

    std::vector<PageResult> results(sources.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < sources.size(); i = next++) {
            try {
                results[i] = build_page(ctx, sources[i]);
            } catch (...) {
                results[i].error = std::current_exception();
            }
        }
    };
    unsigned jobs = config.jobs ? config.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(sources.size()));
    std::vector<std::thread> threads;
    for (unsigned t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    for (const auto& r : results)
        if (r.error) std::rethrow_exception(r.error);

    BuildReport report;
    report.tool_requests = directive_runner.requests();
    report.tool_invocations = directive_runner.spawns();
    report.cache_hits = directive_runner.cache_hits();
    for (const auto& r : results) {
        report.self_checks += r.exercises.size();
        report.self_check_failures.insert(report.self_check_failures.end(), r.failures.begin(), r.failures.end());
    }
    if (!report.self_check_failures.empty())
        throw BuildError(report.self_check_failures.front(), {}, 0, report);

    fs::create_directories(config.output_dir);
    exercise::ExerciseSet set;
    set.default_tool = default_tool;
    set.tools_json = tools_json;
    std::vector<const doc::Document*> docs;
    for (const auto& r : results) {
        write_file(config.output_dir / (doc::page_stem(r.document.source_path) + ".html"),
                   render_page(PageInput{&r.document, r.filter_outputs}));
        docs.push_back(&r.document);
        set.exercises.insert(set.exercises.end(), r.exercises.begin(), r.exercises.end());
        ++report.pages_built;
    }
    write_file(config.output_dir / "index.html", render_index(docs));
    for (const auto& [name, contents] : asset_files()) write_file(config.output_dir / "assets" / name, contents);
    write_file(config.output_dir / private_dir / "exercises.json", exercise::to_json(set));
    return report;
}

} // namespace ald::site
