#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ald/tools/runner.hpp"

namespace ald::tools {

using nlohmann::json;

std::string to_string(ToolErrorKind kind)
{
    switch (kind) {
    case ToolErrorKind::unknown_tool: return "unknown_tool";
    case ToolErrorKind::spawn_failure: return "spawn_failure";
    case ToolErrorKind::bad_manifest: return "bad_manifest";
    case ToolErrorKind::nondeterminism: return "nondeterminism";
    }
    return "spawn_failure";
}

const ToolSpec& ToolManifest::at(const std::string& tool_id) const
{
    auto it = tools.find(tool_id);
    if (it == tools.end()) throw ToolError(ToolErrorKind::unknown_tool, "unknown tool '" + tool_id + "'");
    return it->second;
}

namespace {

std::vector<std::string> string_list(const json& j, const std::string& what)
{
    if (!j.is_array()) throw ToolError(ToolErrorKind::bad_manifest, what + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw ToolError(ToolErrorKind::bad_manifest, what + " must be an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::string trim(std::string s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> expand(const std::vector<std::string>& templ, const std::string& input_path,
                                const std::vector<std::string>& options)
{
    std::vector<std::string> argv;
    for (const auto& arg : templ) {
        if (arg == "{options}") {
            argv.insert(argv.end(), options.begin(), options.end());
            continue;
        }
        std::string a = arg;
        for (auto pos = a.find("{input}"); pos != std::string::npos; pos = a.find("{input}", pos + input_path.size()))
            a.replace(pos, 7, input_path);
        argv.push_back(std::move(a));
    }
    return argv;
}

// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir()
    {
        std::string templ = (std::filesystem::temp_directory_path() / "ald-tool-XXXXXX").string();
        if (!::mkdtemp(templ.data())) throw ToolError(ToolErrorKind::spawn_failure, "cannot create temp directory");
        path_ = templ;
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace

ToolManifest parse_manifest(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ToolError(ToolErrorKind::bad_manifest, std::string("tool manifest is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("tools") || !j["tools"].is_object())
        throw ToolError(ToolErrorKind::bad_manifest, "tool manifest needs a \"tools\" object");
    ToolManifest m;
    for (const auto& [id, t] : j["tools"].items()) {
        if (id.empty()) throw ToolError(ToolErrorKind::bad_manifest, "empty tool id");
        if (!t.is_object()) throw ToolError(ToolErrorKind::bad_manifest, "tool '" + id + "' must be an object");
        ToolSpec spec;
        if (!t.contains("command")) throw ToolError(ToolErrorKind::bad_manifest, "tool '" + id + "' has no command");
        spec.command = string_list(t["command"], id + ".command");
        if (spec.command.empty()) throw ToolError(ToolErrorKind::bad_manifest, "tool '" + id + "' has an empty command");
        if (t.contains("input_mode")) {
            std::string mode = t["input_mode"].is_string() ? t["input_mode"].get<std::string>() : "";
            if (mode == "file")
                spec.input_mode = InputMode::file;
            else if (mode == "stdin")
                spec.input_mode = InputMode::stdin_;
            else
                throw ToolError(ToolErrorKind::bad_manifest, id + ".input_mode must be \"file\" or \"stdin\"");
        }
        if (t.contains("timeout_ms")) {
            if (!t["timeout_ms"].is_number_integer() || t["timeout_ms"].get<long long>() <= 0)
                throw ToolError(ToolErrorKind::bad_manifest, id + ".timeout_ms must be a positive integer");
            spec.timeout_ms = t["timeout_ms"].get<int>();
        }
        if (t.contains("version_command")) {
            spec.version_command = string_list(t["version_command"], id + ".version_command");
            if (spec.version_command->empty())
                throw ToolError(ToolErrorKind::bad_manifest, id + ".version_command is empty");
        }
        if (t.contains("scrub")) spec.scrub = string_list(t["scrub"], id + ".scrub");
        if (t.contains("endpoint") && t["endpoint"].is_string()) spec.endpoint = t["endpoint"].get<std::string>();
        m.tools.emplace(id, std::move(spec));
    }
    return m;
}

ToolManifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ToolError(ToolErrorKind::bad_manifest, "cannot read tool manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

std::string ToolRunner::version(const std::string& tool_id)
{
    const ToolSpec& spec = manifest_.at(tool_id);
    std::lock_guard lock(version_mu_);
    if (auto it = versions_.find(tool_id); it != versions_.end()) return it->second;
    std::string v = "unversioned";
    if (spec.version_command) {
        ++version_spawns_;
        ProcessResult r = run_process(*spec.version_command, {}, spec.timeout_ms, spec.scrub);
        if (r.timed_out || r.exit_code != 0)
            throw ToolError(ToolErrorKind::spawn_failure, "version command for tool '" + tool_id + "' failed");
        v = trim(sanitize_utf8(r.out));
    }
    versions_.emplace(tool_id, v);
    return v;
}

Transcript ToolRunner::run(const std::string& tool_id, const std::string& input,
                           const std::vector<std::string>& options, const std::string& input_name)
{
    ++requests_;
    const ToolSpec& spec = manifest_.at(tool_id);
    std::string name = std::filesystem::path(input_name).filename().string();
    if (name.empty()) name = "input.pl";

    CacheKey key{tool_id, version(tool_id), sha256_hex(input), options, name, spec.command};
    std::string digest = key.digest();
    if (cache_) {
        if (auto hit = cache_->lookup(digest)) {
            ++cache_hits_;
            return *hit;
        }
    }

    ProcessResult r;
    if (spec.input_mode == InputMode::file) {
        TempDir dir;
        auto path = dir.path() / name;
        {
            std::ofstream out(path, std::ios::binary);
            out << input;
            if (!out) throw ToolError(ToolErrorKind::spawn_failure, "cannot write tool input " + path.string());
        }
        ++spawns_;
        r = run_process(expand(spec.command, path.string(), options), {}, spec.timeout_ms, spec.scrub);
    } else {
        ++spawns_;
        r = run_process(expand(spec.command, name, options), input, spec.timeout_ms, spec.scrub);
    }

    Transcript t;
    t.stdout_text = sanitize_utf8(r.out);
    t.stderr_text = sanitize_utf8(r.err);
    t.exit_code = r.exit_code;
    t.duration_ms = r.duration_ms;
    t.tool_version = key.tool_version;
    if (r.timed_out) {
        t.exit_code = -1;
        t.stderr_text += "ald: tool '" + tool_id + "' timed out after " + std::to_string(spec.timeout_ms) + " ms\n";
        return t;
    }
    if (cache_) cache_->store(digest, t);
    return t;
}

} // namespace ald::tools
