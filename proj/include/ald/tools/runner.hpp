#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ald::tools {

enum class ToolErrorKind { unknown_tool, spawn_failure, bad_manifest, nondeterminism };

std::string to_string(ToolErrorKind kind);

class ToolError : public std::runtime_error {
public:
    ToolError(ToolErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    ToolErrorKind kind() const { return kind_; }

private:
    ToolErrorKind kind_;
};

enum class InputMode { file, stdin_ };

/// argv templates may use `{input}` (path of the input file, file mode
/// only) inside any element, and `{options}` as a whole element, which
/// expands to the option tokens.
struct ToolSpec {
    std::vector<std::string> command;
    InputMode input_mode = InputMode::file;
    int timeout_ms = 10000;
    std::optional<std::vector<std::string>> version_command;
    std::vector<std::string> scrub; ///< environment variables removed before spawning
    std::optional<std::string> endpoint; ///< reserved; not used
};

struct ToolManifest {
    std::map<std::string, ToolSpec> tools;

    const ToolSpec& at(const std::string& tool_id) const;
};

/// Parses `{"tools": {...}}`. Throws ToolError(bad_manifest).
ToolManifest parse_manifest(const std::string& json_text);
ToolManifest load_manifest(const std::filesystem::path& path);

struct Transcript {
    std::string stdout_text;
    std::string stderr_text;
    int exit_code = 0;
    long duration_ms = 0;
    std::string tool_version;

    bool timed_out() const { return exit_code == -1; }
};

/// Cached transcripts compare equal when everything but duration matches.
bool same_output(const Transcript& a, const Transcript& b);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

std::string sha256_hex(std::string_view data);

struct CacheKey {
    std::string tool_id;
    std::string tool_version;
    std::string input_hash;
    std::vector<std::string> options;
    std::string input_name;
    std::vector<std::string> command;

    std::string digest() const;
};

/// Directory of `<digest>.json` transcripts. The first completed write for a
/// key wins; repeating it with identical output is a no-op and repeating it
/// with different output throws ToolError(nondeterminism).
class Cache {
public:
    explicit Cache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::optional<Transcript> lookup(const std::string& digest) const;
    void store(const std::string& digest, const Transcript& t);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

/// Runs tools from a manifest. Thread-safe.
class ToolRunner {
public:
    explicit ToolRunner(ToolManifest manifest, Cache* cache = nullptr)
        : manifest_(std::move(manifest)), cache_(cache)
    {
    }

    /// `input_name` is the basename given to the input file.
    Transcript run(const std::string& tool_id, const std::string& input, const std::vector<std::string>& options,
                   const std::string& input_name = "input.pl");

    /// Trimmed output of the version command, or "unversioned". Memoized.
    std::string version(const std::string& tool_id);

    const ToolManifest& manifest() const { return manifest_; }

    std::size_t spawns() const { return spawns_; }
    std::size_t version_spawns() const { return version_spawns_; }
    std::size_t cache_hits() const { return cache_hits_; }
    std::size_t requests() const { return requests_; }

private:
    ToolManifest manifest_;
    Cache* cache_;
    std::mutex version_mu_;
    std::map<std::string, std::string> versions_;
    std::atomic<std::size_t> spawns_{0};
    std::atomic<std::size_t> version_spawns_{0};
    std::atomic<std::size_t> cache_hits_{0};
    std::atomic<std::size_t> requests_{0};
};

struct ProcessResult {
    std::string out;
    std::string err;
    int exit_code = 0;
    bool timed_out = false;
    long duration_ms = 0;
};

/// Spawns argv[0] (searched on PATH), feeds `stdin_data`, and collects
/// output. Variables named in `scrub` are removed from the child's
/// environment. Throws ToolError(spawn_failure) if the process cannot start.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_data, int timeout_ms,
                          const std::vector<std::string>& scrub = {});

} // namespace ald::tools
