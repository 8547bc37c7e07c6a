#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ald/doc/document.hpp"
#include "ald/logic/engine.hpp"

namespace ald::site {

inline constexpr int protocol_version = 1;
inline constexpr const char* private_dir = ".ald-private";

struct SiteConfig {
    std::filesystem::path source_dir;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> manifest_path;
    std::string default_tool_id; ///< empty: the manifest's only tool, if it has exactly one
    bool cache_enabled = true;
    std::filesystem::path cache_dir; ///< empty: default_cache_dir()
    logic::Budget engine_budget;
    unsigned jobs = 0; ///< 0: one per hardware thread
};

struct BuildReport {
    int pages_built = 0;
    std::size_t tool_requests = 0;    ///< directive tool runs requested
    std::size_t tool_invocations = 0; ///< directive tool processes spawned
    std::size_t cache_hits = 0;
    std::size_t self_checks = 0;
    std::vector<std::string> self_check_failures;

    std::string to_json() const;
};

/// Build failure. `file` and `line` locate the cause when known.
class BuildError : public std::runtime_error {
public:
    BuildError(const std::string& message, std::string file = {}, int line = 0, BuildReport report = {})
        : std::runtime_error(located(message, file, line)), file_(std::move(file)), line_(line),
          report_(std::move(report))
    {
    }
    const std::string& file() const { return file_; }
    int line() const { return line_; }
    const BuildReport& report() const { return report_; }

private:
    static std::string located(const std::string& message, const std::string& file, int line)
    {
        if (file.empty()) return message;
        return file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message;
    }

    std::string file_;
    int line_;
    BuildReport report_;
};

/// $XDG_CACHE_HOME/ald, else $HOME/.cache/ald, else .ald-cache.
std::filesystem::path default_cache_dir();

/// Runs the static phase. Throws BuildError.
BuildReport build(const SiteConfig& config);

/// Resolved output of one FilterDirective, in block order.
struct PageInput {
    const doc::Document* document = nullptr;
    std::vector<std::string> filter_outputs;
};

std::string render_page(const PageInput& page);
std::string render_index(const std::vector<const doc::Document*>& pages);

/// The page's cell manifest as JSON text (not yet escaped for HTML).
std::string cell_manifest(const doc::Document& doc);

/// Makes JSON safe inside a <script> element.
std::string script_safe(std::string json);

std::string html_escape(std::string_view text);

/// Static assets written under `assets/`: name -> contents.
const std::vector<std::pair<std::string, std::string>>& asset_files();

} // namespace ald::site
