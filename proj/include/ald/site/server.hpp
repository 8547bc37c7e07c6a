#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ald/exercise/checker.hpp"
#include "ald/logic/engine.hpp"

namespace ald::site {

struct ApiResponse {
    int status = 200;
    std::string body; ///< JSON
};

/// Upper bounds a request may ask for.
struct EvalLimits {
    int max_depth = 1000;
    std::int64_t max_steps = 10'000'000;
    int max_answers = 1000;
};

/// POST /eval. Fields missing from the request take values from `defaults`.
ApiResponse handle_eval(std::string_view body, const logic::Budget& defaults = {}, const EvalLimits& limits = {});

/// Backs POST /check with the private exercise set of a built site.
class CheckService {
public:
    /// Throws std::invalid_argument if the exercise set cannot be loaded.
    explicit CheckService(exercise::ExerciseSet set, logic::Budget budget = {});

    ApiResponse handle(std::string_view body) const;

private:
    exercise::ExerciseSet set_;
    std::unique_ptr<tools::ToolRunner> runner_;
    filters::FilterRegistry filters_;
    logic::Budget budget_;
};

/// Maps a request path to a file under `root`. Rejects dot segments, which
/// also hides the private area.
std::optional<std::filesystem::path> resolve_static(const std::filesystem::path& root, std::string_view url_path);

std::string content_type_for(const std::filesystem::path& path);

struct ServeConfig {
    std::filesystem::path output_dir;
    std::string host = "127.0.0.1";
    int port = 8000; ///< 0 picks a free port
    logic::Budget budget;
};

/// HTTP front end over a built site.
class Server {
public:
    /// Throws std::runtime_error when the site has no exercise set.
    explicit Server(ServeConfig config);
    ~Server();

    /// Binds the port. Throws std::runtime_error if it is in use.
    void bind();
    int port() const { return port_; }
    /// Serves until stop(). Call bind() first.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    ServeConfig config_;
    int port_ = 0;
};

} // namespace ald::site
