#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "ald/logic/reader.hpp"
#include "ald/site/builder.hpp"
#include "ald/site/server.hpp"

namespace fs = std::filesystem;

namespace ald::site {

namespace {

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

ApiResponse bad_request(const std::string& message)
{
    return {400, ordered_json{{"status", "error"}, {"error", message}}.dump()};
}

template <typename T>
bool read_limit(const json& req, const char* key, T& value, T cap, std::string& error)
{
    if (!req.contains(key) || req[key].is_null()) return true;
    if (!req[key].is_number_integer()) {
        error = std::string(key) + " must be an integer";
        return false;
    }
    auto v = req[key].get<std::int64_t>();
    if (v <= 0 || v > static_cast<std::int64_t>(cap)) {
        error = std::string(key) + " must be between 1 and " + std::to_string(cap);
        return false;
    }
    value = static_cast<T>(v);
    return true;
}

bool string_field(const json& req, const char* key, std::string& out, bool required, std::string& error)
{
    if (!req.contains(key) || req[key].is_null()) {
        if (required) error = std::string("missing field ") + key;
        return !required;
    }
    if (!req[key].is_string()) {
        error = std::string(key) + " must be a string";
        return false;
    }
    out = req[key].get<std::string>();
    return true;
}

std::optional<json> parse_object(std::string_view body)
{
    json req = json::parse(body, nullptr, false);
    if (req.is_discarded() || !req.is_object()) return std::nullopt;
    return req;
}

} // namespace

ApiResponse handle_eval(std::string_view body, const logic::Budget& defaults, const EvalLimits& limits)
{
    auto req = parse_object(body);
    if (!req) return bad_request("request body must be a JSON object");
    std::string engine_id, program_text, query_text, error;
    logic::Budget budget = defaults;
    if (!string_field(*req, "engine_id", engine_id, false, error) || !string_field(*req, "program", program_text, true, error)
        || !string_field(*req, "query", query_text, true, error)
        || !read_limit(*req, "max_answers", budget.max_answers, limits.max_answers, error)
        || !read_limit(*req, "max_depth", budget.max_depth, limits.max_depth, error)
        || !read_limit(*req, "max_steps", budget.max_steps, limits.max_steps, error))
        return bad_request(error);

    ordered_json out{{"status", "ok"}, {"answers", ordered_json::array()}, {"more", false}};
    auto fail = [&](const std::string& kind, const std::string& message) {
        out["status"] = "error";
        out["error_kind"] = kind;
        out["error"] = message;
        return ApiResponse{200, out.dump()};
    };
    logic::Program program;
    logic::Term query;
    try {
        program = logic::parse_program(program_text);
    } catch (const logic::SyntaxError& e) {
        return fail("syntax_error", std::string("program: ") + e.what());
    }
    try {
        query = logic::parse_query(query_text);
    } catch (const logic::SyntaxError& e) {
        return fail("syntax_error", std::string("query: ") + e.what());
    }
    try {
        logic::SolveResult r = logic::solve(program, query, budget);
        for (const auto& a : r.answers) {
            ordered_json bindings = ordered_json::object();
            for (const auto& [name, value] : a.bindings) bindings[name] = logic::format_term(value);
            out["answers"].push_back(ordered_json{{"bindings", bindings}, {"depth", a.proof_depth}});
        }
        out["more"] = r.more;
    } catch (const logic::EngineError& e) {
        return fail(std::string(logic::to_string(e.kind())), e.what());
    }
    return {200, out.dump()};
}

CheckService::CheckService(exercise::ExerciseSet set, logic::Budget budget)
    : set_(std::move(set)), budget_(budget)
{
    tools::ToolManifest manifest;
    if (!set_.tools_json.empty()) {
        try {
            manifest = tools::parse_manifest(set_.tools_json);
        } catch (const tools::ToolError& e) {
            throw std::invalid_argument(e.what());
        }
    }
    runner_ = std::make_unique<tools::ToolRunner>(std::move(manifest));
}

ApiResponse CheckService::handle(std::string_view body) const
{
    auto req = parse_object(body);
    if (!req) return bad_request("request body must be a JSON object");
    std::string page, cell_id, submission, error;
    if (!string_field(*req, "page", page, false, error) || !string_field(*req, "cell_id", cell_id, true, error)
        || !string_field(*req, "submission", submission, true, error))
        return bad_request(error);
    const exercise::ExerciseSpec* spec = set_.find(page, cell_id);
    if (!spec) return {404, ordered_json{{"status", "error"}, {"error", "unknown exercise " + cell_id}}.dump()};
    exercise::CheckerDeps deps{runner_.get(), &filters_, set_.default_tool, budget_};
    exercise::Verdict v = exercise::check(*spec, submission, deps);
    return {200, ordered_json{{"verdict", exercise::to_string(v.outcome)}, {"feedback", v.feedback}}.dump()};
}

std::optional<fs::path> resolve_static(const fs::path& root, std::string_view url_path)
{
    std::string_view p = url_path.substr(0, url_path.find_first_of("?#"));
    if (p.empty() || p.front() != '/') return std::nullopt;
    std::string decoded = httplib::detail::decode_url(std::string(p), false);
    if (decoded.find('\0') != std::string::npos || decoded.find('\\') != std::string::npos) return std::nullopt;
    fs::path out = root;
    std::string_view rest = decoded;
    while (!rest.empty()) {
        auto slash = rest.find('/');
        std::string_view seg = rest.substr(0, slash);
        if (!seg.empty()) {
            if (seg.front() == '.') return std::nullopt;
            out /= std::string(seg);
        }
        if (slash == std::string_view::npos) break;
        rest.remove_prefix(slash + 1);
    }
    std::error_code ec;
    if (fs::is_directory(out, ec)) out /= "index.html";
    if (!fs::is_regular_file(out, ec)) return std::nullopt;
    return out;
}

std::string content_type_for(const fs::path& path)
{
    std::string ext = path.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".css") return "text/css; charset=utf-8";
    if (ext == ".js") return "text/javascript; charset=utf-8";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

struct Server::Impl {
    httplib::Server http;
    std::unique_ptr<CheckService> checks;
};

Server::Server(ServeConfig config) : impl_(std::make_unique<Impl>()), config_(std::move(config))
{
    fs::path sidecar = config_.output_dir / private_dir / "exercises.json";
    if (!fs::is_regular_file(config_.output_dir / "index.html"))
        throw std::runtime_error(config_.output_dir.string() + " is not a built site");
    exercise::ExerciseSet set;
    if (fs::exists(sidecar)) set = exercise::load_exercise_set(sidecar);
    impl_->checks = std::make_unique<CheckService>(std::move(set), config_.budget);

    impl_->http.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    auto json_reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    impl_->http.Post("/eval", [this, json_reply](const httplib::Request& req, httplib::Response& res) {
        json_reply(res, handle_eval(req.body, config_.budget));
    });
    impl_->http.Post("/check", [this, json_reply](const httplib::Request& req, httplib::Response& res) {
        json_reply(res, impl_->checks->handle(req.body));
    });
    impl_->http.Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
        auto file = resolve_static(config_.output_dir, req.path);
        std::ifstream in;
        if (file) in.open(*file, std::ios::binary);
        if (!file || !in) {
            res.status = 404;
            res.set_content("not found\n", "text/plain");
            return;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        res.set_content(ss.str(), content_type_for(*file));
    });
}

Server::~Server()
{
    stop();
}

void Server::bind()
{
    if (config_.port == 0) {
        port_ = impl_->http.bind_to_any_port(config_.host);
        if (port_ < 0) throw std::runtime_error("cannot bind " + config_.host);
    } else {
        if (!impl_->http.bind_to_port(config_.host, config_.port))
            throw std::runtime_error("port " + std::to_string(config_.port) + " is in use or unavailable");
        port_ = config_.port;
    }
}

void Server::listen()
{
    impl_->http.listen_after_bind();
}

void Server::stop()
{
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

} // namespace ald::site
