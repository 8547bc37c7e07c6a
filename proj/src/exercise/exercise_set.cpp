#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "ald/exercise/checker.hpp"

namespace ald::exercise {

using nlohmann::json;

std::string base64_encode(std::string_view data)
{
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(data.data()), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0) throw std::invalid_argument("bad base64 length");
    std::string out(3 * text.size() / 4, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw std::invalid_argument("bad base64 data");
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

const ExerciseSpec* ExerciseSet::find(const std::string& page, const std::string& cell_id) const
{
    for (const auto& e : exercises)
        if (e.cell_id == cell_id && (page.empty() || e.page == page)) return &e;
    return nullptr;
}

std::string to_json(const ExerciseSet& set)
{
    json items = json::array();
    for (const auto& e : set.exercises) {
        json j{{"page", e.page},           {"cell_id", e.cell_id},
               {"engine_id", e.engine_id}, {"checker", e.checker},
               {"skeleton", e.skeleton},   {"solution_b64", base64_encode(e.solution)},
               {"tool_id", e.tool_id},     {"tool_options", e.tool_options},
               {"query", e.query},         {"max_answers", e.max_answers}};
        if (e.filter) j["filter"] = json{{"name", e.filter->name}, {"params", e.filter->params}};
        items.push_back(std::move(j));
    }
    json tools = set.tools_json.empty() ? json::object() : json::parse(set.tools_json);
    json out{{"version", 1}, {"default_tool", set.default_tool}, {"tools", tools}, {"exercises", items}};
    return out.dump(2) + "\n";
}

ExerciseSet exercise_set_from_json(const std::string& text)
{
    ExerciseSet set;
    try {
        json j = json::parse(text);
        set.default_tool = j.value("default_tool", "");
        if (j.contains("tools") && !j["tools"].empty()) set.tools_json = j["tools"].dump();
        for (const auto& e : j.at("exercises")) {
            ExerciseSpec s;
            s.page = e.at("page").get<std::string>();
            s.cell_id = e.at("cell_id").get<std::string>();
            s.engine_id = e.value("engine_id", "");
            s.checker = e.at("checker").get<std::string>();
            s.skeleton = e.value("skeleton", "");
            s.solution = base64_decode(e.at("solution_b64").get<std::string>());
            s.tool_id = e.value("tool_id", "");
            s.tool_options = e.value("tool_options", std::vector<std::string>{});
            s.query = e.value("query", "");
            s.max_answers = e.value("max_answers", 20);
            if (e.contains("filter"))
                s.filter = filters::FilterSpec{e["filter"].at("name").get<std::string>(),
                                               e["filter"].value("params", std::vector<std::string>{})};
            set.exercises.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed exercises file: ") + e.what());
    }
    return set;
}

ExerciseSet load_exercise_set(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return exercise_set_from_json(ss.str());
}

} // namespace ald::exercise
