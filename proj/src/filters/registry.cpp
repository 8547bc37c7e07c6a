#include "ald/filters/registry.hpp"

#include <cctype>
#include <charconv>
#include <regex>

namespace ald::filters {

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::string join_lines(const std::vector<std::string_view>& lines, bool text_had_newline)
{
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    if (text_had_newline && !lines.empty()) out += '\n';
    return out;
}

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool ends_with_newline(std::string_view text) { return !text.empty() && text.back() == '\n'; }

bool indented(std::string_view line) { return !line.empty() && (line[0] == ' ' || line[0] == '\t'); }

void no_params(std::string_view name, const std::vector<std::string>& params)
{
    if (!params.empty()) throw FilterError(FilterErrorKind::bad_params, std::string(name) + " takes no parameters");
}

template <class Keep>
std::string select(std::string_view text, Keep keep)
{
    std::vector<std::string_view> kept;
    for (auto line : split_lines(text))
        if (keep(line)) kept.push_back(line);
    return join_lines(kept, ends_with_newline(text));
}

std::string warn_error(std::string_view text, const std::vector<std::string>& params)
{
    no_params("warn_error", params);
    bool in_block = false;
    return select(text, [&in_block](std::string_view line) {
        if (opens_message(line))
            in_block = true;
        else if (!indented(line))
            in_block = false;
        return in_block;
    });
}

std::string regex_filter(std::string_view text, const std::vector<std::string>& params)
{
    if (params.size() != 1) throw FilterError(FilterErrorKind::bad_params, "regex takes exactly one pattern");
    std::regex re;
    try {
        re = std::regex(params[0], std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw FilterError(FilterErrorKind::bad_params, "bad regex '" + params[0] + "': " + e.what());
    }
    return select(text, [&re](std::string_view line) { return std::regex_search(line.begin(), line.end(), re); });
}

std::string head(std::string_view text, const std::vector<std::string>& params)
{
    std::size_t n = 10;
    if (params.size() > 1) throw FilterError(FilterErrorKind::bad_params, "head takes one count");
    if (params.size() == 1) {
        const std::string& p = params[0];
        auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), n);
        if (ec != std::errc() || end != p.data() + p.size() || p.empty())
            throw FilterError(FilterErrorKind::bad_params, "head count must be a non-negative integer, got '" + p + "'");
    }
    std::size_t seen = 0;
    return select(text, [&](std::string_view) { return seen++ < n; });
}

// `Var = Term` lines of an engine transcript, without the ` ;` separator.
std::string answers(std::string_view text, const std::vector<std::string>& params)
{
    no_params("answers", params);
    std::vector<std::string_view> kept;
    for (auto line : split_lines(text)) {
        if (line.empty() || !(std::isupper(static_cast<unsigned char>(line[0])) || line[0] == '_')) continue;
        std::size_t i = 1;
        while (i < line.size() && word_char(line[i])) ++i;
        if (line.substr(i, 3) != " = ") continue;
        if (line.size() >= 2 && line.substr(line.size() - 2) == " ;") line.remove_suffix(2);
        kept.push_back(line);
    }
    return join_lines(kept, ends_with_newline(text));
}

// Number of top-level arguments in the text after an opening parenthesis,
// or -1 when the parenthesis is never closed.
int count_args(std::string_view s)
{
    int depth = 0;
    int args = 1;
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (quote) {
            if (c == '\\')
                ++i;
            else if (c == quote)
                quote = 0;
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '(' || c == '[' || c == '{') {
            ++depth;
        } else if (c == ')' || c == ']' || c == '}') {
            if (depth == 0) return c == ')' ? args : -1;
            --depth;
        } else if (c == ',' && depth == 0) {
            ++args;
        }
    }
    return -1;
}

std::string pred_props(std::string_view text, const std::vector<std::string>& params)
{
    if (params.size() != 1) throw FilterError(FilterErrorKind::bad_params, "pred_props takes name/arity");
    const std::string& p = params[0];
    auto slash = p.rfind('/');
    int arity = -1;
    if (slash != std::string::npos && slash > 0) {
        auto [end, ec] = std::from_chars(p.data() + slash + 1, p.data() + p.size(), arity);
        if (ec != std::errc() || end != p.data() + p.size()) arity = -1;
    }
    if (arity < 0) throw FilterError(FilterErrorKind::bad_params, "pred_props expects name/arity, got '" + p + "'");
    std::string prefix = ":- true pred " + p.substr(0, slash);

    return select(text, [&](std::string_view line) {
        if (line.substr(0, prefix.size()) != prefix) return false;
        std::string_view rest = line.substr(prefix.size());
        if (arity == 0) return rest.empty() || (!word_char(rest[0]) && rest[0] != '(');
        return !rest.empty() && rest[0] == '(' && count_args(rest.substr(1)) == arity;
    });
}

} // namespace

bool opens_message(std::string_view line)
{
    for (std::string_view word : {std::string_view("WARNING"), std::string_view("ERROR")}) {
        if (line.substr(0, word.size()) == word && (line.size() == word.size() || !word_char(line[word.size()])))
            return true;
    }
    return false;
}

FilterRegistry::FilterRegistry()
{
    add("identity", [](std::string_view text, const std::vector<std::string>& params) {
        no_params("identity", params);
        return std::string(text);
    });
    add("warn_error", warn_error);
    add("regex", regex_filter);
    add("head", head);
    add("answers", answers);
    add("pred_props", pred_props);
}

void FilterRegistry::add(const std::string& name, FilterFn fn)
{
    if (name.empty()) throw std::invalid_argument("filter name must not be empty");
    filters_[name] = std::move(fn);
}

std::string FilterRegistry::apply(const FilterSpec& spec, std::string_view text) const
{
    auto it = filters_.find(spec.name);
    if (it == filters_.end()) throw FilterError(FilterErrorKind::unknown_filter, "unknown filter '" + spec.name + "'");
    return it->second(text, spec.params);
}

std::string FilterRegistry::apply(const FilterSpec& spec, std::string_view out, std::string_view err) const
{
    FilterSpec rest{spec.name, {}};
    std::string stream = "stdout";
    for (const auto& p : spec.params) {
        if (p.rfind("stream=", 0) == 0)
            stream = p.substr(7);
        else
            rest.params.push_back(p);
    }
    if (stream == "stdout") return apply(rest, out);
    if (stream == "stderr") return apply(rest, err);
    if (stream == "both") {
        std::string joined(out);
        if (!joined.empty() && joined.back() != '\n' && !err.empty()) joined += '\n';
        joined += err;
        return apply(rest, joined);
    }
    throw FilterError(FilterErrorKind::bad_params, "stream must be stdout, stderr or both, got '" + stream + "'");
}

} // namespace ald::filters
