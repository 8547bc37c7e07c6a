#include "ald/doc/parser.hpp"

#include <cctype>

namespace ald::doc {

std::string to_string(ParseErrorKind kind)
{
    switch (kind) {
    case ParseErrorKind::unclosed_fence: return "unclosed_fence";
    case ParseErrorKind::bad_directive: return "bad_directive";
    case ParseErrorKind::bad_solution_marker: return "bad_solution_marker";
    }
    return "bad_directive";
}

namespace {

constexpr std::string_view fence = "```";
constexpr std::string_view runnable_suffix = "_runnable";
constexpr std::string_view marker = "solution=";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view rtrim(std::string_view s)
{
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string_view ltrim(std::string_view s)
{
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    return s;
}

std::string_view trim(std::string_view s) { return ltrim(rtrim(s)); }

bool blank(std::string_view s) { return trim(s).empty(); }

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

std::string normalize_tag(std::string_view tag)
{
    std::string out;
    for (std::size_t i = 0; i < tag.size(); ++i) {
        if (tag[i] == '\\' && i + 1 < tag.size() && tag[i + 1] == '_') continue;
        out += tag[i];
    }
    return out;
}

// Joins lines, dropping leading and trailing blank ones. Each kept line
// gets a '\n'.
std::string join_trimmed(const std::vector<std::string_view>& lines, std::size_t begin, std::size_t end)
{
    while (begin < end && blank(lines[begin])) ++begin;
    while (end > begin && blank(lines[end - 1])) --end;
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        out += lines[i];
        out += '\n';
    }
    return out;
}

void parse_marker(std::string_view value, int line, CodeCell& cell)
{
    auto tokens = split_tokens(value);
    if (tokens.empty() || trim(tokens[0]).empty())
        throw ParseError(ParseErrorKind::bad_solution_marker, line, "solution marker names no checker");
    cell.checker = std::string(trim(tokens[0]));
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        std::string_view tok = trim(tokens[i]);
        auto eq = tok.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw ParseError(ParseErrorKind::bad_solution_marker, line,
                             "expected key=value after checker, got '" + std::string(tok) + "'");
        cell.checker_options.emplace_back(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
    }
}

bool heading_level(std::string_view line, int& level)
{
    std::size_t n = 0;
    while (n < line.size() && line[n] == '#') ++n;
    if (n == 0 || n > 6) return false;
    if (n < line.size() && line[n] != ' ' && line[n] != '\t') return false;
    level = static_cast<int>(n);
    return true;
}

bool title_line(std::string_view line)
{
    constexpr std::string_view cmd = "\\title";
    return line.substr(0, cmd.size()) == cmd && (line.size() == cmd.size() || is_space(line[cmd.size()]));
}

bool directive_line(std::string_view line) { return ltrim(line).substr(0, 9) == "@exfilter"; }

bool fence_line(std::string_view line) { return line.substr(0, fence.size()) == fence; }

} // namespace

std::vector<std::string> split_tokens(std::string_view text)
{
    std::vector<std::string> out;
    if (text.empty()) return out;
    int depth = 0;
    std::string cur;
    for (char c : text) {
        if (c == '(' || c == '[' || c == '{') ++depth;
        if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
        if (c == ',' && depth == 0) {
            out.push_back(std::move(cur));
            cur.clear();
            continue;
        }
        cur += c;
    }
    out.push_back(std::move(cur));
    return out;
}

CodeCell classify_cell(std::string_view fence_tag, std::string_view body, int first_line)
{
    CodeCell cell;
    cell.fence_info = std::string(fence_tag);
    cell.body = std::string(body);
    std::string tag = normalize_tag(trim(fence_tag));
    bool runnable = tag.size() > runnable_suffix.size()
                    && std::string_view(tag).substr(tag.size() - runnable_suffix.size()) == runnable_suffix;
    cell.engine_id = runnable ? tag.substr(0, tag.size() - runnable_suffix.size()) : tag;

    auto lines = split_lines(body);
    std::optional<std::size_t> split;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view t = trim(lines[i]);
        if (t.substr(0, marker.size()) != marker) continue;
        int line = first_line + 1 + static_cast<int>(i);
        if (!runnable)
            throw ParseError(ParseErrorKind::bad_solution_marker, line, "solution marker outside a runnable fence");
        if (split)
            throw ParseError(ParseErrorKind::bad_solution_marker, line, "second solution marker in one fence");
        split = i;
        parse_marker(t.substr(marker.size()), line, cell);
    }

    if (!runnable) {
        cell.kind = CellKind::static_;
        cell.visible_text = cell.body;
        return cell;
    }
    if (split) {
        cell.kind = CellKind::exercise;
        cell.visible_text = join_trimmed(lines, 0, *split);
        cell.solution_text = join_trimmed(lines, *split + 1, lines.size());
        if (cell.solution_text->empty())
            throw ParseError(ParseErrorKind::bad_solution_marker, first_line + 1 + static_cast<int>(*split),
                             "empty solution after marker");
        return cell;
    }
    cell.visible_text = cell.body;
    cell.kind = CellKind::program;
    for (auto l : lines) {
        if (blank(l)) continue;
        if (ltrim(l).substr(0, 2) == "?-") cell.kind = CellKind::query;
        break;
    }
    return cell;
}

FilterDirective parse_directive(std::string_view line, int line_no)
{
    auto bad = [line_no](const std::string& msg) { return ParseError(ParseErrorKind::bad_directive, line_no, msg); };
    constexpr std::string_view head = "@exfilter{";
    std::string_view s = trim(line);
    if (s.substr(0, head.size()) != head) throw bad("expected @exfilter{<file>}{<options>}");
    s.remove_prefix(head.size());
    auto close = s.find('}');
    if (close == std::string_view::npos) throw bad("unterminated file argument");
    FilterDirective d;
    d.code_file = std::string(trim(s.substr(0, close)));
    if (d.code_file.empty()) throw bad("empty file argument");
    for (char c : d.code_file)
        if (is_space(c)) throw bad("file argument contains whitespace");
    s.remove_prefix(close + 1);
    if (s.size() < 2 || s.front() != '{' || s.back() != '}') throw bad("expected {<options>} after file argument");
    std::string_view inner = s.substr(1, s.size() - 2);

    std::vector<std::string> rest;
    bool have_filter = false;
    for (const auto& raw : split_tokens(inner)) {
        std::string_view tok = trim(raw);
        if (tok.empty()) throw bad("empty option token");
        for (char c : tok)
            if (is_space(c)) throw bad("option token '" + std::string(tok) + "' contains whitespace");
        if (tok.substr(0, 7) == "filter=") {
            if (have_filter) throw bad("filter given twice");
            d.filter_name = std::string(tok.substr(7));
            have_filter = true;
        } else if (tok.substr(0, 5) == "tool=") {
            d.tool_id = std::string(tok.substr(5));
            if (d.tool_id.empty()) throw bad("empty tool name");
        } else {
            rest.emplace_back(tok);
        }
    }
    if (d.filter_name.empty()) throw bad("missing filter=<name>");
    std::string prefix = d.filter_name + ":";
    for (auto& tok : rest) {
        if (tok.compare(0, prefix.size(), prefix) == 0)
            d.filter_params.push_back(tok.substr(prefix.size()));
        else
            d.tool_options.push_back(std::move(tok));
    }
    return d;
}

Document parse(std::string_view source, std::string_view source_path)
{
    Document doc;
    doc.source_path = std::string(source_path);
    std::string stem = page_stem(source_path);
    auto lines = split_lines(source);
    std::optional<std::string> first_h1;
    int ordinal = 0;

    std::size_t i = 0;
    while (i < lines.size()) {
        std::string_view line = lines[i];
        std::string_view t = rtrim(line);
        int line_no = static_cast<int>(i) + 1;
        int level = 0;

        if (fence_line(t)) {
            std::size_t j = i + 1;
            while (j < lines.size() && rtrim(lines[j]) != fence) ++j;
            if (j == lines.size()) throw ParseError(ParseErrorKind::unclosed_fence, line_no, "fence is never closed");
            std::string body;
            for (std::size_t k = i + 1; k < j; ++k) {
                body += lines[k];
                body += '\n';
            }
            CodeCell cell = classify_cell(t.substr(fence.size()), body, line_no);
            cell.cell_id = stem + "-cell-" + std::to_string(++ordinal);
            cell.span = {line_no, static_cast<int>(j) + 1};
            doc.blocks.emplace_back(std::move(cell));
            i = j + 1;
        } else if (title_line(t)) {
            Heading h{1, std::string(trim(t.substr(6))), true, {line_no, line_no}};
            if (!doc.title) doc.title = h.text;
            doc.blocks.emplace_back(std::move(h));
            ++i;
        } else if (heading_level(t, level)) {
            Heading h{level, std::string(trim(t.substr(static_cast<std::size_t>(level)))), false, {line_no, line_no}};
            if (level == 1 && !first_h1) first_h1 = h.text;
            doc.blocks.emplace_back(std::move(h));
            ++i;
        } else if (directive_line(t)) {
            FilterDirective d = parse_directive(t, line_no);
            d.span = {line_no, line_no};
            doc.blocks.emplace_back(std::move(d));
            ++i;
        } else {
            Prose p;
            p.span.first = line_no;
            std::size_t j = i;
            while (j < lines.size()) {
                std::string_view u = rtrim(lines[j]);
                int lv = 0;
                if (j > i && (fence_line(u) || title_line(u) || heading_level(u, lv) || directive_line(u))) break;
                if (j > i) p.text += '\n';
                p.text += lines[j];
                ++j;
            }
            p.span.last = static_cast<int>(j);
            doc.blocks.emplace_back(std::move(p));
            i = j;
        }
    }
    if (!doc.title) doc.title = first_h1;
    return doc;
}

} // namespace ald::doc
