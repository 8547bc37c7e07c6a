#include <json.hpp>

#include "ald/site/builder.hpp"

namespace ald::site {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string inline_markup(std::string_view text)
{
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '`') {
            auto end = text.find('`', i + 1);
            if (end != std::string_view::npos) {
                out += "<code>" + html_escape(text.substr(i + 1, end - i - 1)) + "</code>";
                i = end + 1;
                continue;
            }
        }
        if (text.substr(i, 2) == "**") {
            auto end = text.find("**", i + 2);
            if (end != std::string_view::npos && end > i + 2) {
                out += "<strong>" + inline_markup(text.substr(i + 2, end - i - 2)) + "</strong>";
                i = end + 2;
                continue;
            }
        }
        out += html_escape(text.substr(i, 1));
        ++i;
    }
    return out;
}

std::optional<std::string_view> list_item(std::string_view line)
{
    std::string_view t = trim(line);
    if (t.size() >= 2 && (t[0] == '-' || t[0] == '*') && t[1] == ' ') return trim(t.substr(2));
    return std::nullopt;
}

void render_prose(std::string& out, const std::string& text)
{
    std::vector<std::string_view> para;
    std::vector<std::string_view> items;
    auto flush_para = [&] {
        if (para.empty()) return;
        out += "<p>";
        for (std::size_t i = 0; i < para.size(); ++i) {
            if (i) out += '\n';
            out += inline_markup(trim(para[i]));
        }
        out += "</p>\n";
        para.clear();
    };
    auto flush_items = [&] {
        if (items.empty()) return;
        out += "<ul>\n";
        for (auto item : items) out += "<li>" + inline_markup(item) + "</li>\n";
        out += "</ul>\n";
        items.clear();
    };
    std::string_view rest = text;
    while (true) {
        auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        if (trim(line).empty()) {
            flush_para();
            flush_items();
        } else if (auto item = list_item(line)) {
            flush_para();
            items.push_back(*item);
        } else {
            flush_items();
            para.push_back(line);
        }
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
    }
    flush_para();
    flush_items();
}

std::string query_goal(std::string_view text)
{
    std::string_view t = text;
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.remove_suffix(1);
    if (t.substr(0, 2) == "?-") t.remove_prefix(2);
    if (!t.empty() && t.back() == '.') t.remove_suffix(1);
    return std::string(trim(t));
}

void render_cell(std::string& out, const doc::CodeCell& cell)
{
    std::string kind = doc::to_string(cell.kind);
    out += "<div class=\"ald-cell ald-" + kind + "\" data-cell-id=\"" + html_escape(cell.cell_id) + "\" data-kind=\""
         + kind + "\" data-engine=\"" + html_escape(cell.engine_id) + "\">\n";
    out += "<pre class=\"ald-code\"><code>" + html_escape(cell.visible_text) + "</code></pre>\n";
    out += "</div>\n";
}

} // namespace

std::string html_escape(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string script_safe(std::string json)
{
    std::string out;
    out.reserve(json.size());
    for (char c : json) {
        if (c == '<') out += "\\u003c";
        else if (c == '>') out += "\\u003e";
        else if (c == '&') out += "\\u0026";
        else out += c;
    }
    return out;
}

std::string cell_manifest(const doc::Document& doc)
{
    ordered_json cells = ordered_json::array();
    std::string program_cell;
    for (const doc::CodeCell* c : doc.cells()) {
        ordered_json j{{"cell_id", c->cell_id},
                       {"kind", doc::to_string(c->kind)},
                       {"engine_id", c->engine_id},
                       {"initial_text", c->visible_text}};
        if (c->checker) j["checker"] = *c->checker;
        if (c->kind == doc::CellKind::query) {
            j["query"] = query_goal(c->visible_text);
            if (!program_cell.empty()) j["program_cell"] = program_cell;
        }
        if (c->kind == doc::CellKind::program || c->kind == doc::CellKind::exercise) program_cell = c->cell_id;
        cells.push_back(std::move(j));
    }
    ordered_json m{{"protocol_version", protocol_version}, {"page", doc::page_stem(doc.source_path)}, {"cells", cells}};
    return m.dump();
}

std::string render_page(const PageInput& page)
{
    const doc::Document& doc = *page.document;
    std::string stem = doc::page_stem(doc.source_path);
    std::string out = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    out += "<title>" + html_escape(doc.title.value_or(stem)) + "</title>\n";
    out += "<link rel=\"stylesheet\" href=\"assets/ald.css\">\n</head>\n<body>\n";
    out += "<main class=\"ald-page\" data-page=\"" + html_escape(stem) + "\">\n";
    std::size_t next_filter = 0;
    for (const auto& block : doc.blocks) {
        if (auto* h = std::get_if<doc::Heading>(&block)) {
            std::string tag = "h" + std::to_string(std::clamp(h->level, 1, 6));
            out += "<" + tag + (h->title_command ? " class=\"ald-title\"" : "") + ">" + inline_markup(h->text) + "</"
                 + tag + ">\n";
        } else if (auto* p = std::get_if<doc::Prose>(&block)) {
            render_prose(out, p->text);
        } else if (auto* c = std::get_if<doc::CodeCell>(&block)) {
            render_cell(out, *c);
        } else if (auto* d = std::get_if<doc::FilterDirective>(&block)) {
            const std::string text = next_filter < page.filter_outputs.size() ? page.filter_outputs[next_filter] : "";
            ++next_filter;
            out += "<pre class=\"ald-filter-output\" data-source=\"" + html_escape(d->code_file) + "\" data-filter=\""
                 + html_escape(d->filter_name) + "\">" + html_escape(text) + "</pre>\n";
        }
    }
    out += "</main>\n";
    out += "<script type=\"application/json\" id=\"ald-manifest\">" + script_safe(cell_manifest(doc)) + "</script>\n";
    out += "<script src=\"assets/ald-runtime.js\" defer></script>\n";
    out += "</body>\n</html>\n";
    return out;
}

std::string render_index(const std::vector<const doc::Document*>& pages)
{
    std::string out = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    out += "<title>Contents</title>\n<link rel=\"stylesheet\" href=\"assets/ald.css\">\n</head>\n<body>\n";
    out += "<main class=\"ald-index\">\n<h1>Contents</h1>\n<ul>\n";
    for (const doc::Document* d : pages) {
        std::string stem = doc::page_stem(d->source_path);
        out += "<li><a href=\"" + html_escape(stem) + ".html\">" + html_escape(d->title.value_or(stem)) + "</a></li>\n";
    }
    out += "</ul>\n</main>\n</body>\n</html>\n";
    return out;
}

} // namespace ald::site
