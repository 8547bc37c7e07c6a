#include "ald/doc/document.hpp"

namespace ald::doc {

std::string to_string(CellKind kind)
{
    switch (kind) {
    case CellKind::program: return "program";
    case CellKind::query: return "query";
    case CellKind::static_: return "static";
    case CellKind::exercise: return "exercise";
    }
    return "static";
}

LineSpan span_of(const Block& block)
{
    return std::visit([](const auto& b) { return b.span; }, block);
}

std::vector<const CodeCell*> Document::cells() const
{
    std::vector<const CodeCell*> out;
    for (const auto& b : blocks)
        if (const auto* c = std::get_if<CodeCell>(&b)) out.push_back(c);
    return out;
}

std::string format_directive(const FilterDirective& d)
{
    std::vector<std::string> tokens = d.tool_options;
    tokens.push_back("filter=" + d.filter_name);
    for (const auto& p : d.filter_params) tokens.push_back(d.filter_name + ":" + p);
    if (!d.tool_id.empty()) tokens.push_back("tool=" + d.tool_id);
    std::string out = "@exfilter{" + d.code_file + "}{";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ',';
        out += tokens[i];
    }
    return out + "}";
}

namespace {

struct Serializer {
    std::string& out;

    void operator()(const Heading& h)
    {
        out += h.title_command ? "\\title" : std::string(static_cast<std::size_t>(h.level), '#');
        out += ' ';
        out += h.text;
        out += '\n';
    }
    void operator()(const Prose& p)
    {
        out += p.text;
        out += '\n';
    }
    void operator()(const CodeCell& c)
    {
        out += "```" + c.fence_info + "\n";
        out += c.body;
        out += "```\n";
    }
    void operator()(const FilterDirective& d) { out += format_directive(d) + "\n"; }
};

} // namespace

std::string serialize(const Document& doc)
{
    std::string out;
    for (const auto& b : doc.blocks) std::visit(Serializer{out}, b);
    return out;
}

std::string page_stem(std::string_view source_path)
{
    auto slash = source_path.find_last_of('/');
    std::string_view name = slash == std::string_view::npos ? source_path : source_path.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot != std::string_view::npos && dot > 0) name = name.substr(0, dot);
    return std::string(name);
}

} // namespace ald::doc
