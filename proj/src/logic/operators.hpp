#pragma once

#include <optional>
#include <string_view>

namespace ald::logic::detail {

enum class OpType { xfx, xfy, yfx, fy, fx };

struct OpDef {
    int priority;
    OpType type;
};

// Fixed operator table shared by the reader and the writer.
inline std::optional<OpDef> infix_op(std::string_view name)
{
    struct Entry {
        std::string_view name;
        OpDef def;
    };
    static constexpr Entry table[] = {
        {":-", {1200, OpType::xfx}},
        {"=>", {1050, OpType::xfx}},
        {",", {1000, OpType::xfy}},
        {"=", {700, OpType::xfx}},
        {"is", {700, OpType::xfx}},
        {"<", {700, OpType::xfx}},
        {">", {700, OpType::xfx}},
        {"=<", {700, OpType::xfx}},
        {">=", {700, OpType::xfx}},
        {"=:=", {700, OpType::xfx}},
        {"=\\=", {700, OpType::xfx}},
        {"+", {500, OpType::yfx}},
        {"-", {500, OpType::yfx}},
        {"*", {400, OpType::yfx}},
        {"/", {400, OpType::yfx}},
        {"//", {400, OpType::yfx}},
        {":", {200, OpType::xfy}},
    };
    for (const auto& e : table) {
        if (e.name == name) return e.def;
    }
    return std::nullopt;
}

inline std::optional<OpDef> prefix_op(std::string_view name)
{
    if (name == ":-" || name == "?-") return OpDef{1200, OpType::fx};
    if (name == "pred" || name == "test") return OpDef{1150, OpType::fx};
    if (name == "-") return OpDef{200, OpType::fy};
    return std::nullopt;
}

inline bool is_symbol_char(char c)
{
    switch (c) {
    case '+': case '-': case '*': case '/': case '\\': case '^': case '<':
    case '>': case '=': case '~': case ':': case '.': case '?': case '@':
    case '#': case '&': case '$':
        return true;
    default:
        return false;
    }
}

inline bool is_alnum_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

} // namespace ald::logic::detail
