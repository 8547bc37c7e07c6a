#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ald::filters {

enum class FilterErrorKind { unknown_filter, bad_params };

class FilterError : public std::runtime_error {
public:
    FilterError(FilterErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    FilterErrorKind kind() const { return kind_; }

private:
    FilterErrorKind kind_;
};

struct FilterSpec {
    std::string name;
    std::vector<std::string> params;
};

using FilterFn = std::function<std::string(std::string_view text, const std::vector<std::string>& params)>;

/// Named projections over tool output. Built-ins: identity, warn_error,
/// regex, head, answers, pred_props. Later registrations shadow earlier ones.
class FilterRegistry {
public:
    FilterRegistry();

    /// Throws std::invalid_argument for an empty name.
    void add(const std::string& name, FilterFn fn);
    bool contains(const std::string& name) const { return filters_.count(name) != 0; }

    /// Throws FilterError.
    std::string apply(const FilterSpec& spec, std::string_view text) const;

    /// Like apply, but first picks the stream named by a `stream=` param
    /// (stdout, stderr or both; stdout when absent).
    std::string apply(const FilterSpec& spec, std::string_view out, std::string_view err) const;

private:
    std::map<std::string, FilterFn> filters_;
};

/// Lines of `text` without their '\n'; a final newline does not start a
/// new line.
std::vector<std::string_view> split_lines(std::string_view text);

/// Joins selected lines. The result ends in '\n' when `text_had_newline`
/// and at least one line is kept.
std::string join_lines(const std::vector<std::string_view>& lines, bool text_had_newline);

/// True for a line that opens a WARNING or ERROR message block.
bool opens_message(std::string_view line);

} // namespace ald::filters
