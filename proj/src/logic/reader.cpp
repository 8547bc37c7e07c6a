#include "ald/logic/reader.hpp"

#include <cctype>
#include <limits>
#include <optional>

#include "operators.hpp"

namespace ald::logic {
namespace {

using detail::infix_op;
using detail::is_alnum_char;
using detail::is_symbol_char;
using detail::OpType;
using detail::prefix_op;

enum class Tok { Name, Var, Int, Punct, End, Eof };

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    std::int64_t value = 0;
    int line = 1;
    bool layout_before = false;
    bool quoted = false;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next()
    {
        Token tok;
        tok.layout_before = skip_layout();
        tok.line = line_;
        if (pos_ >= src_.size()) {
            // Errors at end of input point at the last token.
            tok.kind = Tok::Eof;
            tok.line = last_line_;
            return tok;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number(tok);
        } else if (c == '_' || std::isupper(static_cast<unsigned char>(c))) {
            tok.kind = Tok::Var;
            tok.text = take_while(is_alnum_char);
        } else if (std::islower(static_cast<unsigned char>(c))) {
            tok.kind = Tok::Name;
            tok.text = take_while(is_alnum_char);
        } else if (c == '\'') {
            tok.kind = Tok::Name;
            tok.quoted = true;
            tok.text = lex_quoted();
        } else if (c == '"' || c == '`') {
            throw SyntaxError(line_, "strings are not supported");
        } else if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' || c == ','
                   || c == '|') {
            tok.kind = Tok::Punct;
            tok.text = std::string(1, c);
            ++pos_;
        } else if (c == '!' || c == ';') {
            tok.kind = Tok::Name;
            tok.text = std::string(1, c);
            ++pos_;
        } else if (is_symbol_char(c)) {
            std::size_t start = pos_;
            std::string run = take_while(is_symbol_char);
            if (run == "." && at_end_boundary()) {
                tok.kind = Tok::End;
                tok.text = ".";
            } else if (run.size() > 1 && run.back() == '.' && at_end_boundary()) {
                // "a+." style: give back the final '.'
                pos_ = start + run.size() - 1;
                tok.kind = Tok::Name;
                tok.text = run.substr(0, run.size() - 1);
            } else {
                tok.kind = Tok::Name;
                tok.text = std::move(run);
            }
        } else {
            throw SyntaxError(line_, std::string("unexpected character '") + c + "'");
        }
        last_line_ = line_;
        return tok;
    }

private:
    bool at_end_boundary() const
    {
        if (pos_ >= src_.size()) return true;
        char c = src_[pos_];
        return std::isspace(static_cast<unsigned char>(c)) || c == '%';
    }

    template <class Pred>
    std::string take_while(Pred pred)
    {
        std::size_t start = pos_;
        while (pos_ < src_.size() && pred(src_[pos_])) ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    bool skip_layout()
    {
        bool any = false;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
                any = true;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                any = true;
            } else if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                any = true;
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                int open_line = line_;
                pos_ += 2;
                while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) {
                    if (src_[pos_] == '\n') ++line_;
                    ++pos_;
                }
                if (pos_ + 1 >= src_.size()) throw SyntaxError(open_line, "unterminated block comment");
                pos_ += 2;
                any = true;
            } else {
                break;
            }
        }
        return any;
    }

    void lex_number(Token& tok)
    {
        tok.kind = Tok::Int;
        if (src_[pos_] == '0' && pos_ + 2 < src_.size() && src_[pos_ + 1] == '\'') {
            char ch = src_[pos_ + 2];
            if (ch == '\\' && pos_ + 3 < src_.size()) {
                tok.value = escape_char(src_[pos_ + 3]);
                pos_ += 4;
            } else {
                tok.value = static_cast<unsigned char>(ch);
                pos_ += 3;
            }
            tok.text = std::to_string(tok.value);
            return;
        }
        tok.text = take_while([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
        std::int64_t v = 0;
        for (char d : tok.text) {
            if (v > (std::numeric_limits<std::int64_t>::max() - (d - '0')) / 10)
                throw SyntaxError(line_, "integer too large: " + tok.text);
            v = v * 10 + (d - '0');
        }
        tok.value = v;
    }

    char escape_char(char e) const
    {
        switch (e) {
        case 'n': return '\n';
        case 't': return '\t';
        case '\\': return '\\';
        case '\'': return '\'';
        case '"': return '"';
        case '`': return '`';
        case '0': return '\0';
        default: throw SyntaxError(line_, std::string("unknown escape \\") + e);
        }
    }

    std::string lex_quoted()
    {
        int open_line = line_;
        ++pos_;
        std::string out;
        while (true) {
            if (pos_ >= src_.size()) throw SyntaxError(open_line, "unterminated quoted atom");
            char c = src_[pos_++];
            if (c == '\'') {
                if (pos_ < src_.size() && src_[pos_] == '\'') {
                    out += '\'';
                    ++pos_;
                    continue;
                }
                return out;
            }
            if (c == '\\') {
                if (pos_ >= src_.size()) throw SyntaxError(open_line, "unterminated quoted atom");
                out += escape_char(src_[pos_++]);
                continue;
            }
            if (c == '\n') ++line_;
            out += c;
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int last_line_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { advance(); }

    bool at_eof() const { return tok_.kind == Tok::Eof; }
    const Token& peek() const { return tok_; }

    ReadResult read_clause(bool require_end)
    {
        anon_ = 0;
        int line = tok_.line;
        int prec = 0;
        Term t = parse(1200, prec);
        if (tok_.kind == Tok::End) {
            advance();
        } else if (tok_.kind == Tok::Eof && require_end) {
            throw SyntaxError(tok_.line, "missing '.' at end of clause");
        } else if (tok_.kind != Tok::Eof) {
            throw SyntaxError(tok_.line, "operator expected, got " + describe(tok_));
        }
        return {std::move(t), line};
    }

private:
    void advance() { tok_ = lexer_.next(); }

    static std::string describe(const Token& t)
    {
        switch (t.kind) {
        case Tok::Eof: return "end of input";
        case Tok::End: return "'.'";
        default: return "'" + t.text + "'";
        }
    }

    void expect_punct(const char* p)
    {
        if (tok_.kind != Tok::Punct || tok_.text != p)
            throw SyntaxError(tok_.line, std::string("expected '") + p + "', got " + describe(tok_));
        advance();
    }

    bool is_punct(const char* p) const { return tok_.kind == Tok::Punct && tok_.text == p; }

    // True when the token after the current one is an adjacent '('.
    bool functional_next() const
    {
        Lexer copy = lexer_;
        try {
            Token n = copy.next();
            return n.kind == Tok::Punct && n.text == "(" && !n.layout_before;
        } catch (const SyntaxError&) {
            return false;
        }
    }

    bool can_start_term(const Token& t) const
    {
        switch (t.kind) {
        case Tok::Int:
        case Tok::Var:
            return true;
        case Tok::Punct:
            return t.text == "(" || t.text == "[" || t.text == "{";
        case Tok::Name:
            if (t.quoted) return true;
            return !infix_op(t.text) || prefix_op(t.text).has_value() || functional_next();
        default:
            return false;
        }
    }

    Term parse(int max_prec, int& out_prec)
    {
        int left_prec = 0;
        Term left = parse_primary(max_prec, left_prec);
        while (true) {
            std::string name;
            if (tok_.kind == Tok::Name && !tok_.quoted) {
                name = tok_.text;
            } else if (is_punct(",")) {
                name = ",";
            } else {
                break;
            }
            auto op = infix_op(name);
            if (!op) break;
            int p = op->priority;
            int left_max = op->type == OpType::yfx ? p : p - 1;
            int right_max = op->type == OpType::xfy ? p : p - 1;
            if (p > max_prec || left_prec > left_max) break;
            advance();
            int right_prec = 0;
            Term right = parse(right_max, right_prec);
            left = Term::compound(name, {std::move(left), std::move(right)});
            left_prec = p;
        }
        out_prec = left_prec;
        return left;
    }

    Term parse_primary(int max_prec, int& out_prec)
    {
        out_prec = 0;
        Token t = tok_;
        switch (t.kind) {
        case Tok::Int:
            advance();
            return Term::integer(t.value);
        case Tok::Var:
            advance();
            if (t.text == "_") return Term::var("_G" + std::to_string(++anon_));
            return Term::var(t.text);
        case Tok::Punct:
            if (t.text == "(") {
                advance();
                int inner = 0;
                Term inside = parse(1200, inner);
                expect_punct(")");
                return inside;
            }
            if (t.text == "[") {
                advance();
                if (is_punct("]")) {
                    advance();
                    return name_term("[]", t);
                }
                return parse_list_items();
            }
            if (t.text == "{") {
                advance();
                if (is_punct("}")) {
                    advance();
                    return name_term("{}", t);
                }
                int inner = 0;
                Term inside = parse(1200, inner);
                expect_punct("}");
                return Term::compound("{}", {std::move(inside)});
            }
            throw SyntaxError(t.line, "unexpected " + describe(t));
        case Tok::Name:
            advance();
            return parse_name(t, max_prec, out_prec);
        default:
            throw SyntaxError(t.line, "unexpected " + describe(t));
        }
    }

    // Atom or compound after its name token has been consumed.
    Term name_term(const std::string& name, const Token& name_tok)
    {
        if (is_punct("(") && !tok_.layout_before) {
            advance();
            std::vector<Term> args;
            while (true) {
                int p = 0;
                args.push_back(parse(999, p));
                if (is_punct(",")) {
                    advance();
                    continue;
                }
                expect_punct(")");
                break;
            }
            (void)name_tok;
            return Term::compound(name, std::move(args));
        }
        return Term::atom(name);
    }

    Term parse_name(const Token& t, int max_prec, int& out_prec)
    {
        if (is_punct("(") && !tok_.layout_before) return name_term(t.text, t);
        if (!t.quoted && t.text == "-" && tok_.kind == Tok::Int && !tok_.layout_before) {
            std::int64_t v = tok_.value;
            advance();
            return Term::integer(-v);
        }
        if (!t.quoted) {
            if (auto op = prefix_op(t.text); op && can_start_term(tok_)) {
                int p = op->priority;
                if (p > max_prec) throw SyntaxError(t.line, "operator priority clash at '" + t.text + "'");
                int arg_max = op->type == OpType::fy ? p : p - 1;
                int arg_prec = 0;
                Term arg = parse(arg_max, arg_prec);
                out_prec = p;
                return Term::compound(t.text, {std::move(arg)});
            }
        }
        return Term::atom(t.text);
    }

    Term parse_list_items()
    {
        std::vector<Term> items;
        std::optional<Term> tail;
        while (true) {
            int p = 0;
            items.push_back(parse(999, p));
            if (is_punct(",")) {
                advance();
                continue;
            }
            if (is_punct("|")) {
                advance();
                tail = parse(999, p);
            }
            expect_punct("]");
            break;
        }
        return Term::list(std::move(items), std::move(tail));
    }

    Lexer lexer_;
    Token tok_;
    int anon_ = 0;
};

} // namespace

std::vector<ReadResult> read_terms(std::string_view text)
{
    Parser parser(text);
    std::vector<ReadResult> out;
    while (!parser.at_eof()) out.push_back(parser.read_clause(true));
    return out;
}

Term read_term(std::string_view text)
{
    Parser parser(text);
    if (parser.at_eof()) throw SyntaxError(1, "empty term");
    ReadResult r = parser.read_clause(false);
    if (!parser.at_eof()) throw SyntaxError(parser.peek().line, "unexpected text after term");
    return std::move(r.term);
}

Term parse_query(std::string_view text)
{
    Term t = read_term(text);
    if (t.is("?-", 1)) return t.arg(0);
    return t;
}

} // namespace ald::logic
