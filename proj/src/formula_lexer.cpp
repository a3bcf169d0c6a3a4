#include "ssaudit/formula.hpp"

#include <cctype>

namespace ssaudit::formula {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_word_start(char c) {
    return is_alpha(c) || c == '_' || c == '\\' || c == '$' || static_cast<unsigned char>(c) >= 0x80;
}
bool is_word_char(char c) {
    return is_word_start(c) || is_digit(c) || c == '.' || c == '?';
}

constexpr std::string_view kErrorSpellings[] = {"#DIV/0!", "#VALUE!", "#NULL!", "#NAME?", "#REF!", "#NUM!", "#N/A"};

// "$AB" / "AB": a bare column (1..3 letters, within the grid).
bool is_column_word(std::string_view w) {
    if (!w.empty() && w.front() == '$') w.remove_prefix(1);
    if (w.empty() || w.size() > 3) return false;
    for (char c : w) {
        if (!is_alpha(c)) return false;
    }
    return column_from_letters(w) != 0;
}

// "$12" / "12": a bare row.
bool is_row_word(std::string_view w) {
    if (!w.empty() && w.front() == '$') w.remove_prefix(1);
    if (w.empty() || w.size() > 7 || w.front() == '0') return false;
    for (char c : w) {
        if (!is_digit(c)) return false;
    }
    return std::stoul(std::string(w)) <= kMaxRows;
}

bool is_cell_word(std::string_view w) {
    std::size_t i = 0;
    if (i < w.size() && w[i] == '$') ++i;
    std::size_t letters = i;
    while (i < w.size() && is_alpha(w[i])) ++i;
    if (i == letters) return false;
    std::string_view col = w.substr(letters, i - letters);
    if (i < w.size() && w[i] == '$') ++i;
    return is_column_word(col) && is_row_word(w.substr(i)) && w.substr(i).front() != '$';
}

std::size_t word_end(std::string_view s, std::size_t i) {
    while (i < s.size() && is_word_char(s[i])) ++i;
    return i;
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : s_(text) {}

    std::vector<Token> run() {
        while (true) {
            while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
            if (pos_ >= s_.size()) break;
            lex_one();
        }
        return std::move(out_);
    }

private:
    void emit(TokenKind kind, std::size_t begin, std::size_t end) {
        out_.push_back(Token{kind, s_.substr(begin, end - begin), Span{begin, end}});
        pos_ = end;
    }

    [[noreturn]] void fail(std::size_t at, const std::string& msg) { throw LexError(at, msg); }

    void lex_one() {
        const std::size_t start = pos_;
        const char c = s_[pos_];

        if (c == '"') return lex_string();
        if (c == '#') return lex_error_literal();
        if (c == '\'') return lex_quoted_prefix();
        if (c == '[') return lex_bracket();
        if (is_digit(c) || (c == '.' && pos_ + 1 < s_.size() && is_digit(s_[pos_ + 1]))) {
            if (try_row_range()) return;
            return lex_number();
        }
        if (is_word_start(c)) return lex_word();

        switch (c) {
            case '(': return emit(TokenKind::OpenParen, start, start + 1);
            case ')': return emit(TokenKind::CloseParen, start, start + 1);
            case '{': return emit(TokenKind::OpenBrace, start, start + 1);
            case '}': return emit(TokenKind::CloseBrace, start, start + 1);
            case ',':
            case ';': return emit(TokenKind::ArgSep, start, start + 1);
            case ':': return emit(TokenKind::RangeSep, start, start + 1);
            case '%': return emit(TokenKind::Percent, start, start + 1);
            case '+':
            case '-':
            case '*':
            case '/':
            case '^':
            case '&':
            case '=': return emit(TokenKind::Operator, start, start + 1);
            case '<':
                if (pos_ + 1 < s_.size() && (s_[pos_ + 1] == '=' || s_[pos_ + 1] == '>'))
                    return emit(TokenKind::Operator, start, start + 2);
                return emit(TokenKind::Operator, start, start + 1);
            case '>':
                if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '=') return emit(TokenKind::Operator, start, start + 2);
                return emit(TokenKind::Operator, start, start + 1);
            case '!':
                // "[1]!Name": workbook-level name in an external book.
                if (!out_.empty() && out_.back().kind == TokenKind::ExternalPrefix && out_.back().span.end == start)
                    return emit(TokenKind::SheetPrefix, start, start + 1);
                break;
            default: break;
        }
        fail(start, std::string("unexpected character '") + c + "'");
    }

    void lex_string() {
        std::size_t i = pos_ + 1;
        while (true) {
            if (i >= s_.size()) fail(pos_, "unterminated string literal");
            if (s_[i] == '"') {
                if (i + 1 < s_.size() && s_[i + 1] == '"') {
                    i += 2;
                    continue;
                }
                break;
            }
            ++i;
        }
        emit(TokenKind::String, pos_, i + 1);
    }

    void lex_error_literal() {
        for (std::string_view e : kErrorSpellings) {
            if (pos_ + e.size() <= s_.size() && iequals(s_.substr(pos_, e.size()), e))
                return emit(TokenKind::ErrorLiteral, pos_, pos_ + e.size());
        }
        fail(pos_, "unknown error literal");
    }

    void lex_quoted_prefix() {
        std::size_t i = pos_ + 1;
        while (true) {
            if (i >= s_.size()) fail(pos_, "unterminated quoted sheet name");
            if (s_[i] == '\'') {
                if (i + 1 < s_.size() && s_[i + 1] == '\'') {
                    i += 2;
                    continue;
                }
                break;
            }
            ++i;
        }
        if (i + 1 >= s_.size() || s_[i + 1] != '!') fail(pos_, "quoted sheet name must be followed by '!'");
        emit(TokenKind::SheetPrefix, pos_, i + 2);
    }

    // Consumes a balanced [...] group starting at `from`; returns one past ']'.
    std::size_t bracket_group_end(std::size_t from) {
        int depth = 0;
        for (std::size_t i = from; i < s_.size(); ++i) {
            if (s_[i] == '[') ++depth;
            if (s_[i] == ']' && --depth == 0) return i + 1;
        }
        fail(from, "unterminated '['");
    }

    void lex_bracket() {
        std::size_t end = bracket_group_end(pos_);
        std::string_view inner = s_.substr(pos_ + 1, end - pos_ - 2);
        bool structured = inner.empty() || inner.find_first_of("[#@") != std::string_view::npos;
        emit(structured ? TokenKind::StructuredRef : TokenKind::ExternalPrefix, pos_, end);
    }

    bool try_row_range() {
        std::size_t a_end = word_end(s_, pos_);
        std::string_view a = s_.substr(pos_, a_end - pos_);
        if (!is_row_word(a) || a_end >= s_.size() || s_[a_end] != ':') return false;
        std::size_t b_begin = a_end + 1;
        std::size_t b_end = word_end(s_, b_begin);
        if (!is_row_word(s_.substr(b_begin, b_end - b_begin))) return false;
        emit(TokenKind::CellRef, pos_, a_end);
        emit(TokenKind::RangeSep, a_end, b_begin);
        emit(TokenKind::CellRef, b_begin, b_end);
        return true;
    }

    void lex_number() {
        std::size_t i = pos_;
        while (i < s_.size() && is_digit(s_[i])) ++i;
        if (i < s_.size() && s_[i] == '.') {
            ++i;
            while (i < s_.size() && is_digit(s_[i])) ++i;
        }
        if (i < s_.size() && (s_[i] == 'e' || s_[i] == 'E')) {
            std::size_t j = i + 1;
            if (j < s_.size() && (s_[j] == '+' || s_[j] == '-')) ++j;
            if (j < s_.size() && is_digit(s_[j])) {
                while (j < s_.size() && is_digit(s_[j])) ++j;
                i = j;
            } else {
                fail(pos_, "malformed exponent");
            }
        }
        if (i < s_.size() && (is_word_char(s_[i]) || s_[i] == '.')) fail(pos_, "malformed number");
        emit(TokenKind::Number, pos_, i);
    }

    void lex_word() {
        const std::size_t start = pos_;
        std::size_t end = word_end(s_, start);
        std::string_view w = s_.substr(start, end - start);
        const bool has_dollar = w.find('$') != std::string_view::npos;
        const char next = end < s_.size() ? s_[end] : '\0';

        if (next == '!' && !has_dollar) return emit(TokenKind::SheetPrefix, start, end + 1);

        if (next == ':' && !has_dollar) {
            // 3-D prefix "Sheet1:Sheet3!"
            std::size_t b_end = word_end(s_, end + 1);
            if (b_end > end + 1 && b_end < s_.size() && s_[b_end] == '!')
                return emit(TokenKind::SheetPrefix, start, b_end + 1);
        }

        if (next == '[' && !has_dollar) return emit(TokenKind::StructuredRef, start, bracket_group_end(end));

        if (next != '(' && is_cell_word(w)) return emit(TokenKind::CellRef, start, end);

        if (next == ':' && is_column_word(w)) {
            std::size_t b_begin = end + 1;
            std::size_t b_end = word_end(s_, b_begin);
            std::string_view b = s_.substr(b_begin, b_end - b_begin);
            bool b_followed_by_call = b_end < s_.size() && s_[b_end] == '(';
            if (is_column_word(b) && !b_followed_by_call) {
                emit(TokenKind::CellRef, start, end);
                emit(TokenKind::RangeSep, end, b_begin);
                emit(TokenKind::CellRef, b_begin, b_end);
                return;
            }
        }
        if (next == ':' && is_row_word(w)) {
            if (try_row_range()) return;
        }

        if (has_dollar) fail(start, "malformed reference");
        if (next != '(' && (iequals(w, "TRUE") || iequals(w, "FALSE"))) return emit(TokenKind::Boolean, start, end);
        emit(TokenKind::Identifier, start, end);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::vector<Token> out_;
};

}  // namespace

LexError::LexError(std::size_t offset, const std::string& message)
    : std::runtime_error("LexError at " + std::to_string(offset) + ": " + message), offset_(offset) {}

std::string_view token_kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::Number: return "Number";
        case TokenKind::String: return "String";
        case TokenKind::Boolean: return "Boolean";
        case TokenKind::ErrorLiteral: return "ErrorLiteral";
        case TokenKind::Identifier: return "Identifier";
        case TokenKind::CellRef: return "CellRef";
        case TokenKind::RangeSep: return "RangeSep";
        case TokenKind::ArgSep: return "ArgSep";
        case TokenKind::Operator: return "Operator";
        case TokenKind::OpenParen: return "OpenParen";
        case TokenKind::CloseParen: return "CloseParen";
        case TokenKind::OpenBrace: return "OpenBrace";
        case TokenKind::CloseBrace: return "CloseBrace";
        case TokenKind::SheetPrefix: return "SheetPrefix";
        case TokenKind::ExternalPrefix: return "ExternalPrefix";
        case TokenKind::Percent: return "Percent";
        case TokenKind::StructuredRef: return "StructuredRef";
    }
    return "?";
}

std::vector<Token> tokenize(std::string_view formula_text) { return Lexer(formula_text).run(); }

}  // namespace ssaudit::formula
