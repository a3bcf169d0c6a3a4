#include "ssaudit/formula.hpp"

#include <cctype>
#include <charconv>

namespace ssaudit::formula {

namespace {

constexpr int kMaxDepth = 200;

NodePtr make(auto&& data, Span span) {
    auto n = std::make_unique<Node>();
    n->data = std::forward<decltype(data)>(data);
    n->span = span;
    return n;
}

double parse_number(std::string_view lexeme) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), v);
    if (ec != std::errc() || ptr != lexeme.data() + lexeme.size()) {
        // from_chars rejects out-of-range magnitudes; fall back to strtod semantics.
        return std::strtod(std::string(lexeme).c_str(), nullptr);
    }
    return v;
}

std::string unquote_string(std::string_view lexeme) {
    std::string out;
    for (std::size_t i = 1; i + 1 < lexeme.size(); ++i) {
        out += lexeme[i];
        if (lexeme[i] == '"') ++i;
    }
    return out;
}

bool is_r1c1_name(std::string_view name) {
    std::string up = to_upper(name);
    if (up.empty() || up[0] != 'R') return false;
    std::size_t i = 1;
    while (i < up.size() && std::isdigit(static_cast<unsigned char>(up[i]))) ++i;
    if (i == up.size()) return i > 1 || up == "R";
    if (up[i] != 'C') return false;
    ++i;
    while (i < up.size() && std::isdigit(static_cast<unsigned char>(up[i]))) ++i;
    return i == up.size();
}

std::optional<BinaryOp> comparison_op(std::string_view s) {
    if (s == "=") return BinaryOp::Eq;
    if (s == "<>") return BinaryOp::Ne;
    if (s == "<") return BinaryOp::Lt;
    if (s == "<=") return BinaryOp::Le;
    if (s == ">") return BinaryOp::Gt;
    if (s == ">=") return BinaryOp::Ge;
    return std::nullopt;
}

class Parser {
public:
    Parser(std::string_view text, std::vector<Token> tokens) : text_(text), toks_(std::move(tokens)) {}

    NodePtr parse_all() {
        if (toks_.empty()) return nullptr;
        NodePtr root = parse_comparison();
        if (pos_ < toks_.size()) {
            const Token& t = toks_[pos_];
            if (t.kind == TokenKind::ArgSep) fail(t, {"operator", "end of formula"}, "union operator is not supported");
            fail(t, {"operator", "end of formula"}, "unexpected token");
        }
        return root;
    }

private:
    const Token* peek(std::size_t ahead = 0) const {
        return pos_ + ahead < toks_.size() ? &toks_[pos_ + ahead] : nullptr;
    }
    bool at(TokenKind kind, std::string_view lexeme = {}) const {
        const Token* t = peek();
        return t && t->kind == kind && (lexeme.empty() || t->lexeme == lexeme);
    }
    const Token& take() { return toks_[pos_++]; }

    [[noreturn]] void fail(const Token& t, std::vector<std::string> expected, const std::string& msg) const {
        throw ParseError(t.span.begin, std::move(expected), msg + " '" + std::string(t.lexeme) + "'");
    }
    [[noreturn]] void fail_eof(std::vector<std::string> expected) const {
        throw ParseError(text_.size(), std::move(expected), "unexpected end of formula");
    }
    const Token& expect(TokenKind kind, std::string_view what) {
        const Token* t = peek();
        if (!t) fail_eof({std::string(what)});
        if (t->kind != kind) fail(*t, {std::string(what)}, "expected " + std::string(what) + " before");
        return take();
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxDepth) {
                const Token* t = p.peek();
                throw ParseError(t ? t->span.begin : p.text_.size(), {}, "formula nests too deeply");
            }
        }
        ~DepthGuard() { --p.depth_; }
    };

    NodePtr binary(BinaryOp op, NodePtr l, NodePtr r) {
        Span s{l->span.begin, r->span.end};
        return make(Binary{op, std::move(l), std::move(r)}, s);
    }

    NodePtr parse_comparison() {
        DepthGuard guard(*this);
        NodePtr left = parse_concat();
        while (const Token* t = peek()) {
            if (t->kind != TokenKind::Operator) break;
            auto op = comparison_op(t->lexeme);
            if (!op) break;
            take();
            left = binary(*op, std::move(left), parse_concat());
        }
        return left;
    }

    NodePtr parse_concat() {
        NodePtr left = parse_additive();
        while (at(TokenKind::Operator, "&")) {
            take();
            left = binary(BinaryOp::Concat, std::move(left), parse_additive());
        }
        return left;
    }

    NodePtr parse_additive() {
        NodePtr left = parse_multiplicative();
        while (at(TokenKind::Operator, "+") || at(TokenKind::Operator, "-")) {
            BinaryOp op = take().lexeme == "+" ? BinaryOp::Add : BinaryOp::Sub;
            left = binary(op, std::move(left), parse_multiplicative());
        }
        return left;
    }

    NodePtr parse_multiplicative() {
        NodePtr left = parse_power();
        while (at(TokenKind::Operator, "*") || at(TokenKind::Operator, "/")) {
            BinaryOp op = take().lexeme == "*" ? BinaryOp::Mul : BinaryOp::Div;
            left = binary(op, std::move(left), parse_power());
        }
        return left;
    }

    NodePtr parse_power() {
        NodePtr left = parse_unary();
        while (at(TokenKind::Operator, "^")) {
            take();
            left = binary(BinaryOp::Pow, std::move(left), parse_unary());
        }
        return left;
    }

    NodePtr parse_unary() {
        DepthGuard guard(*this);
        if (at(TokenKind::Operator, "-") || at(TokenKind::Operator, "+")) {
            const Token& op = take();
            NodePtr operand = parse_unary();
            Span s{op.span.begin, operand->span.end};
            return make(Unary{op.lexeme == "-" ? UnaryOp::Minus : UnaryOp::Plus, std::move(operand)}, s);
        }
        NodePtr node = parse_primary();
        while (at(TokenKind::Percent)) {
            const Token& pct = take();
            Span s{node->span.begin, pct.span.end};
            node = make(Unary{UnaryOp::Percent, std::move(node)}, s);
        }
        return node;
    }

    NodePtr parse_primary() {
        const Token* t = peek();
        if (!t) fail_eof({"value", "reference", "function", "("});
        switch (t->kind) {
            case TokenKind::Number: {
                const Token& tok = take();
                return make(NumberLit{parse_number(tok.lexeme), std::string(tok.lexeme)}, tok.span);
            }
            case TokenKind::String: {
                const Token& tok = take();
                return make(StringLit{unquote_string(tok.lexeme)}, tok.span);
            }
            case TokenKind::Boolean: {
                const Token& tok = take();
                return make(BoolLit{iequals(tok.lexeme, "TRUE")}, tok.span);
            }
            case TokenKind::ErrorLiteral: {
                const Token& tok = take();
                return make(ErrorLit{*parse_error_code(tok.lexeme), {}}, tok.span);
            }
            case TokenKind::OpenParen: {
                const Token& open = take();
                NodePtr inner = parse_comparison();
                const Token& close = expect(TokenKind::CloseParen, ")");
                return make(Paren{std::move(inner)}, Span{open.span.begin, close.span.end});
            }
            case TokenKind::OpenBrace: return parse_array();
            case TokenKind::Identifier:
                if (const Token* n = peek(1); n && n->kind == TokenKind::OpenParen) return parse_call();
                return parse_reference();
            case TokenKind::CellRef:
            case TokenKind::SheetPrefix:
            case TokenKind::ExternalPrefix: return parse_reference();
            case TokenKind::StructuredRef: fail(*t, {}, "structured table references are not supported");
            default: fail(*t, {"value", "reference", "function", "("}, "unexpected token");
        }
    }

    NodePtr parse_call() {
        DepthGuard guard(*this);
        const Token& name = take();
        take();  // (
        FuncCall call{to_upper(name.lexeme), {}};
        if (at(TokenKind::CloseParen)) {
            const Token& close = take();
            return make(std::move(call), Span{name.span.begin, close.span.end});
        }
        while (true) {
            const Token* t = peek();
            if (!t) fail_eof({"argument", ")"});
            if (t->kind == TokenKind::ArgSep || t->kind == TokenKind::CloseParen) {
                call.args.push_back(make(Missing{}, Span{t->span.begin, t->span.begin}));
            } else {
                call.args.push_back(parse_comparison());
            }
            const Token* sep = peek();
            if (!sep) fail_eof({",", ")"});
            if (sep->kind == TokenKind::CloseParen) {
                const Token& close = take();
                return make(std::move(call), Span{name.span.begin, close.span.end});
            }
            if (sep->kind == TokenKind::ArgSep && sep->lexeme == ",") {
                take();
                continue;
            }
            fail(*sep, {",", ")"}, "expected ',' or ')' before");
        }
    }

    NodePtr parse_array_element() {
        const Token* t = peek();
        if (!t) fail_eof({"constant"});
        if (t->kind == TokenKind::Operator && (t->lexeme == "-" || t->lexeme == "+")) {
            const Token& op = take();
            const Token* num = peek();
            if (!num || num->kind != TokenKind::Number) {
                if (!num) fail_eof({"number"});
                fail(*num, {"number"}, "expected number after sign in array constant");
            }
            NodePtr operand = parse_primary();
            Span s{op.span.begin, operand->span.end};
            return make(Unary{op.lexeme == "-" ? UnaryOp::Minus : UnaryOp::Plus, std::move(operand)}, s);
        }
        switch (t->kind) {
            case TokenKind::Number:
            case TokenKind::String:
            case TokenKind::Boolean:
            case TokenKind::ErrorLiteral: return parse_primary();
            default: fail(*t, {"constant"}, "array constants may only hold constants, found");
        }
    }

    NodePtr parse_array() {
        const Token& open = take();
        ArrayLit arr;
        arr.rows.emplace_back();
        while (true) {
            arr.rows.back().push_back(parse_array_element());
            const Token* sep = peek();
            if (!sep) fail_eof({",", ";", "}"});
            if (sep->kind == TokenKind::CloseBrace) {
                const Token& close = take();
                return make(std::move(arr), Span{open.span.begin, close.span.end});
            }
            if (sep->kind != TokenKind::ArgSep) fail(*sep, {",", ";", "}"}, "unexpected token in array constant");
            if (take().lexeme == ";") arr.rows.emplace_back();
        }
    }

    // Decodes "Sheet1!", "'My Sheet'!", "'[Book.xlsx]Data'!" into `prefix`.
    void apply_sheet_prefix(const Token& tok, RefPrefix& prefix) {
        std::string_view lex = tok.lexeme.substr(0, tok.lexeme.size() - 1);  // drop '!'
        std::string name;
        if (!lex.empty() && lex.front() == '\'') {
            std::string_view inner = lex.substr(1, lex.size() - 2);
            for (std::size_t i = 0; i < inner.size(); ++i) {
                name += inner[i];
                if (inner[i] == '\'') ++i;
            }
            if (!name.empty() && name.front() == '[') {
                auto close = name.find(']');
                if (close == std::string::npos || prefix.external_book)
                    fail(tok, {}, "malformed external reference");
                prefix.external_book = name.substr(1, close - 1);
                name = name.substr(close + 1);
            }
        } else {
            name = std::string(lex);
        }
        if (name.find(':') != std::string::npos) fail(tok, {}, "3-D references are not supported");
        if (name.empty() && !prefix.external_book) fail(tok, {}, "empty sheet name");
        prefix.sheet = std::move(name);
    }

    static CellAddress address_from(std::string_view lexeme, const RefPrefix& prefix, RangeShape& shape,
                                    bool is_end) {
        CellAddress a;
        a.sheet_name = prefix.sheet;
        std::string_view w = lexeme;
        bool first_dollar = !w.empty() && w.front() == '$';
        if (first_dollar) w.remove_prefix(1);
        if (!w.empty() && std::isdigit(static_cast<unsigned char>(w.front()))) {
            shape = RangeShape::Rows;
            a.row = static_cast<std::uint32_t>(std::stoul(std::string(w)));
            a.row_absolute = first_dollar;
            a.column = is_end ? kMaxColumns : 1;
            return a;
        }
        std::size_t i = 0;
        while (i < w.size() && std::isalpha(static_cast<unsigned char>(w[i]))) ++i;
        if (i == w.size()) {
            shape = RangeShape::Columns;
            a.column = column_from_letters(w);
            a.col_absolute = first_dollar;
            a.row = is_end ? kMaxRows : 1;
            return a;
        }
        shape = RangeShape::Area;
        CellAddress parsed = parse_address(lexeme);
        parsed.sheet_name = prefix.sheet;
        return parsed;
    }

    NodePtr parse_reference() {
        const std::size_t begin = peek()->span.begin;
        RefPrefix prefix;
        if (at(TokenKind::ExternalPrefix)) {
            const Token& ext = take();
            prefix.external_book = std::string(ext.lexeme.substr(1, ext.lexeme.size() - 2));
            if (!at(TokenKind::SheetPrefix)) {
                const Token* n = peek();
                if (!n) fail_eof({"sheet name"});
                fail(*n, {"sheet name"}, "external reference needs a sheet");
            }
        }
        if (at(TokenKind::SheetPrefix)) apply_sheet_prefix(take(), prefix);

        const Token* t = peek();
        if (!t) fail_eof({"cell reference", "name"});

        if (t->kind == TokenKind::ErrorLiteral) {
            const Token& tok = take();
            return make(ErrorLit{*parse_error_code(tok.lexeme), prefix}, Span{begin, tok.span.end});
        }
        if (t->kind == TokenKind::Identifier) {
            const Token& tok = take();
            if (is_r1c1_name(tok.lexeme)) fail(tok, {}, "R1C1 references are not supported");
            if (at(TokenKind::OpenParen)) fail(*peek(), {}, "qualified function calls are not supported");
            return make(NamedRef{prefix, std::string(tok.lexeme)}, Span{begin, tok.span.end});
        }
        if (t->kind != TokenKind::CellRef) fail(*t, {"cell reference", "name"}, "expected a reference, found");

        const Token& first = take();
        RangeShape shape_a = RangeShape::Area;
        CellAddress start = address_from(first.lexeme, prefix, shape_a, false);
        if (!at(TokenKind::RangeSep)) {
            if (shape_a != RangeShape::Area) fail(first, {":"}, "whole row/column reference needs a range");
            return make(Ref{prefix, start}, Span{begin, first.span.end});
        }
        take();  // :
        if (at(TokenKind::SheetPrefix)) {
            RefPrefix second;
            second.external_book = prefix.external_book;
            const Token& sp = take();
            apply_sheet_prefix(sp, second);
            if (!iequals(second.sheet, prefix.sheet)) fail(sp, {}, "range corners on different sheets");
        }
        const Token* e = peek();
        if (!e) fail_eof({"cell reference"});
        if (e->kind != TokenKind::CellRef) fail(*e, {"cell reference"}, "expected range end, found");
        const Token& last = take();
        RangeShape shape_b = RangeShape::Area;
        CellAddress end = address_from(last.lexeme, prefix, shape_b, true);
        if (shape_a != shape_b) fail(last, {}, "mismatched range corners");
        return make(Range{prefix, start, end, shape_a}, Span{begin, last.span.end});
    }

    std::string_view text_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message)
    : std::runtime_error("ParseError at " + std::to_string(offset) + ": " + message +
                         (expected.empty() ? std::string() : " (expected " + join(expected) + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

FormulaAst parse_formula(std::string_view formula_text) {
    if (!formula_text.empty() && formula_text.front() == '=') formula_text.remove_prefix(1);
    FormulaAst ast;
    ast.source = std::string(formula_text);
    Parser parser(ast.source, tokenize(ast.source));
    ast.root = parser.parse_all();
    return ast;
}

}  // namespace ssaudit::formula
