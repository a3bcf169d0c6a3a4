#pragma once

#include "ssaudit/address.hpp"
#include "ssaudit/workbook.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ssaudit::formula {

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;   // one past the last byte
    bool operator==(const Span&) const = default;
};

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class TokenKind {
    Number,
    String,
    Boolean,
    ErrorLiteral,
    Identifier,
    CellRef,
    RangeSep,
    ArgSep,
    Operator,
    OpenParen,
    CloseParen,
    OpenBrace,
    CloseBrace,
    SheetPrefix,     // "Sheet1!", "'My Sheet'!", "Sheet1:Sheet3!" (3-D, rejected by the parser)
    ExternalPrefix,  // "[1]", "[Budget.xlsx]"
    Percent,
    StructuredRef,   // "Table1[Amount]"; recognised so that it can be rejected cleanly
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
    TokenKind kind;
    std::string_view lexeme;   // view into the tokenized text
    Span span;
};

class LexError : public std::runtime_error {
public:
    LexError(std::size_t offset, const std::string& message);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Tokens reference `formula_text`; keep it alive while using them.
std::vector<Token> tokenize(std::string_view formula_text);

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

enum class RangeShape { Area, Columns, Rows };

/// A reference target: optional external book, optional sheet, and either a
/// single cell or (for Range) two corners.
struct RefPrefix {
    std::optional<std::string> external_book;   // "1" or "Budget.xlsx"
    std::string sheet;                          // empty when unqualified
    bool operator==(const RefPrefix&) const = default;
};

struct Node;
using NodePtr = std::unique_ptr<Node>;

struct NumberLit {
    double value;
    std::string lexeme;
};
struct StringLit {
    std::string value;
};
struct BoolLit {
    bool value;
};
struct ErrorLit {
    ErrorCode code;
    RefPrefix prefix;   // "Sheet1!#REF!" keeps its sheet
};
struct Ref {
    RefPrefix prefix;
    CellAddress address;   // sheet_name mirrors prefix.sheet
};
struct Range {
    RefPrefix prefix;
    CellAddress start;
    CellAddress end;
    RangeShape shape = RangeShape::Area;
};
struct NamedRef {
    RefPrefix prefix;
    std::string name;
};
struct FuncCall {
    std::string name;   // uppercase
    std::vector<NodePtr> args;
};
enum class UnaryOp { Plus, Minus, Percent };
struct Unary {
    UnaryOp op;
    NodePtr operand;
};
enum class BinaryOp { Add, Sub, Mul, Div, Pow, Concat, Eq, Ne, Lt, Le, Gt, Ge };
struct Binary {
    BinaryOp op;
    NodePtr left;
    NodePtr right;
};
struct Paren {
    NodePtr inner;
};
/// Inline array constant "{1,2;3,4}".
struct ArrayLit {
    std::vector<std::vector<NodePtr>> rows;
};
/// An omitted function argument, as in IF(A1,,0).
struct Missing {};

struct Node {
    std::variant<NumberLit, StringLit, BoolLit, ErrorLit, Ref, Range, NamedRef, FuncCall, Unary, Binary,
                 Paren, ArrayLit, Missing>
        data;
    Span span;

    template <typename T>
    const T* as() const {
        return std::get_if<T>(&data);
    }
};

std::string_view binary_op_text(BinaryOp op);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message);
    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// A parsed formula. The source text is owned so spans stay meaningful.
struct FormulaAst {
    std::string source;
    NodePtr root;   // null for an empty formula
};

/// Parses the text after '='. A leading '=' is tolerated and skipped.
/// Throws LexError or ParseError.
FormulaAst parse_formula(std::string_view formula_text);

/// Canonical formula text for the tree (no leading '=').
std::string render(const Node& node);
/// Fully parenthesised structural dump, e.g. (* (num 780000) (num .35)).
std::string to_sexpr(const Node& node);
/// Structure comparison that ignores spans.
bool structurally_equal(const Node& a, const Node& b);

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

struct ExtractedRef {
    const Node* node;          // Ref, Range or NamedRef
    bool external = false;
    std::string text;          // rendered reference, e.g. "Q1!C3"
};

/// Every reference in left-to-right source order. Ranges are not enumerated.
std::vector<ExtractedRef> extract_refs(const FormulaAst& ast);

struct LiteralContext {
    enum class Kind { GeneralExpression, FunctionArgPosition } kind = Kind::GeneralExpression;
    std::string function;       // set for FunctionArgPosition
    std::size_t arg_index = 0;  // 1-based
    bool operator==(const LiteralContext&) const = default;
};

struct NumericLiteral {
    double value;          // percent postfixes applied: "5%" -> 0.05
    Span span;             // covers the digits and any trailing '%'
    std::string lexeme;    // source text over span
    LiteralContext context;
};

std::vector<NumericLiteral> extract_numeric_literals(const FormulaAst& ast);

/// Error literals (#REF! etc.) embedded in the formula text.
std::vector<const Node*> extract_error_literals(const FormulaAst& ast);

/// Moves every relative reference by (row_offset, column_offset), keeping
/// the original spacing. References pushed off the grid become "#REF!".
/// Used to expand shared formulas. Text that does not tokenize is returned
/// unchanged.
std::string translate_formula(std::string_view formula_text, long row_offset, long column_offset);

}  // namespace ssaudit::formula
