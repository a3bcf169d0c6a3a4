#include "ssaudit/formula.hpp"

#include <cctype>
#include <cmath>

namespace ssaudit::formula {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::string render_prefix(const RefPrefix& p) {
    if (!p.external_book) return render_sheet_prefix(p.sheet);
    std::string book = "[" + *p.external_book + "]";
    bool quote = sheet_name_needs_quotes(p.sheet) ||
                 p.external_book->find_first_of(" '-+()&,;") != std::string::npos;
    if (!quote) return book + p.sheet + "!";
    std::string out = "'";
    for (char c : book + p.sheet) {
        out += c;
        if (c == '\'') out += '\'';
    }
    return out + "'!";
}

std::string render_corner(const CellAddress& a, RangeShape shape) {
    switch (shape) {
        case RangeShape::Columns: return (a.col_absolute ? "$" : "") + column_to_letters(a.column);
        case RangeShape::Rows: return (a.row_absolute ? "$" : "") + std::to_string(a.row);
        case RangeShape::Area: break;
    }
    CellAddress bare = a;
    bare.sheet_name.clear();
    return render_address(bare);
}

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    return out + "\"";
}

}  // namespace

std::string_view binary_op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
        case BinaryOp::Concat: return "&";
        case BinaryOp::Eq: return "=";
        case BinaryOp::Ne: return "<>";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
    }
    return "?";
}

std::string render(const Node& node) {
    return std::visit(
        overloaded{
            [](const NumberLit& n) { return n.lexeme; },
            [](const StringLit& s) { return quote_string(s.value); },
            [](const BoolLit& b) { return std::string(b.value ? "TRUE" : "FALSE"); },
            [](const ErrorLit& e) {
                bool qualified = e.prefix.external_book || !e.prefix.sheet.empty();
                return (qualified ? render_prefix(e.prefix) : std::string()) + std::string(error_code_text(e.code));
            },
            [](const Ref& r) { return render_prefix(r.prefix) + render_corner(r.address, RangeShape::Area); },
            [](const Range& r) {
                return render_prefix(r.prefix) + render_corner(r.start, r.shape) + ":" + render_corner(r.end, r.shape);
            },
            [](const NamedRef& n) {
                bool qualified = n.prefix.external_book || !n.prefix.sheet.empty();
                return (qualified ? render_prefix(n.prefix) : std::string()) + n.name;
            },
            [](const FuncCall& f) {
                std::string out = f.name + "(";
                for (std::size_t i = 0; i < f.args.size(); ++i) {
                    if (i) out += ",";
                    out += render(*f.args[i]);
                }
                return out + ")";
            },
            [](const Unary& u) {
                switch (u.op) {
                    case UnaryOp::Plus: return "+" + render(*u.operand);
                    case UnaryOp::Minus: return "-" + render(*u.operand);
                    case UnaryOp::Percent: break;
                }
                return render(*u.operand) + "%";
            },
            [](const Binary& b) {
                return render(*b.left) + std::string(binary_op_text(b.op)) + render(*b.right);
            },
            [](const Paren& p) { return "(" + render(*p.inner) + ")"; },
            [](const ArrayLit& a) {
                std::string out = "{";
                for (std::size_t r = 0; r < a.rows.size(); ++r) {
                    if (r) out += ";";
                    for (std::size_t c = 0; c < a.rows[r].size(); ++c) {
                        if (c) out += ",";
                        out += render(*a.rows[r][c]);
                    }
                }
                return out + "}";
            },
            [](const Missing&) { return std::string(); },
        },
        node.data);
}

std::string to_sexpr(const Node& node) {
    return std::visit(
        overloaded{
            [](const NumberLit& n) { return "(num " + n.lexeme + ")"; },
            [](const StringLit& s) { return "(str " + quote_string(s.value) + ")"; },
            [](const BoolLit& b) { return std::string(b.value ? "(bool TRUE)" : "(bool FALSE)"); },
            [&](const ErrorLit&) { return "(err " + render(node) + ")"; },
            [&](const Ref&) { return "(ref " + render(node) + ")"; },
            [&](const Range&) { return "(range " + render(node) + ")"; },
            [&](const NamedRef&) { return "(name " + render(node) + ")"; },
            [](const FuncCall& f) {
                std::string out = "(call " + f.name;
                for (const auto& a : f.args) out += " " + to_sexpr(*a);
                return out + ")";
            },
            [](const Unary& u) {
                const char* tag = u.op == UnaryOp::Plus ? "pos" : u.op == UnaryOp::Minus ? "neg" : "pct";
                return std::string("(") + tag + " " + to_sexpr(*u.operand) + ")";
            },
            [](const Binary& b) {
                return "(" + std::string(binary_op_text(b.op)) + " " + to_sexpr(*b.left) + " " + to_sexpr(*b.right) +
                       ")";
            },
            [](const Paren& p) { return "(paren " + to_sexpr(*p.inner) + ")"; },
            [](const ArrayLit& a) {
                std::string out = "(array";
                for (const auto& row : a.rows) {
                    out += " (row";
                    for (const auto& e : row) out += " " + to_sexpr(*e);
                    out += ")";
                }
                return out + ")";
            },
            [](const Missing&) { return std::string("(missing)"); },
        },
        node.data);
}

bool structurally_equal(const Node& a, const Node& b) {
    if (a.data.index() != b.data.index()) return false;
    return std::visit(
        overloaded{
            [&](const NumberLit& x) {
                const auto& y = std::get<NumberLit>(b.data);
                return x.lexeme == y.lexeme && (x.value == y.value || (std::isnan(x.value) && std::isnan(y.value)));
            },
            [&](const StringLit& x) { return x.value == std::get<StringLit>(b.data).value; },
            [&](const BoolLit& x) { return x.value == std::get<BoolLit>(b.data).value; },
            [&](const ErrorLit& x) {
                const auto& y = std::get<ErrorLit>(b.data);
                return x.code == y.code && x.prefix == y.prefix;
            },
            [&](const Ref& x) {
                const auto& y = std::get<Ref>(b.data);
                return x.prefix == y.prefix && x.address == y.address;
            },
            [&](const Range& x) {
                const auto& y = std::get<Range>(b.data);
                return x.prefix == y.prefix && x.start == y.start && x.end == y.end && x.shape == y.shape;
            },
            [&](const NamedRef& x) {
                const auto& y = std::get<NamedRef>(b.data);
                return x.prefix == y.prefix && x.name == y.name;
            },
            [&](const FuncCall& x) {
                const auto& y = std::get<FuncCall>(b.data);
                if (x.name != y.name || x.args.size() != y.args.size()) return false;
                for (std::size_t i = 0; i < x.args.size(); ++i) {
                    if (!structurally_equal(*x.args[i], *y.args[i])) return false;
                }
                return true;
            },
            [&](const Unary& x) {
                const auto& y = std::get<Unary>(b.data);
                return x.op == y.op && structurally_equal(*x.operand, *y.operand);
            },
            [&](const Binary& x) {
                const auto& y = std::get<Binary>(b.data);
                return x.op == y.op && structurally_equal(*x.left, *y.left) && structurally_equal(*x.right, *y.right);
            },
            [&](const Paren& x) { return structurally_equal(*x.inner, *std::get<Paren>(b.data).inner); },
            [&](const ArrayLit& x) {
                const auto& y = std::get<ArrayLit>(b.data);
                if (x.rows.size() != y.rows.size()) return false;
                for (std::size_t r = 0; r < x.rows.size(); ++r) {
                    if (x.rows[r].size() != y.rows[r].size()) return false;
                    for (std::size_t c = 0; c < x.rows[r].size(); ++c) {
                        if (!structurally_equal(*x.rows[r][c], *y.rows[r][c])) return false;
                    }
                }
                return true;
            },
            [](const Missing&) { return true; },
        },
        a.data);
}

namespace {

template <typename F>
void walk(const Node& node, F&& f) {
    f(node);
    std::visit(overloaded{
                   [&](const FuncCall& c) {
                       for (const auto& a : c.args) walk(*a, f);
                   },
                   [&](const Unary& u) { walk(*u.operand, f); },
                   [&](const Binary& b) {
                       walk(*b.left, f);
                       walk(*b.right, f);
                   },
                   [&](const Paren& p) { walk(*p.inner, f); },
                   [&](const ArrayLit& a) {
                       for (const auto& row : a.rows)
                           for (const auto& e : row) walk(*e, f);
                   },
                   [](const auto&) {},
               },
               node.data);
}

class LiteralCollector {
public:
    explicit LiteralCollector(const std::string& source) : source_(source) {}

    void visit(const Node& node, const LiteralContext& ctx) {
        std::visit(overloaded{
                       [&](const NumberLit& n) { emit(node, n.value, ctx); },
                       [&](const FuncCall& c) {
                           for (std::size_t i = 0; i < c.args.size(); ++i) {
                               visit(*c.args[i], LiteralContext{LiteralContext::Kind::FunctionArgPosition, c.name, i + 1});
                           }
                       },
                       [&](const Unary& u) {
                           if (u.op != UnaryOp::Percent) return visit(*u.operand, ctx);
                           // Fold "5%" / "5%%" into one literal spanning the postfixes.
                           double scale = 0.01;
                           const Node* inner = u.operand.get();
                           for (auto* pu = inner->as<Unary>(); pu && pu->op == UnaryOp::Percent;
                                pu = inner->as<Unary>()) {
                               scale *= 0.01;
                               inner = pu->operand.get();
                           }
                           if (const auto* n = inner->as<NumberLit>()) return emit(node, n->value * scale, ctx);
                           visit(*u.operand, LiteralContext{});
                       },
                       [&](const Binary& b) {
                           visit(*b.left, LiteralContext{});
                           visit(*b.right, LiteralContext{});
                       },
                       [&](const Paren& p) { visit(*p.inner, ctx); },
                       [&](const ArrayLit& a) {
                           for (const auto& row : a.rows)
                               for (const auto& e : row) visit(*e, LiteralContext{});
                       },
                       [](const auto&) {},
                   },
                   node.data);
    }

    std::vector<NumericLiteral> out;

private:
    void emit(const Node& node, double value, const LiteralContext& ctx) {
        out.push_back(NumericLiteral{value, node.span, source_.substr(node.span.begin, node.span.end - node.span.begin),
                                     ctx});
    }
    const std::string& source_;
};

}  // namespace

std::vector<ExtractedRef> extract_refs(const FormulaAst& ast) {
    std::vector<ExtractedRef> out;
    if (!ast.root) return out;
    walk(*ast.root, [&](const Node& n) {
        const RefPrefix* prefix = nullptr;
        if (const auto* r = n.as<Ref>()) prefix = &r->prefix;
        else if (const auto* g = n.as<Range>()) prefix = &g->prefix;
        else if (const auto* m = n.as<NamedRef>()) prefix = &m->prefix;
        if (prefix) out.push_back(ExtractedRef{&n, prefix->external_book.has_value(), render(n)});
    });
    return out;
}

std::vector<NumericLiteral> extract_numeric_literals(const FormulaAst& ast) {
    if (!ast.root) return {};
    LiteralCollector collector(ast.source);
    collector.visit(*ast.root, LiteralContext{});
    return std::move(collector.out);
}

std::vector<const Node*> extract_error_literals(const FormulaAst& ast) {
    std::vector<const Node*> out;
    if (!ast.root) return out;
    walk(*ast.root, [&](const Node& n) {
        if (n.as<ErrorLit>()) out.push_back(&n);
    });
    return out;
}

std::string translate_formula(std::string_view text, long row_offset, long column_offset) {
    std::vector<Token> tokens;
    try {
        tokens = tokenize(text);
    } catch (const LexError&) {
        return std::string(text);
    }
    std::string out;
    std::size_t copied = 0;
    for (const Token& t : tokens) {
        if (t.kind != TokenKind::CellRef) continue;
        out.append(text.substr(copied, t.span.begin - copied));
        copied = t.span.end;

        std::string_view w = t.lexeme;
        std::string rewritten;
        bool off_grid = false;
        std::size_t i = 0;
        auto shift = [&](long v, long by, long max) {
            long r = v + by;
            if (r < 1 || r > max) off_grid = true;
            return r;
        };
        bool col_abs = false;
        if (i < w.size() && w[i] == '$') {
            col_abs = true;
            ++i;
        }
        std::size_t letters = i;
        while (i < w.size() && std::isalpha(static_cast<unsigned char>(w[i]))) ++i;
        if (i > letters) {
            long col = column_from_letters(w.substr(letters, i - letters));
            if (!col_abs) col = shift(col, column_offset, kMaxColumns);
            rewritten += (col_abs ? "$" : "") + (off_grid ? std::string() : column_to_letters(static_cast<std::uint32_t>(col)));
        } else if (col_abs) {
            // "$12" row-only corner: the dollar belongs to the row.
            i = 0;
        }
        if (i < w.size()) {
            bool row_abs = false;
            if (w[i] == '$') {
                row_abs = true;
                ++i;
            }
            long row = std::stol(std::string(w.substr(i)));
            if (!row_abs) row = shift(row, row_offset, kMaxRows);
            rewritten += (row_abs ? "$" : "") + std::to_string(row);
        }
        out += off_grid ? std::string("#REF!") : rewritten;
    }
    out.append(text.substr(copied));
    return out;
}

}  // namespace ssaudit::formula
