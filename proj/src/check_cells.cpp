#include "ssaudit/classify.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>

namespace ssaudit {

using namespace formula;

std::string_view check_target_name(CheckTarget t) {
    return t == CheckTarget::Input ? "Input" : "CalculatedOutput";
}

std::string_view check_pattern_name(CheckPattern p) {
    switch (p) {
        case CheckPattern::Difference: return "difference";
        case CheckPattern::Comparison: return "comparison";
        case CheckPattern::StatusIf: return "status-if";
        case CheckPattern::Magnitude: return "magnitude";
    }
    return "?";
}

std::string_view adequacy_defect_name(AdequacyDefect d) {
    return d == AdequacyDefect::Circular ? "Circular" : "BrokenLink";
}

namespace {

constexpr std::size_t kStatusTextLimit = 20;

const Node& strip(const Node& node) {
    const Node* n = &node;
    while (const auto* p = n->as<Paren>()) n = p->inner.get();
    return *n;
}

bool is_comparison(BinaryOp op) {
    return op == BinaryOp::Eq || op == BinaryOp::Ne || op == BinaryOp::Lt || op == BinaryOp::Le ||
           op == BinaryOp::Gt || op == BinaryOp::Ge;
}

bool is_literal(const Node& node) {
    const Node& n = strip(node);
    if (n.as<NumberLit>() || n.as<StringLit>() || n.as<BoolLit>() || n.as<ErrorLit>()) return true;
    if (const auto* u = n.as<Unary>()) return is_literal(*u->operand);
    return false;
}

bool is_status_literal(const Node& node) {
    const Node& n = strip(node);
    if (const auto* s = n.as<StringLit>()) return s->value.size() <= kStatusTextLimit;
    if (n.as<BoolLit>() || n.as<NumberLit>()) return true;
    if (const auto* u = n.as<Unary>()) return u->op != UnaryOp::Percent && strip(*u->operand).as<NumberLit>();
    return false;
}

bool is_aggregate_call(const Node& n, bool include_subtotal = true) {
    const auto* call = n.as<FuncCall>();
    if (!call) return false;
    return call->name == "SUM" || call->name == "COUNT" || call->name == "COUNTA" ||
           (include_subtotal && call->name == "SUBTOTAL");
}

class Matcher {
public:
    Matcher(const DependencyGraph& graph, const CellClasses& classes, std::uint32_t sheet)
        : graph_(graph), classes_(classes), sheet_(sheet) {}

    std::optional<NodeId> target(const Ref& ref) const {
        if (ref.prefix.external_book) return std::nullopt;
        std::uint32_t sheet = sheet_;
        if (!ref.prefix.sheet.empty()) {
            const auto& names = graph_.sheet_names();
            auto it = std::find_if(names.begin(), names.end(), [&](const std::string& s) { return iequals(s, ref.prefix.sheet); });
            if (it == names.end()) return std::nullopt;
            sheet = static_cast<std::uint32_t>(it - names.begin());
        }
        return graph_.find(CellKey{sheet, ref.address.row, ref.address.column});
    }

    bool aggregate(const Node& node) const {
        const Node& n = strip(node);
        if (is_aggregate_call(n)) return true;
        if (const auto* ref = n.as<Ref>()) {
            auto id = target(*ref);
            return id && is_formula_class(classes_[*id]);
        }
        return false;
    }

    bool difference(const Node& node) const {
        const auto* b = strip(node).as<Binary>();
        return b && b->op == BinaryOp::Sub && aggregate(*b->left) && aggregate(*b->right);
    }

    bool comparison(const Node& node) const {
        const auto* b = strip(node).as<Binary>();
        return b && is_comparison(b->op) && !is_literal(*b->left) && !is_literal(*b->right);
    }

    bool magnitude(const Node& node) const {
        const auto* call = strip(node).as<FuncCall>();
        return call && (call->name == "ABS" || call->name == "ROUND") && !call->args.empty() &&
               difference(*call->args[0]);
    }

    // "ABS(SUM(A)-SUM(B))<0.01": a difference held against a literal tolerance.
    bool tolerance(const Node& node) const {
        const auto* b = strip(node).as<Binary>();
        if (!b || !is_comparison(b->op)) return false;
        auto measured = [&](const Node& n) { return difference(n) || magnitude(n); };
        return (measured(*b->left) && is_literal(*b->right)) || (is_literal(*b->left) && measured(*b->right));
    }

    bool status_if(const Node& node) const {
        const auto* call = strip(node).as<FuncCall>();
        if (!call || call->name != "IF" || call->args.empty() || call->args.size() > 3) return false;
        const Node& cond = *call->args[0];
        if (!(difference(cond) || comparison(cond) || magnitude(cond) || tolerance(cond))) return false;
        for (std::size_t i = 1; i < call->args.size(); ++i) {
            if (!call->args[i]->as<Missing>() && !is_status_literal(*call->args[i])) return false;
        }
        return true;
    }

    std::optional<CheckPattern> match(const Node& root) const {
        if (difference(root)) return CheckPattern::Difference;
        if (comparison(root)) return CheckPattern::Comparison;
        if (status_if(root)) return CheckPattern::StatusIf;
        if (magnitude(root)) return CheckPattern::Magnitude;
        return std::nullopt;
    }

    /// The subtraction or comparison at the heart of a matched check.
    const Binary* core(const Node& root) const {
        const Node& n = strip(root);
        if (const auto* b = n.as<Binary>()) {
            if (b->op == BinaryOp::Sub || is_comparison(b->op)) return b;
        }
        if (const auto* call = n.as<FuncCall>(); call && !call->args.empty()) return core(*call->args[0]);
        return nullptr;
    }

    bool hash_total(const Node& root) const {
        const Binary* b = core(root);
        if (!b) return false;
        auto input_ref = [&](const Node& n) {
            const auto* ref = strip(n).as<Ref>();
            if (!ref) return false;
            auto id = target(*ref);
            return id && classes_[*id] == CellClass::Input;
        };
        auto counted = [](const Node& n) { return is_aggregate_call(strip(n), false); };
        return (counted(*b->left) && input_ref(*b->right)) || (input_ref(*b->left) && counted(*b->right));
    }

private:
    const DependencyGraph& graph_;
    const CellClasses& classes_;
    std::uint32_t sheet_;
};

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

bool mentions_keyword(std::string_view text, const std::vector<std::string>& keywords) {
    for (const std::string& word : words_of(text)) {
        for (const std::string& kw : keywords) {
            std::string k = to_lower(kw);
            if (!k.empty() && word.compare(0, k.size(), k) == 0) return true;
        }
    }
    return false;
}

bool keyword_nearby(const SheetModel& sheet, const CellKey& at, const CheckOptions& options) {
    auto label_at = [&](std::uint32_t row, std::uint32_t column) {
        const Cell* cell = sheet.find(row, column);
        if (!cell || cell->content.kind != CellKind::Text) return false;
        return mentions_keyword(std::get<std::string>(cell->content.value), options.keywords);
    };
    for (std::uint32_t d = 1; d <= options.label_distance; ++d) {
        if (at.column > d && label_at(at.row, at.column - d)) return true;
        if (at.row > d && label_at(at.row - d, at.column)) return true;
    }
    return false;
}

/// For every node: the first seed that can be reached from it by following
/// dependency edges, or nullopt.
std::vector<std::optional<NodeId>> reaching(const DependencyGraph& graph, const std::vector<NodeId>& seeds) {
    const std::size_t n = graph.nodes().size();
    std::vector<std::optional<NodeId>> origin(n);
    if (seeds.empty()) return origin;

    std::vector<std::uint32_t> offsets(n + 1, 0);
    for (NodeId v = 0; v < n; ++v)
        for (NodeId w : graph.successors(v)) offsets[w + 1]++;
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    std::vector<NodeId> preds(offsets[n]);
    std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
    for (NodeId v = 0; v < n; ++v)
        for (NodeId w : graph.successors(v)) preds[fill[w]++] = v;

    std::deque<NodeId> queue;
    for (NodeId s : seeds) {
        if (!origin[s]) {
            origin[s] = s;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        NodeId w = queue.front();
        queue.pop_front();
        for (std::uint32_t i = offsets[w]; i < offsets[w + 1]; ++i) {
            NodeId v = preds[i];
            if (!origin[v]) {
                origin[v] = origin[w];
                queue.push_back(v);
            }
        }
    }
    return origin;
}

}  // namespace

std::optional<CheckPattern> match_check_pattern(const Node& root, const DependencyGraph& graph,
                                                const CellClasses& classes, std::uint32_t sheet) {
    return Matcher(graph, classes, sheet).match(root);
}

std::vector<CheckCellFinding> detect_check_cells(const WorkbookModel& model, const DependencyGraph& graph,
                                                 const FormulaTable& formulas, const CellClasses& classes,
                                                 const std::vector<Region>& regions,
                                                 const std::vector<std::vector<CellAddress>>& cycles,
                                                 const std::vector<BrokenLink>& broken,
                                                 const CheckOptions& options) {
    auto region_of = region_membership(regions, graph.nodes().size());

    std::vector<NodeId> cycle_seeds, broken_seeds;
    for (const auto& cycle : cycles)
        for (const auto& addr : cycle)
            if (auto id = graph.find(addr)) cycle_seeds.push_back(*id);
    for (const auto& b : broken)
        if (auto id = graph.find(b.cell)) broken_seeds.push_back(*id);
    std::sort(cycle_seeds.begin(), cycle_seeds.end());
    std::sort(broken_seeds.begin(), broken_seeds.end());
    std::vector<std::optional<NodeId>> circular, unlinked;
    bool tainted_pass_done = false;

    std::vector<CheckCellFinding> findings;
    for (const ParsedFormula& pf : formulas.entries()) {
        if (!pf.ast || !pf.ast->root) continue;
        auto id = graph.find(pf.cell);
        if (!id || classes[*id] != CellClass::Calculation) continue;
        Matcher matcher(graph, classes, pf.cell.sheet);
        auto pattern = matcher.match(*pf.ast->root);
        if (!pattern) continue;

        CheckSignals signals;
        signals.keyword = keyword_nearby(model.sheets[pf.cell.sheet], pf.cell, options);
        std::set<std::uint32_t> touched;
        for (NodeId w : graph.successors(*id)) touched.insert(region_of[w]);
        signals.cross_region = touched.size() >= 2;
        if (!signals.keyword && !signals.cross_region) continue;
        signals.hash_total = matcher.hash_total(*pf.ast->root);

        if (!tainted_pass_done) {
            circular = reaching(graph, cycle_seeds);
            unlinked = reaching(graph, broken_seeds);
            tainted_pass_done = true;
        }

        CheckCellFinding f;
        f.cell = graph.address(*id);
        f.node = *id;
        f.pattern = *pattern;
        f.signals = signals;
        const auto& succ = graph.successors(*id);
        bool on_output = std::any_of(succ.begin(), succ.end(), [&](NodeId w) { return is_formula_class(classes[w]); });
        f.target_kind = on_output ? CheckTarget::CalculatedOutput : CheckTarget::Input;
        std::vector<std::string> notes;
        if (circular[*id]) {
            f.adequacy_defects.push_back(AdequacyDefect::Circular);
            notes.push_back("circular through " + render_address(graph.address(*circular[*id])));
        }
        if (unlinked[*id]) {
            f.adequacy_defects.push_back(AdequacyDefect::BrokenLink);
            notes.push_back("broken link or error value at " + render_address(graph.address(*unlinked[*id])));
        }
        for (std::size_t i = 0; i < notes.size(); ++i) f.defect_detail += (i ? "; " : "") + notes[i];
        findings.push_back(std::move(f));
    }
    return findings;
}

void mark_check_cells(CellClasses& classes, const std::vector<CheckCellFinding>& findings) {
    for (const auto& f : findings) classes[f.node] = CellClass::CheckCell;
}

}  // namespace ssaudit
