#include "cycle_oracle.hpp"
#include "model_helpers.hpp"

#include "ssaudit/depgraph.hpp"

#include <doctest.h>

#include <set>

using namespace ssaudit;
using namespace ssaudit::fixtures;

namespace {

std::string name_of(const DependencyGraph& g, NodeId id) { return render_address(g.address(id)); }

std::set<std::string> edges(const DependencyGraph& g) {
    std::set<std::string> out;
    for (NodeId v = 0; v < g.nodes().size(); ++v)
        for (NodeId w : g.successors(v)) out.insert(name_of(g, v) + "->" + name_of(g, w));
    return out;
}

std::vector<std::vector<std::string>> cycle_names(const DependencyGraph& g) {
    std::vector<std::vector<std::string>> out;
    for (const auto& cycle : find_cycles(g)) {
        auto& names = out.emplace_back();
        for (const auto& a : cycle) names.push_back(render_address(a));
    }
    return out;
}

std::vector<std::pair<std::string, BrokenReason>> broken(const WorkbookModel& m) {
    std::vector<std::pair<std::string, BrokenReason>> out;
    for (const auto& b : find_broken_links(m, build_graph(m))) out.emplace_back(render_address(b.cell), b.reason);
    return out;
}

}  // namespace

TEST_CASE("a formula points at the cells it reads") {
    XlsxBuilder b;
    b.sheet("S").number("A1", 5).formula("B1", "A1*2");
    auto g = build_graph(load(b));
    CHECK(g.nodes().size() == 2);
    CHECK(edges(g) == std::set<std::string>{"S!B1->S!A1"});
    CHECK(g.edge_count() == 1);
}

TEST_CASE("missing sheets land in unresolved") {
    XlsxBuilder b;
    b.sheet("S").formula("B1", "Missing!C3");
    auto m = load(b);
    auto g = build_graph(m);
    REQUIRE(g.unresolved().size() == 1);
    CHECK(g.unresolved()[0].reason == UnresolvedReason::SheetMissing);
    CHECK(name_of(g, g.unresolved()[0].source) == "S!B1");
    CHECK(broken(m) == std::vector<std::pair<std::string, BrokenReason>>{{"S!B1", BrokenReason::SheetMissing}});
}

TEST_CASE("ranges expand to occupied cells and keep a marker") {
    XlsxBuilder b;
    b.sheet("S").number("A1", 1).number("A2", 2).formula("C1", "SUM(A1:A3)");
    auto g = build_graph(load(b));
    CHECK(edges(g) == std::set<std::string>{"S!C1->S!A1", "S!C1->S!A2"});
    REQUIRE(g.range_edges().size() == 1);
    CHECK(g.range_edges()[0].bounds == Bounds{1, 1, 3, 1});
    CHECK(g.unresolved().empty());
}

TEST_CASE("whole-column ranges clamp to the used area") {
    XlsxBuilder b;
    b.sheet("S").number("A1", 1).number("A500", 2).number("B2", 3).formula("C1", "SUM(A:A)").formula("C2", "SUM(2:2)");
    auto g = build_graph(load(b));
    CHECK(edges(g) == std::set<std::string>{"S!C1->S!A1", "S!C1->S!A500", "S!C2->S!B2", "S!C2->S!C2"});
    for (const auto& r : g.range_edges()) {
        CHECK(r.bounds.last_row <= 500);
        CHECK(r.bounds.last_column <= 3);
    }
}

TEST_CASE("defined names resolve, local before global") {
    XlsxBuilder b;
    b.sheet("S").number("A1", 0.3).number("A2", 9).formula("B1", "Rate*A2").formula("B2", "Nope+1");
    b.sheet("T").number("A1", 0.5).formula("B1", "Rate*2").formula("B2", "Chain");
    b.defined_name("Rate", "S!$A$1");
    b.defined_name("Rate", "T!$A$1", 1);
    b.defined_name("Chain", "Rate");
    b.defined_name("Gone", "#REF!");
    auto m = load(b);
    auto g = build_graph(m);
    auto e = edges(g);
    CHECK(e.count("S!B1->S!A1"));
    CHECK(e.count("T!B1->T!A1"));
    CHECK_FALSE(e.count("T!B1->S!A1"));
    CHECK(e.count("T!B2->T!A1"));
    REQUIRE(g.unresolved().size() == 1);
    CHECK(g.unresolved()[0].reason == UnresolvedReason::NamedRangeUndefined);
    CHECK(g.unresolved()[0].text == "Nope");
}

TEST_CASE("external references resolve only inside the package") {
    XlsxBuilder b;
    b.sheet("S")
        .formula("A1", "[1]Plan!B2*2")
        .formula("A2", "[1]Other!B2")
        .formula("A3", "[Budget.xlsx]Plan!C3")
        .formula("A4", "[Gone.xlsx]S!A1")
        .formula("A5", "IFERROR([Gone.xlsx]S!A2,0)");
    b.external_link("Budget.xlsx", {"Plan"});
    auto m = load(b);
    CHECK(broken(m) == std::vector<std::pair<std::string, BrokenReason>>{
                           {"S!A2", BrokenReason::SheetMissing},
                           {"S!A4", BrokenReason::ExternalBookMissing},
                           {"S!A5", BrokenReason::ExternalBookMissing},
                       });
    auto g = build_graph(m);
    CHECK(g.external_refs().size() == 2);
    CHECK(g.edge_count() == 0);
}

TEST_CASE("error values and #REF! text are broken links") {
    XlsxBuilder healthy;
    healthy.sheet("S").number("A1", 1).formula("A2", "A1+1", 2.0);
    CHECK(broken(load(healthy)).empty());

    XlsxBuilder b;
    b.sheet("S")
        .number("A1", 1)
        .formula("B1", "A1*2", ErrorCode::Ref)
        .formula("B2", "#REF!+A1")
        .formula("B3", "A1/0", ErrorCode::Div0)
        .error("B4", ErrorCode::NA);
    CHECK(broken(load(b)) == std::vector<std::pair<std::string, BrokenReason>>{
                                 {"S!B1", BrokenReason::RefError},
                                 {"S!B2", BrokenReason::RefError},
                                 {"S!B3", BrokenReason::ErrorValue},
                                 {"S!B4", BrokenReason::ErrorValue},
                             });
}

TEST_CASE("find_cycles reports components and self loops") {
    XlsxBuilder pair;
    pair.sheet("S").formula("A1", "B1").formula("B1", "A1");
    CHECK(cycle_names(build_graph(load(pair))) == std::vector<std::vector<std::string>>{{"S!A1", "S!B1"}});

    XlsxBuilder acyclic;
    acyclic.sheet("S").number("A1", 1).formula("A2", "A1").formula("A3", "A1+A2");
    CHECK(find_cycles(build_graph(load(acyclic))).empty());

    XlsxBuilder running;
    running.sheet("S").number("A1", 1).number("A2", 2).formula("A3", "SUM(A1:A3)");
    CHECK(cycle_names(build_graph(load(running))) == std::vector<std::vector<std::string>>{{"S!A3"}});

    XlsxBuilder values;
    values.sheet("S").number("A1", 1).text("A2", "x");
    CHECK(find_cycles(build_graph(load(values))).empty());

    XlsxBuilder two;
    two.sheet("S").formula("C5", "D5").formula("D5", "E5").formula("E5", "C5").formula("A1", "A1+C5");
    CHECK(cycle_names(build_graph(load(two))) ==
          std::vector<std::vector<std::string>>{{"S!A1"}, {"S!C5", "S!D5", "S!E5"}});
}

TEST_CASE("the graph does not depend on sheet order") {
    auto make = [](bool swapped) {
        XlsxBuilder b;
        auto fill_a = [](SheetBuilder& s) { s.number("A1", 1).formula("A2", "Bee!B1+A1").formula("A3", "SUM(Bee!B:B)"); };
        auto fill_b = [](SheetBuilder& s) { s.number("B1", 2).formula("B2", "Ay!A2*2").formula("B3", "B2"); };
        if (swapped) {
            fill_b(b.sheet("Bee"));
            fill_a(b.sheet("Ay"));
        } else {
            fill_a(b.sheet("Ay"));
            fill_b(b.sheet("Bee"));
        }
        return edges(build_graph(load(b)));
    };
    CHECK(make(false) == make(true));
    CHECK(make(false).size() == 7);
}

TEST_CASE("random books: unresolved sources are formulas and cycles match brute force") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        CAPTURE(seed);
        RandomBook book = random_book(seed);
        auto m = load(book.builder);
        auto g = build_graph(m);
        for (const auto& u : g.unresolved()) {
            const CellKey& k = g.nodes()[u.source];
            CHECK(m.sheets[k.sheet].find(k.row, k.column)->content.kind == CellKind::Formula);
        }
        std::set<std::vector<std::string>> got;
        for (auto names : cycle_names(g)) {
            std::sort(names.begin(), names.end());
            got.insert(names);
        }
        CHECK(got == brute_force_cycles(book));

        // Membership is symmetric: each cell sits in at most one reported cycle.
        std::set<std::string> seen;
        for (const auto& c : got)
            for (const auto& n : c) CHECK(seen.insert(n).second);
    }
}
