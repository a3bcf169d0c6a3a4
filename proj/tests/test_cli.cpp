#include "fixture_corpus.hpp"

#include "ssaudit/cli.hpp"
#include "ssaudit/scanner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace ssaudit;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "ssaudit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

/// A scratch directory removed when the test ends.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("ssaudit-cli-" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path write(const std::string& name, const std::string& bytes) const {
        std::ofstream(dir / name, std::ios::binary) << bytes;
        return dir / name;
    }
};

fixtures::XlsxBuilder tidy_book() {
    fixtures::XlsxBuilder b;
    std::uint32_t input = b.style(fixtures::CellStyle{"FFDDEBF7", "FF0000FF", false});
    auto& s = b.sheet("Model");
    s.text("A1", "Price").number("B1", 4, input).text("A2", "Units").number("B2", 10, input).text("A3", "Revenue").formula("B3", "B1*B2");
    return b;
}

}  // namespace

TEST_CASE("cli: file that is not a workbook") {
    Scratch s("bad");
    auto p = s.write("notes.xlsx", "plain text, not a zip");
    auto r = run({"scan", p.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("NotAZipContainer") != std::string::npos);
}

TEST_CASE("cli: compliant workbook and report formats") {
    Scratch s("tidy");
    auto p = s.dir / "tidy.xlsx";
    tidy_book().save(p);
    auto text = run({"scan", p.string()});
    CHECK(text.code == 1);   // no check cells at all
    CHECK(text.out.find("Rate of compliance") != std::string::npos);

    auto cfg = s.write("cfg.json", R"({"waivers": [{"file_pattern": "tidy.xlsx", "control": "data_validity",
        "sub_rule": "input_check", "justification": "tiny model"},
        {"file_pattern": "tidy.xlsx", "control": "data_validity", "sub_rule": "output_check", "justification": "tiny model"}]})");
    auto ok = run({"scan", p.string(), "--config", cfg.string(), "--format", "json"});
    CHECK(ok.code == 0);
    auto doc = nlohmann::json::parse(ok.out);
    CHECK(doc["files"][0]["verdicts"]["data_validity"]["value"] == "yes_waived");

    auto csv = run({"scan", s.dir.string(), "--format", "csv", "--out", (s.dir / "out.csv").string()});
    CHECK(csv.code == 1);
    CHECK(csv.out.empty());
    CHECK(fs::file_size(s.dir / "out.csv") > 0);
}

TEST_CASE("cli: configuration errors") {
    Scratch s("cfg");
    auto p = s.dir / "tidy.xlsx";
    tidy_book().save(p);
    auto cfg = s.write("cfg.json", R"({"max_buried": 3})");
    auto r = run({"scan", p.string(), "--config", cfg.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("max_buried") != std::string::npos);
    CHECK(run({"scan", p.string(), "--config", (s.dir / "missing.json").string()}).code == 3);
    CHECK(run({"scan", p.string(), "--format", "xml"}).code == 3);
    CHECK(run({"frobnicate"}).code == 3);

    ::setenv("SSAUDIT_CONFIG", cfg.c_str(), 1);
    CHECK(run({"scan", p.string()}).code == 3);
    ::unsetenv("SSAUDIT_CONFIG");
    CHECK(run({"scan", p.string()}).code == 1);
}

TEST_CASE("cli: metrics and explain") {
    Scratch s("metrics");
    auto p = s.dir / "tidy.xlsx";
    tidy_book().save(p);
    auto m = run({"metrics", p.string()});
    CHECK(m.code == 0);
    CHECK(m.out.find("occupied_cells: 6\n") != std::string::npos);
    CHECK(m.out.find("calculation_cells: 1\n") != std::string::npos);
    CHECK(run({"metrics", (s.dir / "nope.xlsx").string()}).code == 2);

    for (const char* c : {"data_validity", "placement_labels", "display_constants"}) {
        auto e = run({"explain", c});
        CHECK(e.code == 0);
        CHECK(e.out.find("YES") != std::string::npos);
    }
    CHECK(run({"explain", "bogus"}).code == 3);
}

TEST_CASE("cli: directory walk skips lock files and hidden directories") {
    Scratch s("walk");
    tidy_book().save(s.dir / "b.xlsx");
    fs::create_directories(s.dir / "sub");
    fs::create_directories(s.dir / ".cache");
    tidy_book().save(s.dir / "sub" / "a.xlsx");
    tidy_book().save(s.dir / ".cache" / "c.xlsx");
    s.write("~$b.xlsx", "lock");
    s.write("readme.txt", "x");
    auto files = collect_inputs({s.dir.string(), (s.dir / "b.xlsx").string()});
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "b.xlsx");
    CHECK(files[1].filename() == "a.xlsx");
}

TEST_CASE("cli: corpus scan") {
    Scratch s("corpus");
    fixtures::write_corpus(s.dir);
    auto cfg = s.write("corpus.json", fixtures::corpus_config_json());
    auto r = run({"scan", s.dir.string(), "--config", cfg.string(), "--format", "json", "--jobs", "2"});
    CHECK(r.code == 1);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["files"].size() == 14);
    CHECK(doc["summary"]["all_three"] == 2);
    CHECK(doc["summary"]["none"] == 5);
}
