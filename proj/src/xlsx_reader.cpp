#include "ssaudit/xlsx_reader.hpp"

#include "ssaudit/formula.hpp"
#include "xml_reader.hpp"
#include "zip_archive.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>

namespace ssaudit {

using detail::XmlAttributes;
using detail::XmlNode;
using detail::ZipArchive;

std::string_view load_error_kind_name(LoadErrorKind kind) {
    switch (kind) {
        case LoadErrorKind::NotAZipContainer: return "NotAZipContainer";
        case LoadErrorKind::MissingWorkbookPart: return "MissingWorkbookPart";
        case LoadErrorKind::MalformedSheetXml: return "MalformedSheetXml";
        case LoadErrorKind::UnsupportedEncryptedFile: return "UnsupportedEncryptedFile";
    }
    return "LoadError";
}

namespace {

std::string describe(LoadErrorKind kind, const std::string& detail, const std::string& sheet, std::int64_t offset) {
    std::string out = std::string(load_error_kind_name(kind)) + ": " + detail;
    if (!sheet.empty()) out += " [" + sheet + (offset >= 0 ? " @" + std::to_string(offset) : std::string()) + "]";
    return out;
}

}  // namespace

LoadError::LoadError(LoadErrorKind kind, const std::string& detail, std::string sheet, std::int64_t offset)
    : std::runtime_error(describe(kind, detail, sheet, offset)), kind_(kind), sheet_(std::move(sheet)), offset_(offset) {}

namespace {

constexpr std::string_view kRelOfficeDocument = "/officeDocument";
constexpr std::string_view kRelWorksheet = "/worksheet";
constexpr std::string_view kRelSharedStrings = "/sharedStrings";
constexpr std::string_view kRelStyles = "/styles";
constexpr std::string_view kRelCoreProperties = "/core-properties";

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

struct Relationship {
    std::string type;
    std::string target;
    bool external = false;
};

std::string directory_of(std::string_view part) {
    auto slash = part.rfind('/');
    return slash == std::string_view::npos ? std::string() : std::string(part.substr(0, slash + 1));
}

std::string rels_path_for(std::string_view part) {
    auto slash = part.rfind('/');
    std::string dir = slash == std::string_view::npos ? std::string() : std::string(part.substr(0, slash + 1));
    std::string file(slash == std::string_view::npos ? part : part.substr(slash + 1));
    return dir + "_rels/" + file + ".rels";
}

// Resolves a relationship target against the source part's directory.
std::string resolve_target(const std::string& base_dir, std::string_view target) {
    std::string joined = !target.empty() && target.front() == '/' ? std::string(target.substr(1))
                                                                   : base_dir + std::string(target);
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= joined.size()) {
        auto slash = joined.find('/', start);
        std::string seg = joined.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
        if (seg == "..") {
            if (!parts.empty()) parts.pop_back();
        } else if (!seg.empty() && seg != ".") {
            parts.push_back(seg);
        }
        if (slash == std::string::npos) break;
        start = slash + 1;
    }
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += '/';
        out += p;
    }
    return out;
}

class PackageReader {
public:
    PackageReader(const ZipArchive& zip) : zip_(zip) {}

    bool contains(std::string_view part) const { return zip_.contains(part); }

    XmlNode read_tree(const std::string& part, LoadErrorKind on_error) const {
        auto data = zip_.read(part);
        if (!data) throw LoadError(LoadErrorKind::MissingWorkbookPart, "missing part " + part);
        try {
            return detail::parse_xml_tree(*data);
        } catch (const detail::XmlError& e) {
            throw LoadError(on_error, e.what(), part, e.offset());
        }
    }

    std::map<std::string, Relationship> relationships(const std::string& part) const {
        std::map<std::string, Relationship> out;
        std::string path = rels_path_for(part);
        if (!zip_.contains(path)) return out;
        XmlNode root = read_tree(path, LoadErrorKind::MalformedSheetXml);
        std::string base = directory_of(part);
        for (const XmlNode* rel : root.children_named("Relationship")) {
            Relationship r;
            r.type = std::string(rel->attr("Type").value_or(""));
            r.external = rel->attr("TargetMode").value_or("") == "External";
            std::string_view target = rel->attr("Target").value_or("");
            r.target = r.external ? std::string(target) : resolve_target(base, target);
            out.emplace(std::string(rel->attr("Id").value_or("")), std::move(r));
        }
        return out;
    }

private:
    const ZipArchive& zip_;
};

std::string color_of(const XmlNode* color) {
    if (!color) return {};
    if (auto rgb = color->attr("rgb")) return "rgb:" + to_upper(*rgb);
    if (auto theme = color->attr("theme")) {
        std::string out = "theme:" + std::string(*theme);
        if (auto tint = color->attr("tint")) out += ":" + std::string(*tint);
        return out;
    }
    if (auto idx = color->attr("indexed")) return "indexed:" + std::string(*idx);
    if (color->attr("auto")) return "auto";
    return {};
}

bool flag_on(const XmlNode* n) {
    if (!n) return false;
    auto v = n->attr("val");
    return !v || (*v != "0" && *v != "false");
}

std::vector<StyleRecord> read_styles(const PackageReader& pkg, const std::optional<std::string>& part) {
    std::vector<StyleRecord> styles;
    if (part && pkg.contains(*part)) {
        XmlNode root = pkg.read_tree(*part, LoadErrorKind::MalformedSheetXml);
        std::vector<std::pair<std::string, bool>> fonts;   // color, bold
        std::vector<std::string> fills;
        std::vector<bool> borders;
        if (const XmlNode* fs = root.child("fonts")) {
            for (const XmlNode* f : fs->children_named("font")) fonts.emplace_back(color_of(f->child("color")), flag_on(f->child("b")));
        }
        if (const XmlNode* fs = root.child("fills")) {
            for (const XmlNode* f : fs->children_named("fill")) {
                std::string fill = "none";
                if (const XmlNode* p = f->child("patternFill")) {
                    auto type = p->attr("patternType").value_or("none");
                    if (type != "none") {
                        std::string fg = color_of(p->child("fgColor"));
                        fill = fg.empty() ? std::string(type) : fg;
                    }
                } else if (f->child("gradientFill")) {
                    fill = "gradient";
                }
                fills.push_back(fill);
            }
        }
        if (const XmlNode* bs = root.child("borders")) {
            for (const XmlNode* b : bs->children_named("border")) {
                bool any = false;
                for (const auto& side : b->children) {
                    auto style = side.attr("style");
                    if (style && *style != "none") any = true;
                }
                borders.push_back(any);
            }
        }
        if (const XmlNode* xfs = root.child("cellXfs")) {
            auto index = [](const XmlNode* xf, std::string_view attr) {
                auto v = xf->attr(attr).value_or("0");
                std::size_t i = 0;
                std::from_chars(v.data(), v.data() + v.size(), i);
                return i;
            };
            for (const XmlNode* xf : xfs->children_named("xf")) {
                StyleRecord s;
                std::size_t font = index(xf, "fontId"), fill = index(xf, "fillId"), border = index(xf, "borderId");
                s.fill_color = fill < fills.size() ? fills[fill] : "none";
                if (font < fonts.size()) {
                    s.font_color = fonts[font].first;
                    s.bold = fonts[font].second;
                }
                s.has_border = border < borders.size() && borders[border];
                styles.push_back(std::move(s));
            }
        }
    }
    if (styles.empty()) styles.push_back(StyleRecord{"none", "", false, false});
    return styles;
}

std::vector<std::string> read_shared_strings(const PackageReader& pkg, const std::optional<std::string>& part) {
    std::vector<std::string> out;
    if (!part || !pkg.contains(*part)) return out;
    XmlNode root = pkg.read_tree(*part, LoadErrorKind::MalformedSheetXml);
    for (const XmlNode* si : root.children_named("si")) {
        std::string text;
        for (const auto& child : si->children) {
            if (child.name == "t") text += child.text;
            else if (child.name == "r") {
                if (const XmlNode* t = child.child("t")) text += t->text;
            }
        }
        out.push_back(std::move(text));
    }
    return out;
}

struct ArrayFormula {
    std::uint32_t r1, c1, r2, c2;
    GridPos master;
    std::string text;
};

class SheetHandler final : public detail::XmlHandler {
public:
    SheetHandler(SheetModel& sheet, const std::vector<std::string>& shared, std::size_t style_count)
        : sheet_(sheet), shared_(shared), style_count_(style_count) {}

    void on_start(std::string_view name, const XmlAttributes& attrs) override {
        if (name == "c") {
            begin_cell(attrs);
        } else if (name == "row") {
            if (auto r = detail::find_attr(attrs, "r")) row_ = parse_uint(*r, "row number");
            else ++row_;
            column_ = 0;
            auto hidden = detail::find_attr(attrs, "hidden");
            if (hidden && (*hidden == "1" || *hidden == "true")) sheet_.hidden_rows.insert(row_);
            if (row_ == 0 || row_ > kMaxRows) fail("row outside the sheet grid");
        } else if (name == "col") {
            auto hidden = detail::find_attr(attrs, "hidden");
            if (hidden && (*hidden == "1" || *hidden == "true")) {
                std::uint32_t lo = parse_uint(detail::find_attr(attrs, "min").value_or("0"), "column min");
                std::uint32_t hi = parse_uint(detail::find_attr(attrs, "max").value_or("0"), "column max");
                if (lo == 0 || hi < lo || hi > kMaxColumns) fail("bad hidden column span");
                for (std::uint32_t c = lo; c <= hi; ++c) sheet_.hidden_columns.insert(c);
            }
        } else if (in_cell_) {
            if (name == "v") {
                saw_v_ = true;
                capture_ = &value_;
            }
            else if (name == "f") {
                has_formula_ = true;
                formula_type_ = std::string(detail::find_attr(attrs, "t").value_or("normal"));
                formula_ref_ = std::string(detail::find_attr(attrs, "ref").value_or(""));
                formula_si_ = std::string(detail::find_attr(attrs, "si").value_or(""));
                capture_ = &formula_;
            } else if (name == "t" && in_inline_) {
                capture_ = &inline_;
            } else if (name == "is") {
                in_inline_ = true;
                saw_is_ = true;
            } else if (name == "rPh") {
                capture_ = nullptr;
                in_phonetic_ = true;
            }
        }
    }

    void on_end(std::string_view name) override {
        if (name == "c") {
            end_cell();
        } else if (name == "v" || name == "f" || name == "t") {
            capture_ = nullptr;
        } else if (name == "is") {
            in_inline_ = false;
        } else if (name == "rPh") {
            in_phonetic_ = false;
        }
    }

    void on_text(std::string_view text) override {
        if (capture_ && !in_phonetic_) capture_->append(text);
    }

    void finish() {
        for (const auto& arr : arrays_) {
            for (std::uint32_t r = arr.r1; r <= arr.r2; ++r) {
                auto it = sheet_.cells.lower_bound(GridPos{r, arr.c1});
                for (; it != sheet_.cells.end() && it->first.row == r && it->first.column <= arr.c2; ++it) {
                    if (it->first == arr.master) continue;
                    CellContent& content = it->second.content;
                    if (content.kind == CellKind::Formula) continue;
                    content.kind = CellKind::Formula;
                    content.formula = arr.text;
                }
            }
        }
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw LoadError(LoadErrorKind::MalformedSheetXml, what, sheet_.name, current_offset());
    }

    std::uint32_t parse_uint(std::string_view s, const char* what) const {
        std::uint32_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail(std::string("bad ") + what);
        return v;
    }

    void begin_cell(const XmlAttributes& attrs) {
        in_cell_ = true;
        has_formula_ = false;
        saw_v_ = false;
        saw_is_ = false;
        value_.clear();
        formula_.clear();
        inline_.clear();
        formula_type_.clear();
        formula_ref_.clear();
        formula_si_.clear();
        type_ = std::string(detail::find_attr(attrs, "t").value_or("n"));
        style_ = 0;
        if (auto s = detail::find_attr(attrs, "s")) style_ = parse_uint(*s, "style index");
        if (style_ >= style_count_) style_ = 0;

        if (auto r = detail::find_attr(attrs, "r")) {
            try {
                CellAddress a = parse_address(*r);
                if (!a.sheet_name.empty() || a.col_absolute || a.row_absolute) fail("bad cell reference");
                if (row_ != 0 && a.row != row_) fail("cell outside its row");
                column_ = a.column;
                cell_row_ = a.row;
            } catch (const AddressError&) {
                fail("bad cell reference '" + std::string(*r) + "'");
            }
        } else {
            ++column_;
            cell_row_ = row_;
            if (column_ > kMaxColumns || cell_row_ == 0) fail("cell outside the sheet grid");
        }
    }

    CellValue decode_value(const std::string& raw, bool& present) const {
        present = true;
        if (type_ == "inlineStr") {
            present = saw_is_;
            return inline_;
        }
        if (!saw_v_ || (raw.empty() && type_ != "str")) {
            present = false;
            return std::monostate{};
        }
        if (type_ == "s") {
            std::uint32_t idx = parse_uint(raw, "shared string index");
            if (idx >= shared_.size()) fail("shared string index out of range");
            return shared_[idx];
        }
        if (type_ == "str" || type_ == "d") return raw;
        if (type_ == "b") return raw == "1" || raw == "true";
        if (type_ == "e") {
            if (auto code = parse_error_code(raw)) return *code;
            return raw;
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
        if (ec != std::errc() || ptr != raw.data() + raw.size()) fail("bad numeric value '" + raw + "'");
        return v;
    }

    void end_cell() {
        in_cell_ = false;
        capture_ = nullptr;
        const GridPos pos{cell_row_, column_};

        std::string text = formula_;
        if (!text.empty() && text.front() == '=') text.erase(0, 1);
        if (has_formula_ && formula_type_ == "shared" && !formula_si_.empty()) {
            if (!text.empty()) {
                shared_masters_[formula_si_] = {pos, text};
            } else if (auto it = shared_masters_.find(formula_si_); it != shared_masters_.end()) {
                text = formula::translate_formula(it->second.second, static_cast<long>(pos.row) - it->second.first.row,
                                                  static_cast<long>(pos.column) - it->second.first.column);
            }
        }
        if (has_formula_ && formula_type_ == "array" && !text.empty() && !formula_ref_.empty()) {
            record_array(pos, text);
        }

        bool present = false;
        CellValue value = decode_value(value_, present);

        Cell cell;
        cell.address = CellAddress{sheet_.name, pos.column, pos.row, false, false};
        cell.style_key = style_;
        if (has_formula_ && !text.empty() && formula_type_ != "dataTable") {
            cell.content.kind = CellKind::Formula;
            cell.content.formula = std::move(text);
            if (present) cell.content.value = std::move(value);
        } else if (present) {
            cell.content.value = std::move(value);
            switch (cell.content.value.index()) {
                case 1: cell.content.kind = CellKind::Number; break;
                case 2: cell.content.kind = CellKind::Text; break;
                case 3: cell.content.kind = CellKind::Boolean; break;
                case 4: cell.content.kind = CellKind::ErrorValue; break;
                default: return;
            }
        } else {
            return;   // formatting only
        }
        sheet_.cells[pos] = std::move(cell);
    }

    void record_array(GridPos master, const std::string& text) {
        auto colon = formula_ref_.find(':');
        try {
            CellAddress a = parse_address(formula_ref_.substr(0, colon));
            CellAddress b = colon == std::string::npos ? a : parse_address(formula_ref_.substr(colon + 1));
            arrays_.push_back(ArrayFormula{std::min(a.row, b.row), std::min(a.column, b.column), std::max(a.row, b.row),
                                           std::max(a.column, b.column), master, text});
        } catch (const AddressError&) {
            fail("bad array formula range '" + formula_ref_ + "'");
        }
    }

    SheetModel& sheet_;
    const std::vector<std::string>& shared_;
    std::size_t style_count_;

    std::uint32_t row_ = 0;
    std::uint32_t column_ = 0;
    std::uint32_t cell_row_ = 0;
    bool in_cell_ = false;
    bool in_inline_ = false;
    bool saw_v_ = false;
    bool saw_is_ = false;
    bool in_phonetic_ = false;
    bool has_formula_ = false;
    std::string type_;
    std::uint32_t style_ = 0;
    std::string value_, formula_, inline_;
    std::string formula_type_, formula_ref_, formula_si_;
    std::string* capture_ = nullptr;
    std::unordered_map<std::string, std::pair<GridPos, std::string>> shared_masters_;
    std::vector<ArrayFormula> arrays_;
};

std::vector<ExternalLink> read_external_links(const PackageReader& pkg, const XmlNode& workbook,
                                              const std::map<std::string, Relationship>& rels) {
    std::vector<ExternalLink> out;
    const XmlNode* refs = workbook.child("externalReferences");
    if (!refs) return out;
    for (const XmlNode* ref : refs->children_named("externalReference")) {
        ExternalLink link;
        link.index = out.size() + 1;
        auto rel = rels.find(std::string(ref->attr("id").value_or("")));
        if (rel != rels.end() && pkg.contains(rel->second.target)) {
            XmlNode root = pkg.read_tree(rel->second.target, LoadErrorKind::MalformedSheetXml);
            if (const XmlNode* book = root.child("externalBook")) {
                auto book_rels = pkg.relationships(rel->second.target);
                if (auto it = book_rels.find(std::string(book->attr("id").value_or(""))); it != book_rels.end())
                    link.target = it->second.target;
                if (const XmlNode* names = book->child("sheetNames")) {
                    for (const XmlNode* n : names->children_named("sheetName"))
                        link.sheet_names.emplace_back(n->attr("val").value_or(""));
                }
            }
        }
        link.resolved = !link.target.empty();
        out.push_back(std::move(link));
    }
    return out;
}

SheetVisibility parse_visibility(std::string_view state) {
    if (state == "hidden") return SheetVisibility::Hidden;
    if (state == "veryHidden") return SheetVisibility::VeryHidden;
    return SheetVisibility::Visible;
}

WorkbookModel load_package(const ZipArchive& zip, std::string path) {
    PackageReader pkg(zip);
    WorkbookModel model;
    model.path = std::move(path);

    std::string workbook_part = "xl/workbook.xml";
    std::optional<std::string> core_part;
    for (const auto& [id, rel] : pkg.relationships("")) {
        if (ends_with(rel.type, kRelOfficeDocument)) workbook_part = rel.target;
        if (ends_with(rel.type, kRelCoreProperties)) core_part = rel.target;
    }
    if (!zip.contains(workbook_part)) throw LoadError(LoadErrorKind::MissingWorkbookPart, "no workbook part");
    if (!core_part && zip.contains("docProps/core.xml")) core_part = "docProps/core.xml";

    XmlNode workbook = pkg.read_tree(workbook_part, LoadErrorKind::MalformedSheetXml);
    auto rels = pkg.relationships(workbook_part);

    std::optional<std::string> shared_part, styles_part;
    for (const auto& [id, rel] : rels) {
        if (ends_with(rel.type, kRelSharedStrings)) shared_part = rel.target;
        if (ends_with(rel.type, kRelStyles)) styles_part = rel.target;
    }
    model.styles = read_styles(pkg, styles_part);
    const std::vector<std::string> shared = read_shared_strings(pkg, shared_part);

    const XmlNode* sheets = workbook.child("sheets");
    if (!sheets || sheets->children_named("sheet").empty())
        throw LoadError(LoadErrorKind::MissingWorkbookPart, "workbook lists no sheets");

    for (const XmlNode* s : sheets->children_named("sheet")) {
        SheetModel sheet;
        sheet.name = std::string(s->attr("name").value_or(""));
        sheet.visibility = parse_visibility(s->attr("state").value_or("visible"));
        if (sheet.name.empty() || model.sheet_index(sheet.name))
            throw LoadError(LoadErrorKind::MalformedSheetXml, "missing or duplicate sheet name", workbook_part);
        auto rel = rels.find(std::string(s->attr("id").value_or("")));
        if (rel == rels.end()) throw LoadError(LoadErrorKind::MissingWorkbookPart, "no relationship for sheet " + sheet.name);
        if (ends_with(rel->second.type, kRelWorksheet)) {
            auto data = zip.read(rel->second.target);
            if (!data) throw LoadError(LoadErrorKind::MissingWorkbookPart, "missing sheet part " + rel->second.target);
            SheetHandler handler(sheet, shared, model.styles.size());
            try {
                detail::parse_xml(*data, handler);
            } catch (const detail::XmlError& e) {
                throw LoadError(LoadErrorKind::MalformedSheetXml, e.what(), sheet.name, e.offset());
            }
            handler.finish();
        }
        model.sheets.push_back(std::move(sheet));
    }

    if (const XmlNode* names = workbook.child("definedNames")) {
        for (const XmlNode* n : names->children_named("definedName")) {
            DefinedName dn;
            dn.name = std::string(n->attr("name").value_or(""));
            dn.formula = n->text;
            if (!dn.formula.empty() && dn.formula.front() == '=') dn.formula.erase(0, 1);
            if (auto local = n->attr("localSheetId")) {
                std::size_t idx = 0;
                std::from_chars(local->data(), local->data() + local->size(), idx);
                if (idx < model.sheets.size()) dn.local_sheet = idx;
            }
            if (!dn.name.empty()) model.defined_names.push_back(std::move(dn));
        }
    }

    model.external_links = read_external_links(pkg, workbook, rels);

    if (core_part && zip.contains(*core_part)) {
        XmlNode core = pkg.read_tree(*core_part, LoadErrorKind::MalformedSheetXml);
        if (const XmlNode* created = core.child("created")) {
            if (!created->text.empty()) model.file_creation_date = created->text;
        }
    }
    return model;
}

}  // namespace

WorkbookModel load_workbook_bytes(std::vector<char> bytes, std::string path) {
    try {
        ZipArchive zip(std::move(bytes));
        return load_package(zip, std::move(path));
    } catch (const detail::ZipError& e) {
        switch (e.kind()) {
            case detail::ZipError::Kind::Encrypted: throw LoadError(LoadErrorKind::UnsupportedEncryptedFile, e.what());
            case detail::ZipError::Kind::NotAZip:
            case detail::ZipError::Kind::Corrupt: break;
        }
        throw LoadError(LoadErrorKind::NotAZipContainer, e.what());
    }
}

WorkbookModel load_workbook(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(LoadErrorKind::NotAZipContainer, "cannot open " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_workbook_bytes(std::move(bytes), path.string());
}

}  // namespace ssaudit
