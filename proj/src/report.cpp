#include "ssaudit/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace ssaudit {

using ojson = nlohmann::ordered_json;

std::string_view control_title(ControlId id) {
    switch (id) {
        case ControlId::DataValidity: return "Data Validity Checks";
        case ControlId::PlacementLabels: return "Clear Data Placement and Labels";
        case ControlId::DisplayConstants: return "Display of Constants";
    }
    return "?";
}

int percent_half_up(std::size_t num, std::size_t den) {
    if (den == 0) return 0;
    return static_cast<int>((200 * num + den) / (2 * den));
}

ComplianceMatrix compliance_rates(const std::vector<WorkbookReport>& reports) {
    ComplianceMatrix m;
    for (ControlId id : kAllControls) m.rates[id] = {};
    for (const WorkbookReport& r : reports) {
        if (r.error) {
            m.failed.push_back(r.path);
            continue;
        }
        ComplianceRow row{r.path, {}};
        std::size_t passed = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            ControlId id = kAllControls[i];
            auto it = r.verdicts.find(id);
            row.verdicts[i] = it == r.verdicts.end() ? VerdictValue::No : it->second.value;
            bool ok = row.verdicts[i] != VerdictValue::No;
            m.rates[id].audited++;
            m.rates[id].compliant += ok;
            passed += ok;
        }
        m.all_three += passed == 3;
        m.none += passed == 0;
        m.rows.push_back(std::move(row));
        m.audited++;
    }
    if (m.audited == 0) throw EmptyCorpus();
    std::sort(m.rows.begin(), m.rows.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    std::sort(m.failed.begin(), m.failed.end());
    return m;
}

ScanResult make_scan_result(std::vector<WorkbookReport> reports, const ControlConfig& config) {
    ScanResult result;
    result.config_digest = config.digest();
    std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    result.reports = std::move(reports);
    try {
        result.summary = compliance_rates(result.reports);
    } catch (const EmptyCorpus&) {
        result.summary.reset();
    }
    return result;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
    if (name == "text") return ReportFormat::Text;
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

ojson verdict_json(const Verdict& v) {
    ojson j = ojson::object();
    j["value"] = std::string(verdict_key(v.value));
    ojson ev = ojson::array();
    for (const Evidence& e : v.evidence) {
        ev.push_back(ojson{{"kind", std::string(evidence_kind_name(e.kind))},
                           {"locus", e.locus},
                           {"excerpt", e.excerpt},
                           {"detail", e.detail}});
    }
    j["evidence"] = ev;
    ojson waivers = ojson::array();
    for (const WaiverCitation& w : v.waivers) {
        waivers.push_back(ojson{{"sub_rule", w.sub_rule}, {"file_pattern", w.file_pattern}, {"justification", w.justification}});
    }
    j["waivers"] = waivers;
    return j;
}

ojson file_json(const WorkbookReport& r) {
    ojson j = ojson::object();
    j["path"] = r.path;
    j["created"] = r.creation_date ? ojson(*r.creation_date) : ojson(nullptr);
    j["occupied_cells"] = r.occupied_cells;
    j["calculation_cells"] = r.calculation_cells;
    ojson verdicts = ojson::object();
    for (ControlId id : kAllControls) {
        auto it = r.verdicts.find(id);
        if (it != r.verdicts.end()) verdicts[std::string(control_key(id))] = verdict_json(it->second);
    }
    j["verdicts"] = verdicts;
    j["warnings"] = r.warnings;
    j["error"] = r.error ? ojson(*r.error) : ojson(nullptr);
    return j;
}

ojson summary_json(const ComplianceMatrix& m) {
    ojson j = ojson::object();
    j["audited"] = m.audited;
    ojson rates = ojson::object();
    for (ControlId id : kAllControls) {
        const ComplianceRate& rate = m.rates.at(id);
        rates[std::string(control_key(id))] =
            ojson{{"fraction", ojson::array({rate.compliant, rate.audited})}, {"percent", rate.percent()}};
    }
    j["rates"] = rates;
    j["all_three"] = m.all_three;
    j["none"] = m.none;
    j["failed"] = m.failed;
    return j;
}

[[noreturn]] void schema_error(const std::string& what) { throw std::runtime_error("report JSON: " + what); }

const ojson& field(const ojson& obj, const char* key) {
    if (!obj.is_object()) schema_error(std::string("expected an object around \"") + key + "\"");
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(std::string("missing \"") + key + "\"");
    return *it;
}

std::string str(const ojson& obj, const char* key) {
    const ojson& v = field(obj, key);
    if (!v.is_string()) schema_error(std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
}

std::size_t count(const ojson& obj, const char* key) {
    const ojson& v = field(obj, key);
    if (!v.is_number_unsigned()) schema_error(std::string("\"") + key + "\" must be a non-negative integer");
    return v.get<std::size_t>();
}

std::optional<std::string> nullable_str(const ojson& obj, const char* key) {
    const ojson& v = field(obj, key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) schema_error(std::string("\"") + key + "\" must be a string or null");
    return v.get<std::string>();
}

Verdict parse_verdict(const ojson& j) {
    Verdict v;
    auto value = parse_verdict_key(str(j, "value"));
    if (!value) schema_error("bad verdict value");
    v.value = *value;
    for (const ojson& e : field(j, "evidence")) {
        auto kind = parse_evidence_kind(str(e, "kind"));
        if (!kind) schema_error("bad evidence kind");
        v.evidence.push_back(Evidence{*kind, str(e, "locus"), str(e, "excerpt"), str(e, "detail")});
    }
    if (j.contains("waivers")) {
        for (const ojson& w : j.at("waivers"))
            v.waivers.push_back({str(w, "sub_rule"), str(w, "file_pattern"), str(w, "justification")});
    }
    return v;
}

}  // namespace

std::string render_json(const ScanResult& result) {
    ojson doc = ojson::object();
    doc["tool_version"] = result.tool_version;
    doc["config_digest"] = result.config_digest;
    ojson files = ojson::array();
    for (const WorkbookReport& r : result.reports) files.push_back(file_json(r));
    doc["files"] = files;
    doc["summary"] = result.summary ? summary_json(*result.summary) : ojson(nullptr);
    return doc.dump(2, ' ', false, ojson::error_handler_t::replace) + "\n";
}

ScanResult parse_json_report(std::string_view text) {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        schema_error(e.what());
    }
    ScanResult result;
    result.tool_version = str(doc, "tool_version");
    result.config_digest = str(doc, "config_digest");
    for (const ojson& f : field(doc, "files")) {
        WorkbookReport r;
        r.path = str(f, "path");
        r.creation_date = nullable_str(f, "created");
        r.occupied_cells = count(f, "occupied_cells");
        r.calculation_cells = count(f, "calculation_cells");
        for (const auto& [key, value] : field(f, "verdicts").items()) {
            auto id = parse_control_key(key);
            if (!id) schema_error("unknown control \"" + key + "\"");
            r.verdicts[*id] = parse_verdict(value);
        }
        for (const ojson& w : field(f, "warnings")) r.warnings.push_back(w.get<std::string>());
        r.error = nullable_str(f, "error");
        result.reports.push_back(std::move(r));
    }
    const ojson& summary = field(doc, "summary");
    if (!summary.is_null()) {
        ComplianceMatrix m = compliance_rates(result.reports);
        if (m.audited != count(summary, "audited") || m.all_three != count(summary, "all_three") ||
            m.none != count(summary, "none"))
            schema_error("summary disagrees with the file records");
        for (ControlId id : kAllControls) {
            const ojson& frac = field(field(field(summary, "rates"), std::string(control_key(id)).c_str()), "fraction");
            if (!frac.is_array() || frac.size() != 2 || frac[0].get<std::size_t>() != m.rates[id].compliant ||
                frac[1].get<std::size_t>() != m.rates[id].audited)
                schema_error("rate for " + std::string(control_key(id)) + " disagrees with the file records");
        }
        result.summary = std::move(m);
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string csv_field(std::string_view v) {
    if (v.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(v);
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string render_csv(const ScanResult& result) {
    std::string out = "path,created,occupied_cells,calculation_cells";
    for (ControlId id : kAllControls) out += "," + std::string(control_key(id));
    out += ",evidence_count,error\r\n";
    for (const WorkbookReport& r : result.reports) {
        out += csv_field(r.path) + "," + csv_field(r.creation_date.value_or("")) + "," + std::to_string(r.occupied_cells) +
               "," + std::to_string(r.calculation_cells);
        std::size_t evidence = 0;
        for (ControlId id : kAllControls) {
            auto it = r.verdicts.find(id);
            out += ",";
            if (it != r.verdicts.end()) {
                out += verdict_key(it->second.value);
                evidence += it->second.evidence.size();
            }
        }
        out += "," + std::to_string(evidence) + "," + csv_field(r.error.value_or("")) + "\r\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text
// ---------------------------------------------------------------------------

namespace {

std::string table_value(VerdictValue v) {
    switch (v) {
        case VerdictValue::Yes: return "Yes";
        case VerdictValue::No: return "No";
        case VerdictValue::YesWaived: return "Yes*";
    }
    return "?";
}

std::string grouped(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return out;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string lpad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

}  // namespace

std::string render_text(const ScanResult& result) {
    std::ostringstream out;
    out << "ssaudit " << result.tool_version << "  (config " << result.config_digest << ")\n\n";

    std::size_t path_width = 4;
    for (const auto& r : result.reports) path_width = std::max(path_width, r.path.size());
    const std::size_t control_width = 33;

    out << pad("File", path_width) << "  " << pad("Created", 20) << "  " << lpad("Occupied", 10) << "  "
        << lpad("Calculation", 11);
    for (ControlId id : kAllControls) out << "  " << pad(std::string(control_title(id)), control_width);
    out << "\n";

    bool any_waived = false;
    for (const auto& r : result.reports) {
        out << pad(r.path, path_width) << "  " << pad(r.creation_date.value_or("-"), 20) << "  ";
        if (r.error) {
            out << "load failed: " << *r.error << "\n";
            continue;
        }
        out << lpad(grouped(r.occupied_cells), 10) << "  " << lpad(grouped(r.calculation_cells), 11);
        for (ControlId id : kAllControls) {
            VerdictValue v = r.verdicts.at(id).value;
            any_waived |= v == VerdictValue::YesWaived;
            out << "  " << pad(table_value(v), control_width);
        }
        out << "\n";
    }
    if (any_waived) out << "\n* Yes*: the failing criterion is waived by configuration; see the waiver notes below.\n";
    out << "Occupied cells: cells holding a value or a formula; formatting-only cells are not counted.\n";

    bool header = false;
    for (const auto& r : result.reports) {
        if (r.error) continue;
        bool has_detail = !r.warnings.empty();
        for (const auto& [id, v] : r.verdicts) has_detail |= !v.evidence.empty() || !v.waivers.empty();
        if (!has_detail) continue;
        if (!header) {
            out << "\nFindings\n";
            header = true;
        }
        out << "\n" << r.path << "\n";
        for (ControlId id : kAllControls) {
            const Verdict& v = r.verdicts.at(id);
            if (v.evidence.empty() && v.waivers.empty()) continue;
            out << "  " << control_title(id) << ": " << table_value(v.value) << "\n";
            for (const Evidence& e : v.evidence) {
                out << "    " << evidence_kind_name(e.kind) << "  " << e.locus;
                if (!e.excerpt.empty()) out << "  [" << e.excerpt << "]";
                out << "  " << e.detail << "\n";
            }
            for (const WaiverCitation& w : v.waivers)
                out << "    waived " << w.sub_rule << " (" << w.file_pattern << "): " << w.justification << "\n";
        }
        for (const auto& w : r.warnings) out << "  note: " << w << "\n";
    }

    if (result.summary) {
        const ComplianceMatrix& m = *result.summary;
        out << "\nRate of compliance (" << m.audited << " workbook" << (m.audited == 1 ? "" : "s") << " audited)\n";
        for (ControlId id : kAllControls) {
            const ComplianceRate& rate = m.rates.at(id);
            out << "  " << pad(std::string(control_title(id)), control_width) << lpad(std::to_string(rate.compliant), 5)
                << "/" << pad(std::to_string(rate.audited), 5) << lpad(std::to_string(rate.percent()) + "%", 5) << "\n";
        }
        out << "  " << pad("All three controls", control_width) << lpad(std::to_string(m.all_three), 5) << "/"
            << pad(std::to_string(m.audited), 5) << lpad(std::to_string(percent_half_up(m.all_three, m.audited)) + "%", 5)
            << "\n";
        out << "  " << pad("None of the controls", control_width) << lpad(std::to_string(m.none), 5) << "/"
            << pad(std::to_string(m.audited), 5) << lpad(std::to_string(percent_half_up(m.none, m.audited)) + "%", 5) << "\n";
        if (!m.failed.empty()) {
            out << "  Not audited (load failure): " << m.failed.size() << "\n";
            for (const auto& p : m.failed) out << "    " << p << "\n";
        }
    } else {
        out << "\nNo workbook could be audited.\n";
    }
    return out.str();
}

std::string render_report(const ScanResult& result, ReportFormat format) {
    switch (format) {
        case ReportFormat::Text: return render_text(result);
        case ReportFormat::Json: return render_json(result);
        case ReportFormat::Csv: return render_csv(result);
    }
    return {};
}

int scan_exit_code(const ScanResult& result) {
    int code = 0;
    for (const auto& r : result.reports) {
        if (r.error) return 2;
        for (const auto& [id, v] : r.verdicts)
            if (v.value == VerdictValue::No) code = 1;
    }
    return code;
}

}  // namespace ssaudit
