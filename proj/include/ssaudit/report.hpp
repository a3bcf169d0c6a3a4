#pragma once

#include "ssaudit/controls.hpp"

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssaudit {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Human title used in tables ("Data Validity Checks", ...).
std::string_view control_title(ControlId id);

/// round(100 * num / den) with halves rounded up, in integer arithmetic.
int percent_half_up(std::size_t num, std::size_t den);

struct ComplianceRate {
    std::size_t compliant = 0;
    std::size_t audited = 0;
    int percent() const { return percent_half_up(compliant, audited); }
    bool operator==(const ComplianceRate&) const = default;
};

struct ComplianceRow {
    std::string path;
    std::array<VerdictValue, 3> verdicts{};   // in kAllControls order
    bool operator==(const ComplianceRow&) const = default;
};

struct ComplianceMatrix {
    std::vector<ComplianceRow> rows;   // loadable files, sorted by path
    std::map<ControlId, ComplianceRate> rates;
    std::size_t audited = 0;
    std::size_t all_three = 0;
    std::size_t none = 0;
    std::vector<std::string> failed;   // paths that did not load
    bool operator==(const ComplianceMatrix&) const = default;
};

class EmptyCorpus : public std::runtime_error {
public:
    EmptyCorpus() : std::runtime_error("EmptyCorpus: no workbook could be audited") {}
};

/// Throws EmptyCorpus when no report loaded.
ComplianceMatrix compliance_rates(const std::vector<WorkbookReport>& reports);

/// A full scan: per-file reports (sorted by path) plus the corpus summary.
struct ScanResult {
    std::string tool_version{kToolVersion};
    std::string config_digest;
    std::vector<WorkbookReport> reports;
    std::optional<ComplianceMatrix> summary;   // absent when nothing loaded
    bool operator==(const ScanResult&) const = default;
};

/// Builds the summary (if possible) and sorts reports by path.
ScanResult make_scan_result(std::vector<WorkbookReport> reports, const ControlConfig& config);

enum class ReportFormat { Text, Json, Csv };
std::optional<ReportFormat> parse_report_format(std::string_view name);

std::string render_json(const ScanResult& result);
std::string render_text(const ScanResult& result);
std::string render_csv(const ScanResult& result);
std::string render_report(const ScanResult& result, ReportFormat format);

/// Inverse of render_json. Throws std::runtime_error on schema violations.
ScanResult parse_json_report(std::string_view text);

/// Exit status for a finished scan: 2 if any file failed to load, else 1 if
/// any verdict is NO, else 0.
int scan_exit_code(const ScanResult& result);

}  // namespace ssaudit
