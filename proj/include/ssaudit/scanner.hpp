#pragma once

#include "ssaudit/report.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ssaudit {

/// Expands command-line paths: files are taken as given, directories are
/// walked recursively for *.xlsx, skipping "~$" lock files and hidden
/// directories. The result is sorted and free of duplicates.
std::vector<std::filesystem::path> collect_inputs(const std::vector<std::string>& args);

/// Audits `files` on up to `jobs` threads (0 = hardware concurrency).
/// Reports come back sorted by path whatever the thread count.
std::vector<WorkbookReport> audit_files(const std::vector<std::filesystem::path>& files, const ControlConfig& config,
                                        unsigned jobs = 0);

ScanResult scan(const std::vector<std::string>& args, const ControlConfig& config, unsigned jobs = 0);

}  // namespace ssaudit
