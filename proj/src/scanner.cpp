#include "ssaudit/scanner.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace ssaudit {

namespace fs = std::filesystem;

namespace {

bool is_xlsx(const fs::path& p) { return iequals(p.extension().string(), ".xlsx"); }

bool is_lock_file(const fs::path& p) { return p.filename().string().rfind("~$", 0) == 0; }

bool is_hidden(const fs::path& p) {
    std::string name = p.filename().string();
    return name.size() > 1 && name[0] == '.' && name != "..";
}

}  // namespace

std::vector<fs::path> collect_inputs(const std::vector<std::string>& args) {
    std::vector<fs::path> out;
    for (const std::string& arg : args) {
        fs::path root(arg);
        std::error_code ec;
        if (!fs::is_directory(root, ec)) {
            out.push_back(root);
            continue;
        }
        fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec), end;
        for (; !ec && it != end; it.increment(ec)) {
            const fs::directory_entry& entry = *it;
            if (entry.is_directory(ec)) {
                if (is_hidden(entry.path())) it.disable_recursion_pending();
                continue;
            }
            if (entry.is_regular_file(ec) && is_xlsx(entry.path()) && !is_lock_file(entry.path()))
                out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<WorkbookReport> audit_files(const std::vector<fs::path>& files, const ControlConfig& config, unsigned jobs) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(files.size(), 1)));

    std::vector<WorkbookReport> reports(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) reports[i] = audit_file(files[i], config);
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    }
    std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return reports;
}

ScanResult scan(const std::vector<std::string>& args, const ControlConfig& config, unsigned jobs) {
    return make_scan_result(audit_files(collect_inputs(args), config, jobs), config);
}

}  // namespace ssaudit
