#include "dockfix/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace dockfix {

namespace {

namespace fs = std::filesystem;

double msSince(std::chrono::steady_clock::time_point start) {
    auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count();
}

std::vector<SmellEntry> toEntries(const std::vector<SmellReport>& reports) {
    std::vector<SmellEntry> out;
    out.reserve(reports.size());
    for (const auto& r : reports) {
        out.push_back({r.rule_id, r.span.start_line, r.span.start_col, r.message});
    }
    return out;
}

} // namespace

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
    if (!config_.schema_file.empty()) {
        std::string error;
        if (!enricher_.loadSchemaFile(config_.schema_file, error)) {
            throw std::runtime_error(error);
        }
    }
    rules_ = std::make_unique<RuleSet>(enricher_);
    selected_ = rules_->select(config_.rules_include, config_.rules_exclude);
}

FileReport Pipeline::analyzeText(const std::string& path_label, std::string text) const {
    FileReport report;
    report.path = path_label;
    report.original_text = text;

    auto t0 = std::chrono::steady_clock::now();
    ParseResult parsed = parseDockerfile(std::move(text));
    report.timing.parse = msSince(t0);
    report.diagnostics = parsed.diagnostics;
    report.parse_error = parsed.hasErrors();
    if (report.parse_error) {
        return report;
    }

    t0 = std::chrono::steady_clock::now();
    report.enrichment = enricher_.enrich(*parsed.root);
    report.timing.enrich = msSince(t0);

    t0 = std::chrono::steady_clock::now();
    auto smells = analyze(*parsed.root, selected_);
    report.timing.analyze = msSince(t0);
    report.smells = toEntries(smells);
    return report;
}

FileReport Pipeline::repairText(const std::string& path_label, std::string text) const {
    FileReport report;
    report.path = path_label;
    report.original_text = text;

    auto t0 = std::chrono::steady_clock::now();
    ParseResult parsed = parseDockerfile(std::move(text));
    report.timing.parse = msSince(t0);
    report.diagnostics = parsed.diagnostics;
    report.parse_error = parsed.hasErrors();
    if (report.parse_error) {
        return report;
    }

    // Safety valve for in-place writes: the unmodified tree must reprint
    // byte-identically before any mutation is trusted.
    report.roundtrip_ok = print(parsed, PrintMode::preserve()) == *parsed.source;

    t0 = std::chrono::steady_clock::now();
    report.enrichment = enricher_.enrich(*parsed.root);
    report.timing.enrich = msSince(t0);

    t0 = std::chrono::steady_clock::now();
    auto smells = analyze(*parsed.root, selected_);
    report.timing.analyze = msSince(t0);
    report.smells = toEntries(smells);

    t0 = std::chrono::steady_clock::now();
    Repairer::Options options;
    options.gpg_keyserver = config_.gpg_keyserver;
    Repairer repairer(enricher_, options);
    report.repairs = repairer.repairAll(*parsed.root, selected_);
    report.timing.repair = msSince(t0);

    t0 = std::chrono::steady_clock::now();
    enricher_.enrich(*parsed.root);
    auto residual = analyze(*parsed.root, selected_);
    report.timing.reanalyze = msSince(t0);
    report.residual_smells = toEntries(residual);

    t0 = std::chrono::steady_clock::now();
    report.repaired_text = print(parsed, PrintMode::preserve());
    report.timing.print = msSince(t0);

    t0 = std::chrono::steady_clock::now();
    report.diff_text = unifiedDiff(*parsed.source, report.repaired_text,
                                   config_.diff_context);
    report.timing.diff = msSince(t0);
    report.changed = report.repaired_text != *parsed.source;
    return report;
}

std::vector<std::string> collectCandidateFiles(const std::vector<std::string>& inputs,
                                               std::vector<std::string>& errors) {
    std::vector<std::string> files;
    for (const auto& input : inputs) {
        fs::path p(input);
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            for (auto it = fs::recursive_directory_iterator(p, ec);
                 it != fs::recursive_directory_iterator(); it.increment(ec)) {
                if (ec) {
                    break;
                }
                if (!it->is_regular_file(ec)) {
                    continue;
                }
                std::string name = it->path().filename().string();
                if (name.find("Dockerfile") != std::string::npos) {
                    files.push_back(it->path().string());
                }
            }
        } else if (fs::is_regular_file(p, ec)) {
            files.push_back(p.string());
        } else {
            errors.push_back("no such file or directory: " + input);
        }
    }
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    return files;
}

std::vector<FileReport> runBatch(const Pipeline& pipeline,
                                 const std::vector<std::string>& files, bool repair_mode) {
    std::vector<std::string> sorted = files;
    std::sort(sorted.begin(), sorted.end());
    std::vector<FileReport> reports(sorted.size());

    std::size_t jobs = pipeline.config().jobs;
    if (jobs == 0) {
        jobs = std::min<std::size_t>(std::thread::hardware_concurrency(), 8);
        if (jobs == 0) {
            jobs = 1;
        }
    }
    jobs = std::min(jobs, sorted.size() == 0 ? std::size_t(1) : sorted.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= sorted.size()) {
                return;
            }
            const std::string& path = sorted[i];
            std::ifstream in(path, std::ios::binary);
            if (!in) {
                FileReport r;
                r.path = path;
                r.parse_error = true;
                r.diagnostics.push_back(
                    {Severity::Error, "cannot read file", SourceSpan{}});
                reports[i] = std::move(r);
                continue;
            }
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            reports[i] = repair_mode ? pipeline.repairText(path, std::move(text))
                                     : pipeline.analyzeText(path, std::move(text));
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t + 1 < jobs; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return reports;
}

namespace {

nlohmann::json diagnosticsToJson(const std::vector<ParseDiagnostic>& diags) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : diags) {
        arr.push_back({{"severity", std::string(toString(d.severity))},
                       {"message", d.message},
                       {"line", d.span.start_line},
                       {"column", d.span.start_col}});
    }
    return arr;
}

nlohmann::json smellsToJson(const std::vector<SmellEntry>& smells) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : smells) {
        arr.push_back({{"rule_id", s.rule_id},
                       {"line", s.line},
                       {"column", s.column},
                       {"message", s.message}});
    }
    return arr;
}

nlohmann::json fileToJson(const FileReport& r, bool repair_mode) {
    nlohmann::json j;
    j["path"] = r.path;
    j["parse_error"] = r.parse_error;
    j["parse_diagnostics"] = diagnosticsToJson(r.diagnostics);
    j["enrichment"] = {{"total_commands", r.enrichment.total_commands},
                       {"annotated_commands", r.enrichment.annotated_commands},
                       {"coverage_ratio", r.enrichment.coverage_ratio()}};
    j["smells"] = smellsToJson(r.smells);
    j["timing_ms"] = {{"parse", r.timing.parse},     {"enrich", r.timing.enrich},
                      {"analyze", r.timing.analyze}, {"repair", r.timing.repair},
                      {"reanalyze", r.timing.reanalyze}, {"print", r.timing.print},
                      {"diff", r.timing.diff},       {"total", r.timing.total()}};
    if (repair_mode) {
        nlohmann::json applied = nlohmann::json::array();
        for (const auto& a : r.repairs.applied) {
            applied.push_back({{"rule_id", a.rule_id},
                               {"line", a.span.start_line},
                               {"column", a.span.start_col}});
        }
        nlohmann::json skipped = nlohmann::json::array();
        for (const auto& s : r.repairs.skipped) {
            skipped.push_back({{"rule_id", s.rule_id},
                               {"line", s.span.start_line},
                               {"column", s.span.start_col},
                               {"reason", s.reason}});
        }
        j["repairs"] = {{"applied", applied}, {"skipped", skipped}};
        j["residual_smells"] = smellsToJson(r.residual_smells);
        j["changed"] = r.changed;
        j["roundtrip_ok"] = r.roundtrip_ok;
    }
    return j;
}

} // namespace

std::string reportToJson(const std::vector<FileReport>& reports, bool repair_mode) {
    nlohmann::json j;
    j["schema_version"] = "1";
    j["mode"] = repair_mode ? "repair" : "analyze";
    nlohmann::json files = nlohmann::json::array();
    std::size_t total_smells = 0;
    std::size_t parse_errors = 0;
    std::size_t applied = 0;
    std::size_t skipped = 0;
    std::size_t residual = 0;
    for (const auto& r : reports) {
        files.push_back(fileToJson(r, repair_mode));
        total_smells += r.smells.size();
        parse_errors += r.parse_error ? 1 : 0;
        applied += r.repairs.applied.size();
        skipped += r.repairs.skipped.size();
        residual += r.residual_smells.size();
    }
    j["files"] = std::move(files);
    j["summary"] = {{"files", reports.size()},
                    {"parse_errors", parse_errors},
                    {"smells", total_smells},
                    {"applied", applied},
                    {"skipped", skipped},
                    {"residual", residual}};
    return j.dump(2);
}

void printTextReport(std::ostream& out, const FileReport& r, bool repair_mode) {
    for (const auto& d : r.diagnostics) {
        if (d.severity == Severity::Error) {
            out << r.path << ":" << d.span.start_line << ":" << d.span.start_col
                << ": error: " << d.message << "\n";
        }
    }
    for (const auto& s : r.smells) {
        out << r.path << ":" << s.line << ":" << s.column << ": " << s.rule_id << ": "
            << s.message << "\n";
    }
    if (repair_mode) {
        for (const auto& a : r.repairs.applied) {
            out << r.path << ":" << a.span.start_line << ": repaired " << a.rule_id << "\n";
        }
        for (const auto& s : r.repairs.skipped) {
            out << r.path << ":" << s.span.start_line << ": skipped " << s.rule_id << " ("
                << s.reason << ")\n";
        }
    }
}

int exitCodeForAnalyze(const std::vector<FileReport>& reports, int fail_threshold) {
    std::size_t smells = 0;
    for (const auto& r : reports) {
        if (r.parse_error) {
            return 2;
        }
        smells += r.smells.size();
    }
    if (fail_threshold > 0 && smells >= static_cast<std::size_t>(fail_threshold)) {
        return 1;
    }
    return 0;
}

int exitCodeForRepair(const std::vector<FileReport>& reports) {
    bool residual = false;
    for (const auto& r : reports) {
        if (r.parse_error) {
            return 2;
        }
        if (!r.residual_smells.empty()) {
            residual = true;
        }
    }
    return residual ? 1 : 0;
}

} // namespace dockfix
