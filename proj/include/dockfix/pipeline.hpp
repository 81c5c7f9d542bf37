#pragma once

#include "dockfix/enricher.hpp"
#include "dockfix/parser.hpp"
#include "dockfix/printer.hpp"
#include "dockfix/repair.hpp"
#include "dockfix/rules.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace dockfix {

struct RunConfig {
    enum class Output { Text, Json };
    enum class WriteMode { DiffToStdout, InPlace, PatchDir };

    std::vector<std::string> rules_include;
    std::vector<std::string> rules_exclude;
    Output output = Output::Text;
    WriteMode write_mode = WriteMode::DiffToStdout;
    std::string patch_dir;
    int fail_threshold = 1;
    std::size_t jobs = 0; // 0 = auto
    std::size_t diff_context = 3;
    std::string schema_file;
    std::string gpg_keyserver = "ha.pool.sks-keyservers.net";
};

struct SmellEntry {
    std::string rule_id;
    std::size_t line = 0;
    std::size_t column = 0;
    std::string message;
};

struct StageTimingsMs {
    double parse = 0;
    double enrich = 0;
    double analyze = 0;
    double repair = 0;
    double reanalyze = 0;
    double print = 0;
    double diff = 0;

    double total() const { return parse + enrich + analyze + repair + reanalyze + print + diff; }
};

struct FileReport {
    std::string path;
    std::vector<ParseDiagnostic> diagnostics;
    bool parse_error = false;
    EnrichmentStats enrichment;
    std::vector<SmellEntry> smells;          // analysis result (pre-repair)
    std::vector<SmellEntry> residual_smells; // post-repair re-analysis
    RepairOutcome repairs;
    StageTimingsMs timing;
    bool changed = false;
    bool roundtrip_ok = true;
    std::string original_text;
    std::string repaired_text;
    std::string diff_text;
};

/// One configured detect/repair engine, shareable across files and threads.
class Pipeline {
  public:
    explicit Pipeline(RunConfig config);

    const RunConfig& config() const { return config_; }
    const Enricher& enricher() const { return enricher_; }
    const RuleSet& ruleSet() const { return *rules_; }
    const std::vector<const SmellRule*>& selectedRules() const { return selected_; }

    /// Steps 1-3: parse, enrich, analyze.
    FileReport analyzeText(const std::string& path_label, std::string text) const;

    /// Steps 1-5: parse, enrich, analyze, repair to fixpoint, reprint, diff.
    FileReport repairText(const std::string& path_label, std::string text) const;

  private:
    RunConfig config_;
    Enricher enricher_;
    std::unique_ptr<RuleSet> rules_;
    std::vector<const SmellRule*> selected_;
};

/// Expands files/directories to candidate Dockerfiles. Directory walks keep
/// only filenames containing "Dockerfile" (case sensitive); explicitly named
/// files are always kept. Missing paths are reported in `errors`.
std::vector<std::string> collectCandidateFiles(const std::vector<std::string>& inputs,
                                               std::vector<std::string>& errors);

/// Runs a batch with a bounded worker pool; reports come back sorted by path.
std::vector<FileReport> runBatch(const Pipeline& pipeline,
                                 const std::vector<std::string>& files, bool repair_mode);

std::string reportToJson(const std::vector<FileReport>& reports, bool repair_mode);
void printTextReport(std::ostream& out, const FileReport& report, bool repair_mode);

/// Exit code policy: 2 on any parse error; analyze: 1 when total smells
/// reach the fail threshold; repair: 1 when residual smells remain.
int exitCodeForAnalyze(const std::vector<FileReport>& reports, int fail_threshold);
int exitCodeForRepair(const std::vector<FileReport>& reports);

} // namespace dockfix
