#include "dockfix/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

namespace fs = std::filesystem;

std::vector<std::string> splitCsv(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) {
            comma = csv.size();
        }
        std::string item = csv.substr(pos, comma - pos);
        if (!item.empty()) {
            out.push_back(item);
        }
        pos = comma + 1;
    }
    return out;
}

/// DOCKFIX_RULE_CONFIG points at a JSON file with default include/exclude
/// lists, applied when the command line does not select rules itself.
void applyEnvRuleConfig(dockfix::RunConfig& cfg) {
    const char* path = std::getenv("DOCKFIX_RULE_CONFIG");
    if (path == nullptr || !cfg.rules_include.empty() || !cfg.rules_exclude.empty()) {
        return;
    }
    std::ifstream in(path);
    if (!in) {
        std::cerr << "warning: DOCKFIX_RULE_CONFIG file not readable: " << path << "\n";
        return;
    }
    try {
        nlohmann::json doc;
        in >> doc;
        for (const auto& r : doc.value("include", nlohmann::json::array())) {
            cfg.rules_include.push_back(r.get<std::string>());
        }
        for (const auto& r : doc.value("exclude", nlohmann::json::array())) {
            cfg.rules_exclude.push_back(r.get<std::string>());
        }
    } catch (const std::exception& e) {
        std::cerr << "warning: invalid DOCKFIX_RULE_CONFIG: " << e.what() << "\n";
    }
}

int runAnalyze(const dockfix::RunConfig& cfg, const std::vector<std::string>& inputs) {
    std::vector<std::string> errors;
    auto files = dockfix::collectCandidateFiles(inputs, errors);
    for (const auto& e : errors) {
        std::cerr << "error: " << e << "\n";
    }
    if (files.empty()) {
        std::cerr << "error: no candidate Dockerfiles found\n";
        return 2;
    }
    dockfix::Pipeline pipeline(cfg);
    auto reports = dockfix::runBatch(pipeline, files, /*repair_mode=*/false);
    if (cfg.output == dockfix::RunConfig::Output::Json) {
        std::cout << dockfix::reportToJson(reports, false) << "\n";
    } else {
        std::size_t total = 0;
        for (const auto& r : reports) {
            dockfix::printTextReport(std::cout, r, false);
            total += r.smells.size();
        }
        std::cout << reports.size() << " file(s) analyzed, " << total << " smell(s) found\n";
    }
    return dockfix::exitCodeForAnalyze(reports, cfg.fail_threshold);
}

int runRepair(const dockfix::RunConfig& cfg, const std::vector<std::string>& inputs) {
    std::vector<std::string> errors;
    auto files = dockfix::collectCandidateFiles(inputs, errors);
    for (const auto& e : errors) {
        std::cerr << "error: " << e << "\n";
    }
    if (files.empty()) {
        std::cerr << "error: no candidate Dockerfiles found\n";
        return 2;
    }
    dockfix::Pipeline pipeline(cfg);
    auto reports = dockfix::runBatch(pipeline, files, /*repair_mode=*/true);

    for (auto& report : reports) {
        if (report.parse_error || !report.changed) {
            continue;
        }
        switch (cfg.write_mode) {
        case dockfix::RunConfig::WriteMode::InPlace: {
            if (!report.roundtrip_ok) {
                std::cerr << report.path
                          << ": refusing in-place write, round-trip check failed\n";
                report.diagnostics.push_back({dockfix::Severity::Error,
                                              "in-place write refused (WriteFailure): "
                                              "round-trip check failed",
                                              {}});
                continue;
            }
            std::ofstream out(report.path, std::ios::binary | std::ios::trunc);
            if (!out) {
                std::cerr << report.path << ": write failed\n";
                report.diagnostics.push_back(
                    {dockfix::Severity::Error, "WriteFailure: cannot open for writing", {}});
                continue;
            }
            out << report.repaired_text;
            break;
        }
        case dockfix::RunConfig::WriteMode::PatchDir: {
            fs::path dir(cfg.patch_dir);
            std::error_code ec;
            fs::create_directories(dir, ec);
            fs::path name = fs::path(report.path).filename();
            fs::path target = dir / (name.string() + ".patch");
            // Avoid collisions between same-named files from different dirs.
            int suffix = 1;
            while (fs::exists(target)) {
                target = dir / (name.string() + "." + std::to_string(suffix++) + ".patch");
            }
            std::ofstream out(target, std::ios::binary);
            out << dockfix::unifiedDiff(report.original_text, report.repaired_text,
                                        cfg.diff_context, "a/" + report.path,
                                        "b/" + report.path);
            break;
        }
        case dockfix::RunConfig::WriteMode::DiffToStdout:
            if (cfg.output != dockfix::RunConfig::Output::Json) {
                std::cout << dockfix::unifiedDiff(report.original_text, report.repaired_text,
                                                  cfg.diff_context, "a/" + report.path,
                                                  "b/" + report.path);
            }
            break;
        }
    }

    if (cfg.output == dockfix::RunConfig::Output::Json) {
        std::cout << dockfix::reportToJson(reports, true) << "\n";
    } else {
        for (const auto& r : reports) {
            dockfix::printTextReport(std::cout, r, true);
        }
    }
    return dockfix::exitCodeForRepair(reports);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dockfix: detect and repair Dockerfile smells"};
    app.require_subcommand(1);

    dockfix::RunConfig cfg;
    std::vector<std::string> inputs;
    std::string rules_csv;
    std::string exclude_csv;
    std::string format = "text";

    auto addCommon = [&](CLI::App* cmd) {
        cmd->add_option("paths", inputs, "Files or directories to process")->required();
        cmd->add_option("--rules", rules_csv, "Comma-separated rule ids to run");
        cmd->add_option("--exclude-rules", exclude_csv, "Comma-separated rule ids to skip");
        cmd->add_option("--format", format, "Output format: text or json")
            ->check(CLI::IsMember({"text", "json"}));
        cmd->add_option("--schema", cfg.schema_file, "Extra command schema file (JSON)");
        cmd->add_option("--jobs", cfg.jobs, "Worker threads (0 = auto)");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "Detect smells");
    addCommon(analyze);
    analyze->add_option("--fail-threshold", cfg.fail_threshold,
                        "Smell count that makes the exit code nonzero");

    CLI::App* repair = app.add_subcommand("repair", "Detect and repair smells");
    addCommon(repair);
    bool in_place = false;
    bool diff_out = false;
    std::string patch_dir;
    auto* opt_in_place = repair->add_flag("--in-place", in_place, "Rewrite files in place");
    auto* opt_diff = repair->add_flag("--diff", diff_out, "Print unified diffs to stdout");
    auto* opt_patch =
        repair->add_option("--patch-dir", patch_dir, "Write .patch files to this directory");
    opt_in_place->excludes(opt_diff);
    opt_in_place->excludes(opt_patch);
    opt_diff->excludes(opt_patch);
    repair->add_option("--context", cfg.diff_context, "Diff context lines");
    repair->add_option("--gpg-keyserver", cfg.gpg_keyserver,
                       "Keyserver host written by the gpgUseHaPools repair");

    CLI11_PARSE(app, argc, argv);

    cfg.rules_include = splitCsv(rules_csv);
    cfg.rules_exclude = splitCsv(exclude_csv);
    applyEnvRuleConfig(cfg);
    cfg.output = format == "json" ? dockfix::RunConfig::Output::Json
                                  : dockfix::RunConfig::Output::Text;

    try {
        if (analyze->parsed()) {
            return runAnalyze(cfg, inputs);
        }
        if (in_place) {
            cfg.write_mode = dockfix::RunConfig::WriteMode::InPlace;
        } else if (!patch_dir.empty()) {
            cfg.write_mode = dockfix::RunConfig::WriteMode::PatchDir;
            cfg.patch_dir = patch_dir;
        } else {
            cfg.write_mode = dockfix::RunConfig::WriteMode::DiffToStdout;
        }
        return runRepair(cfg, inputs);
    } catch (const dockfix::UnknownRuleId& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
