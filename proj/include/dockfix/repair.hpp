#pragma once

#include "dockfix/enricher.hpp"
#include "dockfix/rules.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dockfix {

/// Per-rule mutation recipe.
struct RepairTemplate {
    enum class Action {
        InsertFlag,
        AppendCleanupCommand,
        InsertCommandAfter,
        RewriteLiteral,
        MergeIntoSequence,
    };
    Action action;
    /// Flag text or cleanup command text; "{}" is replaced by the rule's
    /// captured path/archive when present.
    std::string text;
};

struct AppliedRepair {
    std::string rule_id;
    SourceSpan span;
};

struct SkippedRepair {
    std::string rule_id;
    SourceSpan span;
    std::string reason; // SkippedUnsupported | SkippedNonLiteral | SkippedConflict
};

struct RepairOutcome {
    std::vector<AppliedRepair> applied;
    std::vector<SkippedRepair> skipped;
    std::size_t passes = 0;
};

class Repairer {
  public:
    struct Options {
        /// Keyserver host written by the gpgUseHaPools template.
        std::string gpg_keyserver = "ha.pool.sks-keyservers.net";
        std::size_t max_passes = 3;
    };

    explicit Repairer(const Enricher& enricher, Options options = {});

    bool hasTemplate(const std::string& rule_id) const;
    const RepairTemplate* templateFor(const std::string& rule_id) const;

    /// Applies one report's template to the tree it was produced from.
    /// Returns nullopt on success, or the skip reason.
    std::optional<std::string> repairOne(const SmellReport& report, AstNode& root);

    /// Full fixpoint loop: enrich, analyze, repair in span order, repeat
    /// until a pass applies nothing (bounded by max_passes).
    RepairOutcome repairAll(AstNode& root, const std::vector<const SmellRule*>& rules);

  private:
    std::optional<std::string> applyInsertFlag(const SmellReport& report, const std::string& text);
    std::optional<std::string> applyAppendCleanup(const SmellReport& report,
                                                  const std::string& text);
    std::optional<std::string> applyInsertCommandAfter(const SmellReport& report,
                                                       const std::string& text);
    std::optional<std::string> applyRewriteLiteral(const SmellReport& report);
    std::optional<std::string> applyMergeIntoSequence(const SmellReport& report);

    std::optional<std::string> resolveCapture(const SmellReport& report);

    const Enricher* enricher_;
    Options options_;
    /// Literal nodes rewritten in the current pass; a second rewrite of the
    /// same node is a conflict and waits for the next pass.
    std::vector<const AstNode*> rewritten_this_pass_;
};

} // namespace dockfix
