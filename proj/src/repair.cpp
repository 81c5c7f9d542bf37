#include "dockfix/repair.hpp"

#include "dockfix/parser.hpp"

#include <algorithm>
#include <map>

namespace dockfix {

namespace {

constexpr const char* kSkipUnsupported = "SkippedUnsupported";
constexpr const char* kSkipNonLiteral = "SkippedNonLiteral";
constexpr const char* kSkipConflict = "SkippedConflict";

const std::map<std::string, RepairTemplate>& templates() {
    using Action = RepairTemplate::Action;
    static const std::map<std::string, RepairTemplate> kTemplates = {
        {"npmCacheCleanUseForce", {Action::InsertFlag, "--force"}},
        {"aptGetInstallUseY", {Action::InsertFlag, "-y"}},
        {"aptGetInstallUseNoRec", {Action::InsertFlag, "--no-install-recommends"}},
        {"pipUseNoCacheDir", {Action::InsertFlag, "--no-cache-dir"}},
        {"apkAddUseNoCache", {Action::InsertFlag, "--no-cache"}},
        {"curlUseFlagF", {Action::InsertFlag, "-f"}},
        {"curlUseFlagL", {Action::InsertFlag, "-L"}},
        {"gpgUseBatchFlag", {Action::InsertFlag, "--batch"}},
        {"gemUpdateNoDocument", {Action::InsertFlag, "--no-document"}},
        {"yumInstallForceYes", {Action::InsertFlag, "-y"}},
        {"configureShouldUseBuildFlag",
         {Action::InsertFlag, "--build=\"$(gcc -print-multiarch)\""}},
        {"aptGetInstallThenRmAptLists",
         {Action::AppendCleanupCommand, "rm -rf /var/lib/apt/lists/*"}},
        {"yumInstallRmVarCacheYum", {Action::AppendCleanupCommand, "rm -rf /var/cache/yum"}},
        {"npmCacheCleanAfterInstall",
         {Action::AppendCleanupCommand, "npm cache clean --force"}},
        {"yarnCacheCleanAfterInstall", {Action::AppendCleanupCommand, "yarn cache clean"}},
        {"gemUpdateSystemRmRootGem", {Action::AppendCleanupCommand, "rm -rf /root/.gem"}},
        {"mkdirUsrSrcThenRemove", {Action::AppendCleanupCommand, "rm -rf {}"}},
        {"rmRecursiveAfterMktempD", {Action::AppendCleanupCommand, "rm -rf {}"}},
        {"gpgVerifyAscRmAsc", {Action::AppendCleanupCommand, "rm {}"}},
        {"tarSomethingRmTheSomething", {Action::InsertCommandAfter, "rm {}"}},
        {"curlUseHttpsUrl", {Action::RewriteLiteral, ""}},
        {"wgetUseHttpsUrl", {Action::RewriteLiteral, ""}},
        {"gpgUseHaPools", {Action::RewriteLiteral, ""}},
        {"sha256sumEchoOneSpaces", {Action::RewriteLiteral, ""}},
        {"aptGetUpdatePrecedesInstall", {Action::MergeIntoSequence, "apt-get update"}},
    };
    return kTemplates;
}

SourceSpan anchorAfter(const SourceSpan& s) {
    SourceSpan a;
    a.start_offset = a.end_offset = s.end_offset;
    a.start_line = a.end_line = s.end_line;
    a.start_col = a.end_col = s.end_col;
    return a;
}

SourceSpan anchorBefore(const SourceSpan& s) {
    SourceSpan a;
    a.start_offset = a.end_offset = s.start_offset;
    a.start_line = a.end_line = s.start_line;
    a.start_col = a.end_col = s.start_col;
    return a;
}

void makeSynthetic(AstNode& node, const SourceSpan& anchor) {
    node.setSynthetic(true);
    node.setSpan(anchor);
    node.markModified();
    for (const auto& c : node.children()) {
        makeSynthetic(*c, anchor);
    }
}

/// Word node carrying one argument of literal text.
AstNode::Ptr makeFlagArg(const std::string& text, const SourceSpan& anchor) {
    auto arg = std::make_unique<AstNode>(NodeKind::BashCommandArgs);
    arg->adoptChild(std::make_unique<AstNode>(NodeKind::BashLiteral, text));
    makeSynthetic(*arg, anchor);
    return arg;
}

/// Parses template text into a synthetic command node.
AstNode::Ptr makeCommand(const std::string& text, const SourceSpan& anchor) {
    std::vector<ParseDiagnostic> scratch;
    SourceSpan zero;
    auto script = parseShellFragment(text, zero, scratch);
    if (!script || script->childCount() != 1 ||
        script->child(0).kind() != NodeKind::BashCommand) {
        return nullptr;
    }
    auto cmd = removeNode(script->child(0));
    makeSynthetic(*cmd, anchor);
    return cmd;
}

AstNode::Ptr makeOperatorAnd(const SourceSpan& anchor) {
    auto op = std::make_unique<AstNode>(NodeKind::BashOperatorAnd);
    makeSynthetic(*op, anchor);
    return op;
}

bool isSequenceContainer(NodeKind kind) {
    switch (kind) {
    case NodeKind::BashScript:
    case NodeKind::BashStatementList:
    case NodeKind::BashIfBody:
    case NodeKind::BashElseBody:
    case NodeKind::BashIfCondition:
        return true;
    default:
        return false;
    }
}

bool neighborIsPipe(const AstNode& parent, std::size_t idx) {
    const auto& kids = parent.children();
    if (idx > 0 && kids[idx - 1]->kind() == NodeKind::BashPipe) {
        return true;
    }
    if (idx + 1 < kids.size() && kids[idx + 1]->kind() == NodeKind::BashPipe) {
        return true;
    }
    return false;
}

AstNode* runScopeOf(AstNode& node) {
    for (AstNode* n = &node; n != nullptr; n = n->parent()) {
        if (n->kind() == NodeKind::Run || n->kind() == NodeKind::Cmd ||
            n->kind() == NodeKind::Entrypoint) {
            return n;
        }
    }
    return nullptr;
}

std::string substitute(const std::string& tmpl, const std::string& capture) {
    std::string out = tmpl;
    std::size_t at = out.find("{}");
    if (at != std::string::npos) {
        out.replace(at, 2, capture);
    }
    return out;
}

/// First literal leaf of a word (directly or inside a quoted string).
AstNode* firstLiteralOfWord(AstNode& word) {
    if (word.childCount() == 0) {
        return nullptr;
    }
    AstNode* first = &word.child(0);
    if (first->kind() == NodeKind::BashQuotedString) {
        if (first->childCount() == 0) {
            return nullptr;
        }
        first = &first->child(0);
    }
    return first->kind() == NodeKind::BashLiteral ? first : nullptr;
}

} // namespace

Repairer::Repairer(const Enricher& enricher, Options options)
    : enricher_(&enricher), options_(std::move(options)) {}

bool Repairer::hasTemplate(const std::string& rule_id) const {
    return templates().find(rule_id) != templates().end();
}

const RepairTemplate* Repairer::templateFor(const std::string& rule_id) const {
    auto it = templates().find(rule_id);
    return it == templates().end() ? nullptr : &it->second;
}

std::optional<std::string> Repairer::resolveCapture(const SmellReport& report) {
    AstNode& node = *report.node;
    if (report.rule_id == "tarSomethingRmTheSomething") {
        auto a = tarArchivePath(*enricher_, node);
        if (!a.has_value()) {
            return std::nullopt;
        }
        return a;
    }
    if (report.rule_id == "mkdirUsrSrcThenRemove") {
        return literalPositionalWithPrefix(*enricher_, node, "/usr/src");
    }
    if (report.rule_id == "rmRecursiveAfterMktempD") {
        auto p = literalPositionalWithPrefix(*enricher_, node, "/");
        if (p.has_value() && p->find("XXX") != std::string::npos) {
            return std::nullopt; // template expands to an unknown name
        }
        return p;
    }
    if (report.rule_id == "gpgVerifyAscRmAsc") {
        return gpgVerifiedAscPath(*enricher_, node);
    }
    return std::string();
}

std::optional<std::string> Repairer::applyInsertFlag(const SmellReport& report,
                                                     const std::string& text) {
    AstNode& node = *report.node;
    if (node.kind() != NodeKind::BashCommand) {
        // Embedded string scripts (sh -c "...") are detected but not
        // rewritten in place.
        return kSkipUnsupported;
    }
    auto shape = enricher_->shape(node);
    if (!shape.has_value()) {
        return kSkipUnsupported;
    }
    AstNode* anchor_word = shape->words[shape->last_subcommand_word_index].word;
    std::size_t child_idx = node.indexOf(*anchor_word);
    if (child_idx == static_cast<std::size_t>(-1)) {
        return kSkipUnsupported;
    }
    SourceSpan anchor = anchorAfter(anchor_word->span());
    addChild(node, makeFlagArg(text, anchor), child_idx + 1);
    return std::nullopt;
}

std::optional<std::string> Repairer::applyAppendCleanup(const SmellReport& report,
                                                        const std::string& tmpl) {
    auto capture = resolveCapture(report);
    if (!capture.has_value()) {
        return kSkipNonLiteral;
    }
    std::string text = substitute(tmpl, *capture);
    AstNode* scope = runScopeOf(*report.node);
    if (scope == nullptr) {
        return kSkipUnsupported;
    }
    AstNode* script = scope->getChild(NodeKind::BashScript);
    if (script == nullptr) {
        return kSkipUnsupported;
    }
    // Anchor: the last top-level command that is guaranteed to run.
    auto ordering = evaluateOrdering(*scope);
    AstNode* anchor = nullptr;
    for (const auto& oc : ordering) {
        if (oc.guaranteed && oc.command->parent() == script) {
            anchor = oc.command;
        }
    }
    if (anchor == nullptr) {
        return kSkipUnsupported;
    }
    std::size_t idx = script->indexOf(*anchor);
    SourceSpan pos = anchorAfter(anchor->span());
    auto cleanup = makeCommand(text, pos);
    if (!cleanup) {
        return kSkipUnsupported;
    }
    addChild(*script, makeOperatorAnd(pos), idx + 1);
    addChild(*script, std::move(cleanup), idx + 2);
    return std::nullopt;
}

std::optional<std::string> Repairer::applyInsertCommandAfter(const SmellReport& report,
                                                             const std::string& tmpl) {
    auto capture = resolveCapture(report);
    if (!capture.has_value()) {
        return kSkipNonLiteral;
    }
    std::string text = substitute(tmpl, *capture);
    AstNode& node = *report.node;
    if (node.kind() != NodeKind::BashCommand) {
        return kSkipUnsupported;
    }
    AstNode* parent = node.parent();
    if (parent == nullptr || !isSequenceContainer(parent->kind())) {
        return kSkipUnsupported;
    }
    std::size_t idx = parent->indexOf(node);
    if (neighborIsPipe(*parent, idx)) {
        return kSkipUnsupported;
    }
    SourceSpan pos = anchorAfter(node.span());
    auto cmd = makeCommand(text, pos);
    if (!cmd) {
        return kSkipUnsupported;
    }
    // Placed directly after the producing command, before any cd can move
    // the working directory away from the file being removed.
    addChild(*parent, makeOperatorAnd(pos), idx + 1);
    addChild(*parent, std::move(cmd), idx + 2);
    return std::nullopt;
}

std::optional<std::string> Repairer::applyRewriteLiteral(const SmellReport& report) {
    AstNode& node = *report.node;
    std::vector<AstNode*> targets;
    std::vector<std::string> new_values;

    if (report.rule_id == "curlUseHttpsUrl" || report.rule_id == "wgetUseHttpsUrl") {
        for (AstNode* arg : plainHttpUrlArgs(node)) {
            AstNode* lit = firstLiteralOfWord(*arg);
            if (lit == nullptr || !lit->value().has_value()) {
                continue;
            }
            targets.push_back(lit);
            new_values.push_back("https://" + lit->value()->substr(7));
        }
        if (targets.empty()) {
            return kSkipNonLiteral;
        }
    } else if (report.rule_id == "gpgUseHaPools") {
        auto ks = keyserverValue(*enricher_, node);
        if (!ks.has_value()) {
            return kSkipNonLiteral;
        }
        AstNode* lit = firstLiteralOfWord(*ks->word);
        if (lit == nullptr || !lit->value().has_value()) {
            return kSkipNonLiteral;
        }
        targets.push_back(lit);
        new_values.push_back(ks->inline_form ? "--keyserver=" + options_.gpg_keyserver
                                             : options_.gpg_keyserver);
    } else if (report.rule_id == "sha256sumEchoOneSpaces") {
        AstNode* lit = sha256sumSingleSpaceLiteral(node);
        if (lit == nullptr || !lit->value().has_value()) {
            return kSkipNonLiteral;
        }
        std::string v = *lit->value();
        std::size_t sp = v.find(' ');
        if (sp == std::string::npos) {
            return kSkipNonLiteral;
        }
        targets.push_back(lit);
        new_values.push_back(v.substr(0, sp) + "  " + v.substr(sp + 1));
    } else {
        return kSkipUnsupported;
    }

    for (const AstNode* t : targets) {
        if (std::find(rewritten_this_pass_.begin(), rewritten_this_pass_.end(), t) !=
            rewritten_this_pass_.end()) {
            return kSkipConflict;
        }
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        targets[i]->setValue(new_values[i]);
        rewritten_this_pass_.push_back(targets[i]);
    }
    return std::nullopt;
}

std::optional<std::string> Repairer::applyMergeIntoSequence(const SmellReport& report) {
    AstNode& node = *report.node;
    if (node.kind() != NodeKind::BashCommand) {
        return kSkipUnsupported;
    }
    AstNode* parent = node.parent();
    if (parent == nullptr || parent->kind() != NodeKind::BashScript) {
        return kSkipUnsupported; // nested installs require deeper refactoring
    }
    std::size_t idx = parent->indexOf(node);
    if (neighborIsPipe(*parent, idx)) {
        return kSkipUnsupported;
    }
    AstNode* scope = runScopeOf(node);
    if (scope == nullptr) {
        return kSkipUnsupported;
    }
    auto ordering = evaluateOrdering(*scope);
    bool install_guaranteed = false;
    for (const auto& oc : ordering) {
        if (oc.command == &node) {
            install_guaranteed = oc.guaranteed;
        }
        if (oc.guaranteed && oc.command->hasAnnotation("APT-GET-UPDATE")) {
            // An update already runs; placement is the problem, which needs
            // reordering rather than insertion.
            return kSkipUnsupported;
        }
    }
    if (!install_guaranteed) {
        return kSkipUnsupported;
    }
    SourceSpan pos = anchorBefore(node.span());
    auto update = makeCommand("apt-get update", pos);
    if (!update) {
        return kSkipUnsupported;
    }
    addChild(*parent, std::move(update), idx);
    addChild(*parent, makeOperatorAnd(pos), idx + 1);
    return std::nullopt;
}

std::optional<std::string> Repairer::repairOne(const SmellReport& report, AstNode& root) {
    (void)root;
    const RepairTemplate* tmpl = templateFor(report.rule_id);
    if (tmpl == nullptr) {
        return kSkipUnsupported;
    }
    switch (tmpl->action) {
    case RepairTemplate::Action::InsertFlag:
        return applyInsertFlag(report, tmpl->text);
    case RepairTemplate::Action::AppendCleanupCommand:
        return applyAppendCleanup(report, tmpl->text);
    case RepairTemplate::Action::InsertCommandAfter:
        return applyInsertCommandAfter(report, tmpl->text);
    case RepairTemplate::Action::RewriteLiteral:
        return applyRewriteLiteral(report);
    case RepairTemplate::Action::MergeIntoSequence:
        return applyMergeIntoSequence(report);
    }
    return kSkipUnsupported;
}

RepairOutcome Repairer::repairAll(AstNode& root,
                                  const std::vector<const SmellRule*>& rules) {
    RepairOutcome outcome;
    for (std::size_t pass = 0; pass < options_.max_passes; ++pass) {
        outcome.passes = pass + 1;
        enricher_->enrich(root);
        auto reports = analyze(root, rules);
        rewritten_this_pass_.clear();
        std::vector<SkippedRepair> skipped_this_pass;
        std::size_t applied_this_pass = 0;
        for (const auto& report : reports) {
            auto skip = repairOne(report, root);
            if (skip.has_value()) {
                skipped_this_pass.push_back({report.rule_id, report.span, *skip});
            } else {
                outcome.applied.push_back({report.rule_id, report.span});
                ++applied_this_pass;
            }
        }
        if (applied_this_pass == 0 || pass + 1 == options_.max_passes) {
            outcome.skipped = std::move(skipped_this_pass);
            break;
        }
    }
    return outcome;
}

} // namespace dockfix
