#include "dockfix/rules.hpp"

#include <algorithm>
#include <cctype>

namespace dockfix {

namespace {

enum class Ctx { Succeeded, Ran, Unknown };

bool isSeqElement(const AstNode& n) {
    switch (n.kind()) {
    case NodeKind::BashCommand:
    case NodeKind::BashSubshell:
    case NodeKind::BashIf:
    case NodeKind::BashFor:
    case NodeKind::BashOpaque:
        return true;
    default:
        return false;
    }
}

class OrderingWalker {
  public:
    std::vector<OrderedCommand> out;

    void walkSeq(const std::vector<AstNode::Ptr>& children, Ctx ctx) {
        // Split on `;` into groups, then evaluate each &&/|| chain.
        std::vector<std::vector<AstNode*>> groups(1);
        for (const auto& c : children) {
            if (c->kind() == NodeKind::BashOperatorSemicolon) {
                groups.emplace_back();
                continue;
            }
            if (c->kind() == NodeKind::Comment) {
                continue;
            }
            groups.back().push_back(c.get());
        }
        while (!groups.empty() && groups.back().empty()) {
            groups.pop_back();
        }
        bool degraded = false;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            Ctx gctx;
            if (degraded || ctx == Ctx::Unknown) {
                gctx = Ctx::Unknown;
            } else if (ctx == Ctx::Succeeded && i + 1 == groups.size()) {
                gctx = Ctx::Succeeded;
            } else {
                gctx = Ctx::Ran;
            }
            walkChain(groups[i], gctx);
            for (AstNode* n : groups[i]) {
                if (n->kind() == NodeKind::BashOpaque) {
                    degraded = true;
                }
            }
        }
    }

    /// One `;`-free group: pipelines separated by && / ||, left associative.
    void walkChain(const std::vector<AstNode*>& elems, Ctx ctx) {
        std::vector<std::vector<AstNode*>> pipelines(1);
        std::vector<NodeKind> ops;
        for (AstNode* e : elems) {
            if (e->kind() == NodeKind::BashOperatorAnd ||
                e->kind() == NodeKind::BashOperatorOr) {
                ops.push_back(e->kind());
                pipelines.emplace_back();
                continue;
            }
            pipelines.back().push_back(e);
        }
        // Left-associative success propagation, computed right to left:
        // (L && R) succeeded => both succeeded; (L || R) succeeded => L ran,
        // R unknown; anything below "succeeded" leaves the right side unknown.
        std::vector<Ctx> pls(pipelines.size(), Ctx::Unknown);
        Ctx cur = ctx;
        for (std::size_t k = ops.size(); k-- > 0;) {
            if (cur == Ctx::Succeeded && ops[k] == NodeKind::BashOperatorAnd) {
                pls[k + 1] = Ctx::Succeeded;
            } else {
                pls[k + 1] = Ctx::Unknown;
                if (cur == Ctx::Succeeded) {
                    cur = Ctx::Ran;
                }
            }
        }
        pls[0] = cur;
        bool degraded = false;
        for (std::size_t k = 0; k < pipelines.size(); ++k) {
            Ctx effective = degraded ? Ctx::Unknown : pls[k];
            walkPipeline(pipelines[k], effective);
            for (AstNode* n : pipelines[k]) {
                if (n->kind() == NodeKind::BashOpaque) {
                    degraded = true;
                }
            }
        }
    }

    void walkPipeline(const std::vector<AstNode*>& elems, Ctx ctx) {
        std::vector<AstNode*> members;
        for (AstNode* e : elems) {
            if (e->kind() == NodeKind::BashPipe) {
                continue;
            }
            if (isSeqElement(*e)) {
                members.push_back(e);
            }
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            // Every pipeline member runs; only the last one's exit status
            // decides success.
            Ctx mctx = ctx == Ctx::Unknown ? Ctx::Unknown
                       : (i + 1 == members.size()) ? ctx
                                                   : Ctx::Ran;
            walkItem(*members[i], mctx);
        }
    }

    void walkItem(AstNode& node, Ctx ctx) {
        switch (node.kind()) {
        case NodeKind::BashCommand: {
            out.push_back({&node, ctx != Ctx::Unknown});
            scanNestedSubstitutions(node);
            break;
        }
        case NodeKind::BashSubshell: {
            if (const AstNode* list = node.getChild(NodeKind::BashStatementList)) {
                walkSeq(list->children(), ctx);
            }
            break;
        }
        case NodeKind::BashIf: {
            // The condition runs whenever the if runs; bodies are
            // conditional.
            if (AstNode* cond = node.getChild(NodeKind::BashIfCondition)) {
                walkSeq(cond->children(), ctx == Ctx::Unknown ? Ctx::Unknown : Ctx::Ran);
            }
            if (AstNode* body = node.getChild(NodeKind::BashIfBody)) {
                walkSeq(body->children(), Ctx::Unknown);
            }
            if (AstNode* els = node.getChild(NodeKind::BashElseBody)) {
                walkSeq(els->children(), Ctx::Unknown);
            }
            break;
        }
        case NodeKind::BashFor: {
            for (const auto& c : node.children()) {
                if (c->kind() == NodeKind::BashCommandArgs) {
                    scanNestedSubstitutions(*c);
                }
            }
            if (AstNode* body = node.getChild(NodeKind::BashStatementList)) {
                walkSeq(body->children(), Ctx::Unknown);
            }
            break;
        }
        default:
            break;
        }
    }

    /// Commands inside $(...) of this node's words run in a subshell whose
    /// timing is opaque; they are recorded as conditional.
    void scanNestedSubstitutions(AstNode& node) {
        for (const auto& c : node.children()) {
            if (c->kind() == NodeKind::BashCommandSubstitution) {
                if (const AstNode* list = c->getChild(NodeKind::BashStatementList)) {
                    walkSeq(list->children(), Ctx::Unknown);
                }
                continue;
            }
            scanNestedSubstitutions(*c);
        }
    }
};

AstNode* uniqueScriptOf(AstNode& instruction) {
    return instruction.getChild(NodeKind::BashScript);
}

/// Nearest ancestor instruction with a shell payload, the scope of
/// before/after consequents.
AstNode* orderingScope(AstNode& node) {
    for (AstNode* n = &node; n != nullptr; n = n->parent()) {
        if (n->kind() == NodeKind::Run || n->kind() == NodeKind::Cmd ||
            n->kind() == NodeKind::Entrypoint) {
            return n;
        }
    }
    return nullptr;
}

} // namespace

std::vector<OrderedCommand> evaluateOrdering(AstNode& run_node) {
    OrderingWalker walker;
    if (AstNode* script = uniqueScriptOf(run_node)) {
        walker.walkSeq(script->children(), Ctx::Succeeded);
    }
    return walker.out;
}

bool isPlainHttpUrl(const AstNode& arg_node) {
    if (arg_node.childCount() == 0) {
        return false;
    }
    const AstNode* first = &arg_node.child(0);
    if (first->kind() == NodeKind::BashQuotedString) {
        if (first->childCount() == 0) {
            return false;
        }
        first = &first->child(0);
    }
    if (first->kind() != NodeKind::BashLiteral || !first->value().has_value()) {
        return false;
    }
    return first->value()->rfind("http://", 0) == 0;
}

Consequent Consequent::none() {
    Consequent c;
    c.mode = Mode::None;
    return c;
}

Consequent Consequent::inNode(QueryPattern p) {
    Consequent c;
    c.mode = Mode::InNode;
    c.pattern = [p = std::move(p)](AstNode&) { return p; };
    return c;
}

Consequent Consequent::before(QueryPattern p) {
    Consequent c;
    c.mode = Mode::BeforeNode;
    c.pattern = [p = std::move(p)](AstNode&) { return p; };
    return c;
}

Consequent Consequent::after(QueryPattern p) {
    Consequent c;
    c.mode = Mode::AfterNode;
    c.pattern = [p = std::move(p)](AstNode&) { return p; };
    return c;
}

Consequent Consequent::afterFn(std::function<QueryPattern(AstNode&)> fn) {
    Consequent c;
    c.mode = Mode::AfterNode;
    c.pattern = std::move(fn);
    return c;
}

// ---------------------------------------------------------------------------
// Capture helpers
// ---------------------------------------------------------------------------

namespace {

std::optional<std::string> wordLiteral(AstNode* word) {
    if (word == nullptr) {
        return std::nullopt;
    }
    return literalWordText(*word);
}

} // namespace

std::optional<std::string> tarArchivePath(const Enricher& enricher, AstNode& command) {
    auto shape = enricher.shape(command);
    if (!shape.has_value() || shape->schema == nullptr ||
        shape->schema->tag != "TAR") {
        return std::nullopt;
    }
    if (AstNode* value = shape->valueOfFlagTag("TAR-FILE-FLAG")) {
        return wordLiteral(value);
    }
    // Inline --file=archive form.
    for (const auto& info : shape->words) {
        if (info.role != Enricher::WordRole::Flag) {
            continue;
        }
        auto t = literalWordText(*info.word);
        if (t.has_value() && t->rfind("--file=", 0) == 0) {
            return t->substr(7);
        }
    }
    return std::nullopt;
}

std::optional<KeyserverValue> keyserverValue(const Enricher& enricher, AstNode& command) {
    auto shape = enricher.shape(command);
    if (!shape.has_value() || shape->schema == nullptr || shape->schema->tag != "GPG") {
        return std::nullopt;
    }
    if (AstNode* value = shape->valueOfFlagTag("GPG-KEYSERVER-FLAG")) {
        auto t = literalWordText(*value);
        if (!t.has_value()) {
            return std::nullopt;
        }
        return KeyserverValue{*t, value, false};
    }
    for (const auto& info : shape->words) {
        if (info.role != Enricher::WordRole::Flag) {
            continue;
        }
        auto t = literalWordText(*info.word);
        if (t.has_value() && t->rfind("--keyserver=", 0) == 0) {
            return KeyserverValue{t->substr(12), info.word, true};
        }
    }
    return std::nullopt;
}

std::optional<std::string> literalPositionalWithPrefix(const Enricher& enricher,
                                                       AstNode& command,
                                                       std::string_view prefix) {
    auto shape = enricher.shape(command);
    if (!shape.has_value()) {
        return std::nullopt;
    }
    for (AstNode* pos : shape->positionals()) {
        auto t = literalWordText(*pos);
        if (t.has_value() && t->rfind(prefix, 0) == 0) {
            return t;
        }
    }
    return std::nullopt;
}

std::optional<std::string> gpgVerifiedAscPath(const Enricher& enricher, AstNode& command) {
    auto shape = enricher.shape(command);
    if (!shape.has_value() || shape->schema == nullptr || shape->schema->tag != "GPG") {
        return std::nullopt;
    }
    bool has_verify = false;
    for (const auto& info : shape->words) {
        if (info.role == Enricher::WordRole::Flag && info.flag != nullptr &&
            info.flag->tag == "GPG-VERIFY-FLAG") {
            has_verify = true;
            break;
        }
    }
    if (!has_verify) {
        return std::nullopt;
    }
    for (AstNode* pos : shape->positionals()) {
        auto t = literalWordText(*pos);
        if (t.has_value() && t->size() > 4 && t->substr(t->size() - 4) == ".asc") {
            return t;
        }
    }
    return std::nullopt;
}

namespace {

bool isHexChar(char c) {
    return std::isxdigit(static_cast<unsigned char>(c)) != 0;
}

/// Matches "<hex>{40,128} <non-space>+" with exactly one space.
bool isSingleSpaceChecksumLine(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && isHexChar(text[i])) {
        ++i;
    }
    if (i < 40 || i > 128) {
        return false;
    }
    if (i >= text.size() || text[i] != ' ') {
        return false;
    }
    std::size_t rest = i + 1;
    if (rest >= text.size()) {
        return false;
    }
    for (std::size_t k = rest; k < text.size(); ++k) {
        if (text[k] == ' ') {
            return false;
        }
    }
    return true;
}

/// The literal node holding a checksum line inside the first string-ish
/// argument of an echo command.
AstNode* checksumLiteralOf(AstNode& echo_command) {
    for (const auto& c : echo_command.children()) {
        if (c->kind() != NodeKind::BashCommandArgs) {
            continue;
        }
        AstNode* lit = nullptr;
        if (c->childCount() == 1 && c->child(0).kind() == NodeKind::BashQuotedString &&
            c->child(0).childCount() == 1 &&
            c->child(0).child(0).kind() == NodeKind::BashLiteral) {
            lit = &c->child(0).child(0);
        } else if (c->childCount() == 1 && c->child(0).kind() == NodeKind::BashLiteral) {
            lit = &c->child(0);
        }
        if (lit != nullptr && lit->value().has_value() &&
            isSingleSpaceChecksumLine(*lit->value())) {
            return lit;
        }
    }
    return nullptr;
}

/// True when `command` is piped directly into a sha256sum -c command.
bool pipedIntoShaCheck(AstNode& command) {
    AstNode* parent = command.parent();
    if (parent == nullptr) {
        return false;
    }
    const auto& siblings = parent->children();
    std::size_t idx = parent->indexOf(command);
    if (idx == static_cast<std::size_t>(-1)) {
        return false;
    }
    // Walk forward: expect a pipe, then a sha256sum command with a check
    // flag somewhere in the same pipeline.
    bool pipe_seen = false;
    for (std::size_t i = idx + 1; i < siblings.size(); ++i) {
        const AstNode& s = *siblings[i];
        if (s.kind() == NodeKind::Comment) {
            continue;
        }
        if (s.kind() == NodeKind::BashPipe) {
            pipe_seen = true;
            continue;
        }
        if (!pipe_seen) {
            return false;
        }
        if (s.kind() == NodeKind::BashCommand) {
            if (s.hasAnnotation("SHA256SUM")) {
                for (const auto& w : s.children()) {
                    if (w->hasAnnotation("SHA256SUM-C-CHECK-FLAG")) {
                        return true;
                    }
                }
                return false;
            }
            // Another command in between (e.g. tee): keep scanning only
            // through further pipes.
            pipe_seen = false;
            continue;
        }
        return false;
    }
    return false;
}

} // namespace

AstNode* sha256sumSingleSpaceLiteral(AstNode& echo_command) {
    if (echo_command.kind() != NodeKind::BashCommand ||
        !echo_command.hasAnnotation("ECHO")) {
        return nullptr;
    }
    if (!pipedIntoShaCheck(echo_command)) {
        return nullptr;
    }
    return checksumLiteralOf(echo_command);
}

std::vector<AstNode*> plainHttpUrlArgs(AstNode& command) {
    std::vector<AstNode*> out;
    for (const auto& c : command.children()) {
        if (c->kind() == NodeKind::BashCommandArgs && c->hasAnnotation("URL") &&
            isPlainHttpUrl(*c)) {
            out.push_back(c.get());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rule catalog
// ---------------------------------------------------------------------------

namespace {

QueryPattern valueStartsWith(std::string prefix) {
    return valuePattern(
        [prefix](std::string_view v) { return v.rfind(prefix, 0) == 0; },
        "value starts with " + prefix);
}

QueryPattern valueEquals(std::string expected) {
    return valuePattern([expected](std::string_view v) { return v == expected; },
                        "value == " + expected);
}

} // namespace

RuleSet::RuleSet(const Enricher& enricher)
    : enricher_(&enricher), vocabulary_(enricher.vocabulary()) {
    const Enricher* E = enricher_;

    add({"aptGetInstallUseNoRec", Q("APT-GET-INSTALL"),
         Consequent::inNode(Q("APT-GET-INSTALL-NO-INSTALL-RECOMMENDS-FLAG")),
         "apt-get install should use --no-install-recommends to avoid unneeded packages",
         true});

    add({"aptGetInstallThenRmAptLists", Q("APT-GET-INSTALL"),
         Consequent::after(Q("RM", valueStartsWith("/var/lib/apt/lists"))),
         "apt-get install should be followed by rm -rf /var/lib/apt/lists/* in the same RUN",
         true});

    add({"curlUseFlagF", Q("CURL"), Consequent::inNode(Q("CURL-F-FAIL")),
         "curl should use -f so HTTP errors fail the build", true});

    add({"curlUseFlagL", Q("CURL"), Consequent::inNode(Q("CURL-L-LOCATION")),
         "curl should use -L to follow redirects", true});

    add({"pipUseNoCacheDir", Q("PIP-INSTALL"),
         Consequent::inNode(Q("PIP-INSTALL-NO-CACHE-DIR-FLAG")),
         "pip install should use --no-cache-dir inside images", true});

    add({"gpgUseBatchFlag", Q("GPG"), Consequent::inNode(Q("GPG-BATCH-FLAG")),
         "gpg should run with --batch in non-interactive builds", true});

    add({"aptGetUpdatePrecedesInstall", Q("APT-GET-INSTALL"),
         Consequent::before(Q("APT-GET-UPDATE")),
         "apt-get install should be preceded by apt-get update in the same RUN", true});

    add({"npmCacheCleanAfterInstall", Q("NPM-INSTALL"),
         Consequent::after(Q("NPM-CACHE-CLEAN")),
         "npm install should be followed by npm cache clean", true});

    add({"yarnCacheCleanAfterInstall", Q("YARN-INSTALL"),
         Consequent::after(Q("YARN-CACHE-CLEAN")),
         "yarn install should be followed by yarn cache clean", true});

    add({"yumInstallRmVarCacheYum", Q("YUM-INSTALL"),
         Consequent::after(Q("RM", valueStartsWith("/var/cache/yum"))),
         "yum install should be followed by rm -rf /var/cache/yum", true});

    QueryPattern plain_http_arg(
        [](const AstNode& n) {
            return n.kind() == NodeKind::BashCommandArgs && n.hasAnnotation("URL") &&
                   isPlainHttpUrl(n);
        },
        "plain http url");

    add({"curlUseHttpsUrl", Q("CURL", plain_http_arg), Consequent::none(),
         "curl should fetch over https, not plain http", true});

    add({"wgetUseHttpsUrl", Q("WGET", plain_http_arg), Consequent::none(),
         "wget should fetch over https, not plain http", true});

    add({"apkAddUseNoCache", Q("APK-ADD"), Consequent::inNode(Q("APK-ADD-NO-CACHE-FLAG")),
         "apk add should use --no-cache", true});

    add({"configureShouldUseBuildFlag", Q("CONFIGURE"),
         Consequent::inNode(Q("CONFIGURE-BUILD-FLAG")),
         "./configure should pin the build triplet with --build", true});

    add({"tarSomethingRmTheSomething",
         Qpred(
             [E](const AstNode& n) {
                 return n.kind() == NodeKind::BashCommand && n.hasAnnotation("TAR") &&
                        tarArchivePath(*E, const_cast<AstNode&>(n)).has_value();
             },
             "tar with literal archive"),
         Consequent::afterFn([E](AstNode& trigger) {
             auto archive = tarArchivePath(*E, trigger);
             return Q("RM", valueEquals(archive.value_or("")));
         }),
         "extracted archives should be removed in the same RUN", true});

    add({"gpgUseHaPools",
         Qpred(
             [E](const AstNode& n) {
                 if (n.kind() != NodeKind::BashCommand || !n.hasAnnotation("GPG")) {
                     return false;
                 }
                 auto ks = keyserverValue(*E, const_cast<AstNode&>(n));
                 return ks.has_value() && ks->host.rfind("ha.pool.", 0) != 0;
             },
             "gpg keyserver outside the ha pool"),
         Consequent::none(), "gpg --keyserver should use the high-availability pool", true});

    add({"mkdirUsrSrcThenRemove",
         Qpred(
             [E](const AstNode& n) {
                 return n.kind() == NodeKind::BashCommand && n.hasAnnotation("MKDIR") &&
                        literalPositionalWithPrefix(*E, const_cast<AstNode&>(n), "/usr/src")
                            .has_value();
             },
             "mkdir under /usr/src"),
         Consequent::afterFn([E](AstNode& trigger) {
             auto path = literalPositionalWithPrefix(*E, trigger, "/usr/src");
             std::string p = path.value_or("/usr/src");
             return Q("RM", Q("RM-RECURSIVE-FLAG"), valueStartsWith(p));
         }),
         "source directories under /usr/src should be removed in the same RUN", true});

    add({"aptGetInstallUseY", Q("APT-GET-INSTALL"),
         Consequent::inNode(Q("APT-GET-INSTALL-Y-FLAG")),
         "apt-get install needs -y to run non-interactively", true});

    add({"npmCacheCleanUseForce", Q("NPM-CACHE-CLEAN"), Consequent::inNode(Q("NPM-F-FORCE")),
         "npm cache clean requires --force to have any effect", true});

    add({"rmRecursiveAfterMktempD",
         Qpred(
             [](const AstNode& n) {
                 if (n.kind() != NodeKind::BashCommand || !n.hasAnnotation("MKTEMP")) {
                     return false;
                 }
                 for (const auto& w : n.children()) {
                     if (w->hasAnnotation("MKTEMP-D-FLAG")) {
                         return true;
                     }
                 }
                 return false;
             },
             "mktemp -d"),
         Consequent::afterFn([E](AstNode& trigger) {
             auto path = literalPositionalWithPrefix(*E, trigger, "/");
             // mktemp templates (trailing X runs) expand to unknown names.
             if (path.has_value() && path->find("XXX") == std::string::npos) {
                 return Q("RM", Q("RM-RECURSIVE-FLAG"), valueStartsWith(*path));
             }
             return Q("RM", Q("RM-RECURSIVE-FLAG"));
         }),
         "temporary directories from mktemp -d should be removed recursively", true});

    add({"sha256sumEchoOneSpaces",
         Qpred(
             [](const AstNode& n) {
                 if (n.kind() != NodeKind::BashCommand) {
                     return false;
                 }
                 return sha256sumSingleSpaceLiteral(const_cast<AstNode&>(n)) != nullptr;
             },
             "echo checksum with one space piped to sha256sum -c"),
         Consequent::none(),
         "sha256sum -c expects two spaces between hash and filename", true});

    add({"gemUpdateSystemRmRootGem", Q("GEM-UPDATE", Q("GEM-UPDATE-SYSTEM-FLAG")),
         Consequent::after(Q("RM", valueStartsWith("/root/.gem"))),
         "gem update --system should be followed by rm -rf /root/.gem", true});

    add({"gemUpdateNoDocument", Q("GEM-UPDATE"),
         Consequent::inNode(Q("GEM-UPDATE-NO-DOCUMENT-FLAG")),
         "gem update should use --no-document", true});

    add({"gpgVerifyAscRmAsc",
         Qpred(
             [E](const AstNode& n) {
                 return n.kind() == NodeKind::BashCommand && n.hasAnnotation("GPG") &&
                        gpgVerifiedAscPath(*E, const_cast<AstNode&>(n)).has_value();
             },
             "gpg --verify of an .asc file"),
         Consequent::afterFn([E](AstNode& trigger) {
             auto path = gpgVerifiedAscPath(*E, trigger);
             return Q("RM", valueEquals(path.value_or("")));
         }),
         "verified .asc signature files should be removed in the same RUN", true});

    add({"yumInstallForceYes", Q("YUM-INSTALL"), Consequent::inNode(Q("YUM-INSTALL-Y-FLAG")),
         "yum install needs -y to run non-interactively", true});
}

void RuleSet::add(SmellRule rule) {
    std::vector<std::string> tags;
    rule.trigger.collectTags(tags);
    if (rule.consequent.pattern) {
        // Parameterized consequents are probed with a scratch node so their
        // static tags are validated too.
        AstNode scratch(NodeKind::BashCommand);
        rule.consequent.pattern(scratch).collectTags(tags);
    }
    for (const auto& t : tags) {
        if (vocabulary_.find(t) == vocabulary_.end()) {
            throw UnknownRuleId("rule " + rule.id + " references unknown tag " + t);
        }
    }
    rules_.push_back(std::move(rule));
}

const SmellRule* RuleSet::byId(const std::string& id) const {
    for (const auto& r : rules_) {
        if (r.id == id) {
            return &r;
        }
    }
    return nullptr;
}

std::vector<const SmellRule*> RuleSet::all() const {
    std::vector<const SmellRule*> out;
    out.reserve(rules_.size());
    for (const auto& r : rules_) {
        out.push_back(&r);
    }
    return out;
}

std::vector<const SmellRule*> RuleSet::select(const std::vector<std::string>& include,
                                              const std::vector<std::string>& exclude) const {
    std::vector<const SmellRule*> out;
    if (include.empty()) {
        out = all();
    } else {
        for (const auto& id : include) {
            const SmellRule* r = byId(id);
            if (r == nullptr) {
                throw UnknownRuleId("unknown rule id: " + id);
            }
            out.push_back(r);
        }
    }
    for (const auto& id : exclude) {
        if (byId(id) == nullptr) {
            throw UnknownRuleId("unknown rule id: " + id);
        }
        out.erase(std::remove_if(out.begin(), out.end(),
                                 [&](const SmellRule* r) { return r->id == id; }),
                  out.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

namespace {

AstNode* commandOf(AstNode& node) {
    if (node.kind() == NodeKind::BashCommand) {
        return &node;
    }
    return node.getParent(NodeKind::BashCommand);
}

bool consequentSatisfied(const SmellRule& rule, AstNode& trigger) {
    switch (rule.consequent.mode) {
    case Consequent::Mode::None:
        return false;
    case Consequent::Mode::InNode: {
        QueryPattern p = rule.consequent.pattern(trigger);
        return !find(trigger, p).empty();
    }
    case Consequent::Mode::BeforeNode:
    case Consequent::Mode::AfterNode: {
        AstNode* scope = orderingScope(trigger);
        if (scope == nullptr) {
            return false;
        }
        AstNode* cmd = commandOf(trigger);
        if (cmd == nullptr) {
            return false;
        }
        auto ordering = evaluateOrdering(*scope);
        std::size_t pos = ordering.size();
        for (std::size_t i = 0; i < ordering.size(); ++i) {
            if (ordering[i].command == cmd) {
                pos = i;
                break;
            }
        }
        if (pos == ordering.size()) {
            return false;
        }
        QueryPattern p = rule.consequent.pattern(trigger);
        if (rule.consequent.mode == Consequent::Mode::BeforeNode) {
            for (std::size_t i = 0; i < pos; ++i) {
                if (ordering[i].guaranteed && matches(*ordering[i].command, p)) {
                    return true;
                }
            }
        } else {
            for (std::size_t i = pos + 1; i < ordering.size(); ++i) {
                if (ordering[i].guaranteed && matches(*ordering[i].command, p)) {
                    return true;
                }
            }
        }
        return false;
    }
    }
    return false;
}

} // namespace

std::vector<SmellReport> analyze(AstNode& root, const std::vector<const SmellRule*>& rules) {
    std::vector<SmellReport> reports;
    for (const SmellRule* rule : rules) {
        for (AstNode* trigger : find(root, rule->trigger)) {
            if (!consequentSatisfied(*rule, *trigger)) {
                reports.push_back({rule->id, trigger, trigger->span(), rule->message});
            }
        }
    }
    std::stable_sort(reports.begin(), reports.end(),
                     [](const SmellReport& a, const SmellReport& b) {
                         if (a.span.start_offset != b.span.start_offset) {
                             return a.span.start_offset < b.span.start_offset;
                         }
                         return a.rule_id < b.rule_id;
                     });
    return reports;
}

std::vector<SmellReport> analyze(AstNode& root, const RuleSet& rules) {
    return analyze(root, rules.all());
}

} // namespace dockfix
