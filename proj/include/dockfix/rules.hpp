#pragma once

#include "dockfix/enricher.hpp"
#include "dockfix/query.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dockfix {

/// One command occurrence in a RUN payload, in document (= execution)
/// order, flagged by whether it is guaranteed to run on a successful build.
struct OrderedCommand {
    AstNode* command = nullptr;
    bool guaranteed = false;
};

/// Linearizes the shell payload of a RUN-like instruction. Commands chained
/// by `&&`/`;` at the top level are guaranteed; `||` right operands,
/// if/else bodies, for bodies and command substitutions are conditional.
std::vector<OrderedCommand> evaluateOrdering(AstNode& run_node);

/// True when the argument word starts with a literal `http://` scheme.
/// Variables or substitutions before the scheme, other protocols, and
/// non-literal arguments all yield false.
bool isPlainHttpUrl(const AstNode& arg_node);

/// Context condition attached to a rule trigger.
struct Consequent {
    enum class Mode { None, InNode, BeforeNode, AfterNode };
    Mode mode = Mode::None;
    /// Pattern factory; receives the trigger match so consequents can be
    /// parameterized (e.g. the rm of a specific archive).
    std::function<QueryPattern(AstNode& trigger)> pattern;

    static Consequent none();
    static Consequent inNode(QueryPattern p);
    static Consequent before(QueryPattern p);
    static Consequent after(QueryPattern p);
    static Consequent afterFn(std::function<QueryPattern(AstNode&)> fn);
};

struct SmellRule {
    std::string id;
    QueryPattern trigger;
    Consequent consequent;
    std::string message;
    bool repairable = true;
};

struct SmellReport {
    std::string rule_id;
    AstNode* node = nullptr;
    SourceSpan span;
    std::string message;
};

struct UnknownRuleId : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The declarative rule catalog. Rules reference annotation tags; the
/// constructor validates every referenced tag against the enricher's
/// vocabulary so typos fail at registration, not at match time.
class RuleSet {
  public:
    explicit RuleSet(const Enricher& enricher);

    const std::vector<SmellRule>& rules() const { return rules_; }
    const SmellRule* byId(const std::string& id) const;

    /// Resolves include/exclude id lists; unknown ids throw UnknownRuleId.
    std::vector<const SmellRule*> select(const std::vector<std::string>& include,
                                         const std::vector<std::string>& exclude) const;

    std::vector<const SmellRule*> all() const;

  private:
    void add(SmellRule rule);

    const Enricher* enricher_;
    std::set<std::string> vocabulary_;
    std::vector<SmellRule> rules_;
};

/// Evaluates the given rules over an enriched tree. Reports are sorted by
/// span start, then rule id; the tree is never mutated.
std::vector<SmellReport> analyze(AstNode& root, const std::vector<const SmellRule*>& rules);
std::vector<SmellReport> analyze(AstNode& root, const RuleSet& rules);

// Capture helpers shared between rule predicates and repair templates.

/// Literal archive operand of a tar command (-f X, --file=X, or bundled zxf X).
std::optional<std::string> tarArchivePath(const Enricher& enricher, AstNode& command);

/// Literal keyserver host of a gpg command; the node carrying it (value
/// argument or inline --keyserver=host flag word).
struct KeyserverValue {
    std::string host;
    AstNode* word = nullptr;
    bool inline_form = false;
};
std::optional<KeyserverValue> keyserverValue(const Enricher& enricher, AstNode& command);

/// First literal positional of the command that starts with `prefix`.
std::optional<std::string> literalPositionalWithPrefix(const Enricher& enricher,
                                                       AstNode& command,
                                                       std::string_view prefix);

/// Literal .asc operand of a gpg --verify command.
std::optional<std::string> gpgVerifiedAscPath(const Enricher& enricher, AstNode& command);

/// The checked-string literal of an `echo "<hex> <file>" | sha256sum -c`
/// pipeline when hash and filename are separated by exactly one space.
AstNode* sha256sumSingleSpaceLiteral(AstNode& echo_command);

/// All positional URL arguments of a curl/wget command whose scheme is a
/// literal `http://`.
std::vector<AstNode*> plainHttpUrlArgs(AstNode& command);

} // namespace dockfix
