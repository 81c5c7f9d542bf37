#pragma once

#include "dockfix/ast.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace dockfix {

/// Recursive pattern over node kinds, annotation tags, or node predicates.
///
/// A pattern matches a node when its head matches and every child pattern
/// binds to a distinct node somewhere in the node's subtree (the node
/// itself excluded), bindings pairwise distinct.
class QueryPattern {
  public:
    using NodePredicate = std::function<bool(const AstNode&)>;

    QueryPattern(NodeKind kind, std::vector<QueryPattern> children = {})
        : head_(kind), children_(std::move(children)) {}
    QueryPattern(std::string tag, std::vector<QueryPattern> children = {})
        : head_(std::move(tag)), children_(std::move(children)) {}
    QueryPattern(const char* tag, std::vector<QueryPattern> children = {})
        : head_(std::string(tag)), children_(std::move(children)) {}
    QueryPattern(NodePredicate pred, std::string name, std::vector<QueryPattern> children = {})
        : head_(Predicate{std::move(pred), std::move(name)}), children_(std::move(children)) {}

    bool headMatches(const AstNode& node) const;
    const std::vector<QueryPattern>& children() const { return children_; }

    /// Human-readable form for messages and registration errors.
    std::string describe() const;

    /// All annotation tags referenced anywhere in the pattern.
    void collectTags(std::vector<std::string>& out) const;

  private:
    struct Predicate {
        NodePredicate fn;
        std::string name;
    };
    std::variant<NodeKind, std::string, Predicate> head_;
    std::vector<QueryPattern> children_;
};

bool matches(const AstNode& node, const QueryPattern& pattern);

/// All nodes in root's subtree (root included) matching `pattern`,
/// in document order.
std::vector<const AstNode*> find(const AstNode& root, const QueryPattern& pattern);
std::vector<AstNode*> find(AstNode& root, const QueryPattern& pattern);

// Terse builders mirroring the query notation used throughout the rules.
inline QueryPattern Q(NodeKind kind) { return QueryPattern(kind); }
inline QueryPattern Q(const char* tag) { return QueryPattern(tag); }

template <typename... Rest>
QueryPattern Q(NodeKind kind, Rest... rest) {
    return QueryPattern(kind, std::vector<QueryPattern>{std::move(rest)...});
}

template <typename... Rest>
QueryPattern Q(const char* tag, Rest... rest) {
    return QueryPattern(tag, std::vector<QueryPattern>{std::move(rest)...});
}

template <typename... Rest>
QueryPattern Qpred(QueryPattern::NodePredicate pred, std::string name, Rest... rest) {
    return QueryPattern(std::move(pred), std::move(name),
                        std::vector<QueryPattern>{std::move(rest)...});
}

/// Matches a leaf whose literal value satisfies `pred`.
QueryPattern valuePattern(std::function<bool(std::string_view)> pred, std::string name);

} // namespace dockfix
