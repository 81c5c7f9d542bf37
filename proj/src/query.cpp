#include "dockfix/query.hpp"

namespace dockfix {

bool QueryPattern::headMatches(const AstNode& node) const {
    if (const auto* kind = std::get_if<NodeKind>(&head_)) {
        return node.kind() == *kind;
    }
    if (const auto* tag = std::get_if<std::string>(&head_)) {
        return node.hasAnnotation(*tag);
    }
    const auto& pred = std::get<Predicate>(head_);
    return pred.fn(node);
}

std::string QueryPattern::describe() const {
    std::string out;
    if (const auto* kind = std::get_if<NodeKind>(&head_)) {
        out = std::string(toString(*kind));
    } else if (const auto* tag = std::get_if<std::string>(&head_)) {
        out = "\"" + *tag + "\"";
    } else {
        out = "<" + std::get<Predicate>(head_).name + ">";
    }
    if (!children_.empty()) {
        out += "(";
        for (std::size_t i = 0; i < children_.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += children_[i].describe();
        }
        out += ")";
    }
    return out;
}

void QueryPattern::collectTags(std::vector<std::string>& out) const {
    if (const auto* tag = std::get_if<std::string>(&head_)) {
        out.push_back(*tag);
    }
    for (const auto& c : children_) {
        c.collectTags(out);
    }
}

namespace {

void collectSubtree(const AstNode& node, std::vector<const AstNode*>& out) {
    for (const auto& c : node.children()) {
        out.push_back(c.get());
        collectSubtree(*c, out);
    }
}

/// Backtracking search for a system of distinct representatives over the
/// per-pattern candidate lists.
bool assignDistinct(const std::vector<std::vector<const AstNode*>>& candidates, std::size_t at,
                    std::vector<const AstNode*>& used) {
    if (at == candidates.size()) {
        return true;
    }
    for (const AstNode* cand : candidates[at]) {
        bool taken = false;
        for (const AstNode* u : used) {
            if (u == cand) {
                taken = true;
                break;
            }
        }
        if (taken) {
            continue;
        }
        used.push_back(cand);
        if (assignDistinct(candidates, at + 1, used)) {
            return true;
        }
        used.pop_back();
    }
    return false;
}

} // namespace

bool matches(const AstNode& node, const QueryPattern& pattern) {
    if (!pattern.headMatches(node)) {
        return false;
    }
    const auto& child_patterns = pattern.children();
    if (child_patterns.empty()) {
        return true;
    }
    std::vector<const AstNode*> pool;
    collectSubtree(node, pool);
    std::vector<std::vector<const AstNode*>> candidates(child_patterns.size());
    for (std::size_t i = 0; i < child_patterns.size(); ++i) {
        for (const AstNode* n : pool) {
            if (matches(*n, child_patterns[i])) {
                candidates[i].push_back(n);
            }
        }
        if (candidates[i].empty()) {
            return false;
        }
    }
    std::vector<const AstNode*> used;
    return assignDistinct(candidates, 0, used);
}

std::vector<const AstNode*> find(const AstNode& root, const QueryPattern& pattern) {
    std::vector<const AstNode*> out;
    traverse(root, [&](const AstNode& n) {
        if (matches(n, pattern)) {
            out.push_back(&n);
        }
    });
    return out;
}

std::vector<AstNode*> find(AstNode& root, const QueryPattern& pattern) {
    std::vector<AstNode*> out;
    traverse(root, [&](AstNode& n) {
        if (matches(n, pattern)) {
            out.push_back(&n);
        }
    });
    return out;
}

QueryPattern valuePattern(std::function<bool(std::string_view)> pred, std::string name) {
    auto fn = [pred = std::move(pred)](const AstNode& node) {
        return node.value().has_value() && pred(*node.value());
    };
    return QueryPattern(QueryPattern::NodePredicate(fn), std::move(name));
}

} // namespace dockfix
