#pragma once

#include "dockfix/span.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dockfix {

/// Unified node taxonomy: Dockerfile instruction kinds plus the supported
/// bash subset. BashOpaque is the only kind that may hold uninterpreted
/// source text.
enum class NodeKind {
    // Docker side
    DockerFile,
    From,
    Run,
    Copy,
    Add,
    Env,
    Arg,
    Workdir,
    Expose,
    Entrypoint,
    Cmd,
    Label,
    User,
    Volume,
    Shell,
    Healthcheck,
    Onbuild,
    Stopsignal,
    Comment,
    ParserDirective,
    // Shell side
    BashScript,
    BashStatementList,
    BashCommand,
    BashCommandName,
    BashCommandArgs,
    BashLiteral,
    BashVariable,
    BashCommandSubstitution,
    BashQuotedString,
    BashOperatorAnd,
    BashOperatorOr,
    BashOperatorSemicolon,
    BashPipe,
    BashRedirect,
    BashSubshell,
    BashIf,
    BashIfCondition,
    BashIfBody,
    BashElseBody,
    BashFor,
    BashOpaque,
};

std::string_view toString(NodeKind kind);

/// True for the instruction-level Docker kinds (everything that can appear
/// as a direct child of DockerFile except Comment/ParserDirective).
bool isInstructionKind(NodeKind kind);

/// Raised when a mutation would detach or replace the document root.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One node of the unified Dockerfile+shell tree.
///
/// Nodes own their children; parent links are maintained by the mutation
/// helpers. A node parsed from source carries the file span of its bytes.
/// A node built programmatically has no source span, a zero-width anchor
/// position, and is born modified.
class AstNode {
  public:
    using Ptr = std::unique_ptr<AstNode>;

    explicit AstNode(NodeKind kind) : kind_(kind), synthetic_(true), modified_(true) {}
    AstNode(NodeKind kind, SourceSpan span) : kind_(kind), span_(span) {}
    AstNode(NodeKind kind, SourceSpan span, std::string value)
        : kind_(kind), span_(span), value_(std::move(value)) {}
    AstNode(NodeKind kind, std::string value)
        : kind_(kind), value_(std::move(value)), synthetic_(true), modified_(true) {}

    AstNode(const AstNode&) = delete;
    AstNode& operator=(const AstNode&) = delete;

    NodeKind kind() const { return kind_; }
    const SourceSpan& span() const { return span_; }
    void setSpan(SourceSpan s) { span_ = s; }
    /// False for synthetic nodes; their span is only an insertion anchor.
    bool hasSourceSpan() const { return !synthetic_; }
    void setSynthetic(bool v) { synthetic_ = v; }

    const std::optional<std::string>& value() const { return value_; }
    /// Rewrites the literal text of a leaf and dirties the node.
    void setValue(std::string v) {
        value_ = std::move(v);
        markModified();
    }

    AstNode* parent() { return parent_; }
    const AstNode* parent() const { return parent_; }

    const std::vector<Ptr>& children() const { return children_; }
    std::size_t childCount() const { return children_.size(); }
    AstNode& child(std::size_t i) { return *children_[i]; }
    const AstNode& child(std::size_t i) const { return *children_[i]; }

    bool modified() const { return modified_; }
    /// Sets the dirty flag here and on every ancestor.
    void markModified() {
        for (AstNode* n = this; n != nullptr && !n->modified_; n = n->parent_) {
            n->modified_ = true;
        }
        // markModified on an already-modified node still needs to dirty
        // ancestors when the node was re-attached.
        for (AstNode* n = parent_; n != nullptr && !n->modified_; n = n->parent_) {
            n->modified_ = true;
        }
    }

    void annotate(std::string_view tag) { annotations_.emplace(tag); }
    bool hasAnnotation(std::string_view tag) const {
        return annotations_.find(std::string(tag)) != annotations_.end();
    }
    const std::set<std::string>& annotations() const { return annotations_; }
    void clearAnnotations() { annotations_.clear(); }

    // Navigation (spec query surface).
    AstNode* getParent(NodeKind kind);
    const AstNode* getParent(NodeKind kind) const;
    AstNode* getChild(NodeKind kind);
    std::vector<AstNode*> getChildren(NodeKind kind);
    AstNode* getElement(NodeKind kind);
    std::vector<AstNode*> getElements(NodeKind kind);
    const AstNode* getChild(NodeKind kind) const;
    const AstNode* getElement(NodeKind kind) const;
    std::vector<const AstNode*> getElements(NodeKind kind) const;

    /// Deep copy; the clone has no parent. Annotations, values, spans and
    /// flags are preserved.
    Ptr clone() const;

    /// Index of a direct child, or npos.
    std::size_t indexOf(const AstNode& child) const;

    /// Parse-time attachment: appends a child without touching dirty flags.
    /// Editing code must go through addChild instead.
    void adoptChild(Ptr node) {
        node->parent_ = this;
        children_.push_back(std::move(node));
    }

  private:
    friend void addChild(AstNode& parent, Ptr node, std::size_t position);
    friend AstNode::Ptr replaceNode(AstNode& oldNode, Ptr newNode);
    friend AstNode::Ptr removeNode(AstNode& node);

    NodeKind kind_;
    SourceSpan span_{};
    std::optional<std::string> value_;
    std::vector<Ptr> children_;
    AstNode* parent_ = nullptr;
    std::set<std::string> annotations_;
    bool synthetic_ = false;
    bool modified_ = false;
};

/// Inserts `node` as a child of `parent` at `position` (0..childCount).
/// Dirties the insertion point and all ancestors.
void addChild(AstNode& parent, AstNode::Ptr node, std::size_t position);
inline void appendChild(AstNode& parent, AstNode::Ptr node) {
    addChild(parent, std::move(node), parent.childCount());
}

/// Swaps `oldNode` for `newNode` in the parent's child list; returns the
/// detached old node. Throws StructuralError on the document root.
AstNode::Ptr replaceNode(AstNode& oldNode, AstNode::Ptr newNode);

/// Detaches `node` from its parent and returns ownership.
/// Throws StructuralError on the document root.
AstNode::Ptr removeNode(AstNode& node);

/// Preorder walk, root first.
void traverse(AstNode& root, const std::function<void(AstNode&)>& fn);
void traverse(const AstNode& root, const std::function<void(const AstNode&)>& fn);

/// Structure+value equality, ignoring spans, annotations and dirty flags.
/// Leaf values are compared after whitespace folding when `fold_values` is
/// set (continuation-insensitive comparison).
bool structurallyEqual(const AstNode& a, const AstNode& b, bool fold_values = false);

/// Equality of structure, folded values and annotation sets.
bool equalWithAnnotations(const AstNode& a, const AstNode& b);

} // namespace dockfix
