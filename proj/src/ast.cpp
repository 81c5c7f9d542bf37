#include "dockfix/ast.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace dockfix {

namespace {

struct KindName {
    NodeKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 41> kKindNames{{
    {NodeKind::DockerFile, "DockerFile"},
    {NodeKind::From, "From"},
    {NodeKind::Run, "Run"},
    {NodeKind::Copy, "Copy"},
    {NodeKind::Add, "Add"},
    {NodeKind::Env, "Env"},
    {NodeKind::Arg, "Arg"},
    {NodeKind::Workdir, "Workdir"},
    {NodeKind::Expose, "Expose"},
    {NodeKind::Entrypoint, "Entrypoint"},
    {NodeKind::Cmd, "Cmd"},
    {NodeKind::Label, "Label"},
    {NodeKind::User, "User"},
    {NodeKind::Volume, "Volume"},
    {NodeKind::Shell, "Shell"},
    {NodeKind::Healthcheck, "Healthcheck"},
    {NodeKind::Onbuild, "Onbuild"},
    {NodeKind::Stopsignal, "Stopsignal"},
    {NodeKind::Comment, "Comment"},
    {NodeKind::ParserDirective, "ParserDirective"},
    {NodeKind::BashScript, "BashScript"},
    {NodeKind::BashStatementList, "BashStatementList"},
    {NodeKind::BashCommand, "BashCommand"},
    {NodeKind::BashCommandName, "BashCommandName"},
    {NodeKind::BashCommandArgs, "BashCommandArgs"},
    {NodeKind::BashLiteral, "BashLiteral"},
    {NodeKind::BashVariable, "BashVariable"},
    {NodeKind::BashCommandSubstitution, "BashCommandSubstitution"},
    {NodeKind::BashQuotedString, "BashQuotedString"},
    {NodeKind::BashOperatorAnd, "BashOperatorAnd"},
    {NodeKind::BashOperatorOr, "BashOperatorOr"},
    {NodeKind::BashOperatorSemicolon, "BashOperatorSemicolon"},
    {NodeKind::BashPipe, "BashPipe"},
    {NodeKind::BashRedirect, "BashRedirect"},
    {NodeKind::BashSubshell, "BashSubshell"},
    {NodeKind::BashIf, "BashIf"},
    {NodeKind::BashIfCondition, "BashIfCondition"},
    {NodeKind::BashIfBody, "BashIfBody"},
    {NodeKind::BashElseBody, "BashElseBody"},
    {NodeKind::BashFor, "BashFor"},
    {NodeKind::BashOpaque, "BashOpaque"},
}};

} // namespace

std::string_view toString(NodeKind kind) {
    for (const auto& entry : kKindNames) {
        if (entry.kind == kind) {
            return entry.name;
        }
    }
    return "Unknown";
}

bool isInstructionKind(NodeKind kind) {
    switch (kind) {
    case NodeKind::From:
    case NodeKind::Run:
    case NodeKind::Copy:
    case NodeKind::Add:
    case NodeKind::Env:
    case NodeKind::Arg:
    case NodeKind::Workdir:
    case NodeKind::Expose:
    case NodeKind::Entrypoint:
    case NodeKind::Cmd:
    case NodeKind::Label:
    case NodeKind::User:
    case NodeKind::Volume:
    case NodeKind::Shell:
    case NodeKind::Healthcheck:
    case NodeKind::Onbuild:
    case NodeKind::Stopsignal:
        return true;
    default:
        return false;
    }
}

AstNode* AstNode::getParent(NodeKind kind) {
    for (AstNode* n = parent_; n != nullptr; n = n->parent_) {
        if (n->kind_ == kind) {
            return n;
        }
    }
    return nullptr;
}

const AstNode* AstNode::getParent(NodeKind kind) const {
    return const_cast<AstNode*>(this)->getParent(kind);
}

AstNode* AstNode::getChild(NodeKind kind) {
    for (auto& c : children_) {
        if (c->kind_ == kind) {
            return c.get();
        }
    }
    return nullptr;
}

const AstNode* AstNode::getChild(NodeKind kind) const {
    return const_cast<AstNode*>(this)->getChild(kind);
}

std::vector<AstNode*> AstNode::getChildren(NodeKind kind) {
    std::vector<AstNode*> out;
    for (auto& c : children_) {
        if (c->kind_ == kind) {
            out.push_back(c.get());
        }
    }
    return out;
}

AstNode* AstNode::getElement(NodeKind kind) {
    for (auto& c : children_) {
        if (c->kind_ == kind) {
            return c.get();
        }
        if (AstNode* found = c->getElement(kind)) {
            return found;
        }
    }
    return nullptr;
}

const AstNode* AstNode::getElement(NodeKind kind) const {
    return const_cast<AstNode*>(this)->getElement(kind);
}

std::vector<AstNode*> AstNode::getElements(NodeKind kind) {
    std::vector<AstNode*> out;
    for (auto& c : children_) {
        if (c->kind_ == kind) {
            out.push_back(c.get());
        }
        auto nested = c->getElements(kind);
        out.insert(out.end(), nested.begin(), nested.end());
    }
    return out;
}

std::vector<const AstNode*> AstNode::getElements(NodeKind kind) const {
    auto muts = const_cast<AstNode*>(this)->getElements(kind);
    return {muts.begin(), muts.end()};
}

AstNode::Ptr AstNode::clone() const {
    Ptr copy;
    if (value_.has_value()) {
        copy = std::make_unique<AstNode>(kind_, span_, *value_);
    } else {
        copy = std::make_unique<AstNode>(kind_, span_);
    }
    copy->synthetic_ = synthetic_;
    copy->modified_ = modified_;
    copy->annotations_ = annotations_;
    for (const auto& c : children_) {
        auto child_copy = c->clone();
        child_copy->parent_ = copy.get();
        copy->children_.push_back(std::move(child_copy));
    }
    return copy;
}

std::size_t AstNode::indexOf(const AstNode& child) const {
    for (std::size_t i = 0; i < children_.size(); ++i) {
        if (children_[i].get() == &child) {
            return i;
        }
    }
    return static_cast<std::size_t>(-1);
}

void addChild(AstNode& parent, AstNode::Ptr node, std::size_t position) {
    if (position > parent.children_.size()) {
        throw StructuralError("addChild: position out of range");
    }
    node->parent_ = &parent;
    AstNode* inserted = node.get();
    parent.children_.insert(parent.children_.begin() + static_cast<std::ptrdiff_t>(position),
                            std::move(node));
    inserted->markModified();
}

AstNode::Ptr replaceNode(AstNode& oldNode, AstNode::Ptr newNode) {
    AstNode* parent = oldNode.parent_;
    if (parent == nullptr || oldNode.kind_ == NodeKind::DockerFile) {
        throw StructuralError("replaceNode: cannot replace the document root");
    }
    std::size_t idx = parent->indexOf(oldNode);
    AstNode::Ptr detached = std::move(parent->children_[idx]);
    detached->parent_ = nullptr;
    newNode->parent_ = parent;
    AstNode* inserted = newNode.get();
    parent->children_[idx] = std::move(newNode);
    inserted->markModified();
    return detached;
}

AstNode::Ptr removeNode(AstNode& node) {
    AstNode* parent = node.parent_;
    if (parent == nullptr || node.kind_ == NodeKind::DockerFile) {
        throw StructuralError("removeNode: cannot remove the document root");
    }
    std::size_t idx = parent->indexOf(node);
    AstNode::Ptr detached = std::move(parent->children_[idx]);
    parent->children_.erase(parent->children_.begin() + static_cast<std::ptrdiff_t>(idx));
    detached->parent_ = nullptr;
    parent->markModified();
    return detached;
}

void traverse(AstNode& root, const std::function<void(AstNode&)>& fn) {
    fn(root);
    for (auto& c : root.children()) {
        traverse(*c, fn);
    }
}

void traverse(const AstNode& root, const std::function<void(const AstNode&)>& fn) {
    fn(root);
    for (const auto& c : root.children()) {
        traverse(*c, fn);
    }
}

namespace {

/// Collapses continuation escapes and whitespace runs so that values
/// compare formatting-insensitively.
std::string foldWhitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '\\' && i + 1 < s.size() && (s[i + 1] == '\n' || s[i + 1] == '\r')) {
            in_ws = true;
            if (i + 2 < s.size() && s[i + 1] == '\r' && s[i + 2] == '\n') {
                ++i;
            }
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) {
            out.push_back(' ');
        }
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

} // namespace

bool structurallyEqual(const AstNode& a, const AstNode& b, bool fold_values) {
    if (a.kind() != b.kind()) {
        return false;
    }
    const auto& va = a.value();
    const auto& vb = b.value();
    if (va.has_value() != vb.has_value()) {
        return false;
    }
    if (va.has_value()) {
        if (fold_values ? foldWhitespace(*va) != foldWhitespace(*vb) : *va != *vb) {
            return false;
        }
    }
    if (a.childCount() != b.childCount()) {
        return false;
    }
    for (std::size_t i = 0; i < a.childCount(); ++i) {
        if (!structurallyEqual(a.child(i), b.child(i), fold_values)) {
            return false;
        }
    }
    return true;
}

bool equalWithAnnotations(const AstNode& a, const AstNode& b) {
    if (!structurallyEqual(a, b, /*fold_values=*/true)) {
        return false;
    }
    bool equal = true;
    // Annotation sets compared positionally; structure already matches.
    std::function<void(const AstNode&, const AstNode&)> walk = [&](const AstNode& x,
                                                                   const AstNode& y) {
        if (x.annotations() != y.annotations()) {
            equal = false;
            return;
        }
        for (std::size_t i = 0; i < x.childCount(); ++i) {
            walk(x.child(i), y.child(i));
        }
    };
    walk(a, b);
    return equal;
}

} // namespace dockfix
