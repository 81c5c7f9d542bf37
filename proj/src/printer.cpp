#include "dockfix/printer.hpp"

#include <algorithm>
#include <cctype>

namespace dockfix {

namespace {

bool isShellWordKind(NodeKind k) {
    return k == NodeKind::BashCommandName || k == NodeKind::BashCommandArgs;
}

bool isNameChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Canonical renderer shared by normalized mode and modified subtrees.
class CanonicalRenderer {
  public:
    std::string renderDocument(const AstNode& root, std::string_view original) {
        std::string out;
        for (const auto& child : root.children()) {
            std::string line = render(*child);
            if (line.empty()) {
                continue;
            }
            out += line;
            out += '\n';
        }
        if (!original.empty() && original.back() != '\n' && !out.empty() &&
            out.back() == '\n') {
            out.pop_back();
        }
        return out;
    }

    std::string render(const AstNode& n) {
        switch (n.kind()) {
        case NodeKind::DockerFile:
            return renderDocument(n, "\n");
        case NodeKind::Comment:
        case NodeKind::ParserDirective:
            return n.value().value_or("");
        case NodeKind::BashScript:
        case NodeKind::BashStatementList:
        case NodeKind::BashIfBody:
        case NodeKind::BashElseBody:
        case NodeKind::BashIfCondition:
            return renderSeq(n);
        case NodeKind::BashCommand:
            return renderCommand(n);
        case NodeKind::BashCommandName:
        case NodeKind::BashCommandArgs:
            return renderWord(n);
        case NodeKind::BashLiteral:
            return n.value().value_or("");
        case NodeKind::BashVariable:
            return renderVariable(n, nullptr);
        case NodeKind::BashQuotedString: {
            std::string q = n.value().value_or("\"");
            std::string out = q;
            out += renderParts(n);
            out += q;
            return out;
        }
        case NodeKind::BashCommandSubstitution: {
            std::string out = "$(";
            if (const AstNode* list = n.getChild(NodeKind::BashStatementList)) {
                out += renderSeq(*list);
            }
            out += ")";
            return out;
        }
        case NodeKind::BashSubshell: {
            std::string out = "(";
            if (const AstNode* list = n.getChild(NodeKind::BashStatementList)) {
                out += renderSeq(*list);
            }
            out += ")";
            return out;
        }
        case NodeKind::BashOperatorAnd:
            return "&&";
        case NodeKind::BashOperatorOr:
            return "||";
        case NodeKind::BashOperatorSemicolon:
            return ";";
        case NodeKind::BashPipe:
            return "|";
        case NodeKind::BashRedirect: {
            std::string out = n.value().value_or("");
            for (const auto& c : n.children()) {
                out += render(*c);
            }
            return out;
        }
        case NodeKind::BashIf:
            return renderIf(n);
        case NodeKind::BashFor:
            return renderFor(n);
        case NodeKind::BashOpaque:
            return foldValue(n.value().value_or(""));
        default:
            break;
        }
        if (isInstructionKind(n.kind())) {
            return renderInstruction(n);
        }
        return n.value().value_or("");
    }

  private:
    static std::string foldValue(const std::string& v) {
        // Continuation escapes are already folded out of payload values;
        // keep the bytes as-is otherwise.
        return v;
    }

    std::string renderInstruction(const AstNode& n) {
        std::string out = n.value().value_or("");
        bool exec_form = false;
        std::string exec;
        for (const auto& c : n.children()) {
            if (c->kind() == NodeKind::BashLiteral) {
                if (!exec_form) {
                    exec_form = true;
                } else {
                    exec += ", ";
                }
                exec += '"';
                exec += escapeJson(c->value().value_or(""));
                exec += '"';
                continue;
            }
            out += ' ';
            out += render(*c);
        }
        if (exec_form) {
            out += " [";
            out += exec;
            out += ']';
        }
        return out;
    }

    static std::string escapeJson(const std::string& v) {
        std::string out;
        for (char c : v) {
            if (c == '"' || c == '\\') {
                out += '\\';
            }
            out += c;
        }
        return out;
    }

    std::string renderSeq(const AstNode& n) {
        std::string out;
        for (const auto& c : n.children()) {
            switch (c->kind()) {
            case NodeKind::BashOperatorSemicolon:
                out += ";";
                break;
            case NodeKind::BashOperatorAnd:
            case NodeKind::BashOperatorOr:
            case NodeKind::BashPipe:
                out += " ";
                out += render(*c);
                break;
            default:
                if (!out.empty()) {
                    out += " ";
                }
                out += render(*c);
                break;
            }
        }
        return out;
    }

    std::string renderCommand(const AstNode& n) {
        std::string out;
        for (const auto& c : n.children()) {
            if (!out.empty()) {
                out += " ";
            }
            out += render(*c);
        }
        return out;
    }

    std::string renderWord(const AstNode& n) { return renderParts(n); }

    std::string renderParts(const AstNode& n) {
        std::string out;
        const auto& kids = n.children();
        for (std::size_t i = 0; i < kids.size(); ++i) {
            if (kids[i]->kind() == NodeKind::BashVariable) {
                const AstNode* next = i + 1 < kids.size() ? kids[i + 1].get() : nullptr;
                out += renderVariable(*kids[i], next);
            } else {
                out += render(*kids[i]);
            }
        }
        return out;
    }

    std::string renderVariable(const AstNode& n, const AstNode* next) {
        std::string name = n.value().value_or("");
        bool needs_braces = false;
        for (char c : name) {
            if (!isNameChar(c)) {
                needs_braces = true;
                break;
            }
        }
        if (!needs_braces && next != nullptr && next->kind() == NodeKind::BashLiteral) {
            const auto& v = next->value();
            if (v.has_value() && !v->empty() && isNameChar((*v)[0])) {
                needs_braces = true;
            }
        }
        if (needs_braces) {
            return "${" + name + "}";
        }
        return "$" + name;
    }

    std::string renderIf(const AstNode& n) {
        std::string cond;
        std::string body;
        std::string else_body;
        bool has_else = false;
        if (const AstNode* c = n.getChild(NodeKind::BashIfCondition)) {
            cond = renderSeq(*c);
        }
        if (const AstNode* b = n.getChild(NodeKind::BashIfBody)) {
            body = renderSeq(*b);
        }
        if (const AstNode* e = n.getChild(NodeKind::BashElseBody)) {
            has_else = true;
            else_body = renderSeq(*e);
        }
        auto sep = [](const std::string& s) { // statement separator before keywords
            return (!s.empty() && s.back() == ';') ? " " : "; ";
        };
        std::string out = "if " + cond + sep(cond) + "then " + body;
        if (has_else) {
            out += sep(body);
            out += "else ";
            out += else_body;
            out += sep(else_body);
        } else {
            out += sep(body);
        }
        out += "fi";
        return out;
    }

    std::string renderFor(const AstNode& n) {
        std::string var;
        std::string items;
        std::string body;
        for (const auto& c : n.children()) {
            if (c->kind() == NodeKind::BashLiteral && var.empty()) {
                var = c->value().value_or("");
            } else if (isShellWordKind(c->kind())) {
                if (!items.empty()) {
                    items += " ";
                }
                items += render(*c);
            } else if (c->kind() == NodeKind::BashStatementList) {
                body = renderSeq(*c);
            }
        }
        std::string out = "for " + var;
        if (!items.empty()) {
            out += " in " + items;
        }
        out += "; do " + body;
        out += (!body.empty() && body.back() == ';') ? " " : "; ";
        out += "done";
        return out;
    }
};

/// Preserve-mode printer: original slices for untouched subtrees, canonical
/// rendering with original inter-node gaps elsewhere.
class PreservePrinter {
  public:
    explicit PreservePrinter(std::string_view src) : src_(src) {}

    std::string run(const AstNode& root) {
        validate(root);
        emitNode(root);
        return std::move(out_);
    }

  private:
    std::string_view src_;
    std::string out_;
    bool pending_sep_ = false;
    CanonicalRenderer canonical_;

    void validate(const AstNode& n) {
        if (!n.modified() && n.hasSourceSpan() && n.childCount() == 0 &&
            n.value().has_value()) {
            const std::string& v = *n.value();
            bool checkable = !v.empty() && v.find('\\') == std::string::npos &&
                             v.find('"') == std::string::npos;
            if (checkable && n.span().end_offset <= src_.size()) {
                std::string_view slice =
                    src_.substr(n.span().start_offset, n.span().length());
                if (slice.find(v) == std::string_view::npos) {
                    throw InconsistentSpans("node value no longer matches its span: " + v);
                }
            }
        }
        for (const auto& c : n.children()) {
            validate(*c);
        }
    }

    void emitRaw(std::string_view piece) {
        if (piece.empty()) {
            return;
        }
        maybeSep(piece[0]);
        out_ += piece;
        pending_sep_ = false;
    }

    /// `inserted` nodes need token separation from their neighbors; a leaf
    /// rewritten in place keeps the spacing of the surrounding gaps.
    void emitCanonical(const AstNode& n, bool inserted) {
        std::string text = canonical_.render(n);
        if (!text.empty()) {
            maybeSep(text[0]);
            out_ += text;
        }
        pending_sep_ = inserted;
    }

    void maybeSep(char next_first) {
        if (!pending_sep_) {
            return;
        }
        if (out_.empty()) {
            pending_sep_ = false;
            return;
        }
        char last = out_.back();
        bool last_ws = last == ' ' || last == '\t' || last == '\n' || last == '\r';
        bool next_ws = next_first == ' ' || next_first == '\t' || next_first == '\n' ||
                       next_first == '\r';
        if (!last_ws && !next_ws) {
            out_ += ' ';
        }
        pending_sep_ = false;
    }

    void emitNode(const AstNode& n) {
        if (!n.modified() && n.hasSourceSpan()) {
            emitRaw(src_.substr(n.span().start_offset, n.span().length()));
            return;
        }
        if (!n.hasSourceSpan()) {
            emitCanonical(n, /*inserted=*/true);
            return;
        }
        if (n.childCount() == 0) {
            // Rewritten leaf: emit the new value in place.
            emitCanonical(n, /*inserted=*/false);
            return;
        }
        // Modified node with a source span: reuse the original bytes for
        // everything between child spans.
        std::size_t pos = n.span().start_offset;
        const std::size_t end = n.span().end_offset;
        for (const auto& child : n.children()) {
            bool in_range = child->hasSourceSpan() &&
                            child->span().start_offset >= pos &&
                            child->span().end_offset <= end;
            if (in_range) {
                emitRaw(src_.substr(pos, child->span().start_offset - pos));
                emitNode(*child);
                pos = child->span().end_offset;
            } else {
                emitCanonical(*child, /*inserted=*/true);
            }
        }
        if (pos < end) {
            emitRaw(src_.substr(pos, end - pos));
        }
    }
};

} // namespace

std::string print(const AstNode& root, PrintMode mode, std::string_view original) {
    if (mode.preserve_formatting) {
        PreservePrinter printer(original);
        return printer.run(root);
    }
    CanonicalRenderer renderer;
    if (root.kind() == NodeKind::DockerFile) {
        return renderer.renderDocument(root, original);
    }
    return renderer.render(root);
}

} // namespace dockfix
