#include "dockfix/parser.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace dockfix {

std::size_t FoldMap::fileOffset(std::size_t folded) const {
    if (folded < to_file_.size()) {
        return to_file_[folded];
    }
    return end_sentinel_;
}

FoldMap FoldMap::identity(std::size_t file_start, std::size_t length) {
    FoldMap m;
    m.to_file_.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        m.to_file_.push_back(file_start + i);
    }
    m.finish(file_start + length);
    return m;
}

SourceSpan FoldMap::toFileSpan(std::size_t folded_start, std::size_t folded_end,
                               const LineIndex& index) const {
    std::size_t file_start = fileOffset(folded_start);
    std::size_t file_end;
    if (folded_end <= folded_start) {
        file_end = file_start;
    } else {
        // End is one past the last byte actually covered, so continuation
        // bytes after a token stay out of its span.
        file_end = fileOffset(folded_end - 1) + 1;
    }
    return index.span(file_start, file_end);
}

SourceSpan spanToFileCoords(std::size_t fragment_start, std::size_t fragment_end,
                            const FoldMap& map, const LineIndex& index) {
    if (fragment_end < fragment_start || fragment_end > map.foldedLength()) {
        throw std::out_of_range("spanToFileCoords: fragment range exceeds payload");
    }
    return map.toFileSpan(fragment_start, fragment_end, index);
}

namespace {

bool isWordChar(char c) {
    switch (c) {
    case ' ':
    case '\t':
    case '\r':
    case '\n':
    case '&':
    case '|':
    case ';':
    case '(':
    case ')':
    case '<':
    case '>':
        return false;
    default:
        return true;
    }
}

bool isNameChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool isSpecialParamChar(char c) {
    return c == '?' || c == '#' || c == '@' || c == '*' || c == '$' || c == '!';
}

struct Token {
    enum class Type {
        Word,
        And,
        Or,
        Semi,
        Pipe,
        LParen,
        RParen,
        Redirect,
        Comment,
        Unsupported,
        End,
    };
    Type type = Type::End;
    std::size_t start = 0;
    std::size_t end = 0;
    bool redirect_has_target = false;
};

/// Recursive-descent parser over one folded shell payload.
class ShellParser {
  public:
    ShellParser(std::string_view folded, const FoldMap& map, const LineIndex& index,
                std::vector<ParseDiagnostic>& diags)
        : text_(folded), map_(map), index_(index), diags_(diags) {}

    AstNode::Ptr parseScript() {
        auto script = std::make_unique<AstNode>(NodeKind::BashScript,
                                                fileSpan(0, text_.size()));
        parseSequence(*script, 0, text_.size(), {});
        return script;
    }

  private:
    std::string_view text_;
    const FoldMap& map_;
    const LineIndex& index_;
    std::vector<ParseDiagnostic>& diags_;

    SourceSpan fileSpan(std::size_t start, std::size_t end) const {
        return map_.toFileSpan(start, end, index_);
    }

    void diag(Severity sev, std::string message, std::size_t start, std::size_t end) {
        diags_.push_back({sev, std::move(message), fileSpan(start, end)});
    }

    std::size_t skipBlank(std::size_t pos, std::size_t hi) const {
        while (pos < hi && (text_[pos] == ' ' || text_[pos] == '\t' || text_[pos] == '\r' ||
                            text_[pos] == '\n')) {
            ++pos;
        }
        return pos;
    }

    std::size_t scanWord(std::size_t pos, std::size_t hi) const {
        while (pos < hi) {
            char c = text_[pos];
            if (c == '\\') {
                pos = std::min(pos + 2, hi);
                continue;
            }
            if (c == '\'') {
                std::size_t close = text_.find('\'', pos + 1);
                pos = (close == std::string_view::npos || close >= hi) ? hi : close + 1;
                continue;
            }
            if (c == '"') {
                pos = scanDoubleQuote(pos, hi);
                continue;
            }
            if (c == '`') {
                std::size_t close = text_.find('`', pos + 1);
                pos = (close == std::string_view::npos || close >= hi) ? hi : close + 1;
                continue;
            }
            if (c == '$' && pos + 1 < hi && text_[pos + 1] == '(') {
                pos = scanBalanced(pos + 1, hi, '(', ')');
                continue;
            }
            if (c == '$' && pos + 1 < hi && text_[pos + 1] == '{') {
                pos = scanBalanced(pos + 1, hi, '{', '}');
                continue;
            }
            if (!isWordChar(c)) {
                break;
            }
            ++pos;
        }
        return pos;
    }

    std::size_t scanDoubleQuote(std::size_t pos, std::size_t hi) const {
        ++pos; // opening quote
        while (pos < hi) {
            char c = text_[pos];
            if (c == '\\') {
                pos = std::min(pos + 2, hi);
                continue;
            }
            if (c == '"') {
                return pos + 1;
            }
            if (c == '$' && pos + 1 < hi && text_[pos + 1] == '(') {
                pos = scanBalanced(pos + 1, hi, '(', ')');
                continue;
            }
            ++pos;
        }
        return hi;
    }

    /// pos points at the opening bracket; returns the offset past the match.
    std::size_t scanBalanced(std::size_t pos, std::size_t hi, char open, char close) const {
        int depth = 0;
        while (pos < hi) {
            char c = text_[pos];
            if (c == '\\') {
                pos = std::min(pos + 2, hi);
                continue;
            }
            if (c == '\'') {
                std::size_t q = text_.find('\'', pos + 1);
                pos = (q == std::string_view::npos || q >= hi) ? hi : q + 1;
                continue;
            }
            if (c == '"') {
                pos = scanDoubleQuote(pos, hi);
                continue;
            }
            if (c == open) {
                ++depth;
            } else if (c == close) {
                --depth;
                if (depth == 0) {
                    return pos + 1;
                }
            }
            ++pos;
        }
        return hi;
    }

    Token lex(std::size_t pos, std::size_t hi) const {
        Token t;
        pos = skipBlank(pos, hi);
        t.start = pos;
        if (pos >= hi) {
            t.type = Token::Type::End;
            t.end = pos;
            return t;
        }
        char c = text_[pos];
        auto two = [&](char a, char b) {
            return c == a && pos + 1 < hi && text_[pos + 1] == b;
        };
        if (c == '#') {
            t.type = Token::Type::Comment;
            t.end = hi;
            return t;
        }
        if (two('&', '&')) {
            t.type = Token::Type::And;
            t.end = pos + 2;
            return t;
        }
        if (two('|', '|')) {
            t.type = Token::Type::Or;
            t.end = pos + 2;
            return t;
        }
        if (two('|', '&') || two(';', ';')) {
            t.type = Token::Type::Unsupported;
            t.end = pos + 2;
            return t;
        }
        if (c == '&') {
            t.type = Token::Type::Unsupported;
            t.end = pos + 1;
            return t;
        }
        if (c == '|') {
            t.type = Token::Type::Pipe;
            t.end = pos + 1;
            return t;
        }
        if (c == ';') {
            t.type = Token::Type::Semi;
            t.end = pos + 1;
            return t;
        }
        if (c == '(') {
            t.type = Token::Type::LParen;
            t.end = pos + 1;
            return t;
        }
        if (c == ')') {
            t.type = Token::Type::RParen;
            t.end = pos + 1;
            return t;
        }
        if (c == '<' || c == '>' ||
            (std::isdigit(static_cast<unsigned char>(c)) && pos + 1 < hi &&
             (text_[pos + 1] == '<' || text_[pos + 1] == '>'))) {
            return lexRedirect(pos, hi);
        }
        t.type = Token::Type::Word;
        t.end = scanWord(pos, hi);
        if (t.end == t.start) {
            t.type = Token::Type::Unsupported;
            t.end = pos + 1;
        }
        return t;
    }

    Token lexRedirect(std::size_t pos, std::size_t hi) const {
        Token t;
        t.start = pos;
        std::size_t p = pos;
        while (p < hi && std::isdigit(static_cast<unsigned char>(text_[p]))) {
            ++p;
        }
        if (p < hi && text_[p] == '<') {
            if (p + 1 < hi && (text_[p + 1] == '<' || text_[p + 1] == '(')) {
                // Heredocs, here-strings and process substitution are
                // outside the subset.
                t.type = Token::Type::Unsupported;
                t.end = p + 2;
                return t;
            }
            ++p;
        } else if (p < hi && text_[p] == '>') {
            ++p;
            if (p < hi && text_[p] == '>') {
                ++p;
            }
            if (p < hi && text_[p] == '(') {
                t.type = Token::Type::Unsupported;
                t.end = p + 1;
                return t;
            }
        }
        bool has_target = true;
        if (p < hi && text_[p] == '&') {
            ++p;
            std::size_t digits = p;
            while (p < hi && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                ++p;
            }
            if (p > digits) {
                has_target = false; // e.g. 2>&1
            }
        }
        t.type = Token::Type::Redirect;
        t.end = p;
        t.redirect_has_target = has_target;
        return t;
    }

    std::string_view tokenText(const Token& t) const {
        return text_.substr(t.start, t.end - t.start);
    }

    bool isKeywordWord(const Token& t, std::string_view kw) const {
        return t.type == Token::Type::Word && tokenText(t) == kw;
    }

    struct SeqStop {
        bool found = false;
        std::string keyword;
        std::size_t kw_start = 0;
        std::size_t pos_after = 0;
    };

    /// Parses statements and operators into `container` until `hi` or until
    /// one of `stops` appears in command position.
    SeqStop parseSequence(AstNode& container, std::size_t lo, std::size_t hi,
                          const std::vector<std::string_view>& stops) {
        std::size_t pos = lo;
        SeqStop stop;
        while (true) {
            Token t = lex(pos, hi);
            switch (t.type) {
            case Token::Type::End:
                stop.pos_after = hi;
                return stop;
            case Token::Type::Comment: {
                container.adoptChild(std::make_unique<AstNode>(
                    NodeKind::Comment, fileSpan(t.start, t.end),
                    std::string(tokenText(t))));
                pos = t.end;
                break;
            }
            case Token::Type::And:
            case Token::Type::Or:
            case Token::Type::Semi:
            case Token::Type::Pipe: {
                NodeKind kind = t.type == Token::Type::And    ? NodeKind::BashOperatorAnd
                                : t.type == Token::Type::Or   ? NodeKind::BashOperatorOr
                                : t.type == Token::Type::Semi ? NodeKind::BashOperatorSemicolon
                                                              : NodeKind::BashPipe;
                container.adoptChild(std::make_unique<AstNode>(kind, fileSpan(t.start, t.end)));
                pos = t.end;
                break;
            }
            case Token::Type::LParen: {
                std::size_t close = scanBalanced(t.start, hi, '(', ')');
                auto subshell =
                    std::make_unique<AstNode>(NodeKind::BashSubshell, fileSpan(t.start, close));
                std::size_t inner_end =
                    (close > t.start + 1 && text_[close - 1] == ')') ? close - 1 : close;
                auto list = std::make_unique<AstNode>(NodeKind::BashStatementList,
                                                      fileSpan(t.start + 1, inner_end));
                parseSequence(*list, t.start + 1, inner_end, {});
                subshell->adoptChild(std::move(list));
                container.adoptChild(std::move(subshell));
                pos = close;
                break;
            }
            case Token::Type::RParen:
                diag(Severity::Warning, "unbalanced ')' in shell payload", t.start, t.end);
                pos = emitOpaqueUntilSeparator(container, t.start, hi);
                break;
            case Token::Type::Unsupported:
                pos = emitOpaqueUntilSeparator(container, t.start, hi);
                break;
            case Token::Type::Redirect:
                pos = parseSimpleCommand(container, t.start, hi);
                break;
            case Token::Type::Word: {
                std::string_view word = tokenText(t);
                for (auto s : stops) {
                    if (word == s) {
                        stop.found = true;
                        stop.keyword = std::string(s);
                        stop.kw_start = t.start;
                        stop.pos_after = t.end;
                        return stop;
                    }
                }
                if (word == "if") {
                    pos = parseIf(container, t, hi);
                } else if (word == "for") {
                    pos = parseFor(container, t, hi);
                } else if (word == "while" || word == "until") {
                    pos = emitOpaqueConstruct(container, t.start, hi, "do", "done");
                } else if (word == "case") {
                    pos = emitOpaqueConstruct(container, t.start, hi, "case", "esac");
                } else {
                    pos = parseSimpleCommand(container, t.start, hi);
                }
                break;
            }
            }
        }
    }

    std::size_t parseSimpleCommand(AstNode& container, std::size_t lo, std::size_t hi) {
        auto cmd = std::make_unique<AstNode>(NodeKind::BashCommand, fileSpan(lo, lo));
        std::size_t pos = lo;
        std::size_t last_end = lo;
        bool have_name = false;
        while (true) {
            Token t = lex(pos, hi);
            if (t.type == Token::Type::Word) {
                NodeKind kind =
                    have_name ? NodeKind::BashCommandArgs : NodeKind::BashCommandName;
                cmd->adoptChild(parseWord(t.start, t.end, kind));
                have_name = true;
                pos = t.end;
                last_end = t.end;
                continue;
            }
            if (t.type == Token::Type::Redirect) {
                auto redirect = std::make_unique<AstNode>(NodeKind::BashRedirect,
                                                          fileSpan(t.start, t.end),
                                                          std::string(tokenText(t)));
                std::size_t end = t.end;
                if (t.redirect_has_target) {
                    Token target = lex(t.end, hi);
                    if (target.type == Token::Type::Word) {
                        redirect->adoptChild(
                            parseWord(target.start, target.end, NodeKind::BashCommandArgs));
                        end = target.end;
                        redirect->setSpan(fileSpan(t.start, end));
                    }
                }
                cmd->adoptChild(std::move(redirect));
                pos = end;
                last_end = end;
                continue;
            }
            break;
        }
        cmd->setSpan(fileSpan(lo, last_end));
        container.adoptChild(std::move(cmd));
        return last_end;
    }

    AstNode::Ptr parseWord(std::size_t lo, std::size_t hi, NodeKind word_kind) {
        auto word = std::make_unique<AstNode>(word_kind, fileSpan(lo, hi));
        parseWordParts(*word, lo, hi);
        return word;
    }

    /// Splits [lo, hi) into literal / quoted / variable / substitution
    /// parts and attaches them to `target`.
    void parseWordParts(AstNode& target, std::size_t lo, std::size_t hi) {
        std::size_t pos = lo;
        std::size_t lit_start = lo;
        auto flushLiteral = [&](std::size_t upto) {
            if (upto > lit_start) {
                target.adoptChild(std::make_unique<AstNode>(
                    NodeKind::BashLiteral, fileSpan(lit_start, upto),
                    std::string(text_.substr(lit_start, upto - lit_start))));
            }
        };
        while (pos < hi) {
            char c = text_[pos];
            if (c == '\\') {
                pos = std::min(pos + 2, hi);
                continue;
            }
            if (c == '\'') {
                flushLiteral(pos);
                std::size_t close = text_.find('\'', pos + 1);
                std::size_t end =
                    (close == std::string_view::npos || close >= hi) ? hi : close + 1;
                if (close == std::string_view::npos || close >= hi) {
                    diag(Severity::Warning, "unterminated single quote", pos, end);
                }
                auto quoted = std::make_unique<AstNode>(NodeKind::BashQuotedString,
                                                        fileSpan(pos, end), "'");
                std::size_t inner_end =
                    (end > pos + 1 && text_[end - 1] == '\'') ? end - 1 : end;
                if (inner_end > pos + 1) {
                    quoted->adoptChild(std::make_unique<AstNode>(
                        NodeKind::BashLiteral, fileSpan(pos + 1, inner_end),
                        std::string(text_.substr(pos + 1, inner_end - pos - 1))));
                }
                target.adoptChild(std::move(quoted));
                pos = end;
                lit_start = pos;
                continue;
            }
            if (c == '"') {
                flushLiteral(pos);
                std::size_t end = scanDoubleQuote(pos, hi);
                if (end == hi && (end == pos + 1 || text_[end - 1] != '"')) {
                    diag(Severity::Warning, "unterminated double quote", pos, end);
                }
                auto quoted = std::make_unique<AstNode>(NodeKind::BashQuotedString,
                                                        fileSpan(pos, end), "\"");
                std::size_t inner_end = (end > pos + 1 && text_[end - 1] == '"') ? end - 1 : end;
                parseWordParts(*quoted, pos + 1, inner_end);
                target.adoptChild(std::move(quoted));
                pos = end;
                lit_start = pos;
                continue;
            }
            if (c == '`') {
                flushLiteral(pos);
                std::size_t close = text_.find('`', pos + 1);
                std::size_t end =
                    (close == std::string_view::npos || close >= hi) ? hi : close + 1;
                diag(Severity::Info, "backtick substitution kept opaque", pos, end);
                target.adoptChild(std::make_unique<AstNode>(
                    NodeKind::BashOpaque, fileSpan(pos, end),
                    std::string(text_.substr(pos, end - pos))));
                pos = end;
                lit_start = pos;
                continue;
            }
            if (c == '$' && pos + 1 < hi) {
                char next = text_[pos + 1];
                if (next == '(') {
                    flushLiteral(pos);
                    std::size_t end = scanBalanced(pos + 1, hi, '(', ')');
                    auto subst = std::make_unique<AstNode>(NodeKind::BashCommandSubstitution,
                                                           fileSpan(pos, end));
                    std::size_t inner_end =
                        (end > pos + 2 && text_[end - 1] == ')') ? end - 1 : end;
                    auto list = std::make_unique<AstNode>(NodeKind::BashStatementList,
                                                          fileSpan(pos + 2, inner_end));
                    parseSequence(*list, pos + 2, inner_end, {});
                    subst->adoptChild(std::move(list));
                    target.adoptChild(std::move(subst));
                    pos = end;
                    lit_start = pos;
                    continue;
                }
                if (next == '{') {
                    flushLiteral(pos);
                    std::size_t end = scanBalanced(pos + 1, hi, '{', '}');
                    std::size_t name_end =
                        (end > pos + 2 && text_[end - 1] == '}') ? end - 1 : end;
                    target.adoptChild(std::make_unique<AstNode>(
                        NodeKind::BashVariable, fileSpan(pos, end),
                        std::string(text_.substr(pos + 2, name_end - pos - 2))));
                    pos = end;
                    lit_start = pos;
                    continue;
                }
                if (isNameChar(next) || isSpecialParamChar(next)) {
                    flushLiteral(pos);
                    std::size_t end = pos + 2;
                    if (isNameChar(next) && !std::isdigit(static_cast<unsigned char>(next))) {
                        while (end < hi && isNameChar(text_[end])) {
                            ++end;
                        }
                    }
                    target.adoptChild(std::make_unique<AstNode>(
                        NodeKind::BashVariable, fileSpan(pos, end),
                        std::string(text_.substr(pos + 1, end - pos - 1))));
                    pos = end;
                    lit_start = pos;
                    continue;
                }
            }
            ++pos;
        }
        flushLiteral(hi);
    }

    std::size_t parseIf(AstNode& container, const Token& if_tok, std::size_t hi) {
        auto [node, end] = parseIfFrom(if_tok.start, if_tok.end, hi);
        if (!node) {
            diag(Severity::Warning, "malformed if construct kept opaque", if_tok.start, hi);
            container.adoptChild(makeOpaque(if_tok.start, hi));
            return hi;
        }
        container.adoptChild(std::move(node));
        return end;
    }

    /// Parses `if ... fi` given the offsets of the `if` keyword. Returns the
    /// node and the offset past `fi`, or {nullptr, 0} when malformed.
    std::pair<AstNode::Ptr, std::size_t> parseIfFrom(std::size_t if_start,
                                                     std::size_t after_if, std::size_t hi) {
        auto if_node = std::make_unique<AstNode>(NodeKind::BashIf, fileSpan(if_start, hi));
        auto cond = std::make_unique<AstNode>(NodeKind::BashIfCondition,
                                              fileSpan(after_if, after_if));
        SeqStop stop = parseSequence(*cond, after_if, hi, {"then"});
        if (!stop.found) {
            return {nullptr, 0};
        }
        setSpanFromChildren(*cond, after_if);
        if_node->adoptChild(std::move(cond));

        auto body = std::make_unique<AstNode>(NodeKind::BashIfBody,
                                              fileSpan(stop.pos_after, stop.pos_after));
        SeqStop body_stop = parseSequence(*body, stop.pos_after, hi, {"elif", "else", "fi"});
        if (!body_stop.found) {
            return {nullptr, 0};
        }
        setSpanFromChildren(*body, stop.pos_after);
        if_node->adoptChild(std::move(body));

        std::size_t end_pos;
        if (body_stop.keyword == "fi") {
            end_pos = body_stop.pos_after;
        } else if (body_stop.keyword == "else") {
            auto else_body = std::make_unique<AstNode>(
                NodeKind::BashElseBody, fileSpan(body_stop.pos_after, body_stop.pos_after));
            SeqStop else_stop = parseSequence(*else_body, body_stop.pos_after, hi, {"fi"});
            if (!else_stop.found) {
                return {nullptr, 0};
            }
            setSpanFromChildren(*else_body, body_stop.pos_after);
            if_node->adoptChild(std::move(else_body));
            end_pos = else_stop.pos_after;
        } else { // elif: modeled as else { if ... }, ending at the same fi
            auto else_body = std::make_unique<AstNode>(
                NodeKind::BashElseBody, fileSpan(body_stop.kw_start, body_stop.kw_start));
            auto [nested, nested_end] =
                parseIfFrom(body_stop.kw_start, body_stop.pos_after, hi);
            if (!nested) {
                return {nullptr, 0};
            }
            else_body->setSpan(fileSpan(body_stop.kw_start, nested_end));
            else_body->adoptChild(std::move(nested));
            if_node->adoptChild(std::move(else_body));
            end_pos = nested_end;
        }
        if_node->setSpan(fileSpan(if_start, end_pos));
        return {std::move(if_node), end_pos};
    }

    std::size_t parseFor(AstNode& container, const Token& for_tok, std::size_t hi) {
        Token var = lex(for_tok.end, hi);
        if (var.type != Token::Type::Word) {
            diag(Severity::Warning, "malformed for construct kept opaque", for_tok.start, hi);
            container.adoptChild(makeOpaque(for_tok.start, hi));
            return hi;
        }
        auto for_node =
            std::make_unique<AstNode>(NodeKind::BashFor, fileSpan(for_tok.start, hi));
        for_node->adoptChild(std::make_unique<AstNode>(NodeKind::BashLiteral,
                                                       fileSpan(var.start, var.end),
                                                       std::string(tokenText(var))));
        std::size_t pos = var.end;
        Token next = lex(pos, hi);
        if (isKeywordWord(next, "in")) {
            pos = next.end;
            while (true) {
                Token item = lex(pos, hi);
                if (item.type == Token::Type::Word && !isKeywordWord(item, "do")) {
                    for_node->adoptChild(
                        parseWord(item.start, item.end, NodeKind::BashCommandArgs));
                    pos = item.end;
                    continue;
                }
                break;
            }
        }
        Token sep = lex(pos, hi);
        if (sep.type == Token::Type::Semi) {
            pos = sep.end;
            sep = lex(pos, hi);
        }
        if (!isKeywordWord(sep, "do")) {
            diag(Severity::Warning, "malformed for construct kept opaque", for_tok.start, hi);
            container.adoptChild(makeOpaque(for_tok.start, hi));
            return hi;
        }
        pos = sep.end;
        auto body = std::make_unique<AstNode>(NodeKind::BashStatementList, fileSpan(pos, pos));
        SeqStop stop = parseSequence(*body, pos, hi, {"done"});
        if (!stop.found) {
            diag(Severity::Warning, "malformed for construct kept opaque", for_tok.start, hi);
            container.adoptChild(makeOpaque(for_tok.start, hi));
            return hi;
        }
        setSpanFromChildren(*body, pos);
        for_node->adoptChild(std::move(body));
        for_node->setSpan(fileSpan(for_tok.start, stop.pos_after));
        container.adoptChild(std::move(for_node));
        return stop.pos_after;
    }

    /// Consumes an unsupported keyword construct (while/until/case) up to
    /// its matching terminator and emits one opaque node.
    std::size_t emitOpaqueConstruct(AstNode& container, std::size_t lo, std::size_t hi,
                                    std::string_view opener, std::string_view closer) {
        std::size_t pos = lo;
        int depth = 0;
        bool at_head = true;
        std::size_t end = hi;
        while (pos < hi) {
            Token t = lex(pos, hi);
            if (t.type == Token::Type::End) {
                break;
            }
            if (t.type == Token::Type::Word) {
                std::string_view w = tokenText(t);
                if (at_head) {
                    depth = (w == "case") ? 1 : 0;
                    at_head = false;
                } else if (w == opener) {
                    ++depth;
                } else if (w == closer) {
                    --depth;
                    if (depth <= 0) {
                        end = t.end;
                        pos = t.end;
                        break;
                    }
                }
            }
            pos = t.end;
        }
        if (pos >= hi) {
            end = hi;
            pos = hi;
        }
        diag(Severity::Info, "unsupported shell construct kept opaque", lo, end);
        container.adoptChild(makeOpaque(lo, end));
        return pos;
    }

    /// Emits an opaque node from `lo` to the next top-level separator.
    std::size_t emitOpaqueUntilSeparator(AstNode& container, std::size_t lo, std::size_t hi) {
        Token t0 = lex(lo, hi);
        std::size_t pos = t0.end;
        std::size_t end = hi;
        while (pos < hi) {
            Token t = lex(pos, hi);
            if (t.type == Token::Type::End || t.type == Token::Type::And ||
                t.type == Token::Type::Or || t.type == Token::Type::Semi ||
                t.type == Token::Type::Pipe) {
                end = t.start;
                break;
            }
            pos = t.end;
        }
        end = std::max(std::min(end, hi), t0.end);
        diag(Severity::Info, "unsupported shell construct kept opaque", lo, end);
        container.adoptChild(makeOpaque(lo, end));
        return end;
    }

    AstNode::Ptr makeOpaque(std::size_t lo, std::size_t hi) {
        std::size_t trimmed = hi;
        while (trimmed > lo && (text_[trimmed - 1] == ' ' || text_[trimmed - 1] == '\t' ||
                                text_[trimmed - 1] == '\r')) {
            --trimmed;
        }
        return std::make_unique<AstNode>(NodeKind::BashOpaque, fileSpan(lo, trimmed),
                                         std::string(text_.substr(lo, trimmed - lo)));
    }

    void setSpanFromChildren(AstNode& node, std::size_t fallback) {
        if (node.childCount() > 0) {
            node.setSpan(index_.span(node.child(0).span().start_offset,
                                     node.child(node.childCount() - 1).span().end_offset));
        } else {
            node.setSpan(fileSpan(fallback, fallback));
        }
    }
};

} // namespace

AstNode::Ptr parseShellFragment(std::string_view folded, const FoldMap& map,
                                const LineIndex& index,
                                std::vector<ParseDiagnostic>& diagnostics) {
    ShellParser parser(folded, map, index, diagnostics);
    return parser.parseScript();
}

AstNode::Ptr parseShellFragment(std::string_view text, const SourceSpan& base,
                                std::vector<ParseDiagnostic>& diagnostics) {
    FoldMap map = FoldMap::identity(base.start_offset, text.size());
    std::string padded(base.start_offset, ' ');
    padded.append(text);
    LineIndex index(padded);
    return parseShellFragment(text, map, index, diagnostics);
}

bool isValidUtf8(std::string_view text) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        std::size_t extra;
        if (c < 0x80) {
            extra = 0;
        } else if ((c & 0xE0) == 0xC0) {
            if (c < 0xC2) {
                return false; // overlong
            }
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0) {
            if (c > 0xF4) {
                return false;
            }
            extra = 3;
        } else {
            return false;
        }
        if (i + extra >= n) {
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
                return false;
            }
        }
        i += extra + 1;
    }
    return true;
}

} // namespace dockfix
