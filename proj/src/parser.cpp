#include "dockfix/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace dockfix {

std::string_view toString(Severity severity) {
    switch (severity) {
    case Severity::Info:
        return "info";
    case Severity::Warning:
        return "warning";
    case Severity::Error:
        return "error";
    }
    return "unknown";
}

namespace {

std::string toUpper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::optional<NodeKind> instructionKind(std::string_view keyword) {
    static const std::map<std::string, NodeKind> kMap = {
        {"FROM", NodeKind::From},
        {"RUN", NodeKind::Run},
        {"COPY", NodeKind::Copy},
        {"ADD", NodeKind::Add},
        {"ENV", NodeKind::Env},
        {"ARG", NodeKind::Arg},
        {"WORKDIR", NodeKind::Workdir},
        {"EXPOSE", NodeKind::Expose},
        {"ENTRYPOINT", NodeKind::Entrypoint},
        {"CMD", NodeKind::Cmd},
        {"LABEL", NodeKind::Label},
        {"USER", NodeKind::User},
        {"VOLUME", NodeKind::Volume},
        {"SHELL", NodeKind::Shell},
        {"HEALTHCHECK", NodeKind::Healthcheck},
        {"ONBUILD", NodeKind::Onbuild},
        {"STOPSIGNAL", NodeKind::Stopsignal},
    };
    auto it = kMap.find(toUpper(keyword));
    if (it == kMap.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool isBlankRange(std::string_view text, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
        if (text[i] != ' ' && text[i] != '\t' && text[i] != '\r') {
            return false;
        }
    }
    return true;
}

struct ExecElement {
    std::size_t start; // folded offset of the opening quote
    std::size_t end;   // folded offset past the closing quote
    std::string value;
};

/// Strict JSON string-array parse over a folded payload. Returns nullopt on
/// anything that is not exactly ["a", "b", ...], which then falls back to
/// shell-form handling like Docker does.
std::optional<std::vector<ExecElement>> parseExecArray(std::string_view folded) {
    std::size_t p = 0;
    auto skipWs = [&]() {
        while (p < folded.size() &&
               (folded[p] == ' ' || folded[p] == '\t' || folded[p] == '\r')) {
            ++p;
        }
    };
    skipWs();
    if (p >= folded.size() || folded[p] != '[') {
        return std::nullopt;
    }
    ++p;
    std::vector<ExecElement> elements;
    skipWs();
    if (p < folded.size() && folded[p] == ']') {
        ++p;
        skipWs();
        if (p != folded.size()) {
            return std::nullopt;
        }
        return elements;
    }
    while (true) {
        skipWs();
        if (p >= folded.size() || folded[p] != '"') {
            return std::nullopt;
        }
        ExecElement el;
        el.start = p;
        ++p;
        std::string value;
        bool closed = false;
        while (p < folded.size()) {
            char c = folded[p];
            if (c == '\\' && p + 1 < folded.size()) {
                char esc = folded[p + 1];
                switch (esc) {
                case '"':
                    value.push_back('"');
                    break;
                case '\\':
                    value.push_back('\\');
                    break;
                case '/':
                    value.push_back('/');
                    break;
                case 'n':
                    value.push_back('\n');
                    break;
                case 't':
                    value.push_back('\t');
                    break;
                case 'r':
                    value.push_back('\r');
                    break;
                case 'b':
                    value.push_back('\b');
                    break;
                case 'f':
                    value.push_back('\f');
                    break;
                default:
                    value.push_back(c);
                    value.push_back(esc);
                    break;
                }
                p += 2;
                continue;
            }
            if (c == '"') {
                closed = true;
                ++p;
                break;
            }
            value.push_back(c);
            ++p;
        }
        if (!closed) {
            return std::nullopt;
        }
        el.end = p;
        el.value = std::move(value);
        elements.push_back(std::move(el));
        skipWs();
        if (p < folded.size() && folded[p] == ',') {
            ++p;
            continue;
        }
        if (p < folded.size() && folded[p] == ']') {
            ++p;
            skipWs();
            if (p != folded.size()) {
                return std::nullopt;
            }
            return elements;
        }
        return std::nullopt;
    }
}

/// Finds an unquoted heredoc marker in a folded payload. Returns the
/// delimiter word, or empty when none.
std::string findHeredocDelimiter(std::string_view folded) {
    bool in_single = false;
    bool in_double = false;
    for (std::size_t i = 0; i + 1 < folded.size(); ++i) {
        char c = folded[i];
        if (c == '\\') {
            ++i;
            continue;
        }
        if (c == '\'' && !in_double) {
            in_single = !in_single;
            continue;
        }
        if (c == '"' && !in_single) {
            in_double = !in_double;
            continue;
        }
        if (!in_single && !in_double && c == '<' && folded[i + 1] == '<') {
            std::size_t p = i + 2;
            if (p < folded.size() && folded[p] == '<') {
                return ""; // here-string, no extra lines to consume
            }
            if (p < folded.size() && folded[p] == '-') {
                ++p;
            }
            if (p < folded.size() && (folded[p] == '"' || folded[p] == '\'')) {
                ++p;
            }
            std::size_t start = p;
            while (p < folded.size() &&
                   (std::isalnum(static_cast<unsigned char>(folded[p])) || folded[p] == '_')) {
                ++p;
            }
            if (p > start) {
                return std::string(folded.substr(start, p - start));
            }
        }
    }
    return "";
}

class DockerfileParser {
  public:
    explicit DockerfileParser(std::string text) : owned_(std::move(text)) {}

    ParseResult run() {
        ParseResult result;
        result.source = std::make_shared<const std::string>(std::move(owned_));
        text_ = *result.source;
        index_ = LineIndex(text_);
        result.line_index = index_;
        result.root = std::make_unique<AstNode>(NodeKind::DockerFile,
                                                index_.span(0, text_.size()));
        if (!isValidUtf8(text_)) {
            diags_.push_back({Severity::Error, "file is not valid UTF-8 (UnsupportedEncoding)",
                              index_.span(0, text_.size())});
            result.diagnostics = std::move(diags_);
            return result;
        }
        parseAll(*result.root);
        result.escape_char = escape_;
        result.diagnostics = std::move(diags_);
        return result;
    }

  private:
    std::string owned_;
    std::string_view text_;
    LineIndex index_;
    std::vector<ParseDiagnostic> diags_;
    char escape_ = '\\';
    bool directive_block_ = true;
    bool powershell_mode_ = false;

    std::size_t lineEnd(std::size_t pos) const {
        std::size_t nl = text_.find('\n', pos);
        return nl == std::string_view::npos ? text_.size() : nl;
    }

    /// Content end of the line, excluding a trailing carriage return.
    std::size_t contentEnd(std::size_t pos) const {
        std::size_t nl = lineEnd(pos);
        if (nl > pos && text_[nl - 1] == '\r') {
            return nl - 1;
        }
        return nl;
    }

    void parseAll(AstNode& root) {
        std::size_t pos = 0;
        while (pos < text_.size()) {
            std::size_t nl = lineEnd(pos);
            std::size_t first = pos;
            while (first < nl && (text_[first] == ' ' || text_[first] == '\t' ||
                                  text_[first] == '\r')) {
                ++first;
            }
            if (first >= nl) {
                pos = nl + 1; // blank line stays in the inter-node gap
                continue;
            }
            if (text_[first] == '#') {
                parseCommentLine(root, first, contentEnd(pos));
                pos = nl + 1;
                continue;
            }
            directive_block_ = false;
            pos = parseInstruction(root, first);
        }
    }

    void parseCommentLine(AstNode& root, std::size_t start, std::size_t end) {
        std::string content(text_.substr(start, end - start));
        if (directive_block_) {
            // Directive form: # name=value (only valid before anything else).
            std::size_t p = 1;
            while (p < content.size() && (content[p] == ' ' || content[p] == '\t')) {
                ++p;
            }
            std::size_t name_start = p;
            while (p < content.size() &&
                   (std::isalnum(static_cast<unsigned char>(content[p])) || content[p] == '_')) {
                ++p;
            }
            std::size_t name_end = p;
            while (p < content.size() && (content[p] == ' ' || content[p] == '\t')) {
                ++p;
            }
            if (name_end > name_start && p < content.size() && content[p] == '=') {
                std::string name = toUpper(content.substr(name_start, name_end - name_start));
                ++p;
                while (p < content.size() && (content[p] == ' ' || content[p] == '\t')) {
                    ++p;
                }
                std::string value = content.substr(p);
                while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) {
                    value.pop_back();
                }
                if (name == "ESCAPE" && (value == "\\" || value == "`")) {
                    escape_ = value[0];
                }
                root.adoptChild(std::make_unique<AstNode>(
                    NodeKind::ParserDirective, index_.span(start, end), std::move(content)));
                return;
            }
            directive_block_ = false;
        }
        root.adoptChild(std::make_unique<AstNode>(NodeKind::Comment, index_.span(start, end),
                                                  std::move(content)));
    }

    struct FoldedPayload {
        std::string folded;
        FoldMap map;
        std::size_t instr_end = 0; // file offset past the last payload byte
        std::size_t next_pos = 0;  // file offset where scanning resumes
    };

    /// Assembles the logical line starting at `start`, honoring
    /// continuations and swallowing blank/comment lines inside them.
    FoldedPayload foldLogicalLine(std::size_t start) {
        FoldedPayload out;
        std::size_t p = start;
        while (true) {
            std::size_t nl = lineEnd(p);
            std::size_t ce = contentEnd(p);
            bool continuation = ce > p && text_[ce - 1] == escape_ &&
                                nl < text_.size(); // escape at EOF is literal
            std::size_t seg_end = continuation ? ce - 1 : ce;
            for (std::size_t i = p; i < seg_end; ++i) {
                out.folded.push_back(text_[i]);
                out.map.append(i);
            }
            if (!continuation) {
                out.instr_end = seg_end;
                out.next_pos = nl < text_.size() ? nl + 1 : text_.size();
                break;
            }
            p = nl + 1;
            // Blank lines and whole-line comments inside a continuation do
            // not terminate the instruction.
            while (p < text_.size()) {
                std::size_t line_nl = lineEnd(p);
                std::size_t first = p;
                while (first < line_nl && (text_[first] == ' ' || text_[first] == '\t' ||
                                           text_[first] == '\r')) {
                    ++first;
                }
                if (first >= line_nl) {
                    p = line_nl + 1;
                    continue;
                }
                if (text_[first] == '#') {
                    p = line_nl + 1;
                    continue;
                }
                break;
            }
            if (p >= text_.size()) {
                out.instr_end = text_.size();
                out.next_pos = text_.size();
                break;
            }
        }
        out.map.finish(out.instr_end);
        return out;
    }

    FoldMap subMap(const FoldMap& map, std::size_t from, std::size_t to) const {
        FoldMap sub;
        for (std::size_t i = from; i < to; ++i) {
            sub.append(map.fileOffset(i));
        }
        sub.finish(map.fileOffset(to));
        return sub;
    }

    std::size_t parseInstruction(AstNode& root, std::size_t kw_start) {
        std::size_t kw_end = kw_start;
        while (kw_end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[kw_end])) ||
                text_[kw_end] == '_')) {
            ++kw_end;
        }
        std::string keyword(text_.substr(kw_start, kw_end - kw_start));
        auto kind = instructionKind(keyword);

        FoldedPayload payload = foldLogicalLine(kw_end);

        // Buildkit heredocs extend the instruction over raw lines until the
        // delimiter; the whole payload stays opaque.
        std::string heredoc = findHeredocDelimiter(payload.folded);
        if (!heredoc.empty()) {
            std::size_t p = payload.next_pos;
            std::size_t end = payload.instr_end;
            while (p < text_.size()) {
                std::size_t nl = lineEnd(p);
                std::size_t ce = contentEnd(p);
                std::size_t first = p;
                while (first < ce && text_[first] == '\t') {
                    ++first;
                }
                bool is_delim = text_.substr(first, ce - first) == heredoc;
                end = ce;
                p = nl < text_.size() ? nl + 1 : text_.size();
                if (is_delim) {
                    break;
                }
            }
            auto node = std::make_unique<AstNode>(
                kind.value_or(NodeKind::BashOpaque), index_.span(kw_start, end), keyword);
            std::size_t body_start = kw_end;
            while (body_start < end &&
                   (text_[body_start] == ' ' || text_[body_start] == '\t')) {
                ++body_start;
            }
            node->adoptChild(std::make_unique<AstNode>(
                NodeKind::BashOpaque, index_.span(body_start, end),
                std::string(text_.substr(body_start, end - body_start))));
            diags_.push_back({Severity::Info, "heredoc payload kept opaque",
                              index_.span(kw_start, end)});
            root.adoptChild(std::move(node));
            return p;
        }

        if (!kind.has_value()) {
            Severity sev = kw_end > kw_start ? Severity::Warning : Severity::Error;
            std::string msg = kw_end > kw_start
                                  ? "unknown instruction: " + keyword
                                  : "malformed instruction (MalformedInstruction)";
            diags_.push_back({sev, std::move(msg), index_.span(kw_start, payload.instr_end)});
            root.adoptChild(std::make_unique<AstNode>(
                NodeKind::BashOpaque, index_.span(kw_start, payload.instr_end),
                std::string(text_.substr(kw_start, payload.instr_end - kw_start))));
            return payload.next_pos;
        }

        auto node = std::make_unique<AstNode>(*kind, index_.span(kw_start, payload.instr_end),
                                              keyword);
        attachPayload(*node, *kind, payload.folded, payload.map, /*allow_onbuild=*/true);
        root.adoptChild(std::move(node));
        return payload.next_pos;
    }

    /// Builds the payload children of an instruction node from its folded
    /// logical line.
    void attachPayload(AstNode& node, NodeKind kind, std::string_view folded,
                       const FoldMap& map, bool allow_onbuild) {
        std::size_t fs = 0;
        while (fs < folded.size() &&
               (folded[fs] == ' ' || folded[fs] == '\t' || folded[fs] == '\r')) {
            ++fs;
        }
        std::size_t fe = folded.size();
        while (fe > fs &&
               (folded[fe - 1] == ' ' || folded[fe - 1] == '\t' || folded[fe - 1] == '\r')) {
            --fe;
        }
        if (fs >= fe) {
            return; // no payload
        }

        if (kind == NodeKind::Onbuild && allow_onbuild) {
            attachOnbuildPayload(node, folded, map, fs, fe);
            return;
        }

        bool exec_capable = kind == NodeKind::Run || kind == NodeKind::Cmd ||
                            kind == NodeKind::Entrypoint || kind == NodeKind::Shell ||
                            kind == NodeKind::Volume;
        if (exec_capable && folded[fs] == '[') {
            auto elements = parseExecArray(folded.substr(fs, fe - fs));
            if (elements.has_value()) {
                for (const auto& el : *elements) {
                    node.adoptChild(std::make_unique<AstNode>(
                        NodeKind::BashLiteral,
                        map.toFileSpan(fs + el.start, fs + el.end, index_), el.value));
                }
                if (kind == NodeKind::Shell) {
                    updateShellMode(*elements);
                }
                return;
            }
        }

        bool shell_form = kind == NodeKind::Run || kind == NodeKind::Cmd ||
                          kind == NodeKind::Entrypoint;
        if (!shell_form) {
            node.adoptChild(std::make_unique<AstNode>(
                NodeKind::BashOpaque, map.toFileSpan(fs, fe, index_),
                std::string(folded.substr(fs, fe - fs))));
            return;
        }

        // RUN option flags (--mount=..., --network=...) come before the
        // script and are kept as opaque option tokens.
        std::size_t script_start = fs;
        if (kind == NodeKind::Run) {
            while (script_start + 1 < fe && folded[script_start] == '-' &&
                   folded[script_start + 1] == '-') {
                std::size_t opt_end = script_start;
                while (opt_end < fe && folded[opt_end] != ' ' && folded[opt_end] != '\t') {
                    ++opt_end;
                }
                node.adoptChild(std::make_unique<AstNode>(
                    NodeKind::BashOpaque, map.toFileSpan(script_start, opt_end, index_),
                    std::string(folded.substr(script_start, opt_end - script_start))));
                script_start = opt_end;
                while (script_start < fe &&
                       (folded[script_start] == ' ' || folded[script_start] == '\t')) {
                    ++script_start;
                }
            }
        }

        if (powershell_mode_) {
            diags_.push_back({Severity::Info, "non-bash shell payload kept opaque",
                              map.toFileSpan(script_start, fe, index_)});
            node.adoptChild(std::make_unique<AstNode>(
                NodeKind::BashOpaque, map.toFileSpan(script_start, fe, index_),
                std::string(folded.substr(script_start, fe - script_start))));
            return;
        }

        FoldMap scoped = subMap(map, script_start, fe);
        auto script = parseShellFragment(folded.substr(script_start, fe - script_start),
                                         scoped, index_, diags_);
        node.adoptChild(std::move(script));
    }

    void attachOnbuildPayload(AstNode& node, std::string_view folded, const FoldMap& map,
                              std::size_t fs, std::size_t fe) {
        std::size_t kw2_end = fs;
        while (kw2_end < fe && (std::isalnum(static_cast<unsigned char>(folded[kw2_end])) ||
                                folded[kw2_end] == '_')) {
            ++kw2_end;
        }
        std::string keyword(folded.substr(fs, kw2_end - fs));
        auto kind2 = instructionKind(keyword);
        if (!kind2.has_value() || kind2 == NodeKind::Onbuild) {
            node.adoptChild(std::make_unique<AstNode>(
                NodeKind::BashOpaque, map.toFileSpan(fs, fe, index_),
                std::string(folded.substr(fs, fe - fs))));
            return;
        }
        auto inner = std::make_unique<AstNode>(*kind2, map.toFileSpan(fs, fe, index_), keyword);
        FoldMap inner_map = subMap(map, kw2_end, fe);
        attachPayload(*inner, *kind2, folded.substr(kw2_end, fe - kw2_end), inner_map,
                      /*allow_onbuild=*/false);
        node.adoptChild(std::move(inner));
    }

    void updateShellMode(const std::vector<ExecElement>& elements) {
        powershell_mode_ = false;
        if (elements.empty()) {
            return;
        }
        std::string base = elements[0].value;
        std::size_t slash = base.find_last_of("/\\");
        if (slash != std::string::npos) {
            base = base.substr(slash + 1);
        }
        std::string lower = base;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower == "powershell" || lower == "powershell.exe" || lower == "pwsh" ||
            lower == "pwsh.exe" || lower == "cmd" || lower == "cmd.exe") {
            powershell_mode_ = true;
        }
    }
};

} // namespace

ParseResult parseDockerfile(std::string text) {
    DockerfileParser parser(std::move(text));
    return parser.run();
}

} // namespace dockfix
