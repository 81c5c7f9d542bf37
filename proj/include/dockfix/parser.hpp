#pragma once

#include "dockfix/ast.hpp"
#include "dockfix/span.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dockfix {

enum class Severity { Info, Warning, Error };

std::string_view toString(Severity severity);

struct ParseDiagnostic {
    Severity severity = Severity::Warning;
    std::string message;
    SourceSpan span;
};

/// Translates offsets in a folded shell payload back to file offsets.
/// Folding removes continuation escapes (and comment/blank lines swallowed
/// by a continuation) but keeps every payload byte, so the map is a strictly
/// increasing table of file offsets, one per folded byte, plus an end
/// sentinel.
class FoldMap {
  public:
    FoldMap() = default;

    /// Identity map for a fragment that sits verbatim at `file_start`.
    static FoldMap identity(std::size_t file_start, std::size_t length);

    void append(std::size_t file_offset) { to_file_.push_back(file_offset); }
    void finish(std::size_t file_end) { end_sentinel_ = file_end; }

    std::size_t foldedLength() const { return to_file_.size(); }

    /// File offset of folded byte `i`.
    std::size_t fileOffset(std::size_t folded) const;

    /// File span covering folded range [start, end). A zero-width range
    /// anchors at the file offset of `start`.
    SourceSpan toFileSpan(std::size_t folded_start, std::size_t folded_end,
                          const LineIndex& index) const;

  private:
    std::vector<std::size_t> to_file_;
    std::size_t end_sentinel_ = 0;
};

struct ParseResult {
    AstNode::Ptr root;
    std::vector<ParseDiagnostic> diagnostics;
    char escape_char = '\\';
    std::shared_ptr<const std::string> source;
    LineIndex line_index;

    bool hasErrors() const {
        for (const auto& d : diagnostics) {
            if (d.severity == Severity::Error) {
                return true;
            }
        }
        return false;
    }
};

/// Parses a full Dockerfile into the unified AST. Never throws: malformed
/// regions degrade to opaque nodes with diagnostics, and non-UTF-8 input
/// yields an error diagnostic with an empty root.
ParseResult parseDockerfile(std::string text);

/// Parses a bash fragment whose bytes sit verbatim in the file at `base`.
/// Spans of the returned tree are in file coordinates.
AstNode::Ptr parseShellFragment(std::string_view text, const SourceSpan& base,
                                std::vector<ParseDiagnostic>& diagnostics);

/// Core shell parser over a folded payload with an explicit offset map.
AstNode::Ptr parseShellFragment(std::string_view folded, const FoldMap& map,
                                const LineIndex& index,
                                std::vector<ParseDiagnostic>& diagnostics);

/// Maps a fragment-relative range onto file coordinates, accounting for
/// continuation bytes removed by folding. Throws std::out_of_range when the
/// range exceeds the folded payload.
SourceSpan spanToFileCoords(std::size_t fragment_start, std::size_t fragment_end,
                            const FoldMap& map, const LineIndex& index);

/// True when every byte is part of a valid UTF-8 sequence.
bool isValidUtf8(std::string_view text);

} // namespace dockfix
