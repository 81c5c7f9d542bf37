#pragma once

#include "dockfix/ast.hpp"
#include "dockfix/parser.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace dockfix {

/// preserve_formatting = true: emit original bytes for untouched subtrees,
/// canonical text only where the tree was modified. false: normalized form,
/// one instruction per line, continuations folded.
struct PrintMode {
    bool preserve_formatting = true;

    static PrintMode preserve() { return {true}; }
    static PrintMode normalized() { return {false}; }
};

/// An unmodified node's span no longer slices to its recorded value.
struct InconsistentSpans : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string print(const AstNode& root, PrintMode mode, std::string_view original);

inline std::string print(const ParseResult& result, PrintMode mode) {
    return print(*result.root, mode, *result.source);
}

/// Unified diff between two texts with @@ hunk headers, 1-based lines.
/// `label_a`/`label_b` add ---/+++ header lines when non-empty.
std::string unifiedDiff(std::string_view original, std::string_view repaired,
                        std::size_t context_lines, std::string_view label_a = {},
                        std::string_view label_b = {});

} // namespace dockfix
