#include "dockfix/span.hpp"

#include <algorithm>

namespace dockfix {

LineIndex::LineIndex(std::string_view text) : size_(text.size()) {
    line_starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            line_starts_.push_back(i + 1);
        }
    }
}

std::pair<std::size_t, std::size_t> LineIndex::lineCol(std::size_t offset) const {
    if (line_starts_.empty()) {
        return {1, offset + 1};
    }
    offset = std::min(offset, size_);
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
    std::size_t line = static_cast<std::size_t>(it - line_starts_.begin());
    std::size_t col = offset - line_starts_[line - 1] + 1;
    return {line, col};
}

SourceSpan LineIndex::span(std::size_t start, std::size_t end) const {
    SourceSpan s;
    s.start_offset = start;
    s.end_offset = end;
    auto [sl, sc] = lineCol(start);
    auto [el, ec] = lineCol(end);
    s.start_line = sl;
    s.start_col = sc;
    s.end_line = el;
    s.end_col = ec;
    return s;
}

} // namespace dockfix
