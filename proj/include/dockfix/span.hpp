#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

namespace dockfix {

/// Half-open byte range [start_offset, end_offset) in the original file,
/// with matching 1-based line/column text coordinates.
struct SourceSpan {
    std::size_t start_offset = 0;
    std::size_t end_offset = 0;
    std::size_t start_line = 1;
    std::size_t start_col = 1;
    std::size_t end_line = 1;
    std::size_t end_col = 1;

    std::size_t length() const { return end_offset - start_offset; }
    bool empty() const { return start_offset == end_offset; }

    bool contains(const SourceSpan& other) const {
        return other.start_offset >= start_offset && other.end_offset <= end_offset;
    }
};

/// Maps byte offsets to 1-based line/column coordinates for one file.
class LineIndex {
  public:
    LineIndex() = default;
    explicit LineIndex(std::string_view text);

    /// (line, col), both 1-based. Offsets past the end clamp to end-of-file.
    std::pair<std::size_t, std::size_t> lineCol(std::size_t offset) const;

    SourceSpan span(std::size_t start, std::size_t end) const;

    std::size_t size() const { return size_; }

  private:
    std::vector<std::size_t> line_starts_;
    std::size_t size_ = 0;
};

} // namespace dockfix
