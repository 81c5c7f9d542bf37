#include "dockfix/printer.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace dockfix {

namespace {

struct LineSplit {
    std::vector<std::string_view> lines;
    bool final_newline = true;
};

LineSplit splitLines(std::string_view text) {
    LineSplit out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            out.lines.push_back(text.substr(pos));
            out.final_newline = false;
            break;
        }
        out.lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (text.empty()) {
        out.final_newline = true;
    }
    return out;
}

enum class OpType { Keep, Del, Add };

struct Op {
    OpType type;
    std::size_t a; // index into A (Keep/Del)
    std::size_t b; // index into B (Keep/Add)
};

/// LCS edit script with common prefix/suffix trimming to keep the DP small.
std::vector<Op> editScript(const std::vector<std::string_view>& a,
                           const std::vector<std::string_view>& b) {
    std::size_t n = a.size();
    std::size_t m = b.size();
    std::size_t prefix = 0;
    while (prefix < n && prefix < m && a[prefix] == b[prefix]) {
        ++prefix;
    }
    std::size_t suffix = 0;
    while (suffix < n - prefix && suffix < m - prefix &&
           a[n - 1 - suffix] == b[m - 1 - suffix]) {
        ++suffix;
    }
    std::size_t an = n - prefix - suffix;
    std::size_t bn = m - prefix - suffix;

    std::vector<Op> ops;
    ops.reserve(n + m);
    for (std::size_t i = 0; i < prefix; ++i) {
        ops.push_back({OpType::Keep, i, i});
    }

    // DP over the trimmed middle.
    std::vector<std::vector<std::size_t>> lcs(an + 1, std::vector<std::size_t>(bn + 1, 0));
    for (std::size_t i = an; i-- > 0;) {
        for (std::size_t j = bn; j-- > 0;) {
            if (a[prefix + i] == b[prefix + j]) {
                lcs[i][j] = lcs[i + 1][j + 1] + 1;
            } else {
                lcs[i][j] = std::max(lcs[i + 1][j], lcs[i][j + 1]);
            }
        }
    }
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < an && j < bn) {
        if (a[prefix + i] == b[prefix + j]) {
            ops.push_back({OpType::Keep, prefix + i, prefix + j});
            ++i;
            ++j;
        } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
            ops.push_back({OpType::Del, prefix + i, 0});
            ++i;
        } else {
            ops.push_back({OpType::Add, 0, prefix + j});
            ++j;
        }
    }
    while (i < an) {
        ops.push_back({OpType::Del, prefix + i, 0});
        ++i;
    }
    while (j < bn) {
        ops.push_back({OpType::Add, 0, prefix + j});
        ++j;
    }
    for (std::size_t k = 0; k < suffix; ++k) {
        ops.push_back({OpType::Keep, n - suffix + k, m - suffix + k});
    }
    return ops;
}

std::string rangeHeader(std::size_t start, std::size_t count) {
    // 1-based start; count omitted when 1. Empty ranges anchor at the line
    // before the hunk, per the unified format.
    std::string out;
    if (count == 0) {
        out = std::to_string(start) + ",0";
    } else if (count == 1) {
        out = std::to_string(start);
    } else {
        out = std::to_string(start) + "," + std::to_string(count);
    }
    return out;
}

} // namespace

std::string unifiedDiff(std::string_view original, std::string_view repaired,
                        std::size_t context_lines, std::string_view label_a,
                        std::string_view label_b) {
    LineSplit a = splitLines(original);
    LineSplit b = splitLines(repaired);
    if (original == repaired) {
        return "";
    }
    auto ops = editScript(a.lines, b.lines);

    // Mark which ops are "interesting" (changes plus context).
    std::vector<bool> keep_in_hunk(ops.size(), false);
    for (std::size_t k = 0; k < ops.size(); ++k) {
        if (ops[k].type != OpType::Keep) {
            std::size_t lo = k >= context_lines ? k - context_lines : 0;
            std::size_t hi = std::min(ops.size(), k + context_lines + 1);
            for (std::size_t x = lo; x < hi; ++x) {
                keep_in_hunk[x] = true;
            }
        }
    }

    std::string out;
    if (!label_a.empty() || !label_b.empty()) {
        out += "--- ";
        out += label_a;
        out += "\n+++ ";
        out += label_b;
        out += "\n";
    }

    auto lineText = [&](const Op& op) -> std::string_view {
        return op.type == OpType::Add ? b.lines[op.b] : a.lines[op.a];
    };
    auto noNewlineMarker = [&](const Op& op) -> bool {
        if (op.type == OpType::Del || op.type == OpType::Keep) {
            if (!a.final_newline && op.a + 1 == a.lines.size()) {
                return true;
            }
        }
        if (op.type == OpType::Add || op.type == OpType::Keep) {
            if (!b.final_newline && op.b + 1 == b.lines.size()) {
                return true;
            }
        }
        return false;
    };

    std::size_t k = 0;
    while (k < ops.size()) {
        if (!keep_in_hunk[k]) {
            ++k;
            continue;
        }
        std::size_t hunk_end = k;
        while (hunk_end < ops.size() && keep_in_hunk[hunk_end]) {
            ++hunk_end;
        }
        std::size_t a_start = 0;
        std::size_t b_start = 0;
        std::size_t a_count = 0;
        std::size_t b_count = 0;
        bool a_seen = false;
        bool b_seen = false;
        for (std::size_t x = k; x < hunk_end; ++x) {
            const Op& op = ops[x];
            if (op.type != OpType::Add) {
                if (!a_seen) {
                    a_start = op.a + 1;
                    a_seen = true;
                }
                ++a_count;
            }
            if (op.type != OpType::Del) {
                if (!b_seen) {
                    b_start = op.b + 1;
                    b_seen = true;
                }
                ++b_count;
            }
        }
        if (!a_seen) {
            // Pure insertion: anchor after the preceding A line.
            a_start = k > 0 && ops[k - 1].type != OpType::Add ? ops[k - 1].a + 1 : 0;
        }
        if (!b_seen) {
            b_start = k > 0 && ops[k - 1].type != OpType::Del ? ops[k - 1].b + 1 : 0;
        }
        out += "@@ -" + rangeHeader(a_start, a_count) + " +" + rangeHeader(b_start, b_count) +
               " @@\n";
        for (std::size_t x = k; x < hunk_end; ++x) {
            const Op& op = ops[x];
            char prefix = op.type == OpType::Keep ? ' ' : (op.type == OpType::Del ? '-' : '+');
            out += prefix;
            out += lineText(op);
            out += "\n";
            if (noNewlineMarker(op)) {
                out += "\\ No newline at end of file\n";
            }
        }
        k = hunk_end;
    }
    return out;
}

} // namespace dockfix
