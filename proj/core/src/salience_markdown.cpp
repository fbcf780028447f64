#include "memocr/salience_markdown.hpp"

#include "memocr/errors.hpp"
#include "text_util.hpp"

#include <optional>

namespace memocr {

namespace {

constexpr std::string_view kFence = "```";

std::optional<std::string_view> unwrap_fence(std::string_view s) {
    if (s.size() < 2 * kFence.size() || !s.starts_with(kFence) || !s.ends_with(kFence)) {
        return std::nullopt;
    }
    const std::size_t close = s.size() - kFence.size();
    const std::size_t nl = s.find('\n');
    // Opening fence line may carry an info string (```markdown).
    if (nl != std::string_view::npos && nl < close) {
        return s.substr(nl + 1, close - (nl + 1));
    }
    return s.substr(kFence.size(), close - kFence.size());
}

struct RawBlock {
    BlockKind kind;
    int level = 0;
    int depth = 0;
    std::string text;
};

std::size_t leading_indent(std::string_view line, std::size_t& columns) {
    std::size_t i = 0;
    columns = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
        columns += line[i] == '\t' ? 2 : 1;
        ++i;
    }
    return i;
}

int heading_level(std::string_view rest) {
    int level = 0;
    while (level < static_cast<int>(rest.size()) && rest[level] == '#') {
        ++level;
    }
    if (level < 1 || level > 6) {
        return 0;
    }
    if (static_cast<std::size_t>(level) == rest.size() || rest[level] == ' ' || rest[level] == '\t') {
        return level;
    }
    return 0;
}

bool is_bullet_marker(std::string_view rest) {
    return rest.size() >= 2 && (rest[0] == '-' || rest[0] == '*') && (rest[1] == ' ' || rest[1] == '\t');
}

}  // namespace

std::string Block::plain_text() const {
    std::string out;
    for (const auto& s : spans) {
        out += s.text;
    }
    return out;
}

const char* to_string(PriorityClass p) {
    return p == PriorityClass::crucial ? "crucial" : "detailed";
}

PriorityClass priority_from_string(std::string_view s) {
    if (s == "crucial") {
        return PriorityClass::crucial;
    }
    if (s == "detailed") {
        return PriorityClass::detailed;
    }
    throw FormatError("unknown region '" + std::string(s) + "' (expected crucial|detailed)");
}

PriorityConfig PriorityConfig::from_name(std::string_view name) {
    if (name == "default") {
        return defaults();
    }
    if (name == "h1-only") {
        return h1_only();
    }
    throw FormatError("unknown priority preset '" + std::string(name) + "'");
}

std::string normalize_source(std::string_view raw) {
    std::string_view s = detail::trim(raw);
    while (auto inner = unwrap_fence(s)) {
        s = detail::trim(*inner);
    }
    return std::string(s);
}

std::vector<InlineSpan> parse_inline(std::string_view text) {
    std::vector<InlineSpan> spans;
    auto push = [&spans](std::string_view piece, bool bold) {
        if (piece.empty()) {
            return;
        }
        if (!spans.empty() && spans.back().bold == bold) {
            spans.back().text += piece;
        } else {
            spans.push_back({std::string(piece), bold});
        }
    };

    std::size_t i = 0;
    std::size_t plain_start = 0;
    while (i < text.size()) {
        if (text.compare(i, 2, "**") == 0) {
            const std::size_t close = text.find("**", i + 2);
            if (close != std::string_view::npos && close > i + 2) {
                push(text.substr(plain_start, i - plain_start), false);
                push(text.substr(i + 2, close - i - 2), true);
                i = close + 2;
                plain_start = i;
                continue;
            }
            // Unmatched marker stays literal.
            i += 2;
            continue;
        }
        ++i;
    }
    push(text.substr(plain_start), false);
    return spans;
}

SalienceTree parse(std::string_view markdown) {
    std::vector<RawBlock> raw;
    // Index into `raw` of the block that lazily absorbs continuation lines.
    std::optional<std::size_t> open;

    for (std::string_view line : detail::split_lines(markdown)) {
        if (detail::trim(line).empty()) {
            open.reset();
            continue;
        }
        std::size_t columns = 0;
        const std::size_t indent = leading_indent(line, columns);
        const std::string_view rest = line.substr(indent);

        if (const int level = heading_level(rest); level > 0) {
            open.reset();
            const std::string_view text = detail::trim(rest.substr(level));
            if (!text.empty()) {
                raw.push_back({BlockKind::heading, level, 0, std::string(text)});
            }
            continue;
        }
        if (is_bullet_marker(rest)) {
            open.reset();
            const std::string_view text = detail::trim(rest.substr(2));
            if (!text.empty()) {
                raw.push_back({BlockKind::bullet_item, 0, static_cast<int>(columns / 2), std::string(text)});
                open = raw.size() - 1;
            }
            continue;
        }
        const std::string_view text = detail::trim(line);
        if (open) {
            raw[*open].text += ' ';
            raw[*open].text += text;
        } else {
            raw.push_back({BlockKind::paragraph, 0, 0, std::string(text)});
            open = raw.size() - 1;
        }
    }

    SalienceTree tree;
    tree.source = std::string(markdown);
    tree.blocks.reserve(raw.size());
    for (auto& r : raw) {
        Block b;
        b.kind = r.kind;
        b.level = r.level;
        b.depth = r.depth;
        b.spans = parse_inline(r.text);
        if (b.spans.empty()) {
            continue;
        }
        b.id = tree.blocks.size();
        tree.blocks.push_back(std::move(b));
    }
    return tree;
}

std::string serialize(const SalienceTree& tree) {
    std::string out;
    for (std::size_t i = 0; i < tree.blocks.size(); ++i) {
        const Block& b = tree.blocks[i];
        if (i > 0) {
            out += "\n\n";
        }
        switch (b.kind) {
            case BlockKind::heading:
                out.append(static_cast<std::size_t>(b.level), '#');
                out += ' ';
                break;
            case BlockKind::bullet_item:
                out.append(static_cast<std::size_t>(2 * b.depth), ' ');
                out += "- ";
                break;
            case BlockKind::paragraph:
                break;
        }
        for (const auto& s : b.spans) {
            if (s.bold) {
                out += "**" + s.text + "**";
            } else {
                out += s.text;
            }
        }
    }
    return out;
}

PriorityClass priority_class(const Block& block, const InlineSpan& span, const PriorityConfig& cfg) {
    if (block.kind == BlockKind::heading && block.level <= cfg.max_crucial_heading_level) {
        return PriorityClass::crucial;
    }
    if (cfg.bold_is_crucial && span.bold) {
        return PriorityClass::crucial;
    }
    return PriorityClass::detailed;
}

}  // namespace memocr
