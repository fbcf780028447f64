#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace memocr {

struct InlineSpan {
    std::string text;
    bool bold = false;

    bool operator==(const InlineSpan&) const = default;
};

enum class BlockKind { heading, paragraph, bullet_item };

struct Block {
    BlockKind kind = BlockKind::paragraph;
    // Heading level 1..6 for headings, 0 otherwise.
    int level = 0;
    // Bullet nesting depth (2 source spaces per level), 0 otherwise.
    int depth = 0;
    std::vector<InlineSpan> spans;
    std::size_t id = 0;

    bool is_heading(int lvl) const { return kind == BlockKind::heading && level == lvl; }
    std::string plain_text() const;

    bool operator==(const Block&) const = default;
};

// Parsed rich-text memory. Blocks are kept in source (reading) order.
struct SalienceTree {
    std::vector<Block> blocks;
    std::string source;
};

enum class PriorityClass { crucial, detailed };

const char* to_string(PriorityClass p);
PriorityClass priority_from_string(std::string_view s);

// Which blocks/spans count as crucial. Headings up to `max_crucial_heading_level`
// are crucial; bold spans are crucial when `bold_is_crucial` is set.
struct PriorityConfig {
    int max_crucial_heading_level = 2;
    bool bold_is_crucial = true;

    static PriorityConfig defaults() { return {}; }
    // H1 headers only.
    static PriorityConfig h1_only() { return {1, false}; }
    static PriorityConfig from_name(std::string_view name);
};

// Strips surrounding whitespace and any code fence wrapping the whole
// document. Repeats until nothing changes, so it is idempotent.
std::string normalize_source(std::string_view raw);

// Total parser for the memory Markdown subset: ATX headings, `-`/`*` bullets
// (2-space indent per depth), `**bold**` and blank-line separated paragraphs.
// Anything else is plain text.
SalienceTree parse(std::string_view markdown);

// Splits inline text into spans, merging neighbours with equal bold flag.
std::vector<InlineSpan> parse_inline(std::string_view text);

// Writes the tree back to Markdown. parse(serialize(t)) has the same blocks as t.
std::string serialize(const SalienceTree& tree);

PriorityClass priority_class(const Block& block, const InlineSpan& span, const PriorityConfig& cfg);

}  // namespace memocr
