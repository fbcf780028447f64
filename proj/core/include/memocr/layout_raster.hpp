#pragma once

#include "memocr/memory_image.hpp"
#include "memocr/salience_markdown.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace memocr {

struct CellSize {
    int width = 8;
    int height = 16;
};

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const { return x + w; }
    int bottom() const { return y + h; }
    bool intersects(const Rect& o) const {
        return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
    }
    bool operator==(const Rect&) const = default;
};

// Typography of the memory page. Scales are dimensionless multipliers of
// `base_cell`; glyph cells are rounded to whole pixels per scale.
struct StyleSheet {
    CellSize base_cell{8, 16};
    double h_scale[6] = {2.0, 1.75, 1.5, 1.25, 1.1, 1.0};
    double paragraph_scale = 1.0;
    double bullet_scale = 1.0;
    int bold_stroke = 1;
    bool bold_headings = true;
    int line_gap = 4;
    int canvas_width = 768;
    int margin = 16;
    int bullet_indent = 16;

    static StyleSheet defaults() { return {}; }
    // Every block at body scale: the uniform-density layout.
    static StyleSheet uniform();
    static StyleSheet from_name(std::string_view name);

    double scale_of(const Block& block) const;
    double max_scale() const;
    CellSize cell_at(double scale) const;
    // Throws PreconditionError when the sheet violates its invariants.
    void validate() const;
};

struct LayoutBox {
    std::size_t block_id = 0;
    std::size_t span_index = 0;
    std::string text;
    std::size_t glyph_count = 0;
    Rect bbox;
    double scale = 1.0;
    bool bold = false;
    PriorityClass priority = PriorityClass::detailed;
};

struct PageLayout {
    std::vector<LayoutBox> boxes;
    int width = 0;
    int height = 0;
    CellSize base_cell{8, 16};
    int bold_stroke = 1;
};

enum class WrapPolicy {
    // Throw WordTooWide for a word wider than the line.
    strict,
    // Split over-long words at the line width.
    hard_break,
};

struct LayoutOptions {
    WrapPolicy wrap = WrapPolicy::strict;
    PriorityConfig priority = PriorityConfig::defaults();
};

PageLayout layout(const SalienceTree& tree, const StyleSheet& style, const LayoutOptions& opts = {});

// Draws every box from the embedded 8x16 atlas with nearest-neighbour scaling.
MemoryImage rasterize(const PageLayout& layout);

std::int64_t glyph_run_area(std::int64_t glyph_count, double scale, const StyleSheet& style);

struct RegionMap {
    std::vector<LayoutBox> crucial_boxes;
    std::vector<LayoutBox> detailed_boxes;
};

RegionMap region_map(const PageLayout& layout);

// Base atlas access, exposed for tests and tooling.
namespace font {
inline constexpr int kGlyphWidth = 8;
inline constexpr int kGlyphHeight = 16;
// Row bitmap for a code point; non-printable and non-ASCII map to the
// replacement glyph. Bit 7 is the leftmost pixel.
const std::uint8_t* glyph_rows(char32_t cp);
bool glyph_bit(char32_t cp, int x, int y);
}  // namespace font

}  // namespace memocr
