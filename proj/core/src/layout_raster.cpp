#include "memocr/layout_raster.hpp"

#include "memocr/errors.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>

namespace memocr {

namespace font {
namespace {
constexpr std::uint8_t kAtlas[][kGlyphHeight] = {
#include "font_atlas.inc"
};
constexpr std::size_t kReplacementIndex = 95;
}  // namespace

const std::uint8_t* glyph_rows(char32_t cp) {
    if (cp >= 0x20 && cp <= 0x7E) {
        return kAtlas[cp - 0x20];
    }
    return kAtlas[kReplacementIndex];
}

bool glyph_bit(char32_t cp, int x, int y) {
    return (glyph_rows(cp)[y] & (0x80u >> x)) != 0;
}
}  // namespace font

namespace {

int round_px(double v) {
    return static_cast<int>(std::floor(v + 0.5));
}

struct Glyph {
    char32_t cp;
    std::size_t span;
};

using GlyphRun = std::vector<Glyph>;

bool is_layout_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\r' || cp == U'\f' || cp == U'\v' || cp == U'\n';
}

// Words of a block, each remembering which span owns the separator before it.
struct Word {
    GlyphRun glyphs;
    std::size_t sep_span = 0;
};

std::vector<Word> split_words(const Block& block) {
    std::vector<Word> out;
    Word cur;
    bool pending_sep = false;
    std::size_t sep_span = 0;
    for (std::size_t si = 0; si < block.spans.size(); ++si) {
        for (char32_t cp : detail::utf8_decode(block.spans[si].text)) {
            if (is_layout_space(cp)) {
                if (!cur.glyphs.empty()) {
                    out.push_back(std::move(cur));
                    cur = Word{};
                }
                if (!pending_sep) {
                    pending_sep = true;
                    sep_span = si;
                }
                continue;
            }
            if (cur.glyphs.empty()) {
                cur.sep_span = pending_sep ? sep_span : si;
                pending_sep = false;
            }
            cur.glyphs.push_back({cp, si});
        }
    }
    if (!cur.glyphs.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

std::vector<GlyphRun> wrap_words(const std::vector<Word>& words, std::size_t max_glyphs, WrapPolicy policy,
                                 std::size_t block_id) {
    std::vector<GlyphRun> lines;
    GlyphRun cur;
    auto place_on_empty = [&](const GlyphRun& w) {
        if (w.size() <= max_glyphs) {
            cur = w;
            return;
        }
        if (policy == WrapPolicy::strict) {
            throw WordTooWide("block " + std::to_string(block_id) + ": word of " + std::to_string(w.size()) +
                              " glyphs exceeds line capacity of " + std::to_string(max_glyphs));
        }
        std::size_t off = 0;
        while (w.size() - off > max_glyphs) {
            lines.emplace_back(w.begin() + static_cast<std::ptrdiff_t>(off),
                               w.begin() + static_cast<std::ptrdiff_t>(off + max_glyphs));
            off += max_glyphs;
        }
        cur.assign(w.begin() + static_cast<std::ptrdiff_t>(off), w.end());
    };

    for (const Word& w : words) {
        if (cur.empty()) {
            place_on_empty(w.glyphs);
        } else if (cur.size() + 1 + w.glyphs.size() <= max_glyphs) {
            cur.push_back({U' ', w.sep_span});
            cur.insert(cur.end(), w.glyphs.begin(), w.glyphs.end());
        } else {
            lines.push_back(std::move(cur));
            cur.clear();
            place_on_empty(w.glyphs);
        }
    }
    if (!cur.empty()) {
        lines.push_back(std::move(cur));
    }
    return lines;
}

}  // namespace

StyleSheet StyleSheet::uniform() {
    StyleSheet s;
    std::fill(std::begin(s.h_scale), std::end(s.h_scale), 1.0);
    s.bold_headings = false;
    return s;
}

StyleSheet StyleSheet::from_name(std::string_view name) {
    if (name == "default") {
        return defaults();
    }
    if (name == "uniform") {
        return uniform();
    }
    throw FormatError("unknown style preset '" + std::string(name) + "' (expected default|uniform)");
}

double StyleSheet::scale_of(const Block& block) const {
    switch (block.kind) {
        case BlockKind::heading:
            return h_scale[std::clamp(block.level, 1, 6) - 1];
        case BlockKind::bullet_item:
            return bullet_scale;
        case BlockKind::paragraph:
            break;
    }
    return paragraph_scale;
}

double StyleSheet::max_scale() const {
    double m = std::max(paragraph_scale, bullet_scale);
    for (double s : h_scale) {
        m = std::max(m, s);
    }
    return m;
}

CellSize StyleSheet::cell_at(double scale) const {
    return {round_px(base_cell.width * scale), round_px(base_cell.height * scale)};
}

void StyleSheet::validate() const {
    auto positive = [](double s) { return s > 0.0 && std::isfinite(s); };
    if (!positive(paragraph_scale) || !positive(bullet_scale) ||
        !std::all_of(std::begin(h_scale), std::end(h_scale), positive)) {
        throw PreconditionError("style: every scale must be positive");
    }
    if (base_cell.width < 1 || base_cell.height < 1) {
        throw PreconditionError("style: base cell must be at least 1x1");
    }
    if (margin < 0 || line_gap < 0 || bold_stroke < 0 || bullet_indent < 0) {
        throw PreconditionError("style: margin, line_gap, bold_stroke and bullet_indent must be non-negative");
    }
    const CellSize widest = cell_at(max_scale());
    if (widest.width < 1 || widest.height < 1) {
        throw PreconditionError("style: scaled cells round to zero pixels");
    }
    if (canvas_width < 2 * margin + base_cell.width * max_scale()) {
        throw PreconditionError("style: canvas_width too small for margins and the largest glyph cell");
    }
    for (double s : h_scale) {
        if (cell_at(s).width < 1 || cell_at(s).height < 1) {
            throw PreconditionError("style: scaled cells round to zero pixels");
        }
    }
}

PageLayout layout(const SalienceTree& tree, const StyleSheet& style, const LayoutOptions& opts) {
    style.validate();
    PageLayout page;
    page.width = style.canvas_width;
    page.base_cell = style.base_cell;
    page.bold_stroke = style.bold_stroke;

    const int full_usable = style.canvas_width - 2 * style.margin;
    bool first = true;
    int prev_bottom = style.margin;

    for (const Block& block : tree.blocks) {
        const double scale = style.scale_of(block);
        const CellSize cell = style.cell_at(scale);
        int indent = block.kind == BlockKind::bullet_item ? (block.depth + 1) * style.bullet_indent : 0;
        indent = std::min(indent, std::max(0, full_usable - cell.width));
        const int usable = full_usable - indent;
        const auto max_glyphs = static_cast<std::size_t>(std::max(0, usable / cell.width));

        const auto lines = wrap_words(split_words(block), max_glyphs, opts.wrap, block.id);
        if (lines.empty()) {
            continue;
        }

        int top = first ? style.margin : prev_bottom + style.line_gap;
        if (block.kind == BlockKind::heading) {
            top += 2 * style.line_gap;
        }
        first = false;

        for (std::size_t li = 0; li < lines.size(); ++li) {
            const int y = top + static_cast<int>(li) * (cell.height + style.line_gap);
            const GlyphRun& line = lines[li];
            std::size_t start = 0;
            while (start < line.size()) {
                std::size_t end = start;
                while (end < line.size() && line[end].span == line[start].span) {
                    ++end;
                }
                const std::size_t span_index = line[start].span;
                const InlineSpan& span = block.spans[span_index];
                LayoutBox box;
                box.block_id = block.id;
                box.span_index = span_index;
                for (std::size_t k = start; k < end; ++k) {
                    detail::utf8_append(box.text, line[k].cp);
                }
                box.glyph_count = end - start;
                box.bbox = {style.margin + indent + static_cast<int>(start) * cell.width, y,
                            static_cast<int>(box.glyph_count) * cell.width, cell.height};
                box.scale = scale;
                box.bold = span.bold || (style.bold_headings && block.kind == BlockKind::heading);
                box.priority = priority_class(block, span, opts.priority);
                page.boxes.push_back(std::move(box));
                start = end;
            }
            prev_bottom = y + cell.height;
        }
    }

    page.height = page.boxes.empty() ? 2 * style.margin : prev_bottom + style.margin;
    return page;
}

MemoryImage rasterize(const PageLayout& page) {
    const int W = page.width;
    const int H = page.height;
    std::vector<std::uint8_t> px(static_cast<std::size_t>(W) * static_cast<std::size_t>(H), kBackground);
    std::vector<std::uint8_t> mask;

    for (const LayoutBox& box : page.boxes) {
        if (box.glyph_count == 0) {
            continue;
        }
        const int cw = box.bbox.w / static_cast<int>(box.glyph_count);
        const int ch = box.bbox.h;
        mask.assign(static_cast<std::size_t>(cw) * ch, 0);
        const auto cps = detail::utf8_decode(box.text);
        for (std::size_t gi = 0; gi < cps.size() && gi < box.glyph_count; ++gi) {
            std::fill(mask.begin(), mask.end(), 0);
            for (int dy = 0; dy < ch; ++dy) {
                const int sy = dy * font::kGlyphHeight / ch;
                const std::uint8_t row = font::glyph_rows(cps[gi])[sy];
                for (int dx = 0; dx < cw; ++dx) {
                    const int sx = dx * font::kGlyphWidth / cw;
                    if ((row & (0x80u >> sx)) == 0) {
                        continue;
                    }
                    const int reach = box.bold ? page.bold_stroke : 0;
                    for (int k = 0; k <= reach && dx + k < cw; ++k) {
                        mask[static_cast<std::size_t>(dy) * cw + dx + k] = 1;
                    }
                }
            }
            const int x0 = box.bbox.x + static_cast<int>(gi) * cw;
            for (int dy = 0; dy < ch; ++dy) {
                const int y = box.bbox.y + dy;
                if (y < 0 || y >= H) {
                    continue;
                }
                for (int dx = 0; dx < cw; ++dx) {
                    const int x = x0 + dx;
                    if (x >= 0 && x < W && mask[static_cast<std::size_t>(dy) * cw + dx]) {
                        px[static_cast<std::size_t>(y) * W + x] = kInk;
                    }
                }
            }
        }
    }
    return MemoryImage(W, H, std::move(px));
}

std::int64_t glyph_run_area(std::int64_t glyph_count, double scale, const StyleSheet& style) {
    const CellSize c = style.cell_at(scale);
    return glyph_count * c.width * c.height;
}

RegionMap region_map(const PageLayout& page) {
    RegionMap m;
    for (const auto& b : page.boxes) {
        (b.priority == PriorityClass::crucial ? m.crucial_boxes : m.detailed_boxes).push_back(b);
    }
    return m;
}

}  // namespace memocr
