#!/usr/bin/env python3
"""Regenerate core/src/font_atlas.inc: an 8x16 1-bit atlas for printable ASCII
plus a replacement glyph, rasterized from DejaVu Sans Mono."""
import sys
from PIL import Image, ImageDraw, ImageFont

FONT = "/usr/share/fonts/truetype/dejavu/DejaVuSansMono.ttf"
W, H = 8, 16


def glyph_rows(font, ch):
    img = Image.new("L", (W, H), 0)
    ImageDraw.Draw(img).text((0, -1), ch, font=font, fill=255)
    rows = []
    for y in range(H):
        bits = 0
        for x in range(W):
            if img.getpixel((x, y)) >= 110:
                bits |= 0x80 >> x
        rows.append(bits)
    return rows


def replacement_rows():
    rows = [0] * H
    rows[2] = rows[13] = 0x7E
    for y in range(3, 13):
        rows[y] = 0x42
    return rows


def main(out):
    font = ImageFont.truetype(FONT, 13)
    lines = ["// Generated by tools/scripts/gen_font_atlas.py. Do not edit.",
             "// 8x16 cells, one byte per row, MSB = leftmost pixel.",
             "// Index 0..94 = ASCII 0x20..0x7E, index 95 = replacement glyph."]
    glyphs = [glyph_rows(font, chr(c)) for c in range(0x20, 0x7F)]
    glyphs.append(replacement_rows())
    for i, rows in enumerate(glyphs):
        label = repr(chr(0x20 + i)) if i < 95 else "replacement"
        lines.append("{" + ", ".join(f"0x{b:02X}" for b in rows) + "},  // " + label)
    with open(out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "core/src/font_atlas.inc")
