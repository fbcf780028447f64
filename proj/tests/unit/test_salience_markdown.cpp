#include <memocr/salience_markdown.hpp>

#include <doctest.h>
#include <test_support.hpp>

#include <random>

using namespace memocr;

namespace {

// A generated document together with the block texts it must parse to.
struct GeneratedDoc {
    std::string source;
    std::vector<std::string> expected_texts;
    std::vector<BlockKind> expected_kinds;
};

std::string random_phrase(std::mt19937_64& rng, int max_words) {
    std::uniform_int_distribution<int> n(1, max_words);
    std::string out;
    const int k = n(rng);
    for (int i = 0; i < k; ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += testsupport::random_word(rng);
    }
    return out;
}

GeneratedDoc random_doc(std::mt19937_64& rng) {
    GeneratedDoc d;
    std::uniform_int_distribution<int> blocks(1, 8);
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<int> level(1, 6);
    std::uniform_int_distribution<int> coin(0, 1);
    const int nb = blocks(rng);
    for (int b = 0; b < nb; ++b) {
        if (b > 0) {
            d.source += coin(rng) ? "\n\n" : "\n\n\n";
        }
        // Plain text plus an optional bold suffix; the expected text drops the markers.
        const std::string plain = random_phrase(rng, 6);
        std::string text = plain;
        std::string marked = plain;
        if (coin(rng)) {
            const std::string strong = random_phrase(rng, 3);
            text += " " + strong;
            marked += " **" + strong + "**";
        }
        switch (kind(rng)) {
            case 0:
                d.source += std::string(static_cast<std::size_t>(level(rng)), '#') + " " + marked;
                d.expected_kinds.push_back(BlockKind::heading);
                break;
            case 1:
                d.source += std::string(static_cast<std::size_t>(2 * coin(rng)), ' ') + "- " + marked;
                d.expected_kinds.push_back(BlockKind::bullet_item);
                break;
            default:
                d.source += marked;
                d.expected_kinds.push_back(BlockKind::paragraph);
                break;
        }
        d.expected_texts.push_back(text);
    }
    if (coin(rng)) {
        d.source = "```markdown\n" + d.source + "\n```";
    }
    if (coin(rng)) {
        d.source = "  \n" + d.source + "\n\t ";
    }
    return d;
}

}  // namespace

TEST_CASE("normalize_source strips one fence and outer whitespace") {
    CHECK(normalize_source("```\n# A\n```") == "# A");
    CHECK(normalize_source("  hello  ") == "hello");
    CHECK(normalize_source("```markdown\n- x\n```") == "- x");
    CHECK(normalize_source("") == "");
    CHECK(normalize_source("no fence") == "no fence");
}

TEST_CASE("normalize_source is idempotent on random documents") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        std::string doc = random_doc(rng).source;
        // Nested fences and stray backticks are the hard cases.
        if (i % 3 == 0) {
            doc = "```\n" + doc + "\n```";
        }
        if (i % 7 == 0) {
            doc = "``` \n  " + doc + "``````";
        }
        const std::string once = normalize_source(doc);
        CHECK(normalize_source(once) == once);
    }
}

TEST_CASE("parse: heading, bold and paragraph basics") {
    const SalienceTree t = parse("# Title");
    REQUIRE(t.blocks.size() == 1);
    CHECK(t.blocks[0].kind == BlockKind::heading);
    CHECK(t.blocks[0].level == 1);
    REQUIRE(t.blocks[0].spans.size() == 1);
    CHECK(t.blocks[0].spans[0] == InlineSpan{"Title", false});

    const SalienceTree p = parse("**a** b");
    REQUIRE(p.blocks.size() == 1);
    CHECK(p.blocks[0].kind == BlockKind::paragraph);
    REQUIRE(p.blocks[0].spans.size() == 2);
    CHECK(p.blocks[0].spans[0] == InlineSpan{"a", true});
    CHECK(p.blocks[0].spans[1] == InlineSpan{" b", false});
}

TEST_CASE("parse: markdown subset details") {
    SUBCASE("headings need a space and at most six hashes") {
        const auto t = parse("#nospace\n\n####### seven\n\n###### six");
        REQUIRE(t.blocks.size() == 3);
        CHECK(t.blocks[0].kind == BlockKind::paragraph);
        CHECK(t.blocks[1].kind == BlockKind::paragraph);
        CHECK(t.blocks[2].is_heading(6));
    }
    SUBCASE("bullets nest by two spaces") {
        const auto t = parse("- top\n  - child\n    - grandchild\n* star");
        REQUIRE(t.blocks.size() == 4);
        CHECK(t.blocks[0].depth == 0);
        CHECK(t.blocks[1].depth == 1);
        CHECK(t.blocks[2].depth == 2);
        CHECK(t.blocks[3].kind == BlockKind::bullet_item);
    }
    SUBCASE("continuation lines join the open block") {
        const auto t = parse("first line\nsecond line\n\nnext");
        REQUIRE(t.blocks.size() == 2);
        CHECK(t.blocks[0].plain_text() == "first line second line");
        CHECK(t.blocks[1].plain_text() == "next");
    }
    SUBCASE("heading lines never absorb continuations") {
        const auto t = parse("# Head\nbody");
        REQUIRE(t.blocks.size() == 2);
        CHECK(t.blocks[1].kind == BlockKind::paragraph);
    }
    SUBCASE("unmatched bold marker is literal") {
        const auto t = parse("a ** b");
        REQUIRE(t.blocks.size() == 1);
        CHECK(t.blocks[0].spans.size() == 1);
        CHECK(t.blocks[0].plain_text() == "a ** b");
    }
    SUBCASE("empty and marker-only lines produce no blocks") {
        CHECK(parse("").blocks.empty());
        CHECK(parse("\n\n   \n").blocks.empty());
        CHECK(parse("#\n\n- \n\n****").blocks.size() == 1);  // "****" is literal text
    }
    SUBCASE("ids follow reading order") {
        const auto t = parse("# a\n\nb\n\n- c");
        for (std::size_t i = 0; i < t.blocks.size(); ++i) {
            CHECK(t.blocks[i].id == i);
        }
    }
}

TEST_CASE("parse: case-study memory has prominent and body blocks") {
    const std::string memory =
        "# Ocean Band\n\n"
        "# Gene MacLellan\n\n"
        "The question asks who wrote the song performed by the band. "
        "Several performers recorded covers over the years.\n\n"
        "- Anne Murray released a version in 1970.";
    const auto t = parse(memory);
    std::size_t headings = 0;
    std::size_t paragraphs = 0;
    for (const auto& b : t.blocks) {
        headings += b.kind == BlockKind::heading ? 1 : 0;
        paragraphs += b.kind == BlockKind::paragraph ? 1 : 0;
    }
    CHECK(headings >= 1);
    CHECK(paragraphs >= 1);
    CHECK(t.blocks[1].plain_text() == "Gene MacLellan");
}

TEST_CASE("parse is total on random bytes") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> len(0, 200);
    std::uniform_int_distribution<int> byte(0, 255);
    const std::string alphabet = "#*- \n\t`abc\r";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int i = 0; i < 10000; ++i) {
        std::string s;
        const int n = len(rng);
        for (int k = 0; k < n; ++k) {
            s.push_back(coin(rng) ? static_cast<char>(byte(rng)) : alphabet[pick(rng)]);
        }
        SalienceTree t;
        REQUIRE_NOTHROW(t = parse(normalize_source(s)));
        for (const auto& b : t.blocks) {
            CHECK_FALSE(b.spans.empty());
            if (b.kind == BlockKind::heading) {
                CHECK(b.level >= 1);
                CHECK(b.level <= 6);
            }
            CHECK(b.depth >= 0);
            for (std::size_t k = 0; k < b.spans.size(); ++k) {
                CHECK_FALSE(b.spans[k].text.empty());
                CHECK(b.spans[k].text.find('\n') == std::string::npos);
                if (k > 0) {
                    CHECK(b.spans[k].bold != b.spans[k - 1].bold);
                }
            }
        }
    }
}

TEST_CASE("reading order and inline text match the generated oracle") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 500; ++i) {
        const GeneratedDoc d = random_doc(rng);
        const auto t = parse(normalize_source(d.source));
        REQUIRE(t.blocks.size() == d.expected_texts.size());
        for (std::size_t b = 0; b < t.blocks.size(); ++b) {
            CHECK(t.blocks[b].plain_text() == d.expected_texts[b]);
            CHECK(t.blocks[b].kind == d.expected_kinds[b]);
        }
    }
}

TEST_CASE("serialize round-trips block kinds, text and bold spans") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        const auto t = parse(normalize_source(random_doc(rng).source));
        const auto again = parse(serialize(t));
        REQUIRE(again.blocks.size() == t.blocks.size());
        for (std::size_t b = 0; b < t.blocks.size(); ++b) {
            CHECK(again.blocks[b] == t.blocks[b]);
        }
    }
}

TEST_CASE("priority_class presets") {
    const auto t = parse("# h1\n\n## h2\n\nplain **strong**");
    const auto def = PriorityConfig::defaults();
    const auto parity = PriorityConfig::h1_only();
    const InlineSpan& h1 = t.blocks[0].spans[0];
    const InlineSpan& h2 = t.blocks[1].spans[0];
    CHECK(priority_class(t.blocks[0], h1, def) == PriorityClass::crucial);
    CHECK(priority_class(t.blocks[0], h1, parity) == PriorityClass::crucial);
    CHECK(priority_class(t.blocks[1], h2, def) == PriorityClass::crucial);
    CHECK(priority_class(t.blocks[1], h2, parity) == PriorityClass::detailed);
    CHECK(priority_class(t.blocks[2], t.blocks[2].spans[0], def) == PriorityClass::detailed);
    CHECK(priority_class(t.blocks[2], t.blocks[2].spans[0], parity) == PriorityClass::detailed);
    CHECK(priority_class(t.blocks[2], t.blocks[2].spans[1], def) == PriorityClass::crucial);
    CHECK(priority_class(t.blocks[2], t.blocks[2].spans[1], parity) == PriorityClass::detailed);
    CHECK(PriorityConfig::from_name("h1-only").max_crucial_heading_level == 1);
    CHECK_THROWS(PriorityConfig::from_name("bogus"));
}

TEST_CASE("classification partitions every span") {
    std::mt19937_64 rng(3);
    const PriorityConfig configs[] = {PriorityConfig::defaults(), PriorityConfig::h1_only(), {6, true}, {0, false}};
    for (int i = 0; i < 200; ++i) {
        const auto t = parse(normalize_source(random_doc(rng).source));
        for (const auto& cfg : configs) {
            std::size_t crucial = 0;
            std::size_t detailed = 0;
            std::size_t total = 0;
            for (const auto& b : t.blocks) {
                for (const auto& s : b.spans) {
                    ++total;
                    const auto c = priority_class(b, s, cfg);
                    crucial += c == PriorityClass::crucial ? 1 : 0;
                    detailed += c == PriorityClass::detailed ? 1 : 0;
                }
            }
            CHECK(crucial + detailed == total);
        }
    }
}
