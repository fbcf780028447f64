#include "memocr/mock_clients.hpp"

#include "memocr/answer_matching.hpp"
#include "memocr/errors.hpp"
#include "text_util.hpp"

#include <algorithm>

namespace memocr {

namespace {

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::string_view s = detail::trim(text.substr(start, end - start));
        while (!s.empty() && (s.front() == '#' || s.front() == '-' || s.front() == '*')) {
            s = detail::trim(s.substr(1));
        }
        if (!s.empty()) {
            out.emplace_back(s);
        }
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            flush(i);
            start = i + 1;
        } else if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || detail::is_space(text[i + 1]))) {
            flush(i + 1);
        }
    }
    flush(text.size());
    return out;
}

bool contains_evidence(std::string_view sentence, const std::vector<std::string>& evidence) {
    const std::string lowered = detail::to_lower(sentence);
    return std::any_of(evidence.begin(), evidence.end(), [&](const std::string& e) {
        const std::string le = detail::to_lower(detail::trim(e));
        return !le.empty() && lowered.find(le) != std::string::npos;
    });
}

Block make_block(BlockKind kind, int level, std::string_view text) {
    Block b;
    b.kind = kind;
    b.level = level;
    b.spans = parse_inline(text);
    return b;
}

}  // namespace

EvidencePlacement placement_from_string(std::string_view s) {
    if (s == "heading" || s == "h1") {
        return EvidencePlacement::heading;
    }
    if (s == "body") {
        return EvidencePlacement::body;
    }
    throw FormatError("unknown placement '" + std::string(s) + "' (expected heading|body)");
}

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words = {
        "a",     "about", "after", "all",   "also",  "an",    "and",   "any",   "are",   "as",    "at",
        "be",    "been",  "before", "but",  "by",    "can",   "could", "did",   "do",    "does",  "for",
        "from",  "had",   "has",   "have",  "he",    "her",   "his",   "how",   "i",     "if",    "in",
        "into",  "is",    "it",    "its",   "made",  "more",  "most",  "not",   "of",    "on",    "one",
        "or",    "other", "our",   "she",   "so",    "some",  "that",  "the",   "their", "them",  "then",
        "there", "these", "they",  "this",  "those", "to",    "up",    "was",   "we",    "were",  "what",
        "when",  "where", "which", "while", "who",   "whom",  "whose", "why",   "will",  "with",  "would",
        "you",   "your",
    };
    return words;
}

std::set<std::string> content_words(std::string_view text) {
    std::set<std::string> out;
    const auto& stop = default_stopwords();
    for (auto& w : detail::words(text)) {
        if (!stop.contains(w)) {
            out.insert(std::move(w));
        }
    }
    return out;
}

std::string mock_draft(std::string_view previous, std::string_view chunk, std::string_view question,
                       const MockDrafterConfig& cfg) {
    const std::set<std::string> qwords = content_words(question);
    const SalienceTree prev = parse(normalize_source(previous));

    std::set<std::string> seen;
    for (const auto& b : prev.blocks) {
        seen.insert(normalize_answer(b.plain_text()));
    }

    std::vector<Block> new_heads;
    std::vector<Block> new_body;
    for (const std::string& sentence : split_sentences(chunk)) {
        const bool evidence = contains_evidence(sentence, cfg.evidence);
        std::size_t overlap = 0;
        for (const auto& w : content_words(sentence)) {
            overlap += qwords.contains(w) ? 1 : 0;
        }
        if (!evidence && overlap < cfg.overlap_threshold) {
            continue;
        }
        const auto parsed = parse_inline(sentence);
        std::string plain;
        for (const auto& s : parsed) {
            plain += s.text;
        }
        if (!seen.insert(normalize_answer(plain)).second) {
            continue;
        }
        if (evidence && cfg.placement == EvidencePlacement::heading) {
            new_heads.push_back(make_block(BlockKind::heading, 1, sentence));
        } else {
            new_body.push_back(make_block(BlockKind::paragraph, 0, sentence));
        }
    }

    if (new_heads.empty() && new_body.empty()) {
        return std::string(previous);
    }

    SalienceTree out;
    for (const auto& b : prev.blocks) {
        if (b.is_heading(1)) {
            out.blocks.push_back(b);
        }
    }
    out.blocks.insert(out.blocks.end(), new_heads.begin(), new_heads.end());
    for (const auto& b : prev.blocks) {
        if (!b.is_heading(1)) {
            out.blocks.push_back(b);
        }
    }
    out.blocks.insert(out.blocks.end(), new_body.begin(), new_body.end());
    return truncate_text_memory(serialize(out), cfg.max_memory_tokens);
}

std::string MockDrafter::draft(const DraftRequest& request) {
    return mock_draft(request.previous_memory, request.chunk, request.question, cfg_);
}

std::string mock_read(const PageLayout& layout, double scale_factor, std::string_view question,
                      const MockReaderConfig& cfg) {
    // Visible text per block; wrapped lines rejoin with a space.
    std::vector<std::string> texts;
    std::size_t current_block = static_cast<std::size_t>(-1);
    int current_y = -1;
    for (const LayoutBox& box : legible_boxes(layout, scale_factor, cfg.legibility)) {
        if (box.block_id != current_block) {
            texts.emplace_back();
            current_block = box.block_id;
        } else if (box.bbox.y != current_y) {
            texts.back() += ' ';
        }
        current_y = box.bbox.y;
        texts.back() += box.text;
    }

    std::string all;
    for (const auto& t : texts) {
        all += t;
        all += '\n';
    }
    const std::string visible = normalize_answer(all);
    const std::vector<std::string>* candidates = &cfg.gold_candidates;
    for (const auto& [q, golds] : cfg.question_candidates) {
        if (q == question) {
            candidates = &golds;
        }
    }
    for (const auto& gold : *candidates) {
        const std::string g = normalize_answer(gold);
        if (!g.empty() && visible.find(g) != std::string::npos) {
            return boxed(gold);
        }
    }

    const std::set<std::string> qwords = content_words(question);
    const std::string* best = nullptr;
    for (const auto& t : texts) {
        const auto words = content_words(t);
        const bool overlaps =
            std::any_of(words.begin(), words.end(), [&](const std::string& w) { return qwords.contains(w); });
        if (overlaps && (best == nullptr || t.size() > best->size())) {
            best = &t;
        }
    }
    return boxed(best != nullptr ? std::string_view(*best) : kUnknownAnswer);
}

std::string MockReader::read(const ReadRequest& request) {
    return mock_read(request.layout, request.scale_factor, request.question, cfg_);
}

}  // namespace memocr
