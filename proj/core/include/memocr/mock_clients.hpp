#pragma once

#include "memocr/budget_control.hpp"
#include "memocr/memory_lifecycle.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace memocr {

enum class EvidencePlacement {
    heading,  // evidence sentences become H1 blocks
    body,     // evidence sentences stay plain paragraphs
};

EvidencePlacement placement_from_string(std::string_view s);

struct MockDrafterConfig {
    std::vector<std::string> evidence;
    // Minimum distinct non-stopword tokens a sentence must share with the question.
    std::size_t overlap_threshold = 2;
    EvidencePlacement placement = EvidencePlacement::heading;
    std::size_t max_memory_tokens = kDefaultMaxMemoryTokens;
};

const std::set<std::string>& default_stopwords();

// Distinct lowercase non-stopword words of `text`.
std::set<std::string> content_words(std::string_view text);

// Deterministic extractive drafting rule standing in for the policy model.
std::string mock_draft(std::string_view previous, std::string_view chunk, std::string_view question,
                       const MockDrafterConfig& cfg);

class MockDrafter final : public DrafterClient {
public:
    explicit MockDrafter(MockDrafterConfig cfg) : cfg_(std::move(cfg)) {}
    std::string draft(const DraftRequest& request) override;

private:
    MockDrafterConfig cfg_;
};

struct MockReaderConfig {
    std::vector<std::string> gold_candidates;
    // Per-question candidate overrides, matched on the exact question text.
    std::vector<std::pair<std::string, std::vector<std::string>>> question_candidates;
    LegibilityModel legibility;
};

// Reads only what survives the fit: the text of legible boxes.
std::string mock_read(const PageLayout& layout, double scale_factor, std::string_view question,
                      const MockReaderConfig& cfg);

class MockReader final : public ReaderClient {
public:
    explicit MockReader(MockReaderConfig cfg) : cfg_(std::move(cfg)) {}
    std::string read(const ReadRequest& request) override;

private:
    MockReaderConfig cfg_;
};

}  // namespace memocr
