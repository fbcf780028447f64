#pragma once

#include "memocr/budget_control.hpp"
#include "memocr/layout_raster.hpp"
#include "memocr/memory_image.hpp"
#include "memocr/salience_markdown.hpp"
#include "memocr/tokenizer.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace memocr {

// Defaults for the drafting loop.
inline constexpr std::size_t kDefaultChunkSize = 5000;
inline constexpr std::size_t kDefaultMaxMemoryTokens = 2048;
inline constexpr int kDefaultMaxAttempts = 3;

struct Chunk {
    std::size_t index = 0;  // 1-based step t
    std::string text;
    std::size_t token_count = 0;
};

struct ContextStream {
    std::vector<Chunk> chunks;
    std::size_t total_tokens = 0;
};

// Splits `text` into chunks of `chunk_size` tokens. Chunk boundaries fall on
// the first byte of a token, so concatenating chunk texts yields `text`.
ContextStream chunk_stream(std::string_view text, std::size_t chunk_size,
                           const Tokenizer& tokenizer = default_tokenizer());

// Wraps pre-split chunks; chunks without tokens are dropped.
ContextStream stream_from_chunks(const std::vector<std::string>& chunks,
                                 const Tokenizer& tokenizer = default_tokenizer());

struct MemoryState {
    std::size_t step = 0;
    std::string rich_text;
    std::size_t token_count = 0;
};

std::string build_draft_prompt(std::string_view problem, std::string_view article, std::string_view memory);
std::string build_read_prompt(std::string_view problem);

// Tokens of the drafting prompt that are neither article nor memory.
std::size_t draft_prompt_overhead(std::string_view problem, const Tokenizer& tokenizer = default_tokenizer());

struct DraftRequest {
    std::size_t step = 0;
    std::string_view previous_memory;
    std::string_view chunk;
    std::string_view question;
    std::string_view prompt;
};

class DrafterClient {
public:
    virtual ~DrafterClient() = default;
    // Returns the new memory in Markdown. Throws ClientError on failure.
    virtual std::string draft(const DraftRequest& request) = 0;
};

struct ReadRequest {
    const MemoryImage& image;
    // Layout of the unfitted page plus the factor it was fitted with. Real
    // clients only look at `image`.
    const PageLayout& layout;
    double scale_factor;
    std::string_view question;
    std::string_view prompt;
};

class ReaderClient {
public:
    virtual ~ReaderClient() = default;
    virtual std::string read(const ReadRequest& request) = 0;
};

enum class Stage { draft, read };

struct CostRecord {
    Stage stage;
    std::size_t context_size;  // text tokens for drafts, visual tokens for reads
    std::size_t step;
};

class CostLedger {
public:
    void add(Stage stage, std::size_t context_size, std::size_t step) { records_.push_back({stage, context_size, step}); }
    const std::vector<CostRecord>& records() const { return records_; }
    std::size_t count(Stage stage) const;
    std::size_t max_context(Stage stage) const;
    // Sum of S_t^2 over draft calls (quadratic attention cost proxy).
    double draft_cost() const;
    void merge(const CostLedger& other);

private:
    std::vector<CostRecord> records_;
};

struct LifecycleConfig {
    std::size_t chunk_size = kDefaultChunkSize;
    std::size_t max_memory_tokens = kDefaultMaxMemoryTokens;
    int max_attempts = kDefaultMaxAttempts;
    const Tokenizer* tokenizer = &default_tokenizer();
};

// One drafting update. No budget reaches this path.
MemoryState draft_step(const MemoryState& state, const Chunk& chunk, std::string_view question,
                       DrafterClient& drafter, CostLedger& ledger, const LifecycleConfig& cfg = {});

struct LifecycleResult {
    MemoryState final_state;
    CostLedger ledger;
};

LifecycleResult run_lifecycle(const ContextStream& stream, std::string_view question, DrafterClient& drafter,
                              const LifecycleConfig& cfg = {});

struct RenderedMemory {
    SalienceTree tree;
    PageLayout layout;
    MemoryImage image;
};

// normalize -> parse -> layout -> rasterize. Over-long words are hard-broken.
RenderedMemory render_memory(std::string_view markdown, const StyleSheet& style = StyleSheet::defaults(),
                             const PriorityConfig& priority = PriorityConfig::defaults());

struct AnswerResult {
    std::string answer;
    std::int64_t visual_tokens = 0;
    double scale_factor = 1.0;
    MemoryImage fitted;
};

AnswerResult answer_rendered(const RenderedMemory& rendered, std::string_view question, std::int64_t budget,
                             ReaderClient& reader, CostLedger* ledger = nullptr);

AnswerResult answer(const MemoryState& memory, std::string_view question, std::int64_t budget, ReaderClient& reader,
                    const StyleSheet& style = StyleSheet::defaults(), CostLedger* ledger = nullptr);

}  // namespace memocr
