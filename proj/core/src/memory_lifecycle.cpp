#include "memocr/memory_lifecycle.hpp"

#include "memocr/errors.hpp"
#include "text_util.hpp"

#include <algorithm>

namespace memocr {

namespace {

constexpr std::string_view kDraftPreamble =
    "You are given a problem, an article, and a previous memory.\n"
    "You should draft the memory in markdown format with the crucial information in it that helps to answer the "
    "problem.\n"
    "In your markdown draft, you may use different headings to arrange the font sizes and styles of the "
    "information.\n"
    "e.g., more important information should be emphasized and more visible (larger font size, bolder, etc.), in "
    "case the rendered image can be clearly read.\n"
    "\n";

constexpr std::string_view kReadPreamble =
    "You are presented with a problem and a previous memory. Please answer the problem based on the previous "
    "memory and put the answer in \\boxed{}.\n"
    "\n";

}  // namespace

ContextStream chunk_stream(std::string_view text, std::size_t chunk_size, const Tokenizer& tokenizer) {
    if (chunk_size < 1) {
        throw PreconditionError("chunk_size must be >= 1");
    }
    const auto spans = tokenizer.spans(text);
    if (spans.empty()) {
        throw EmptyContext("context has no tokens");
    }
    ContextStream stream;
    stream.total_tokens = spans.size();
    for (std::size_t first = 0, t = 1; first < spans.size(); first += chunk_size, ++t) {
        const std::size_t last = std::min(first + chunk_size, spans.size());
        const std::size_t begin = first == 0 ? 0 : spans[first].begin;
        const std::size_t end = last == spans.size() ? text.size() : spans[last].begin;
        stream.chunks.push_back({t, std::string(text.substr(begin, end - begin)), last - first});
    }
    return stream;
}

ContextStream stream_from_chunks(const std::vector<std::string>& chunks, const Tokenizer& tokenizer) {
    ContextStream stream;
    for (const auto& c : chunks) {
        const std::size_t n = tokenizer.count(c);
        if (n == 0) {
            continue;
        }
        stream.chunks.push_back({stream.chunks.size() + 1, c, n});
        stream.total_tokens += n;
    }
    if (stream.chunks.empty()) {
        throw EmptyContext("context has no tokens");
    }
    return stream;
}

std::string build_draft_prompt(std::string_view problem, std::string_view article, std::string_view memory) {
    std::string p(kDraftPreamble);
    p += "<problem>\n";
    p += problem;
    p += "\n</problem>\n<article>\n";
    p += article;
    p += "\n</article>\n<memory>\n";
    p += memory;
    p += "\n</memory>\n\nThe draft memory, in markdown format:";
    return p;
}

std::string build_read_prompt(std::string_view problem) {
    std::string p(kReadPreamble);
    p += "<problem>";
    p += problem;
    p += "</problem>\n\nYour answer:";
    return p;
}

std::size_t draft_prompt_overhead(std::string_view problem, const Tokenizer& tokenizer) {
    return tokenizer.count(build_draft_prompt(problem, "", ""));
}

std::size_t CostLedger::count(Stage stage) const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [stage](const CostRecord& r) { return r.stage == stage; }));
}

std::size_t CostLedger::max_context(Stage stage) const {
    std::size_t m = 0;
    for (const auto& r : records_) {
        if (r.stage == stage) {
            m = std::max(m, r.context_size);
        }
    }
    return m;
}

double CostLedger::draft_cost() const {
    double total = 0.0;
    for (const auto& r : records_) {
        if (r.stage == Stage::draft) {
            total += static_cast<double>(r.context_size) * static_cast<double>(r.context_size);
        }
    }
    return total;
}

void CostLedger::merge(const CostLedger& other) {
    records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

MemoryState draft_step(const MemoryState& state, const Chunk& chunk, std::string_view question,
                       DrafterClient& drafter, CostLedger& ledger, const LifecycleConfig& cfg) {
    if (state.step + 1 != chunk.index) {
        throw PreconditionError("draft_step: memory is at step " + std::to_string(state.step) +
                                " but chunk has index " + std::to_string(chunk.index));
    }
    const Tokenizer& tok = *cfg.tokenizer;
    const std::string prompt = build_draft_prompt(question, chunk.text, state.rich_text);
    const DraftRequest req{chunk.index, state.rich_text, chunk.text, question, prompt};

    std::string drafted;
    for (int attempt = 1;; ++attempt) {
        try {
            drafted = drafter.draft(req);
            break;
        } catch (const ClientError& e) {
            if (attempt >= std::max(1, cfg.max_attempts)) {
                throw ClientError("step " + std::to_string(chunk.index) + ": drafting failed after " +
                                      std::to_string(attempt) + " attempts: " + e.what(),
                                  static_cast<int>(chunk.index));
            }
        }
    }
    ledger.add(Stage::draft, tok.count(prompt), chunk.index);

    MemoryState next;
    next.step = chunk.index;
    next.rich_text = normalize_source(truncate_text_memory(normalize_source(drafted), cfg.max_memory_tokens, tok));
    next.token_count = tok.count(next.rich_text);
    return next;
}

LifecycleResult run_lifecycle(const ContextStream& stream, std::string_view question, DrafterClient& drafter,
                              const LifecycleConfig& cfg) {
    if (stream.chunks.empty()) {
        throw EmptyContext("cannot run the lifecycle on an empty stream");
    }
    LifecycleResult result;
    for (const Chunk& chunk : stream.chunks) {
        result.final_state = draft_step(result.final_state, chunk, question, drafter, result.ledger, cfg);
    }
    return result;
}

RenderedMemory render_memory(std::string_view markdown, const StyleSheet& style, const PriorityConfig& priority) {
    RenderedMemory r;
    r.tree = parse(normalize_source(markdown));
    r.layout = layout(r.tree, style, LayoutOptions{WrapPolicy::hard_break, priority});
    r.image = rasterize(r.layout);
    return r;
}

AnswerResult answer_rendered(const RenderedMemory& rendered, std::string_view question, std::int64_t budget,
                             ReaderClient& reader, CostLedger* ledger) {
    FitResult fit = fit_to_budget(rendered.image, budget);
    const std::string prompt = build_read_prompt(question);
    AnswerResult out;
    out.visual_tokens = visual_token_count(fit.image);
    out.scale_factor = fit.scale_factor;
    out.answer = reader.read(ReadRequest{fit.image, rendered.layout, fit.scale_factor, question, prompt});
    if (ledger != nullptr) {
        ledger->add(Stage::read, static_cast<std::size_t>(out.visual_tokens), 0);
    }
    out.fitted = std::move(fit.image);
    return out;
}

AnswerResult answer(const MemoryState& memory, std::string_view question, std::int64_t budget, ReaderClient& reader,
                    const StyleSheet& style, CostLedger* ledger) {
    return answer_rendered(render_memory(memory.rich_text, style), question, budget, reader, ledger);
}

}  // namespace memocr
