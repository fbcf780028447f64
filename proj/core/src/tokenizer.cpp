#include "memocr/tokenizer.hpp"

#include "text_util.hpp"

namespace memocr {

std::vector<TokenSpan> WhitespaceTokenizer::spans(std::string_view text) const {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && detail::is_space(text[i])) {
            ++i;
        }
        if (i == text.size()) {
            break;
        }
        const std::size_t b = i;
        while (i < text.size() && !detail::is_space(text[i])) {
            ++i;
        }
        out.push_back({b, i});
    }
    return out;
}

std::size_t WhitespaceTokenizer::count(std::string_view text) const {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool sp = detail::is_space(c);
        if (!sp && !in_token) {
            ++n;
        }
        in_token = !sp;
    }
    return n;
}

const Tokenizer& default_tokenizer() {
    static const WhitespaceTokenizer tok;
    return tok;
}

std::string truncate_text_memory(std::string_view text, std::size_t budget, const Tokenizer& tokenizer) {
    if (budget == 0) {
        return {};
    }
    const auto spans = tokenizer.spans(text);
    if (spans.size() <= budget) {
        return std::string(text);
    }
    return std::string(text.substr(0, spans[budget - 1].end));
}

}  // namespace memocr
