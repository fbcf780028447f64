#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace memocr {

struct TokenSpan {
    std::size_t begin;
    std::size_t end;
};

// Pluggable tokenizer. Token spans are byte ranges into the input and never
// overlap; the text between them is treated as separator.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<TokenSpan> spans(std::string_view text) const = 0;
    virtual std::size_t count(std::string_view text) const { return spans(text).size(); }
};

// Maximal runs of non-whitespace bytes.
class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<TokenSpan> spans(std::string_view text) const override;
    std::size_t count(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

// Prefix of `text` ending with its `budget`-th token; `text` itself when it has
// at most `budget` tokens.
std::string truncate_text_memory(std::string_view text, std::size_t budget,
                                 const Tokenizer& tokenizer = default_tokenizer());

}  // namespace memocr
