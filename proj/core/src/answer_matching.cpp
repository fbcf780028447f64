#include "memocr/answer_matching.hpp"

#include "text_util.hpp"

#include <cctype>

namespace memocr {

std::optional<std::string> extract_boxed(std::string_view text) {
    static constexpr std::string_view kMarker = "\\boxed{";
    std::optional<std::string> last;
    std::size_t pos = text.find(kMarker);
    while (pos != std::string_view::npos) {
        const std::size_t open = pos + kMarker.size();
        int depth = 1;
        std::size_t i = open;
        for (; i < text.size(); ++i) {
            if (text[i] == '{') {
                ++depth;
            } else if (text[i] == '}' && --depth == 0) {
                break;
            }
        }
        if (depth == 0) {
            last = std::string(text.substr(open, i - open));
        }
        pos = text.find(kMarker, pos + 1);
    }
    return last;
}

std::string boxed(std::string_view inner) {
    std::string out = "\\boxed{";
    out += inner;
    out += '}';
    return out;
}

std::string normalize_answer(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (uc < 0x80 && std::ispunct(uc)) {
            continue;
        }
        if (detail::is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(detail::ascii_lower(c));
    }
    return out;
}

bool sem_match(std::string_view prediction, const std::vector<std::string>& golds) {
    const auto inner = extract_boxed(prediction);
    const std::string pred = normalize_answer(inner ? std::string_view(*inner) : prediction);
    if (pred.empty()) {
        return false;
    }
    for (const auto& g : golds) {
        const std::string ng = normalize_answer(g);
        if (!ng.empty() && pred.find(ng) != std::string::npos) {
            return true;
        }
    }
    return false;
}

}  // namespace memocr
