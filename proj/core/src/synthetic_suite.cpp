#include "memocr/synthetic_suite.hpp"

#include <array>
#include <cstdio>
#include <random>
#include <string_view>

namespace memocr {

namespace {

// Plain modulo draws keep the output identical across standard libraries.
class Picker {
public:
    explicit Picker(std::uint64_t seed) : rng_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
    template <typename C>
    const auto& from(const C& c) {
        return c[below(c.size())];
    }
    template <typename C>
    void shuffle(C& c) {
        for (std::size_t i = c.size(); i > 1; --i) {
            std::swap(c[i - 1], c[below(i)]);
        }
    }

private:
    std::mt19937_64 rng_;
};

constexpr std::array<std::string_view, 24> kFirst = {
    "Avery",  "Blake",  "Carmen", "Dorian",   "Elena", "Felix",  "Greta",  "Hugo",
    "Imogen", "Jasper", "Katya",  "Lionel",   "Mira",  "Nolan",  "Odette", "Perrin",
    "Quinn",  "Rhea",   "Silas",  "Tamsin",   "Ulric", "Vera",   "Wendell", "Yara",
};
constexpr std::array<std::string_view, 24> kLast = {
    "Ashdown",  "Brightwater", "Calloway",  "Dunmore",  "Everhart",  "Fairbanks", "Greenleaf", "Holloway",
    "Ingram",   "Jessop",      "Kettering", "Langford", "Merriweather", "Northcott", "Oakes", "Pemberton",
    "Quayle",   "Radcliffe",   "Sutherland", "Thackeray", "Underhill", "Vance",   "Whitlock",  "Yardley",
};
constexpr std::array<std::string_view, 12> kBandAdj = {
    "Copper", "Velvet", "Midnight", "Paper", "Glass", "Electric",
    "Silver", "Hollow", "Crimson", "Lantern", "Northern", "Static",
};
constexpr std::array<std::string_view, 10> kBandNoun = {
    "Owls", "Foxes", "Pilots", "Rivers", "Engines", "Sparrows", "Comets", "Tides", "Wolves", "Ravens",
};
constexpr std::array<std::string_view, 10> kSongAdj = {
    "Golden", "Quiet", "Broken", "Distant", "Wandering", "Bitter", "Gentle", "Restless", "Faded", "Burning",
};
constexpr std::array<std::string_view, 10> kSongNoun = {
    "Harbor", "Meridian", "Lullaby", "Horizon", "Letter", "Avenue", "Promise", "Orchard", "Signal", "Carousel",
};
constexpr std::array<std::string_view, 10> kCity = {
    "Lisbon", "Tallinn", "Cork", "Bergen", "Quebec", "Porto", "Ghent", "Leeds", "Turin", "Krakow",
};

// Filler vocabulary; disjoint from every list above and from question wording.
constexpr std::array<std::string_view, 5> kDet = {"A", "One", "Every", "That", "This"};
constexpr std::array<std::string_view, 12> kAdj = {
    "patient", "narrow", "amber", "humble", "crooked", "tidy",
    "rusty", "sleepy", "woolen", "sturdy", "damp", "pale",
};
constexpr std::array<std::string_view, 14> kNoun = {
    "ferry", "kettle", "heron", "tram", "clockmaker", "granary", "meadow",
    "bakery", "quarry", "pantry", "barge", "windmill", "chapel", "cobbler",
};
constexpr std::array<std::string_view, 10> kVerb = {
    "drifted", "rattled", "leaned", "waited", "glimmered", "creaked", "settled", "hummed", "dozed", "shivered",
};
constexpr std::array<std::string_view, 6> kPrep = {"past", "beside", "behind", "toward", "under", "across"};

std::string filler_sentence(Picker& p) {
    std::string s;
    s += p.from(kDet);
    s += ' ';
    s += p.from(kAdj);
    s += ' ';
    s += p.from(kNoun);
    s += ' ';
    s += p.from(kVerb);
    s += ' ';
    s += p.from(kPrep);
    s += " the ";
    s += p.from(kNoun);
    s += '.';
    return s;
}

std::string join_chunk(const std::vector<std::string>& sentences) {
    std::string out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i > 0) {
            out += (i % 8 == 0) ? "\n\n" : " ";
        }
        out += sentences[i];
    }
    return out;
}

EvalInstance make_instance(std::size_t index, Picker& p) {
    const std::size_t fi = p.below(kFirst.size());
    const std::size_t li = p.below(kLast.size());
    const std::string gold = std::string(kFirst[fi]) + " " + std::string(kLast[li]);
    // Distractor people never share a first or last name with the writer.
    auto other_person = [&] {
        std::size_t a = p.below(kFirst.size() - 1);
        std::size_t b = p.below(kLast.size() - 1);
        a += (a >= fi) ? 1 : 0;
        b += (b >= li) ? 1 : 0;
        return std::string(kFirst[a]) + " " + std::string(kLast[b]);
    };

    const std::size_t ba = p.below(kBandAdj.size());
    const std::size_t bn = p.below(kBandNoun.size());
    const std::string band = "The " + std::string(kBandAdj[ba]) + " " + std::string(kBandNoun[bn]);
    const std::string other_band = "The " + std::string(kBandAdj[(ba + 1 + p.below(kBandAdj.size() - 1)) % kBandAdj.size()]) +
                                   " " + std::string(kBandNoun[(bn + 1 + p.below(kBandNoun.size() - 1)) % kBandNoun.size()]);
    const std::string song = std::string(p.from(kSongAdj)) + " " + std::string(p.from(kSongNoun));
    const std::string city(p.from(kCity));
    const std::string year = std::to_string(1961 + p.below(50));

    EvalInstance inst;
    char id[32];
    std::snprintf(id, sizeof id, "synth-%03zu", index + 1);
    inst.id = id;
    inst.dataset = "synthetic";
    inst.question = "Who wrote the song " + song + " recorded by " + band + "?";
    inst.gold_answers = {gold};
    const std::string evidence = "The song " + song + " was written by " + gold + " long before " + band + " recorded it.";
    inst.evidence = {evidence};
    inst.detail_question = "In which year did " + band + " first perform " + song + " live?";
    inst.detail_answers = {year};

    const std::string year_sentence = band + " first performed " + song + " live in " + year + " during a winter tour.";
    std::vector<std::string> optional_aux = {
        other_person() + " produced the album on which " + band + " released " + song + ".",
        "A slower cover of " + song + " by " + other_band + " reached the regional charts.",
        band + " recorded the song in a converted barn outside " + city + ".",
        "Critics praised the string arrangement that " + band + " added to the song " + song + ".",
        other_person() + " played the piano part when " + band + " recorded " + song + ".",
        band + " later named a whole tour after the song " + song + ".",
        "Fans of " + band + " still request " + song + " at almost every concert.",
        "The music video for " + song + " showed " + band + " walking through " + city + " at dawn.",
        other_person() + " once claimed to have inspired the chorus of " + song + ".",
        "Radio hosts often confused " + song + " with another single by " + band + ".",
        band + " dropped " + song + " from the setlist for two seasons.",
    };
    p.shuffle(optional_aux);
    const std::size_t n_aux = 8 + p.below(4);  // 8..11 besides the year sentence
    std::vector<std::string> topical = {evidence, year_sentence};
    topical.insert(topical.end(), optional_aux.begin(), optional_aux.begin() + static_cast<std::ptrdiff_t>(n_aux));

    std::array<std::vector<std::string>, 3> chunks;
    for (auto& c : chunks) {
        const std::size_t n_filler = 45 + p.below(16);
        for (std::size_t i = 0; i < n_filler; ++i) {
            c.push_back(filler_sentence(p));
        }
    }
    for (const auto& s : topical) {
        auto& c = chunks[p.below(chunks.size())];
        c.insert(c.begin() + static_cast<std::ptrdiff_t>(p.below(c.size() + 1)), s);
    }
    for (const auto& c : chunks) {
        inst.chunks.push_back(join_chunk(c));
    }
    return inst;
}

}  // namespace

std::vector<EvalInstance> make_synthetic_suite(std::size_t n, std::uint64_t seed) {
    Picker p(seed);
    std::vector<EvalInstance> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(make_instance(i, p));
    }
    return out;
}

std::string synthetic_filler(std::size_t tokens, std::uint64_t seed) {
    Picker p(seed);
    std::string out;
    std::size_t count = 0;
    while (count < tokens) {
        const std::string s = filler_sentence(p);
        std::size_t pos = 0;
        while (pos < s.size() && count < tokens) {
            const std::size_t sp = s.find(' ', pos);
            const std::size_t end = sp == std::string::npos ? s.size() : sp;
            if (!out.empty()) {
                out += ' ';
            }
            out.append(s, pos, end - pos);
            ++count;
            pos = end + 1;
        }
    }
    return out;
}

}  // namespace memocr
