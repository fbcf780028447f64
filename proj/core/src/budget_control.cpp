#include "memocr/budget_control.hpp"

#include "memocr/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace memocr {

namespace {

int snap_dimension(double target) {
    // Guard against 447.99999... from the factor multiplication.
    const double t = std::floor(target + 1e-9);
    if (t >= kPatchSide) {
        return static_cast<int>(std::floor(t / kPatchSide)) * kPatchSide;
    }
    return std::max(1, static_cast<int>(t));
}

struct Tap {
    int src;
    std::int64_t weight;
};

// Integer overlap weights mapping `in` source pixels onto `out` pixels. Source
// pixel i spans [i*out, (i+1)*out) and output x spans [x*in, (x+1)*in), so
// the weights of every output sum to `in`.
std::vector<std::vector<Tap>> area_taps(int in, int out) {
    std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
    for (int x = 0; x < out; ++x) {
        const std::int64_t lo = static_cast<std::int64_t>(x) * in;
        const std::int64_t hi = lo + in;
        const auto first = static_cast<int>(lo / out);
        const auto last = static_cast<int>((hi - 1) / out);
        for (int i = first; i <= last; ++i) {
            const std::int64_t s_lo = static_cast<std::int64_t>(i) * out;
            const std::int64_t s_hi = s_lo + out;
            const std::int64_t w = std::min(hi, s_hi) - std::max(lo, s_lo);
            if (w > 0) {
                taps[x].push_back({i, w});
            }
        }
    }
    return taps;
}

}  // namespace

std::int64_t max_pixels(std::int64_t budget) {
    if (budget < 1) {
        throw InvalidBudget("budget must be >= 1 visual token, got " + std::to_string(budget));
    }
    return budget * kPixelsPerToken;
}

BudgetSchedule BudgetSchedule::for_budgets(const std::vector<int>& budgets) {
    BudgetSchedule s;
    for (int b : budgets) {
        s.rows[b] = max_pixels(b);
    }
    return s;
}

std::string BudgetSchedule::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["patch_side"] = patch_side;
    j["pixels_per_token"] = pixels_per_token();
    auto rows_json = nlohmann::ordered_json::array();
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        rows_json.push_back({{"budget", it->first}, {"max_pixels", it->second}});
    }
    j["rows"] = std::move(rows_json);
    return j.dump(2);
}

PatchGrid patch_grid(int width, int height) {
    return {(width + kPatchSide - 1) / kPatchSide, (height + kPatchSide - 1) / kPatchSide};
}

std::int64_t visual_token_count(int width, int height) {
    return patch_grid(width, height).token_count();
}

MemoryImage resample_area(const MemoryImage& image, int out_width, int out_height) {
    if (image.empty() || out_width < 1 || out_height < 1) {
        throw PreconditionError("resample_area needs a non-empty image and a target of at least 1x1");
    }
    const int w = image.width();
    const int h = image.height();
    if (out_width == w && out_height == h) {
        return image;
    }
    const auto tx = area_taps(w, out_width);
    const auto ty = area_taps(h, out_height);
    const auto px = image.pixels();

    // Horizontal pass keeps exact integer sums (each scaled by w).
    std::vector<std::int64_t> rows(static_cast<std::size_t>(out_width) * h);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = px.data() + static_cast<std::size_t>(y) * w;
        std::int64_t* dst = rows.data() + static_cast<std::size_t>(y) * out_width;
        for (int x = 0; x < out_width; ++x) {
            std::int64_t acc = 0;
            for (const Tap& t : tx[x]) {
                acc += t.weight * src[t.src];
            }
            dst[x] = acc;
        }
    }

    const std::int64_t denom = static_cast<std::int64_t>(w) * h;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(out_width) * out_height);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            std::int64_t acc = 0;
            for (const Tap& t : ty[y]) {
                acc += t.weight * rows[static_cast<std::size_t>(t.src) * out_width + x];
            }
            out[static_cast<std::size_t>(y) * out_width + x] = static_cast<std::uint8_t>((acc + denom / 2) / denom);
        }
    }
    return MemoryImage(out_width, out_height, std::move(out));
}

FitResult fit_to_budget(const MemoryImage& image, std::int64_t budget) {
    if (budget < 1) {
        throw InvalidBudget("budget must be >= 1 visual token, got " + std::to_string(budget));
    }
    if (image.empty()) {
        throw PreconditionError("fit_to_budget needs a non-empty image");
    }
    const std::int64_t tokens = visual_token_count(image);
    if (tokens <= budget) {
        return {image, 1.0};
    }
    const int w = image.width();
    const int h = image.height();
    double f = std::sqrt(static_cast<double>(budget) / static_cast<double>(tokens));
    int ow = snap_dimension(w * f);
    int oh = snap_dimension(h * f);
    // Ceiling effects can leave the first guess over budget; token count is
    // monotone in f, and at 1x1 it is 1 <= budget, so this terminates.
    while (visual_token_count(ow, oh) > budget) {
        f *= 0.999;
        ow = snap_dimension(w * f);
        oh = snap_dimension(h * f);
    }
    return {resample_area(image, ow, oh), f};
}

MemoryImage downsample(const MemoryImage& image, double factor_per_dim) {
    if (!(factor_per_dim >= 1.0)) {
        throw PreconditionError("downsample factor must be >= 1");
    }
    if (factor_per_dim == 1.0) {
        return image;
    }
    const int ow = std::max(1, static_cast<int>(std::floor(image.width() / factor_per_dim)));
    const int oh = std::max(1, static_cast<int>(std::floor(image.height() / factor_per_dim)));
    return resample_area(image, ow, oh);
}

bool is_legible(const LayoutBox& box, double scale_factor, const LegibilityModel& model) {
    return box.bbox.h * scale_factor >= model.min_glyph_height;
}

std::vector<LayoutBox> legible_boxes(const PageLayout& layout, double scale_factor, const LegibilityModel& model) {
    std::vector<LayoutBox> out;
    for (const auto& b : layout.boxes) {
        if (is_legible(b, scale_factor, model)) {
            out.push_back(b);
        }
    }
    return out;
}

}  // namespace memocr
