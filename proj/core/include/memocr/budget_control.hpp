#pragma once

#include "memocr/layout_raster.hpp"
#include "memocr/memory_image.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace memocr {

inline constexpr int kPatchSide = 28;
inline constexpr std::int64_t kPixelsPerToken = kPatchSide * kPatchSide;  // 784

// Budgets used throughout evaluation, in visual tokens.
inline const std::vector<int> kDefaultBudgets = {16, 64, 256, 1024};

struct BudgetSchedule {
    int patch_side = kPatchSide;
    std::map<int, std::int64_t> rows;  // budget -> max pixels

    std::int64_t pixels_per_token() const { return static_cast<std::int64_t>(patch_side) * patch_side; }
    static BudgetSchedule for_budgets(const std::vector<int>& budgets);
    std::string to_json() const;
};

struct PatchGrid {
    int cols = 0;
    int rows = 0;
    std::int64_t token_count() const { return static_cast<std::int64_t>(cols) * rows; }
};

// B * 784. Throws InvalidBudget for B < 1.
std::int64_t max_pixels(std::int64_t budget);

PatchGrid patch_grid(int width, int height);
std::int64_t visual_token_count(int width, int height);
inline std::int64_t visual_token_count(const MemoryImage& img) { return visual_token_count(img.width(), img.height()); }

struct FitResult {
    MemoryImage image;
    // Resampling factor applied per dimension before snapping (1.0 = unchanged).
    double scale_factor = 1.0;
};

// Shrinks `image` until it costs at most `budget` visual tokens. Dimensions of
// at least one patch are snapped down to multiples of 28.
FitResult fit_to_budget(const MemoryImage& image, std::int64_t budget);

// Area-average resample to an explicit size (both >= 1).
MemoryImage resample_area(const MemoryImage& image, int out_width, int out_height);

// Divides both dimensions by `factor_per_dim` (floor, min 1) with area averaging.
MemoryImage downsample(const MemoryImage& image, double factor_per_dim);

struct LegibilityModel {
    // Effective glyph height in pixels a box must keep to stay readable.
    double min_glyph_height = 5.0;
};

bool is_legible(const LayoutBox& box, double scale_factor, const LegibilityModel& model);
std::vector<LayoutBox> legible_boxes(const PageLayout& layout, double scale_factor, const LegibilityModel& model);

}  // namespace memocr
