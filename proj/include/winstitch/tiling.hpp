#pragma once

#include <vector>

#include "winstitch/image.hpp"
#include "winstitch/window.hpp"

namespace winstitch {

enum class PaddingPolicy { Reflect, Reject };
enum class PatchMode { Overlapping, NonOverlapping };

// Tiling geometry of a full image at half-patch stride. The padded canvas is
// base_rows x base_cols whole patches; blended output is cropped back to the
// original size.
struct PatchGrid {
    int image_height = 0; // original, before padding
    int image_width = 0;
    int patch_height = 0;
    int patch_width = 0;
    int stride_y = 0; // patch_height / 2
    int stride_x = 0;
    int base_rows = 0; // n: non-overlapping patches per column
    int base_cols = 0; // m
    int pad_bottom = 0;
    int pad_right = 0;

    int padded_height() const { return base_rows * patch_height; }
    int padded_width() const { return base_cols * patch_width; }
    int overlap_rows() const { return 2 * base_rows - 1; }
    int overlap_cols() const { return 2 * base_cols - 1; }
    long overlapping_count() const {
        return static_cast<long>(overlap_rows()) * overlap_cols();
    }
    long baseline_count() const { return static_cast<long>(base_rows) * base_cols; }
};

struct PatchRef {
    int row = 0;
    int col = 0;
    int offset_y = 0;
    int offset_x = 0;
    PositionClass position = PositionClass::Interior;
};

// Requires an even patch size and an image at least one patch large. Reject
// demands exact multiples with at least a 2x2 base grid; Reflect pads up to
// the next admissible size and records the padding.
PatchGrid plan_grid(int image_height, int image_width, int patch_height, int patch_width,
                    PaddingPolicy policy);

// Row-major. Overlapping refs carry their position class; NonOverlapping
// refs step a whole patch at a time and are all Interior (the baseline mode
// applies no windowing).
std::vector<PatchRef> enumerate_patches(const PatchGrid& grid, PatchMode mode);

// Copies the patch at the ref's offset. Reads beyond the original image are
// mirror reflections without edge repeat: padded row H+p reads row H-2-p.
ImageTensor extract_patch(const ImageTensor& image, const PatchRef& ref, const PatchGrid& grid);

} // namespace winstitch
