#include "winstitch/tiling.hpp"

#include <stdexcept>
#include <string>

namespace winstitch {

namespace {

int fit_base_count(int extent, int patch, PaddingPolicy policy, const char* axis) {
    if (policy == PaddingPolicy::Reject) {
        if (extent % patch != 0)
            throw std::invalid_argument(std::string("Reject padding: image ") + axis +
                                        " is not a multiple of the patch size");
        const int count = extent / patch;
        if (count < 2)
            throw std::invalid_argument(std::string("Reject padding: image ") + axis +
                                        " must span at least two patches");
        return count;
    }
    const int count = (extent + patch - 1) / patch;
    return count < 2 ? 2 : count;
}

// Mirror an index into [0, n) without repeating the border sample.
int reflect_index(int v, int n) {
    while (v < 0 || v >= n) {
        if (v < 0) v = -v;
        else v = 2 * n - 2 - v;
    }
    return v;
}

} // namespace

PatchGrid plan_grid(int image_height, int image_width, int patch_height, int patch_width,
                    PaddingPolicy policy) {
    if (patch_height < 2 || patch_width < 2 || patch_height % 2 != 0 || patch_width % 2 != 0)
        throw std::invalid_argument("patch size must be even and >= 2");
    if (image_height < patch_height || image_width < patch_width)
        throw std::invalid_argument("image is smaller than one patch");

    PatchGrid grid;
    grid.image_height = image_height;
    grid.image_width = image_width;
    grid.patch_height = patch_height;
    grid.patch_width = patch_width;
    grid.stride_y = patch_height / 2;
    grid.stride_x = patch_width / 2;
    grid.base_rows = fit_base_count(image_height, patch_height, policy, "height");
    grid.base_cols = fit_base_count(image_width, patch_width, policy, "width");
    grid.pad_bottom = grid.base_rows * patch_height - image_height;
    grid.pad_right = grid.base_cols * patch_width - image_width;
    return grid;
}

std::vector<PatchRef> enumerate_patches(const PatchGrid& grid, PatchMode mode) {
    std::vector<PatchRef> refs;
    if (mode == PatchMode::Overlapping) {
        const int rows = grid.overlap_rows();
        const int cols = grid.overlap_cols();
        refs.reserve(static_cast<std::size_t>(rows) * cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                refs.push_back({r, c, r * grid.stride_y, c * grid.stride_x,
                                classify_position(r, c, rows, cols)});
    } else {
        refs.reserve(static_cast<std::size_t>(grid.base_rows) * grid.base_cols);
        for (int r = 0; r < grid.base_rows; ++r)
            for (int c = 0; c < grid.base_cols; ++c)
                refs.push_back({r, c, r * grid.patch_height, c * grid.patch_width,
                                PositionClass::Interior});
    }
    return refs;
}

ImageTensor extract_patch(const ImageTensor& image, const PatchRef& ref, const PatchGrid& grid) {
    if (image.height() != grid.image_height || image.width() != grid.image_width)
        throw std::invalid_argument("extract_patch: image does not match grid");
    if (ref.offset_y < 0 || ref.offset_x < 0 ||
        ref.offset_y + grid.patch_height > grid.padded_height() ||
        ref.offset_x + grid.patch_width > grid.padded_width())
        throw std::invalid_argument("extract_patch: ref outside grid");

    const int patch_height = grid.patch_height;
    const int patch_width = grid.patch_width;
    std::vector<int> ys(patch_height), xs(patch_width);
    for (int j = 0; j < patch_height; ++j)
        ys[j] = reflect_index(ref.offset_y + j, image.height());
    for (int i = 0; i < patch_width; ++i)
        xs[i] = reflect_index(ref.offset_x + i, image.width());

    ImageTensor patch(image.channels(), patch_height, patch_width);
    for (int c = 0; c < image.channels(); ++c) {
        const double* src = image.channel(c);
        double* dst = patch.channel(c);
        for (int j = 0; j < patch_height; ++j) {
            const double* src_row = src + static_cast<std::size_t>(ys[j]) * image.width();
            for (int i = 0; i < patch_width; ++i)
                dst[static_cast<std::size_t>(j) * patch_width + i] = src_row[xs[i]];
        }
    }
    return patch;
}

} // namespace winstitch
