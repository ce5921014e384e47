#pragma once

#include <string>
#include <vector>

namespace winstitch {

enum class WindowKind { Average, Hann, BartlettHann, Triangular, Pyramidal };

// Which of the nine window variants applies to a patch, given where the
// patch sits in the full image.
enum class PositionClass {
    Interior,
    Up,
    Down,
    Left,
    Right,
    UpLeft,
    UpRight,
    DownLeft,
    DownRight,
};

struct Window1D {
    WindowKind kind = WindowKind::Hann;
    std::vector<double> samples;

    int length() const { return static_cast<int>(samples.size()); }
};

struct Window2D {
    WindowKind kind = WindowKind::Hann;
    PositionClass position = PositionClass::Interior;
    int height = 0;
    int width = 0;
    std::vector<double> weights; // row-major

    double at(int j, int i) const {
        return weights[static_cast<std::size_t>(j) * width + i];
    }
};

// Periodic-convention window (denominator = length): shifted copies at hop
// length/2 sum to exactly 1, which is what makes windowed blending an exact
// average. Length must be even and >= 2; Pyramidal has no 1-D factor.
Window1D make_window_1d(WindowKind kind, int length);

// Interior windows are the separable product w(j)w(i); edge and corner
// variants replace the tapered half facing the image border with a plateau
// of ones. Pyramidal supports Interior only.
Window2D make_window_2d(WindowKind kind, int height, int width, PositionClass position);

// Distance-ratio window: weight proportional to De/(De+Dc), scaled so the
// mean weight is 1. Non-separable and not a partition of unity; blending
// with it requires the weight-map normalisation pass.
Window2D make_pyramidal(int height, int width);

// Memoized construction; returned windows are immutable and safe to share
// across threads.
const Window2D& shared_window(WindowKind kind, int height, int width, PositionClass position);

// Position class of the patch at (row, col) in an overlapping grid with the
// given extents (2n-1 by 2m-1, each >= 3).
PositionClass classify_position(int row, int col, int grid_rows, int grid_cols);

// Sum of all (2n-1)(2m-1) position-appropriate windows at half-patch stride
// over an (n*patch_height) x (m*patch_cols) canvas, row-major. Pyramidal
// uses the Interior window everywhere.
std::vector<double> accumulate_weight_map(WindowKind kind, int patch_height, int patch_width,
                                          int grid_rows, int grid_cols);

// Maximum |sum - 1| over the canvas. The Pyramidal map is divided by itself
// first, mirroring the normalisation the blender applies.
double cola_check(WindowKind kind, int patch_height, int patch_width, int grid_rows,
                  int grid_cols);

// True for kinds whose windows already sum to 1 at half-patch stride.
bool is_cola(WindowKind kind);

std::string to_string(WindowKind kind);
std::string to_string(PositionClass position);
WindowKind parse_window_kind(const std::string& name);
PositionClass parse_position_class(const std::string& name);

} // namespace winstitch
