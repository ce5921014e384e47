#include "winstitch/window.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace winstitch {

namespace {

constexpr double kBartlettHannA0 = 0.62;
constexpr double kBartlettHannA1 = 0.48;
constexpr double kBartlettHannA2 = 0.38;

void require_even(int height, int width) {
    if (height < 2 || width < 2 || height % 2 != 0 || width % 2 != 0)
        throw std::invalid_argument("window dimensions must be even and >= 2");
}

double sample(WindowKind kind, int i, int length) {
    const double x = static_cast<double>(i) / length;
    switch (kind) {
    case WindowKind::Average:
        return 0.5;
    case WindowKind::Hann:
        return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * x));
    case WindowKind::BartlettHann:
        return kBartlettHannA0 - kBartlettHannA1 * std::abs(x - 0.5) -
               kBartlettHannA2 * std::cos(2.0 * std::numbers::pi * x);
    case WindowKind::Triangular:
        return 1.0 - std::abs(2.0 * x - 1.0);
    case WindowKind::Pyramidal:
        break;
    }
    throw std::invalid_argument("window kind has no 1-D form");
}

enum class Band { Mid, Low, High };

// Border plateaus replace the tapered half that faces the image border.
// The low side is half-open ([0, half) maps to 1) and the high side closed
// ([half, n) maps to 1): under half-open patch coverage this is the unique
// assignment that keeps the canvas-wide window sum at exactly 1 for every
// kind, Average included, where w(half) != 1.
double band_factor(Band band, const std::vector<double>& w, int i) {
    const int half = static_cast<int>(w.size()) / 2;
    switch (band) {
    case Band::Mid:
        return w[i];
    case Band::Low:
        return i < half ? 1.0 : w[i];
    case Band::High:
        return i >= half ? 1.0 : w[i];
    }
    return w[i];
}

struct BandPair {
    Band row;
    Band col;
};

BandPair bands_for(PositionClass position) {
    switch (position) {
    case PositionClass::Interior:  return {Band::Mid, Band::Mid};
    case PositionClass::Up:        return {Band::Low, Band::Mid};
    case PositionClass::Down:      return {Band::High, Band::Mid};
    case PositionClass::Left:      return {Band::Mid, Band::Low};
    case PositionClass::Right:     return {Band::Mid, Band::High};
    case PositionClass::UpLeft:    return {Band::Low, Band::Low};
    case PositionClass::UpRight:   return {Band::Low, Band::High};
    case PositionClass::DownLeft:  return {Band::High, Band::Low};
    case PositionClass::DownRight: return {Band::High, Band::High};
    }
    throw std::invalid_argument("unknown position class");
}

} // namespace

Window1D make_window_1d(WindowKind kind, int length) {
    if (kind == WindowKind::Pyramidal)
        throw std::invalid_argument("Pyramidal window has no separable 1-D factor");
    if (length < 2 || length % 2 != 0)
        throw std::invalid_argument("window length must be even and >= 2");
    Window1D w;
    w.kind = kind;
    w.samples.resize(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) w.samples[i] = sample(kind, i, length);
    return w;
}

Window2D make_window_2d(WindowKind kind, int height, int width, PositionClass position) {
    require_even(height, width);
    if (kind == WindowKind::Pyramidal) {
        if (position != PositionClass::Interior)
            throw std::invalid_argument(
                "Pyramidal window supports the Interior position only");
        return make_pyramidal(height, width);
    }
    const auto row_window = make_window_1d(kind, height).samples;
    const auto col_window = make_window_1d(kind, width).samples;
    const auto bands = bands_for(position);

    Window2D w;
    w.kind = kind;
    w.position = position;
    w.height = height;
    w.width = width;
    w.weights.resize(static_cast<std::size_t>(height) * width);
    std::size_t k = 0;
    for (int j = 0; j < height; ++j) {
        const double row_factor = band_factor(bands.row, row_window, j);
        for (int i = 0; i < width; ++i)
            w.weights[k++] = row_factor * band_factor(bands.col, col_window, i);
    }
    return w;
}

Window2D make_pyramidal(int height, int width) {
    require_even(height, width);
    Window2D w;
    w.kind = WindowKind::Pyramidal;
    w.position = PositionClass::Interior;
    w.height = height;
    w.width = width;
    w.weights.resize(static_cast<std::size_t>(height) * width);

    const double center_y = (height - 1) / 2.0;
    const double center_x = (width - 1) / 2.0;
    double sum = 0.0;
    std::size_t k = 0;
    for (int j = 0; j < height; ++j) {
        for (int i = 0; i < width; ++i) {
            // Chebyshev distance from the pixel centre to the patch boundary;
            // the half pixel keeps the outermost ring strictly positive so
            // the blender's weight normalisation is defined everywhere.
            const double edge_distance =
                std::min(std::min(i, j), std::min(width - 1 - i, height - 1 - j)) + 0.5;
            const double center_distance = std::hypot(j - center_y, i - center_x);
            const double ratio = edge_distance / (edge_distance + center_distance);
            w.weights[k++] = ratio;
            sum += ratio;
        }
    }
    const double alpha = static_cast<double>(height) * static_cast<double>(width) / sum;
    for (double& v : w.weights) v *= alpha;
    return w;
}

const Window2D& shared_window(WindowKind kind, int height, int width, PositionClass position) {
    using Key = std::tuple<int, int, int, int>;
    static std::mutex mutex;
    static std::map<Key, std::unique_ptr<Window2D>> cache;

    const Key key{static_cast<int>(kind), height, width, static_cast<int>(position)};
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto window = std::make_unique<Window2D>(make_window_2d(kind, height, width, position));
        it = cache.emplace(key, std::move(window)).first;
    }
    return *it->second;
}

PositionClass classify_position(int row, int col, int grid_rows, int grid_cols) {
    if (grid_rows < 3 || grid_cols < 3)
        throw std::invalid_argument("overlapping grid must be at least 3x3");
    if (row < 0 || row >= grid_rows || col < 0 || col >= grid_cols)
        throw std::invalid_argument("patch index outside grid");
    const bool top = row == 0;
    const bool bottom = row == grid_rows - 1;
    const bool left = col == 0;
    const bool right = col == grid_cols - 1;
    if (top && left) return PositionClass::UpLeft;
    if (top && right) return PositionClass::UpRight;
    if (bottom && left) return PositionClass::DownLeft;
    if (bottom && right) return PositionClass::DownRight;
    if (top) return PositionClass::Up;
    if (bottom) return PositionClass::Down;
    if (left) return PositionClass::Left;
    if (right) return PositionClass::Right;
    return PositionClass::Interior;
}

std::vector<double> accumulate_weight_map(WindowKind kind, int patch_height, int patch_width,
                                          int grid_rows, int grid_cols) {
    require_even(patch_height, patch_width);
    if (grid_rows < 2 || grid_cols < 2)
        throw std::invalid_argument("base grid must be at least 2x2");

    const int canvas_height = grid_rows * patch_height;
    const int canvas_width = grid_cols * patch_width;
    const int rows = 2 * grid_rows - 1;
    const int cols = 2 * grid_cols - 1;

    std::vector<double> canvas(static_cast<std::size_t>(canvas_height) * canvas_width, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const PositionClass position = kind == WindowKind::Pyramidal
                                               ? PositionClass::Interior
                                               : classify_position(r, c, rows, cols);
            const Window2D& w = shared_window(kind, patch_height, patch_width, position);
            const int y0 = r * patch_height / 2;
            const int x0 = c * patch_width / 2;
            for (int j = 0; j < patch_height; ++j) {
                double* row_out =
                    canvas.data() + static_cast<std::size_t>(y0 + j) * canvas_width + x0;
                const double* row_w =
                    w.weights.data() + static_cast<std::size_t>(j) * patch_width;
                for (int i = 0; i < patch_width; ++i) row_out[i] += row_w[i];
            }
        }
    }
    return canvas;
}

double cola_check(WindowKind kind, int patch_height, int patch_width, int grid_rows,
                  int grid_cols) {
    auto map = accumulate_weight_map(kind, patch_height, patch_width, grid_rows, grid_cols);
    if (kind == WindowKind::Pyramidal) {
        for (double& v : map) v = v / v;
    }
    double deviation = 0.0;
    for (double v : map) deviation = std::max(deviation, std::abs(v - 1.0));
    return deviation;
}

bool is_cola(WindowKind kind) { return kind != WindowKind::Pyramidal; }

std::string to_string(WindowKind kind) {
    switch (kind) {
    case WindowKind::Average: return "average";
    case WindowKind::Hann: return "hann";
    case WindowKind::BartlettHann: return "bartlett-hann";
    case WindowKind::Triangular: return "triangular";
    case WindowKind::Pyramidal: return "pyramidal";
    }
    return "?";
}

std::string to_string(PositionClass position) {
    switch (position) {
    case PositionClass::Interior: return "interior";
    case PositionClass::Up: return "up";
    case PositionClass::Down: return "down";
    case PositionClass::Left: return "left";
    case PositionClass::Right: return "right";
    case PositionClass::UpLeft: return "upleft";
    case PositionClass::UpRight: return "upright";
    case PositionClass::DownLeft: return "downleft";
    case PositionClass::DownRight: return "downright";
    }
    return "?";
}

WindowKind parse_window_kind(const std::string& name) {
    if (name == "average") return WindowKind::Average;
    if (name == "hann") return WindowKind::Hann;
    if (name == "bartlett-hann" || name == "bartletthann") return WindowKind::BartlettHann;
    if (name == "triangular") return WindowKind::Triangular;
    if (name == "pyramidal") return WindowKind::Pyramidal;
    throw std::invalid_argument("unknown window kind: " + name);
}

PositionClass parse_position_class(const std::string& name) {
    if (name == "interior") return PositionClass::Interior;
    if (name == "up") return PositionClass::Up;
    if (name == "down") return PositionClass::Down;
    if (name == "left") return PositionClass::Left;
    if (name == "right") return PositionClass::Right;
    if (name == "upleft" || name == "up-left") return PositionClass::UpLeft;
    if (name == "upright" || name == "up-right") return PositionClass::UpRight;
    if (name == "downleft" || name == "down-left") return PositionClass::DownLeft;
    if (name == "downright" || name == "down-right") return PositionClass::DownRight;
    throw std::invalid_argument("unknown position class: " + name);
}

} // namespace winstitch
