#include "winstitch/synthetic.hpp"

#include <cmath>
#include <stdexcept>

namespace winstitch {

namespace {

// Rank-1 accumulation of an axis-aligned Gaussian blob: amplitude * col ⊗ row.
void add_blob(double* plane, int height, int width, double center_y, double center_x,
              double sigma, double amplitude) {
    std::vector<double> row(static_cast<std::size_t>(width));
    std::vector<double> col(static_cast<std::size_t>(height));
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int x = 0; x < width; ++x) {
        const double d = x - center_x;
        row[x] = std::exp(-d * d * inv);
    }
    for (int y = 0; y < height; ++y) {
        const double d = y - center_y;
        col[y] = amplitude * std::exp(-d * d * inv);
    }
    for (int y = 0; y < height; ++y) {
        double* out = plane + static_cast<std::size_t>(y) * width;
        const double cy = col[y];
        for (int x = 0; x < width; ++x) out[x] += cy * row[x];
    }
}

} // namespace

ImageTensor make_class_map(int height, int width, int classes, std::mt19937_64& rng) {
    if (classes < 1) throw std::invalid_argument("class map: need at least one class");
    if (height < 4 || width < 4) throw std::invalid_argument("class map: image too small");

    // One potential field per class; for a single class a second hidden
    // field stands in for "background" so the argmax still yields a mask.
    const int fields_count = classes == 1 ? 2 : classes;
    ImageTensor fields(fields_count, height, width);
    std::uniform_int_distribution<int> blob_count(6, 12);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double min_dim = static_cast<double>(std::min(height, width));
    for (int c = 0; c < fields_count; ++c) {
        const int blobs = blob_count(rng);
        for (int b = 0; b < blobs; ++b) {
            const double cy = u01(rng) * height;
            const double cx = u01(rng) * width;
            const double sigma = min_dim / 16.0 + u01(rng) * (min_dim / 4.0 - min_dim / 16.0);
            const double amplitude = 0.5 + u01(rng);
            add_blob(fields.channel(c), height, width, cy, cx, sigma, amplitude);
        }
    }

    ImageTensor out(classes, height, width, 0.0);
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    for (std::size_t k = 0; k < plane; ++k) {
        int best = 0;
        double best_value = fields.channel(0)[k];
        for (int c = 1; c < fields_count; ++c) {
            const double v = fields.channel(c)[k];
            if (v > best_value) {
                best_value = v;
                best = c;
            }
        }
        if (best < classes) out.channel(best)[k] = 1.0;
    }
    return out;
}

std::vector<ImageTensor> make_class_maps(int count, int height, int width, int classes,
                                         std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("class maps: need at least one image");
    std::mt19937_64 rng(seed);
    std::vector<ImageTensor> maps;
    maps.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) maps.push_back(make_class_map(height, width, classes, rng));
    return maps;
}

} // namespace winstitch
