#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace winstitch {

// Planar pixel container: C channel blocks of H*W doubles, row-major within
// each channel. Accumulation throughout the library is done in double and
// rounded once at the file-format boundary.
class ImageTensor {
public:
    ImageTensor() = default;

    ImageTensor(int channels, int height, int width, double fill = 0.0)
        : channels_(channels), height_(height), width_(width),
          data_(checked_size(channels, height, width), fill) {}

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
    double at(int c, int y, int x) const { return data_[index(c, y, x)]; }

    double* channel(int c) {
        return data_.data() + static_cast<std::size_t>(c) * height_ * width_;
    }
    const double* channel(int c) const {
        return data_.data() + static_cast<std::size_t>(c) * height_ * width_;
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const ImageTensor& other) const {
        return channels_ == other.channels_ && height_ == other.height_ &&
               width_ == other.width_;
    }

private:
    static std::size_t checked_size(int channels, int height, int width) {
        if (channels <= 0 || height <= 0 || width <= 0)
            throw std::invalid_argument("ImageTensor: dimensions must be positive");
        return static_cast<std::size_t>(channels) * height * width;
    }

    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

inline bool all_finite(const ImageTensor& image) {
    for (double v : image.data())
        if (!std::isfinite(v)) return false;
    return true;
}

inline ImageTensor crop(const ImageTensor& image, int height, int width) {
    if (height > image.height() || width > image.width())
        throw std::invalid_argument("crop: target larger than source");
    if (height == image.height() && width == image.width()) return image;
    ImageTensor out(image.channels(), height, width);
    for (int c = 0; c < image.channels(); ++c)
        for (int y = 0; y < height; ++y) {
            const double* src = image.channel(c) + static_cast<std::size_t>(y) * image.width();
            double* dst = out.channel(c) + static_cast<std::size_t>(y) * width;
            for (int x = 0; x < width; ++x) dst[x] = src[x];
        }
    return out;
}

} // namespace winstitch
