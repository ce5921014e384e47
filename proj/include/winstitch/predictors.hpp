#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "winstitch/image.hpp"

namespace winstitch {

// Declarative per-patch transform. The built-in kinds stand in for a real
// segmentation model; External bridges to one over a byte protocol.
struct PredictorSpec {
    enum class Kind { Identity, GaussianBlur, BorderNoise, External };

    Kind kind = Kind::Identity;
    double sigma = 1.0;        // GaussianBlur
    double amplitude = 0.0;    // BorderNoise
    double falloff = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::string> command; // External

    static PredictorSpec identity();
    static PredictorSpec gaussian_blur(double sigma);
    static PredictorSpec border_noise(double amplitude, double falloff, std::uint64_t seed);
    static PredictorSpec external(std::vector<std::string> command);

    // identity | blur:sigma=S | bordernoise:amp=A,falloff=F,seed=K | external:CMD...
    static PredictorSpec parse(const std::string& text);
};

// External-protocol failure; patch_index is the 0-based index of the blob
// that could not be produced, or -1 when no specific blob is implicated.
class PredictorError : public std::runtime_error {
public:
    explicit PredictorError(const std::string& message, long patch_index = -1)
        : std::runtime_error(message), patch_index_(patch_index) {}
    long patch_index() const { return patch_index_; }

private:
    long patch_index_;
};

// Noise envelope of the border-artifact model: largest on the patch border,
// decaying exponentially with the Chebyshev distance from it.
double border_noise_envelope(int j, int i, int height, int width, double amplitude,
                             double falloff);

// Standard normal from a counter-based generator: a pure function of its key,
// so repeated and out-of-order evaluation is reproducible.
double border_noise_normal(std::uint64_t seed, int offset_y, int offset_x, int channel, int j,
                           int i);

// Built-in predictors are pure in (spec, patch, patch offset). External
// spawns a child process for the single patch.
ImageTensor predict(const PredictorSpec& spec, const ImageTensor& patch, int offset_y = 0,
                    int offset_x = 0);

// Streams `count` request blobs (canonical PFM) to the child's stdin in
// order, closing it afterwards, while reading the same number of response
// blobs from its stdout. Each response must match its request's dimensions
// and channel count. source(k) may be invoked on an internal writer thread.
void predict_stream(const std::vector<std::string>& command, long count,
                    const std::function<ImageTensor(long)>& source,
                    const std::function<void(long, ImageTensor)>& sink);

} // namespace winstitch
