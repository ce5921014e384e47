#pragma once

#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "winstitch/image.hpp"
#include "winstitch/tiling.hpp"
#include "winstitch/window.hpp"

namespace winstitch {

enum class Normalization { Auto, On, Off };

// Streams window-weighted predictions into a padded double-precision canvas.
// The canvas (plus the weight map when normalising) is the only full-size
// allocation; patches can be added and released one at a time. With Auto the
// weight map is allocated only for the Pyramidal window, the one kind whose
// overlapped sum is not 1.
class BlendAccumulator {
public:
    BlendAccumulator(const PatchGrid& grid, WindowKind kind,
                     Normalization normalization = Normalization::Auto);

    // Predictions for the Pyramidal kind are weighted with the Interior
    // window regardless of ref position; the normalisation pass handles the
    // margins.
    void add(const PatchRef& ref, const ImageTensor& prediction);

    // Validates that every overlapping ref was added exactly once, divides
    // by the weight map when normalising, and crops to the original size.
    ImageTensor finish();

    bool normalizing() const { return normalize_; }
    long added() const { return added_; }

private:
    PatchGrid grid_;
    WindowKind kind_;
    bool normalize_;
    ImageTensor canvas_;
    std::vector<double> weight_map_;
    std::vector<char> seen_;
    long added_ = 0;
    bool finished_ = false;
};

// Convenience wrappers over the accumulator for fully materialised patch
// sequences; every overlapping (resp. non-overlapping) ref must appear
// exactly once.
ImageTensor blend(const std::vector<std::pair<PatchRef, ImageTensor>>& patches,
                  const PatchGrid& grid, WindowKind kind);

ImageTensor blend_baseline(const std::vector<std::pair<PatchRef, ImageTensor>>& patches,
                           const PatchGrid& grid);

using PatchPredictFn = std::function<ImageTensor(const PatchRef&, const ImageTensor&)>;
using StageConsumer = std::function<void(std::string_view, const ImageTensor&)>;

// Extract, predict and blend in canonical row-major ref order.
ImageTensor blend_with(const ImageTensor& input, const PatchGrid& grid, WindowKind kind,
                       const PatchPredictFn& predict);

ImageTensor blend_baseline_with(const ImageTensor& input, const PatchGrid& grid,
                                const PatchPredictFn& predict);

// Two-pass reconstruction: emits ("preview", baseline) after the n*m
// non-overlapping predictions, reuses those predictions for the even-offset
// patches of the windowed pass, then emits ("final", result) and returns it.
// Predictor failures are rethrown with the offending ref identified.
ImageTensor blend_progressive(const ImageTensor& input, const PatchGrid& grid, WindowKind kind,
                              const PatchPredictFn& predict, const StageConsumer& emit);

} // namespace winstitch
