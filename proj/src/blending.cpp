#include "winstitch/blending.hpp"

#include <stdexcept>
#include <string>

#include "winstitch/predictors.hpp"

namespace winstitch {

namespace {

std::string ref_label(const PatchRef& ref) {
    return "(" + std::to_string(ref.row) + "," + std::to_string(ref.col) + ")";
}

// Unweighted placement for the non-overlapping baseline.
class BaselinePlacer {
public:
    explicit BaselinePlacer(const PatchGrid& grid)
        : grid_(grid), seen_(static_cast<std::size_t>(grid.baseline_count()), 0) {}

    void add(const PatchRef& ref, const ImageTensor& prediction) {
        if (ref.row < 0 || ref.row >= grid_.base_rows || ref.col < 0 ||
            ref.col >= grid_.base_cols || ref.offset_y != ref.row * grid_.patch_height ||
            ref.offset_x != ref.col * grid_.patch_width)
            throw std::invalid_argument("baseline blend: ref " + ref_label(ref) +
                                        " does not belong to the grid");
        if (prediction.height() != grid_.patch_height ||
            prediction.width() != grid_.patch_width)
            throw std::invalid_argument("baseline blend: prediction size mismatch at " +
                                        ref_label(ref));
        if (!all_finite(prediction))
            throw std::invalid_argument("baseline blend: non-finite prediction at " +
                                        ref_label(ref));
        if (canvas_.empty())
            canvas_ = ImageTensor(prediction.channels(), grid_.padded_height(),
                                  grid_.padded_width());
        else if (prediction.channels() != canvas_.channels())
            throw std::invalid_argument("baseline blend: channel mismatch at " +
                                        ref_label(ref));
        auto& slot = seen_[static_cast<std::size_t>(ref.row) * grid_.base_cols + ref.col];
        if (slot)
            throw std::invalid_argument("baseline blend: duplicate ref " + ref_label(ref));
        slot = 1;
        ++added_;
        for (int c = 0; c < canvas_.channels(); ++c)
            for (int j = 0; j < grid_.patch_height; ++j) {
                double* out = canvas_.channel(c) +
                              static_cast<std::size_t>(ref.offset_y + j) * grid_.padded_width() +
                              ref.offset_x;
                const double* in =
                    prediction.channel(c) + static_cast<std::size_t>(j) * grid_.patch_width;
                for (int i = 0; i < grid_.patch_width; ++i) out[i] = in[i];
            }
    }

    ImageTensor finish() {
        if (added_ != grid_.baseline_count())
            throw std::invalid_argument("baseline blend: " +
                                        std::to_string(grid_.baseline_count() - added_) +
                                        " refs missing");
        return crop(canvas_, grid_.image_height, grid_.image_width);
    }

private:
    PatchGrid grid_;
    ImageTensor canvas_;
    std::vector<char> seen_;
    long added_ = 0;
};

ImageTensor rethrow_with_ref(const PatchRef& ref, const PatchPredictFn& predict,
                             const ImageTensor& patch) {
    try {
        return predict(ref, patch);
    } catch (const PredictorError& e) {
        throw PredictorError("prediction failed at patch " + ref_label(ref) + ": " + e.what(),
                             e.patch_index());
    } catch (const std::exception& e) {
        throw std::runtime_error("prediction failed at patch " + ref_label(ref) + ": " +
                                 e.what());
    }
}

} // namespace

BlendAccumulator::BlendAccumulator(const PatchGrid& grid, WindowKind kind,
                                   Normalization normalization)
    : grid_(grid), kind_(kind),
      normalize_(normalization == Normalization::Auto ? !is_cola(kind)
                                                      : normalization == Normalization::On),
      seen_(static_cast<std::size_t>(grid.overlapping_count()), 0) {
    if (normalize_)
        weight_map_.assign(
            static_cast<std::size_t>(grid_.padded_height()) * grid_.padded_width(), 0.0);
}

void BlendAccumulator::add(const PatchRef& ref, const ImageTensor& prediction) {
    if (finished_) throw std::logic_error("blend: add after finish");
    const int rows = grid_.overlap_rows();
    const int cols = grid_.overlap_cols();
    if (ref.row < 0 || ref.row >= rows || ref.col < 0 || ref.col >= cols ||
        ref.offset_y != ref.row * grid_.stride_y || ref.offset_x != ref.col * grid_.stride_x ||
        ref.position != classify_position(ref.row, ref.col, rows, cols))
        throw std::invalid_argument("blend: ref " + ref_label(ref) +
                                    " does not belong to the grid");
    if (prediction.height() != grid_.patch_height || prediction.width() != grid_.patch_width)
        throw std::invalid_argument("blend: prediction size mismatch at " + ref_label(ref));
    if (!all_finite(prediction))
        throw std::invalid_argument("blend: non-finite prediction at " + ref_label(ref));
    if (canvas_.empty())
        canvas_ = ImageTensor(prediction.channels(), grid_.padded_height(), grid_.padded_width());
    else if (prediction.channels() != canvas_.channels())
        throw std::invalid_argument("blend: channel mismatch at " + ref_label(ref));

    auto& slot = seen_[static_cast<std::size_t>(ref.row) * cols + ref.col];
    if (slot) throw std::invalid_argument("blend: duplicate ref " + ref_label(ref));
    slot = 1;
    ++added_;

    const PositionClass position =
        kind_ == WindowKind::Pyramidal ? PositionClass::Interior : ref.position;
    const Window2D& window =
        shared_window(kind_, grid_.patch_height, grid_.patch_width, position);

    const int patch_width = grid_.patch_width;
    const int canvas_width = grid_.padded_width();
    for (int c = 0; c < canvas_.channels(); ++c) {
        for (int j = 0; j < grid_.patch_height; ++j) {
            double* out = canvas_.channel(c) +
                          static_cast<std::size_t>(ref.offset_y + j) * canvas_width +
                          ref.offset_x;
            const double* in =
                prediction.channel(c) + static_cast<std::size_t>(j) * patch_width;
            const double* w = window.weights.data() + static_cast<std::size_t>(j) * patch_width;
            for (int i = 0; i < patch_width; ++i) out[i] += w[i] * in[i];
        }
    }
    if (normalize_) {
        for (int j = 0; j < grid_.patch_height; ++j) {
            double* out = weight_map_.data() +
                          static_cast<std::size_t>(ref.offset_y + j) * canvas_width +
                          ref.offset_x;
            const double* w = window.weights.data() + static_cast<std::size_t>(j) * patch_width;
            for (int i = 0; i < patch_width; ++i) out[i] += w[i];
        }
    }
}

ImageTensor BlendAccumulator::finish() {
    if (finished_) throw std::logic_error("blend: finish called twice");
    finished_ = true;
    if (added_ != grid_.overlapping_count())
        throw std::invalid_argument("blend: " +
                                    std::to_string(grid_.overlapping_count() - added_) +
                                    " refs missing");
    if (normalize_) {
        for (double w : weight_map_)
            if (!(w > 0.0))
                throw std::runtime_error("blend: weight map has a non-positive entry");
        const std::size_t plane = weight_map_.size();
        for (int c = 0; c < canvas_.channels(); ++c) {
            double* out = canvas_.channel(c);
            for (std::size_t k = 0; k < plane; ++k) out[k] /= weight_map_[k];
        }
    }
    return crop(canvas_, grid_.image_height, grid_.image_width);
}

ImageTensor blend(const std::vector<std::pair<PatchRef, ImageTensor>>& patches,
                  const PatchGrid& grid, WindowKind kind) {
    BlendAccumulator acc(grid, kind);
    for (const auto& [ref, prediction] : patches) acc.add(ref, prediction);
    return acc.finish();
}

ImageTensor blend_baseline(const std::vector<std::pair<PatchRef, ImageTensor>>& patches,
                           const PatchGrid& grid) {
    BaselinePlacer placer(grid);
    for (const auto& [ref, prediction] : patches) placer.add(ref, prediction);
    return placer.finish();
}

ImageTensor blend_with(const ImageTensor& input, const PatchGrid& grid, WindowKind kind,
                       const PatchPredictFn& predict) {
    BlendAccumulator acc(grid, kind);
    for (const PatchRef& ref : enumerate_patches(grid, PatchMode::Overlapping))
        acc.add(ref, rethrow_with_ref(ref, predict, extract_patch(input, ref, grid)));
    return acc.finish();
}

ImageTensor blend_baseline_with(const ImageTensor& input, const PatchGrid& grid,
                                const PatchPredictFn& predict) {
    BaselinePlacer placer(grid);
    for (const PatchRef& ref : enumerate_patches(grid, PatchMode::NonOverlapping))
        placer.add(ref, rethrow_with_ref(ref, predict, extract_patch(input, ref, grid)));
    return placer.finish();
}

ImageTensor blend_progressive(const ImageTensor& input, const PatchGrid& grid, WindowKind kind,
                              const PatchPredictFn& predict, const StageConsumer& emit) {
    BlendAccumulator acc(grid, kind);
    BaselinePlacer placer(grid);

    // Preview pass: the non-overlapping refs coincide with the even-indexed
    // overlapping refs, so each prediction feeds both reconstructions.
    const int rows = grid.overlap_rows();
    const int cols = grid.overlap_cols();
    for (const PatchRef& base_ref : enumerate_patches(grid, PatchMode::NonOverlapping)) {
        ImageTensor prediction =
            rethrow_with_ref(base_ref, predict, extract_patch(input, base_ref, grid));
        placer.add(base_ref, prediction);
        const PatchRef overlap_ref{2 * base_ref.row, 2 * base_ref.col, base_ref.offset_y,
                                   base_ref.offset_x,
                                   classify_position(2 * base_ref.row, 2 * base_ref.col, rows,
                                                     cols)};
        acc.add(overlap_ref, prediction);
    }
    if (emit) emit("preview", placer.finish());

    for (const PatchRef& ref : enumerate_patches(grid, PatchMode::Overlapping)) {
        if (ref.row % 2 == 0 && ref.col % 2 == 0) continue;
        acc.add(ref, rethrow_with_ref(ref, predict, extract_patch(input, ref, grid)));
    }
    ImageTensor result = acc.finish();
    if (emit) emit("final", result);
    return result;
}

} // namespace winstitch
