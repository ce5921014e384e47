#include <doctest.h>

#include <stdexcept>

#include "support/approx.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "winstitch/blending.hpp"
#include "winstitch/predictors.hpp"

using namespace winstitch;
using winstitch::testing::near;
using winstitch::testing::near_rel;

namespace {

ImageTensor random_image(int channels, int height, int width, std::uint64_t seed) {
    ImageTensor img(channels, height, width);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : img.data()) v = u(rng);
    return img;
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
    REQUIRE(a.same_shape(b));
    double worst = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
    return worst;
}

const PatchPredictFn kIdentity = [](const PatchRef&, const ImageTensor& patch) {
    return patch;
};

} // namespace

TEST_CASE("identity predictions are reproduced by every partition-of-unity kind") {
    for (int base : {2, 3, 4}) {
        const int extent = 64 * base;
        const ImageTensor input = random_image(3, extent, extent, 11 + base);
        const PatchGrid grid = plan_grid(extent, extent, 64, 64, PaddingPolicy::Reject);
        for (WindowKind kind : {WindowKind::Hann, WindowKind::BartlettHann,
                                WindowKind::Triangular, WindowKind::Average}) {
            const ImageTensor out = blend_with(input, grid, kind, kIdentity);
            CHECK(max_abs_diff(out, input) <= 1e-6);
        }
    }
}

TEST_CASE("pyramidal blending needs its normalisation pass") {
    const ImageTensor input = random_image(1, 256, 256, 5);
    const PatchGrid grid = plan_grid(256, 256, 64, 64, PaddingPolicy::Reject);

    const ImageTensor normalized = blend_with(input, grid, WindowKind::Pyramidal, kIdentity);
    CHECK(max_abs_diff(normalized, input) <= 1e-6);

    BlendAccumulator raw(grid, WindowKind::Pyramidal, Normalization::Off);
    for (const auto& ref : enumerate_patches(grid, PatchMode::Overlapping))
        raw.add(ref, extract_patch(input, ref, grid));
    CHECK(max_abs_diff(raw.finish(), input) > 0.01);
}

TEST_CASE("a constant field of unit patches blends to exactly one") {
    const PatchGrid grid = plan_grid(64, 64, 32, 32, PaddingPolicy::Reject);
    std::vector<std::pair<PatchRef, ImageTensor>> patches;
    for (const auto& ref : enumerate_patches(grid, PatchMode::Overlapping))
        patches.emplace_back(ref, ImageTensor(1, 32, 32, 1.0));
    const ImageTensor out = blend(patches, grid, WindowKind::Hann);
    for (double v : out.data()) CHECK(v == near(1.0, 1e-9));
}

TEST_CASE("blending is linear in its predictions") {
    const PatchGrid grid = plan_grid(96, 96, 32, 32, PaddingPolicy::Reject);
    const ImageTensor p = random_image(1, 96, 96, 21);
    const ImageTensor q = random_image(1, 96, 96, 22);
    const double alpha = 0.7, beta = -1.3;

    auto blend_of = [&](const ImageTensor& source) {
        return blend_with(source, grid, WindowKind::Hann, kIdentity);
    };
    ImageTensor mix(1, 96, 96);
    for (std::size_t k = 0; k < mix.data().size(); ++k)
        mix.data()[k] = alpha * p.data()[k] + beta * q.data()[k];

    const ImageTensor lhs = blend_of(mix);
    const ImageTensor bp = blend_of(p);
    const ImageTensor bq = blend_of(q);
    for (std::size_t k = 0; k < lhs.data().size(); ++k)
        CHECK(lhs.data()[k] ==
              near(alpha * bp.data()[k] + beta * bq.data()[k], 1e-9));
}

TEST_CASE("blend rejects malformed patch sets") {
    const PatchGrid grid = plan_grid(64, 64, 32, 32, PaddingPolicy::Reject);
    const auto refs = enumerate_patches(grid, PatchMode::Overlapping);

    SUBCASE("duplicate ref") {
        BlendAccumulator acc(grid, WindowKind::Hann);
        acc.add(refs[0], ImageTensor(1, 32, 32, 0.0));
        CHECK_THROWS_AS(acc.add(refs[0], ImageTensor(1, 32, 32, 0.0)), std::invalid_argument);
    }
    SUBCASE("missing ref") {
        BlendAccumulator acc(grid, WindowKind::Hann);
        acc.add(refs[0], ImageTensor(1, 32, 32, 0.0));
        CHECK_THROWS_AS(acc.finish(), std::invalid_argument);
    }
    SUBCASE("channel mismatch") {
        BlendAccumulator acc(grid, WindowKind::Hann);
        acc.add(refs[0], ImageTensor(1, 32, 32, 0.0));
        CHECK_THROWS_AS(acc.add(refs[1], ImageTensor(3, 32, 32, 0.0)), std::invalid_argument);
    }
    SUBCASE("wrong patch size") {
        BlendAccumulator acc(grid, WindowKind::Hann);
        CHECK_THROWS_AS(acc.add(refs[0], ImageTensor(1, 16, 32, 0.0)), std::invalid_argument);
    }
    SUBCASE("NaN prediction") {
        BlendAccumulator acc(grid, WindowKind::Hann);
        ImageTensor bad(1, 32, 32, 0.0);
        bad.at(0, 3, 3) = std::nan("");
        CHECK_THROWS_AS(acc.add(refs[0], bad), std::invalid_argument);
    }
    SUBCASE("foreign ref") {
        BlendAccumulator acc(grid, WindowKind::Hann);
        PatchRef foreign{0, 0, 5, 0, PositionClass::UpLeft}; // offset disagrees with indices
        CHECK_THROWS_AS(acc.add(foreign, ImageTensor(1, 32, 32, 0.0)), std::invalid_argument);
    }
}

TEST_CASE("baseline blending abuts patches without windowing") {
    const PatchGrid grid = plan_grid(64, 64, 32, 32, PaddingPolicy::Reject);
    const ImageTensor input = random_image(2, 64, 64, 33);

    SUBCASE("identity is exact") {
        const ImageTensor out = blend_baseline_with(input, grid, kIdentity);
        CHECK(max_abs_diff(out, input) == 0.0);
    }
    SUBCASE("a constant shift passes through exactly") {
        const ImageTensor out = blend_baseline_with(
            input, grid, [](const PatchRef&, const ImageTensor& patch) {
                ImageTensor shifted = patch;
                for (double& v : shifted.data()) v += 1.0;
                return shifted;
            });
        for (std::size_t k = 0; k < out.data().size(); ++k)
            CHECK(out.data()[k] == input.data()[k] + 1.0);
    }
    SUBCASE("adjacent constant patches leave a hard seam") {
        std::vector<std::pair<PatchRef, ImageTensor>> patches;
        for (const auto& ref : enumerate_patches(grid, PatchMode::NonOverlapping))
            patches.emplace_back(ref, ImageTensor(1, 32, 32, ref.col == 0 ? 0.0 : 1.0));
        const ImageTensor out = blend_baseline(patches, grid);
        double max_gradient = 0.0;
        for (int x = 1; x < 64; ++x)
            max_gradient = std::max(max_gradient, std::abs(out.at(0, 10, x) - out.at(0, 10, x - 1)));
        CHECK(max_gradient == 1.0);
        CHECK(out.at(0, 10, 31) == 0.0);
        CHECK(out.at(0, 10, 32) == 1.0);
    }
}

TEST_CASE("baseline blending validates refs") {
    const PatchGrid grid = plan_grid(64, 64, 32, 32, PaddingPolicy::Reject);
    std::vector<std::pair<PatchRef, ImageTensor>> incomplete;
    incomplete.emplace_back(PatchRef{0, 0, 0, 0, PositionClass::Interior},
                            ImageTensor(1, 32, 32, 0.0));
    CHECK_THROWS_AS(blend_baseline(incomplete, grid), std::invalid_argument);
}

TEST_CASE("progressive blending emits a preview and reuses its predictions") {
    const PatchGrid grid = plan_grid(1024, 1024, 128, 128, PaddingPolicy::Reject);
    const ImageTensor input = random_image(1, 1024, 1024, 3);

    long calls = 0;
    bool preview_seen = false, final_seen = false;
    ImageTensor preview;
    const ImageTensor result = blend_progressive(
        input, grid, WindowKind::Hann,
        [&](const PatchRef&, const ImageTensor& patch) {
            ++calls;
            return patch;
        },
        [&](std::string_view stage, const ImageTensor& img) {
            if (stage == "preview") {
                preview_seen = true;
                preview = img;
                CHECK(calls == 64); // preview available after the baseline pass
            } else if (stage == "final") {
                final_seen = true;
            }
        });
    CHECK(preview_seen);
    CHECK(final_seen);
    CHECK(calls == 225); // 161 additional predictions; 64 + 225 without reuse
    CHECK(max_abs_diff(preview, input) == 0.0);
    CHECK(max_abs_diff(result, input) <= 1e-6);
}

TEST_CASE("progressive blending identifies the failing patch") {
    const PatchGrid grid = plan_grid(64, 64, 32, 32, PaddingPolicy::Reject);
    const ImageTensor input = random_image(1, 64, 64, 9);
    long calls = 0;
    CHECK_THROWS_WITH_AS(
        blend_progressive(
            input, grid, WindowKind::Hann,
            [&](const PatchRef&, const ImageTensor& patch) -> ImageTensor {
                if (++calls == 3) throw std::runtime_error("boom");
                return patch;
            },
            nullptr),
        doctest::Contains("prediction failed at patch"), std::runtime_error);
}

TEST_CASE("windowed blending beats the baseline on seam bands under border noise") {
    // The border-noise predictor degrades patch borders; the baseline leaves
    // those borders on the seams while Hann weighting suppresses them.
    const PatchGrid grid = plan_grid(256, 256, 64, 64, PaddingPolicy::Reject);
    const ImageTensor truth = random_image(1, 256, 256, 77);
    const PredictorSpec noise = PredictorSpec::border_noise(0.5, 8.0, 123);
    const PatchPredictFn noisy = [&](const PatchRef& ref, const ImageTensor& patch) {
        return predict(noise, patch, ref.offset_y, ref.offset_x);
    };
    const ImageTensor windowed = blend_with(truth, grid, WindowKind::Hann, noisy);
    const ImageTensor baseline = blend_baseline_with(truth, grid, noisy);

    auto band_mae = [&](const ImageTensor& img) {
        double sum = 0.0;
        long count = 0;
        for (int y = 0; y < 256; ++y)
            for (int x = 0; x < 256; ++x) {
                const bool row_band = (y % 64 == 0 && y != 0) || (y % 64 == 63 && y != 255);
                const bool col_band = (x % 64 == 0 && x != 0) || (x % 64 == 63 && x != 255);
                if (!row_band && !col_band) continue;
                sum += std::abs(img.at(0, y, x) - truth.at(0, y, x));
                ++count;
            }
        return sum / count;
    };
    CHECK(band_mae(windowed) < band_mae(baseline));
}
