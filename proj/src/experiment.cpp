#include "winstitch/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "winstitch/blending.hpp"
#include "winstitch/metrics.hpp"
#include "winstitch/predictors.hpp"
#include "winstitch/synthetic.hpp"
#include "winstitch/tiling.hpp"

namespace winstitch {

namespace {

const std::vector<std::pair<std::string, WindowKind>> kWindowedMethods = {
    {"average", WindowKind::Average},
    {"pyramidal", WindowKind::Pyramidal},
    {"hann", WindowKind::Hann},
    {"bartlett-hann", WindowKind::BartlettHann},
    {"triangular", WindowKind::Triangular},
};

std::uint64_t per_image_seed(std::uint64_t seed, int image_index) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(image_index + 1));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return x;
}

std::string image_id(int index) {
    std::ostringstream s;
    s << "img_" << std::setw(3) << std::setfill('0') << index;
    return s.str();
}

} // namespace

double MethodScores::mean_adjusted() const {
    double sum = 0.0;
    for (double v : adjusted) sum += v;
    return adjusted.empty() ? 0.0 : sum / static_cast<double>(adjusted.size());
}

const MethodScores& ExperimentResult::method(const std::string& label) const {
    for (const auto& m : methods)
        if (m.label == label) return m;
    throw std::invalid_argument("no such method: " + label);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.images < 1) throw std::invalid_argument("experiment: need at least one image");
    if (config.classes != 1 && config.classes != 3)
        throw std::invalid_argument("experiment: classes must be 1 or 3");

    const PatchGrid grid = plan_grid(config.height, config.width, config.patch_height,
                                     config.patch_width, PaddingPolicy::Reflect);

    ExperimentResult result;
    result.config = config;
    result.methods.resize(kWindowedMethods.size() + 1);
    result.methods[0].label = "none";
    for (std::size_t k = 0; k < kWindowedMethods.size(); ++k)
        result.methods[k + 1].label = kWindowedMethods[k].first;

    std::mt19937_64 truth_rng(config.seed);
    for (int img = 0; img < config.images; ++img) {
        result.image_ids.push_back(image_id(img));
        const ImageTensor truth =
            make_class_map(config.height, config.width, config.classes, truth_rng);
        const PredictorSpec noise = PredictorSpec::border_noise(
            config.noise_amplitude, config.noise_falloff, per_image_seed(config.seed, img));

        // One pass over the overlapping refs: every prediction feeds all five
        // windowed accumulators, and the even-offset ones double as the
        // non-overlapping baseline (the noise is keyed by patch offset, so
        // both passes see the same field).
        std::vector<std::unique_ptr<BlendAccumulator>> accumulators;
        for (const auto& [label, kind] : kWindowedMethods)
            accumulators.push_back(std::make_unique<BlendAccumulator>(grid, kind));
        std::vector<std::pair<PatchRef, ImageTensor>> baseline_patches;

        for (const PatchRef& ref : enumerate_patches(grid, PatchMode::Overlapping)) {
            const ImageTensor prediction =
                predict(noise, extract_patch(truth, ref, grid), ref.offset_y, ref.offset_x);
            for (auto& acc : accumulators) acc->add(ref, prediction);
            if (ref.row % 2 == 0 && ref.col % 2 == 0)
                baseline_patches.emplace_back(
                    PatchRef{ref.row / 2, ref.col / 2, ref.offset_y, ref.offset_x,
                             PositionClass::Interior},
                    prediction);
        }

        std::vector<ImageTensor> recons;
        recons.push_back(blend_baseline(baseline_patches, grid));
        baseline_patches.clear();
        for (auto& acc : accumulators) recons.push_back(acc->finish());
        accumulators.clear();

        const double baseline_ssim = ssim_multichannel(recons[0], truth);
        for (std::size_t m = 0; m < result.methods.size(); ++m) {
            const double score =
                m == 0 ? baseline_ssim : ssim_multichannel(recons[m], truth);
            result.methods[m].ssim.push_back(score);
            result.methods[m].adjusted.push_back(score - baseline_ssim);
            result.methods[m].seam_mae.push_back(
                seam_band_mae(recons[m], truth, config.patch_height, config.patch_width));
        }
    }
    return result;
}

std::string config_header(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "# winstitch experiment\n"
        << "# seed=" << c.seed << " images=" << c.images << " size=" << c.height << "x"
        << c.width << " patch=" << c.patch_height << "x" << c.patch_width
        << " classes=" << c.classes << " predictor=bordernoise:amp=" << c.noise_amplitude
        << ",falloff=" << c.noise_falloff << "\n";
    return out.str();
}

std::string format_summary(const ExperimentResult& result) {
    std::ostringstream out;
    out << config_header(result.config);
    const MethodScores& baseline = result.methods.front();
    for (std::size_t m = 1; m < result.methods.size(); ++m) {
        const MethodScores& method = result.methods[m];
        try {
            out << format_comparison(method.label, baseline.label,
                                     paired_t_test(method.ssim, baseline.ssim))
                << "\n";
        } catch (const std::invalid_argument&) {
            out << method.label << " vs " << baseline.label << ": degenerate (zero variance)\n";
        }
    }
    // hann and pyramidal are usually the closest pair; report their head-to-head too.
    try {
        out << format_comparison("hann", "pyramidal",
                                 paired_t_test(result.method("hann").ssim,
                                               result.method("pyramidal").ssim))
            << "\n";
    } catch (const std::invalid_argument&) {
        out << "hann vs pyramidal: degenerate (zero variance)\n";
    }
    return out.str();
}

void write_experiment_reports(const ExperimentResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ofstream csv(fs::path(out_dir) / "adjusted_ssim.csv");
        csv << config_header(result.config);
        csv << "image";
        for (const auto& m : result.methods) csv << "," << m.label;
        csv << "\n";
        csv << std::setprecision(9);
        for (std::size_t i = 0; i < result.image_ids.size(); ++i) {
            csv << result.image_ids[i];
            for (const auto& m : result.methods) csv << "," << m.adjusted[i];
            csv << "\n";
        }
        if (!csv) throw std::runtime_error("failed to write adjusted_ssim.csv");
    }
    {
        std::ofstream csv(fs::path(out_dir) / "scores.csv");
        csv << config_header(result.config);
        csv << "image,method,ssim,adjusted-ssim\n";
        csv << std::setprecision(9);
        for (std::size_t i = 0; i < result.image_ids.size(); ++i)
            for (const auto& m : result.methods)
                csv << result.image_ids[i] << "," << m.label << "," << m.ssim[i] << ","
                    << m.adjusted[i] << "\n";
        if (!csv) throw std::runtime_error("failed to write scores.csv");
    }
    {
        std::ofstream summary(fs::path(out_dir) / "summary.txt");
        summary << format_summary(result);
        if (!summary) throw std::runtime_error("failed to write summary.txt");
    }
}

} // namespace winstitch
