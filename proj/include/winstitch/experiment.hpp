#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace winstitch {

// Desk-scale reproduction of the evaluation protocol: synthetic one-hot
// class maps stand in for ground truth and a border-noise predictor stands
// in for the trained network.
struct ExperimentConfig {
    std::uint64_t seed = 7;
    int images = 14;
    int height = 1024;
    int width = 1024;
    int patch_height = 128;
    int patch_width = 128;
    int classes = 3;
    double noise_amplitude = 0.5;
    double noise_falloff = 8.0;
};

struct MethodScores {
    std::string label;
    std::vector<double> ssim;     // per image, channel-averaged
    std::vector<double> adjusted; // ssim minus the baseline's ssim
    std::vector<double> seam_mae; // against truth, on baseline boundary bands

    double mean_adjusted() const;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<std::string> image_ids;
    std::vector<MethodScores> methods; // baseline ("none") first

    const MethodScores& method(const std::string& label) const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

std::string config_header(const ExperimentConfig& config);
std::string format_summary(const ExperimentResult& result);

// Writes adjusted_ssim.csv (wide, one method per column), scores.csv (long)
// and summary.txt under the directory, creating it if needed.
void write_experiment_reports(const ExperimentResult& result, const std::string& out_dir);

} // namespace winstitch
