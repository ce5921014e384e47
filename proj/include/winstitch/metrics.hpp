#pragma once

#include <string>
#include <vector>

#include "winstitch/image.hpp"

namespace winstitch {

// Standard SSIM constants: C1 = (k1 L)^2, C2 = (k2 L)^2, Gaussian weighting
// over an 11x11 support.
struct SsimParams {
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
    double gaussian_sigma = 1.5;
    int window_radius = 5;
};

// Mean of the Gaussian-weighted local SSIM map over all centres where the
// full window fits. Single-channel inputs only.
double ssim(const ImageTensor& x, const ImageTensor& y, const SsimParams& params = {});

// Arithmetic mean of the per-channel SSIM scores.
double ssim_multichannel(const ImageTensor& x, const ImageTensor& y,
                         const SsimParams& params = {});

// Elementwise method minus baseline, paired by image.
std::vector<double> adjusted_ssim(const std::vector<double>& method_scores,
                                  const std::vector<double>& baseline_scores);

// Paired scores of two methods plus the derived statistics. pop_sd uses
// divisor N while the t statistic uses the sample SD, i.e.
// t = mean_diff * sqrt(N-1) / pop_sd; both p values are two-sided.
struct PairedComparison {
    std::vector<double> differences;
    double mean_diff = 0.0;
    double pop_sd = 0.0;
    double t_stat = 0.0;
    int dof = 0;
    double p_t = 1.0;
    int positives = 0;
    int negatives = 0;
    int ties = 0;
    double p_sign = 1.0;
};

double t_statistic(double mean_diff, double pop_sd, int n);
double student_t_two_sided_p(double t, int dof);

// Differences are a - b. Throws on n < 2 and on zero variance.
PairedComparison paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided exact binomial sign test; ties are dropped. Throws when every
// difference is zero.
double exact_sign_test(const std::vector<double>& differences);

// Mean absolute difference restricted to the 2-pixel-wide bands around the
// non-overlapping patch boundaries, where seam artifacts concentrate.
double seam_band_mae(const ImageTensor& a, const ImageTensor& b, int patch_height,
                     int patch_width);

// One summary line in the reporting style "(M=..., SD=...; t(dof)=..., p=...)".
std::string format_comparison(const std::string& method, const std::string& baseline,
                              const PairedComparison& comparison);

} // namespace winstitch
