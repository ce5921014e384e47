#include "winstitch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace winstitch {

namespace {

std::vector<double> gaussian_taps(double sigma, int radius) {
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : taps) v /= sum;
    return taps;
}

// Separable Gaussian filtering in 'valid' mode: the output covers only the
// centres where the whole window fits.
std::vector<double> filter_valid(const std::vector<double>& src, int height, int width,
                                 const std::vector<double>& taps) {
    const int radius = static_cast<int>(taps.size()) / 2;
    const int out_width = width - 2 * radius;
    const int out_height = height - 2 * radius;
    std::vector<double> tmp(static_cast<std::size_t>(height) * out_width);
    for (int y = 0; y < height; ++y) {
        const double* row = src.data() + static_cast<std::size_t>(y) * width;
        double* trow = tmp.data() + static_cast<std::size_t>(y) * out_width;
        for (int x = 0; x < out_width; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * row[x + k];
            trow[x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(out_height) * out_width);
    for (int y = 0; y < out_height; ++y) {
        double* orow = out.data() + static_cast<std::size_t>(y) * out_width;
        for (int x = 0; x < out_width; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < taps.size(); ++k)
                acc += taps[k] * tmp[(static_cast<std::size_t>(y) + k) * out_width + x];
            orow[x] = acc;
        }
    }
    return out;
}

double ssim_plane(const double* x, const double* y, int height, int width,
                  const SsimParams& params) {
    if (!(params.k1 > 0.0) || !(params.k2 > 0.0))
        throw std::invalid_argument("ssim: k1 and k2 must be > 0");
    if (!(params.dynamic_range > 0.0))
        throw std::invalid_argument("ssim: dynamic range must be > 0");
    const int radius = params.window_radius;
    if (radius < 1) throw std::invalid_argument("ssim: window radius must be >= 1");
    if (height < 2 * radius + 1 || width < 2 * radius + 1)
        throw std::invalid_argument("ssim: image smaller than the local window");

    const std::size_t count = static_cast<std::size_t>(height) * width;
    std::vector<double> plane_x(x, x + count), plane_y(y, y + count);
    std::vector<double> xx(count), yy(count), xy(count);
    for (std::size_t k = 0; k < count; ++k) {
        xx[k] = plane_x[k] * plane_x[k];
        yy[k] = plane_y[k] * plane_y[k];
        xy[k] = plane_x[k] * plane_y[k];
    }

    const auto taps = gaussian_taps(params.gaussian_sigma, radius);
    const auto mu1 = filter_valid(plane_x, height, width, taps);
    const auto mu2 = filter_valid(plane_y, height, width, taps);
    const auto e_xx = filter_valid(xx, height, width, taps);
    const auto e_yy = filter_valid(yy, height, width, taps);
    const auto e_xy = filter_valid(xy, height, width, taps);

    const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
    const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);

    double sum = 0.0;
    for (std::size_t k = 0; k < mu1.size(); ++k) {
        const double m1 = mu1[k];
        const double m2 = mu2[k];
        const double s11 = e_xx[k] - m1 * m1;
        const double s22 = e_yy[k] - m2 * m2;
        const double s12 = e_xy[k] - m1 * m2;
        const double numerator = (2.0 * m1 * m2 + c1) * (2.0 * s12 + c2);
        const double denominator = (m1 * m1 + m2 * m2 + c1) * (s11 + s22 + c2);
        sum += numerator / denominator;
    }
    return sum / static_cast<double>(mu1.size());
}

} // namespace

double ssim(const ImageTensor& x, const ImageTensor& y, const SsimParams& params) {
    if (!x.same_shape(y)) throw std::invalid_argument("ssim: shape mismatch");
    if (x.channels() != 1)
        throw std::invalid_argument("ssim: single-channel input required");
    return ssim_plane(x.channel(0), y.channel(0), x.height(), x.width(), params);
}

double ssim_multichannel(const ImageTensor& x, const ImageTensor& y, const SsimParams& params) {
    if (!x.same_shape(y)) throw std::invalid_argument("ssim: shape mismatch");
    double sum = 0.0;
    for (int c = 0; c < x.channels(); ++c)
        sum += ssim_plane(x.channel(c), y.channel(c), x.height(), x.width(), params);
    return sum / x.channels();
}

std::vector<double> adjusted_ssim(const std::vector<double>& method_scores,
                                  const std::vector<double>& baseline_scores) {
    if (method_scores.size() != baseline_scores.size())
        throw std::invalid_argument("adjusted_ssim: length mismatch");
    std::vector<double> out(method_scores.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = method_scores[k] - baseline_scores[k];
    return out;
}

double t_statistic(double mean_diff, double pop_sd, int n) {
    if (n < 2) throw std::invalid_argument("t-test: need at least two pairs");
    if (!(pop_sd > 0.0)) throw std::invalid_argument("t-test: zero variance");
    return mean_diff * std::sqrt(static_cast<double>(n - 1)) / pop_sd;
}

double student_t_two_sided_p(double t, int dof) {
    if (dof < 1) throw std::invalid_argument("t-test: dof must be >= 1");
    const boost::math::students_t_distribution<double> dist(static_cast<double>(dof));
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

PairedComparison paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("t-test: length mismatch");
    const int n = static_cast<int>(a.size());
    if (n < 2) throw std::invalid_argument("t-test: need at least two pairs");

    PairedComparison cmp;
    cmp.differences.resize(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) cmp.differences[k] = a[k] - b[k];

    double sum = 0.0;
    for (double d : cmp.differences) sum += d;
    cmp.mean_diff = sum / n;

    double ss = 0.0;
    for (double d : cmp.differences) {
        const double e = d - cmp.mean_diff;
        ss += e * e;
    }
    cmp.pop_sd = std::sqrt(ss / n);
    cmp.dof = n - 1;
    cmp.t_stat = t_statistic(cmp.mean_diff, cmp.pop_sd, n);
    cmp.p_t = student_t_two_sided_p(cmp.t_stat, cmp.dof);

    for (double d : cmp.differences) {
        if (d > 0.0) ++cmp.positives;
        else if (d < 0.0) ++cmp.negatives;
        else ++cmp.ties;
    }
    // Zero variance was already rejected above, so at least one difference
    // is nonzero here.
    cmp.p_sign = exact_sign_test(cmp.differences);
    return cmp;
}

double exact_sign_test(const std::vector<double>& differences) {
    long positives = 0, negatives = 0;
    for (double d : differences) {
        if (d > 0.0) ++positives;
        else if (d < 0.0) ++negatives;
    }
    const long n = positives + negatives;
    if (n == 0) throw std::invalid_argument("sign test: all differences are ties");

    const long threshold = std::max(positives, negatives);
    // Tail of Binomial(n, 1/2): term k = C(n, k) 2^-n, descending from k = n.
    double term = std::pow(0.5, static_cast<double>(n));
    double tail = 0.0;
    for (long k = n; k >= threshold; --k) {
        tail += term;
        term *= static_cast<double>(k) / static_cast<double>(n - k + 1);
    }
    return std::min(1.0, 2.0 * tail);
}

double seam_band_mae(const ImageTensor& a, const ImageTensor& b, int patch_height,
                     int patch_width) {
    if (!a.same_shape(b)) throw std::invalid_argument("seam_band_mae: shape mismatch");
    if (patch_height < 2 || patch_width < 2)
        throw std::invalid_argument("seam_band_mae: bad patch size");
    const int height = a.height();
    const int width = a.width();

    // The band at each interior boundary k*patch is the two pixels
    // straddling it, {k*patch - 1, k*patch}; image edges carry no band.
    std::vector<char> row_band(static_cast<std::size_t>(height), 0);
    for (int y = 0; y < height; ++y) {
        const int r = y % patch_height;
        row_band[y] = (y != 0 && r == 0) || (y != height - 1 && r == patch_height - 1);
    }
    std::vector<char> col_band(static_cast<std::size_t>(width), 0);
    for (int x = 0; x < width; ++x) {
        const int r = x % patch_width;
        col_band[x] = (x != 0 && r == 0) || (x != width - 1 && r == patch_width - 1);
    }

    double sum = 0.0;
    long count = 0;
    for (int c = 0; c < a.channels(); ++c) {
        const double* pa = a.channel(c);
        const double* pb = b.channel(c);
        for (int y = 0; y < height; ++y) {
            const std::size_t row = static_cast<std::size_t>(y) * width;
            if (row_band[y]) {
                for (int x = 0; x < width; ++x) {
                    sum += std::abs(pa[row + x] - pb[row + x]);
                    ++count;
                }
            } else {
                for (int x = 0; x < width; ++x)
                    if (col_band[x]) {
                        sum += std::abs(pa[row + x] - pb[row + x]);
                        ++count;
                    }
            }
        }
    }
    if (count == 0) throw std::invalid_argument("seam_band_mae: no interior boundaries");
    return sum / static_cast<double>(count);
}

std::string format_comparison(const std::string& method, const std::string& baseline,
                              const PairedComparison& cmp) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(5);
    out << method << " vs " << baseline << ": (M=" << cmp.mean_diff << ", SD=" << cmp.pop_sd
        << "; t(" << cmp.dof << ")=";
    out.precision(4);
    out << cmp.t_stat << ", p=" << std::scientific << cmp.p_t << std::defaultfloat
        << "; signs " << cmp.positives << "+/" << cmp.negatives << "-/" << cmp.ties
        << "=, sign-test p=" << std::scientific << cmp.p_sign << std::defaultfloat << ")";
    return out.str();
}

} // namespace winstitch
