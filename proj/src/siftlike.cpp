#include "invdesc/siftlike.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <type_traits>

#include <json.hpp>

namespace invdesc {
namespace {

constexpr double kPi = std::numbers::pi;

nlohmann::json kernel_json(const Kernel& k) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BilinearKernel>) {
                return {{"type", "bilinear"}, {"epsilon", v.epsilon}};
            } else if constexpr (std::is_same_v<T, TildeGaussianKernel>) {
                return {{"type", "tilde_gaussian"}, {"epsilon", v.epsilon}};
            } else if constexpr (std::is_same_v<T, RectifiedCosinePowerKernel>) {
                return {{"type", "rectified_cosine_power"}, {"inv_power", v.inv_power}};
            } else {
                return {{"type", "angular_gaussian"}, {"epsilon", v.epsilon}};
            }
        },
        k);
}

const char* weighting_name(SpatialWeighting w) {
    switch (w) {
        case SpatialWeighting::Gaussian: return "gaussian";
        case SpatialWeighting::Bilinear: return "bilinear";
        case SpatialWeighting::Uniform: return "uniform";
    }
    return "unknown";
}

}  // namespace

double eval_kernel(const Kernel& k, double alpha) {
    const double a = wrap_angle(alpha);
    return std::visit(
        [a](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BilinearKernel>) {
                const double d = std::abs(a);
                return d >= v.epsilon ? 0.0 : (v.epsilon - d) / (v.epsilon * v.epsilon);
            } else if constexpr (std::is_same_v<T, TildeGaussianKernel>) {
                const double s = std::sin(a);
                return std::exp(-s * s / (2.0 * v.epsilon * v.epsilon));
            } else if constexpr (std::is_same_v<T, RectifiedCosinePowerKernel>) {
                return std::pow(std::max(0.0, std::cos(a)), v.inv_power);
            } else {
                return std::exp(-a * a / (2.0 * v.epsilon * v.epsilon));
            }
        },
        k);
}

double sift_integrand(double alpha, double beta, double gamma, double epsilon) {
    if (gamma < 0.0) throw std::invalid_argument("sift_integrand: gradient norm must be >= 0");
    return eval_kernel(BilinearKernel{epsilon}, alpha - beta) * gamma;
}

double bin_center(int b, int bins) noexcept { return 2.0 * kPi * b / bins - kPi; }

double OrientationHistogram::bin_width() const noexcept { return 2.0 * kPi / bins(); }
double OrientationHistogram::bin_center(int b) const noexcept { return invdesc::bin_center(b, bins()); }

double OrientationHistogram::total_mass() const noexcept {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * bin_width();
}

OrientationHistogram accumulate_histogram(const PolarGradient& polar, const CellBounds& cell, int bins,
                                          const Kernel& kernel, double spatial_sigma,
                                          SpatialWeighting weighting) {
    if (bins < 2) throw std::invalid_argument("accumulate_histogram: need at least 2 bins");
    if (cell.rows < 1 || cell.cols < 1) throw std::invalid_argument("accumulate_histogram: empty cell");
    if (cell.row < 0 || cell.col < 0 || cell.row + cell.rows > polar.height ||
        cell.col + cell.cols > polar.width) {
        throw std::out_of_range("accumulate_histogram: cell outside the field");
    }
    if (!(spatial_sigma > 0.0)) throw std::invalid_argument("accumulate_histogram: spatial sigma must be positive");

    const double center_r = cell.row + 0.5 * (cell.rows - 1);
    const double center_c = cell.col + 0.5 * (cell.cols - 1);
    OrientationHistogram h{std::vector<double>(bins, 0.0)};
    for (int r = cell.row; r < cell.row + cell.rows; ++r) {
        for (int c = cell.col; c < cell.col + cell.cols; ++c) {
            const std::size_t i = polar.index(r, c);
            const double mag = polar.magnitude[i];
            if (mag == 0.0) continue;
            const double dr = r - center_r;
            const double dc = c - center_c;
            double w;
            if (weighting == SpatialWeighting::Gaussian) {
                w = std::exp(-(dr * dr + dc * dc) / (2.0 * spatial_sigma * spatial_sigma));
            } else if (weighting == SpatialWeighting::Uniform) {
                w = 1.0;
            } else {
                w = std::max(0.0, 1.0 - std::abs(dr) / spatial_sigma) *
                    std::max(0.0, 1.0 - std::abs(dc) / spatial_sigma);
            }
            if (w == 0.0) continue;
            for (int b = 0; b < bins; ++b) {
                const double k = eval_kernel(kernel, bin_center(b, bins) - polar.angle[i]);
                if (k != 0.0) h.values[b] += w * k * mag;
            }
        }
    }
    return h;
}

OrientationHistogram clamp_normalize(const OrientationHistogram& h, double tau_frac) {
    if (!(tau_frac > 0.0 && tau_frac <= 1.0)) {
        throw std::invalid_argument("clamp_normalize: tau fraction must lie in (0, 1]");
    }
    if (h.values.empty()) throw std::invalid_argument("clamp_normalize: empty histogram");
    const double peak = *std::max_element(h.values.begin(), h.values.end());
    if (!(peak > 0.0)) throw std::invalid_argument("clamp_normalize: histogram has no mass");
    const double threshold = tau_frac * peak;
    OrientationHistogram out{h.values};
    for (double& v : out.values) v = std::min(v, threshold);
    const double total = out.total_mass();
    for (double& v : out.values) v /= total;
    return out;
}

Kernel SiftParams::resolved_kernel() const {
    return kernel ? *kernel : Kernel{BilinearKernel{2.0 * kPi / bins}};
}

double SiftParams::resolved_spatial_sigma(int cell_side) const {
    return spatial_sigma ? *spatial_sigma : 0.5 * cell_side;
}

SiftDescriptor sift_descriptor(const Patch& patch, const SiftParams& params) {
    if (params.grid < 1 || params.bins < 2) throw std::invalid_argument("sift_descriptor: bad grid or bin count");
    if (patch.side < params.grid || patch.side % params.grid != 0) {
        throw std::invalid_argument("sift_descriptor: patch side must be a positive multiple of the grid size");
    }
    const int cell_side = patch.side / params.grid;
    const PolarGradient polar = to_polar(compute_gradient(patch.pixels, params.presmooth_sigma));
    const Kernel kernel = params.resolved_kernel();
    const double sigma = params.resolved_spatial_sigma(cell_side);

    SiftDescriptor d{params.grid, params.bins, {}, params};
    d.values.reserve(static_cast<std::size_t>(params.grid * params.grid * params.bins));
    for (int cr = 0; cr < params.grid; ++cr) {
        for (int cc = 0; cc < params.grid; ++cc) {
            const CellBounds cell{cr * cell_side, cc * cell_side, cell_side, cell_side};
            const auto h = accumulate_histogram(polar, cell, params.bins, kernel, sigma, params.weighting);
            d.values.insert(d.values.end(), h.values.begin(), h.values.end());
        }
    }
    return d;
}

void validate(const ScalePrior& prior) {
    if (prior.scales.empty() || prior.scales.size() != prior.weights.size()) {
        throw std::invalid_argument("ScalePrior: scales and weights must be nonempty and aligned");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < prior.scales.size(); ++i) {
        if (!(prior.scales[i] > 0.0) || !std::isfinite(prior.scales[i])) {
            throw std::invalid_argument("ScalePrior: scales must be positive");
        }
        if (!(prior.weights[i] >= 0.0)) throw std::invalid_argument("ScalePrior: weights must be nonnegative");
        sum += prior.weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("ScalePrior: weights must sum to 1");
}

ScalePrior make_exponential_prior(std::vector<double> scales, double rate) {
    if (!(rate >= 0.0)) throw std::invalid_argument("make_exponential_prior: rate must be >= 0");
    ScalePrior prior{std::move(scales), {}, rate};
    if (prior.scales.empty()) throw std::invalid_argument("make_exponential_prior: no scales");
    double sum = 0.0;
    for (double s : prior.scales) {
        if (!(s > 0.0)) throw std::invalid_argument("make_exponential_prior: scales must be positive");
        prior.weights.push_back(rate * std::exp(-rate * s));
        sum += prior.weights.back();
    }
    if (!(sum > 0.0)) {
        prior.weights.assign(prior.scales.size(), 1.0);
        sum = static_cast<double>(prior.scales.size());
    }
    for (double& w : prior.weights) w /= sum;
    return prior;
}

ScalePrior default_scale_prior() {
    std::vector<double> scales;
    for (int k = -2; k <= 2; ++k) scales.push_back(std::exp2(0.5 * k));
    return make_exponential_prior(std::move(scales), 1.0);
}

GrayImage resample_window(const GrayImage& parent, double center_row, double center_col,
                          double source_side, int out_side) {
    if (out_side < 1 || !(source_side > 0.0)) throw std::invalid_argument("resample_window: bad window size");
    const double step = source_side / out_side;
    const double half = 0.5 * (out_side - 1);
    GrayImage out(out_side, out_side);
    for (int r = 0; r < out_side; ++r) {
        for (int c = 0; c < out_side; ++c) {
            out.at(r, c) = sample_bilinear(parent, center_row + (r - half) * step, center_col + (c - half) * step);
        }
    }
    return out;
}

SiftDescriptor dsp_sift_descriptor(const GrayImage& parent, const Patch& patch, const ScalePrior& prior,
                                   const SiftParams& params) {
    validate(prior);
    const double center_row = patch.origin.row + 0.5 * (patch.side - 1);
    const double center_col = patch.origin.col + 0.5 * (patch.side - 1);
    SiftDescriptor pooled{params.grid, params.bins, {}, params};
    for (std::size_t i = 0; i < prior.scales.size(); ++i) {
        const double source_side = prior.scales[i] * patch.side;
        if (source_side < 4.0) throw std::invalid_argument("dsp_sift_descriptor: scale yields a window below 4x4");
        Patch scaled{patch.origin, patch.side,
                     [&] {
                         try {
                             return resample_window(parent, center_row, center_col, source_side, patch.side);
                         } catch (const std::out_of_range&) {
                             throw std::out_of_range("dsp_sift_descriptor: scale " +
                                                     std::to_string(prior.scales[i]) + " escapes the image");
                         }
                     }()};
        const SiftDescriptor d = sift_descriptor(scaled, params);
        if (pooled.values.empty()) pooled.values.assign(d.values.size(), 0.0);
        for (std::size_t j = 0; j < d.values.size(); ++j) pooled.values[j] += prior.weights[i] * d.values[j];
    }
    return pooled;
}

std::vector<double> dominant_orientations(const Patch& patch, int max_count, double prominence, int bins) {
    if (patch.side < 8) throw std::invalid_argument("dominant_orientations: patch must be at least 8x8");
    if (bins < 3) throw std::invalid_argument("dominant_orientations: need at least 3 bins");
    const PolarGradient polar = to_polar(compute_gradient(patch.pixels));
    const auto h = accumulate_histogram(polar, {0, 0, patch.side, patch.side}, bins,
                                        BilinearKernel{2.0 * kPi / bins}, 0.5 * patch.side);
    const auto& v = h.values;
    const double peak = *std::max_element(v.begin(), v.end());
    if (!(peak > 0.0) || max_count < 1) return {};

    struct Peak {
        double height;
        double angle;
    };
    std::vector<Peak> peaks;
    for (int b = 0; b < bins; ++b) {
        const double left = v[(b + bins - 1) % bins];
        const double right = v[(b + 1) % bins];
        if (!(v[b] > left && v[b] >= right) || v[b] < prominence * peak) continue;
        const double denom = left - 2.0 * v[b] + right;
        const double offset = denom != 0.0 ? 0.5 * (left - right) / denom : 0.0;
        peaks.push_back({v[b], wrap_angle(h.bin_center(b) + offset * h.bin_width())});
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    std::vector<double> out;
    for (const auto& p : peaks) {
        if (static_cast<int>(out.size()) == max_count) break;
        out.push_back(p.angle);
    }
    return out;
}

void write_csv_row(std::ostream& out, const SiftDescriptor& d) {
    char buf[32];
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", d.values[i]);
        if (i > 0) out << ',';
        out << buf;
    }
    out << '\n';
}

std::string to_json(const SiftDescriptor& d) {
    nlohmann::json params = {
        {"bins", d.bins},
        {"grid", d.grid},
        {"kernel", kernel_json(d.params.resolved_kernel())},
        {"spatial_weighting", weighting_name(d.params.weighting)},
        {"presmooth_sigma", d.params.presmooth_sigma},
    };
    if (d.params.spatial_sigma) params["spatial_sigma"] = *d.params.spatial_sigma;
    return nlohmann::json{{"params", params}, {"values", d.values}}.dump();
}

}  // namespace invdesc
