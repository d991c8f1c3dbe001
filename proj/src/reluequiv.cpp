#include "invdesc/reluequiv.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "invdesc/parallel.hpp"

namespace invdesc {
namespace {

constexpr std::size_t kBruteForceLimit = 10000;

std::vector<double> gaussian_1d(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> g(2 * radius + 1);
    double sum = 0.0;
    for (int q = -radius; q <= radius; ++q) {
        g[q + radius] = std::exp(-0.5 * q * q / (sigma * sigma));
        sum += g[q + radius];
    }
    for (double& v : g) v /= sum;
    return g;
}

void check_sigma(double sigma) {
    if (!(sigma >= 0.5) || !std::isfinite(sigma)) {
        throw std::invalid_argument("oriented filter: sigma must be at least 0.5 px");
    }
}

void check_fits(const GrayImage& img, int half) {
    if (img.width() <= 2 * half || img.height() <= 2 * half) {
        throw std::invalid_argument("image must be larger than the filter support (" +
                                    std::to_string(2 * half + 1) + " px)");
    }
}

// 1-D squared distance transform of a sampled function (lower envelope of parabolas).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                           std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    const double inf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (!std::isfinite(f[q])) continue;
        double s = -inf;
        while (k >= 0) {
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = k == 0 ? -inf : s;
        z[k + 1] = inf;
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), inf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double dq = q - v[j];
        d[q] = dq * dq + f[v[j]];
    }
}

// Squared Euclidean distance from every pixel to the nearest set pixel.
std::vector<double> squared_distance_to(const std::vector<unsigned char>& mask, int width, int height) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> grid(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) grid[i] = mask[i] ? 0.0 : inf;
    const int longest = std::max(width, height);
    std::vector<double> f(longest), d(longest), z(longest + 1);
    std::vector<int> v(longest);
    for (int c = 0; c < width; ++c) {
        f.resize(height);
        d.resize(height);
        for (int r = 0; r < height; ++r) f[r] = grid[static_cast<std::size_t>(r) * width + c];
        distance_transform_1d(f, d, v, z);
        for (int r = 0; r < height; ++r) grid[static_cast<std::size_t>(r) * width + c] = d[r];
    }
    for (int r = 0; r < height; ++r) {
        f.assign(grid.begin() + static_cast<std::ptrdiff_t>(r) * width,
                 grid.begin() + static_cast<std::ptrdiff_t>(r + 1) * width);
        d.resize(width);
        distance_transform_1d(f, d, v, z);
        std::copy(d.begin(), d.end(), grid.begin() + static_cast<std::ptrdiff_t>(r) * width);
    }
    return grid;
}

double min_mask_distance(const RegionPartition& p) {
    std::vector<std::pair<int, int>> pos, neg;
    for (int r = 0; r < p.height; ++r) {
        for (int c = 0; c < p.width; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * p.width + c;
            if (p.positive[i]) pos.emplace_back(r, c);
            if (p.negative[i]) neg.emplace_back(r, c);
        }
    }
    if (pos.empty() || neg.empty()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    if (pos.size() < kBruteForceLimit && neg.size() < kBruteForceLimit) {
        for (const auto& [r1, c1] : pos) {
            for (const auto& [r2, c2] : neg) {
                const double dr = r1 - r2;
                const double dc = c1 - c2;
                best = std::min(best, dr * dr + dc * dc);
            }
        }
    } else {
        const auto dist = squared_distance_to(p.positive, p.width, p.height);
        for (const auto& [r, c] : neg) best = std::min(best, dist[static_cast<std::size_t>(r) * p.width + c]);
    }
    return std::sqrt(best);
}

}  // namespace

std::vector<double> sampled_gaussian(double sigma) {
    check_sigma(sigma);
    const auto g = gaussian_1d(sigma);
    const std::size_t n = g.size();
    std::vector<double> out(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) out[r * n + c] = g[r] * g[c];
    }
    return out;
}

OrientedFilter oriented_filter(double sigma, double alpha) {
    check_sigma(sigma);
    const auto gauss = sampled_gaussian(sigma);
    OrientedFilter f;
    f.sigma = sigma;
    f.alpha = alpha;
    f.gaussian_radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int radius = f.gaussian_radius;
    const int gside = 2 * radius + 1;
    auto n_at = [&](int dv, int du) {
        if (std::abs(dv) > radius || std::abs(du) > radius) return 0.0;
        return gauss[static_cast<std::size_t>((dv + radius) * gside + (du + radius))];
    };
    const double cu = std::cos(alpha);
    const double cv = std::sin(alpha);
    const int half = f.half();
    f.taps.resize(static_cast<std::size_t>(f.side()) * f.side());
    for (int dv = -half; dv <= half; ++dv) {
        for (int du = -half; du <= half; ++du) {
            const double d_u = 0.5 * (n_at(dv, du + 1) - n_at(dv, du - 1));
            const double d_v = 0.5 * (n_at(dv + 1, du) - n_at(dv - 1, du));
            f.taps[static_cast<std::size_t>((dv + half) * f.side() + (du + half))] = cu * d_u + cv * d_v;
        }
    }
    return f;
}

ResponseMap linear_response(const GrayImage& img, const OrientedFilter& f) {
    const int half = f.half();
    check_fits(img, half);
    const int side = f.side();
    ResponseMap out{img.width() - 2 * half, img.height() - 2 * half, half, {}};
    out.values.assign(static_cast<std::size_t>(out.width) * out.height, 0.0);
    const auto x = img.values();
    const std::ptrdiff_t w = img.width();
    // Taps built by oriented_filter are bitwise odd (the sampled Gaussian is
    // exactly symmetric), so opposite taps share one multiply and flat
    // regions cancel to an exact zero.
    const std::size_t n = f.taps.size();
    bool odd = true;
    for (std::size_t k = 0; k < n && odd; ++k) odd = f.taps[k] == -f.taps[n - 1 - k];

    for (int i = 0; i < out.height; ++i) {
        for (int j = 0; j < out.width; ++j) {
            // Tap (dv, du) meets x(p - d) for p = (i + half, j + half).
            const double* centre = x.data() + static_cast<std::ptrdiff_t>(i + half) * w + (j + half);
            double acc = 0.0;
            if (odd) {
                for (std::size_t k = 0; k < n / 2; ++k) {
                    const std::ptrdiff_t dv = static_cast<std::ptrdiff_t>(k) / side - half;
                    const std::ptrdiff_t du = static_cast<std::ptrdiff_t>(k) % side - half;
                    const std::ptrdiff_t shift = dv * w + du;
                    acc += f.taps[k] * (centre[-shift] - centre[shift]);
                }
            } else {
                for (int a = 0; a < side; ++a) {
                    const double* tap_row = f.taps.data() + static_cast<std::size_t>(a) * side;
                    const double* img_row = centre - static_cast<std::ptrdiff_t>(a - half) * w + half;
                    for (int b = 0; b < side; ++b) acc += tap_row[b] * img_row[-b];
                }
            }
            out.values[static_cast<std::size_t>(i) * out.width + j] = acc;
        }
    }
    return out;
}

ResponseMap relu_response(const GrayImage& img, const OrientedFilter& f) {
    ResponseMap out = linear_response(img, f);
    for (double& v : out.values) v = std::max(0.0, v);
    return out;
}

ResponseMap histogram_side(const GrayImage& img, double sigma, double alpha) {
    check_sigma(sigma);
    const auto g = gaussian_1d(sigma);
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int half = radius + 1;
    check_fits(img, half);

    const PolarGradient polar = to_polar(compute_gradient(img));
    const int w = img.width();
    const int h = img.height();
    std::vector<double> rectified(polar.size());
    for (std::size_t i = 0; i < rectified.size(); ++i) {
        rectified[i] = polar.magnitude[i] * std::max(0.0, std::cos(polar.angle[i] - alpha));
    }

    // Separable smoothing: columns of the valid band first, then rows.
    ResponseMap out{w - 2 * half, h - 2 * half, half, {}};
    std::vector<double> tmp(static_cast<std::size_t>(out.height) * w, 0.0);
    for (int i = 0; i < out.height; ++i) {
        const int r = i + half;
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int q = -radius; q <= radius; ++q) {
                acc += g[q + radius] * rectified[static_cast<std::size_t>(r - q) * w + c];
            }
            tmp[static_cast<std::size_t>(i) * w + c] = acc;
        }
    }
    out.values.assign(static_cast<std::size_t>(out.width) * out.height, 0.0);
    for (int i = 0; i < out.height; ++i) {
        for (int j = 0; j < out.width; ++j) {
            const int c = j + half;
            double acc = 0.0;
            for (int q = -radius; q <= radius; ++q) acc += g[q + radius] * tmp[static_cast<std::size_t>(i) * w + (c - q)];
            out.values[static_cast<std::size_t>(i) * out.width + j] = acc;
        }
    }
    return out;
}

std::size_t RegionPartition::positive_count() const noexcept {
    return static_cast<std::size_t>(std::count(positive.begin(), positive.end(), 1));
}

std::size_t RegionPartition::negative_count() const noexcept {
    return static_cast<std::size_t>(std::count(negative.begin(), negative.end(), 1));
}

RegionPartition partition_regions(const GrayImage& img, double alpha, double magnitude_fraction) {
    if (!(magnitude_fraction >= 0.0)) throw std::invalid_argument("partition_regions: fraction must be >= 0");
    const GradientField grad = compute_gradient(img);
    RegionPartition p;
    p.alpha = alpha;
    p.width = img.width();
    p.height = img.height();
    p.positive.assign(img.size(), 0);
    p.negative.assign(img.size(), 0);
    double peak = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) peak = std::max(peak, std::hypot(grad.gx[i], grad.gy[i]));
    if (peak == 0.0) return p;
    p.threshold = magnitude_fraction * peak;
    const double cu = std::cos(alpha);
    const double cv = std::sin(alpha);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double proj = grad.gx[i] * cu + grad.gy[i] * cv;
        if (proj > p.threshold) p.positive[i] = 1;
        if (proj < -p.threshold) p.negative[i] = 1;
    }
    p.min_distance = min_mask_distance(p);
    return p;
}

double relative_l2_error(const ResponseMap& a, const ResponseMap& b) {
    if (a.width != b.width || a.height != b.height || a.values.size() != b.values.size()) {
        throw std::invalid_argument("relative_l2_error: response maps differ in shape");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double diff = a.values[i] - b.values[i];
        num += diff * diff;
        den += b.values[i] * b.values[i];
    }
    if (num == 0.0) return 0.0;
    return std::sqrt(num / den);
}

std::vector<EquivalenceRow> equivalence_report(const GrayImage& img, const std::vector<double>& sigmas,
                                               const std::vector<double>& alphas, double magnitude_fraction,
                                               int threads) {
    std::vector<double> distances(alphas.size());
    parallel_for(alphas.size(), threads, [&](std::size_t a) {
        distances[a] = partition_regions(img, alphas[a], magnitude_fraction).min_distance;
    });
    std::vector<EquivalenceRow> rows(sigmas.size() * alphas.size());
    parallel_for(rows.size(), threads, [&](std::size_t k) {
        const double sigma = sigmas[k / alphas.size()];
        const std::size_t a = k % alphas.size();
        const auto lhs = relu_response(img, oriented_filter(sigma, alphas[a]));
        const auto rhs = histogram_side(img, sigma, alphas[a]);
        rows[k] = {sigma, alphas[a], distances[a], relative_l2_error(lhs, rhs), sigma <= distances[a]};
    });
    return rows;
}

void write_csv(std::ostream& out, const std::vector<EquivalenceRow>& rows) {
    out << "sigma,alpha,d_alpha,rel_error,within_bound\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", r.sigma, r.alpha, r.d_alpha, r.rel_error,
                      r.within_bound ? 1 : 0);
        out << buf;
    }
}

std::vector<KernelPair> caption_kernel_pairs() { return {{1.0, 1.0 / 5}, {1.0 / 5, 1.0 / 9}, {1.0 / 9, 1.0 / 13}}; }

std::vector<KernelDistance> cosine_power_vs_angular_gaussian(const std::vector<KernelPair>& pairs, int grid) {
    if (grid < 2) throw std::invalid_argument("cosine_power_vs_angular_gaussian: grid too small");
    std::vector<KernelDistance> out;
    for (const auto& p : pairs) {
        if (!(p.cosine_epsilon > 0.0) || !(p.gaussian_epsilon > 0.0)) {
            throw std::invalid_argument("cosine_power_vs_angular_gaussian: parameters must be positive");
        }
        double sup = 0.0;
        for (int i = 0; i < grid; ++i) {
            const double a = -std::numbers::pi + 2.0 * std::numbers::pi * i / grid;
            const double cosine = std::pow(std::max(0.0, std::cos(a)), 1.0 / p.cosine_epsilon);
            const double gauss = std::exp(-a * a / (2.0 * p.gaussian_epsilon));
            sup = std::max(sup, std::abs(cosine - gauss));
        }
        out.push_back({p, sup});
    }
    return out;
}

}  // namespace invdesc
