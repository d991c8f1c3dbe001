/**
 * @file reluequiv.hpp
 * @brief Rectified oriented-derivative responses versus smoothed rectified
 * orientation histograms.
 *
 * A ReLU on a Gaussian-derivative filter, max(0, G * x), matches the
 * histogram-style response N * max(0, <grad x, r(alpha)>) wherever the
 * projected gradient keeps one sign over the filter support. This module
 * builds both sides on the integer grid and measures how far they drift
 * apart as the support grows past the gap between opposite-sign regions.
 */
#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "invdesc/imagecore.hpp"

namespace invdesc {

/// Directional derivative filter with orientation r(alpha) = (cos alpha, sin alpha).
///
/// The taps are central differences (along u and v, projected on r) of the
/// sampled Gaussian truncated at radius ceil(3 sigma) and normalized to unit
/// sum. Convolving with them therefore equals smoothing the central-difference
/// gradient, so the tap sum vanishes and a unit ramp along r responds with 1.
struct OrientedFilter {
    double sigma = 0.0;
    double alpha = 0.0;
    /// Gaussian radius ceil(3 sigma); the taps reach one pixel further.
    int gaussian_radius = 0;
    /// Row-major, side() x side(), centre at (half(), half()).
    std::vector<double> taps;

    int half() const noexcept { return gaussian_radius + 1; }
    int side() const noexcept { return 2 * half() + 1; }
    double at(int dv, int du) const {
        return taps[static_cast<std::size_t>((dv + half()) * side() + (du + half()))];
    }
};

/// Throws std::invalid_argument for sigma < 0.5.
OrientedFilter oriented_filter(double sigma, double alpha);

/// Truncated, unit-sum sampled Gaussian of radius ceil(3 sigma), row-major.
std::vector<double> sampled_gaussian(double sigma);

/// Valid-region response. Entry (i, j) belongs to image pixel
/// (i + offset, j + offset).
struct ResponseMap {
    int width = 0;
    int height = 0;
    int offset = 0;
    std::vector<double> values;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
};

/// Unrectified G * x (true convolution) over pixels whose whole support is inside.
ResponseMap linear_response(const GrayImage& img, const OrientedFilter& f);
/// max(0, G * x).
ResponseMap relu_response(const GrayImage& img, const OrientedFilter& f);

/// sum_q N(q) |grad x(p - q)| max(0, cos(angle(p - q) - alpha)) on the same
/// valid region as relu_response for oriented_filter(sigma, alpha).
ResponseMap histogram_side(const GrayImage& img, double sigma, double alpha);

struct RegionPartition {
    double alpha = 0.0;
    int width = 0;
    int height = 0;
    /// Row-major masks of <grad x, r> above +threshold and below -threshold.
    std::vector<unsigned char> positive;
    std::vector<unsigned char> negative;
    double threshold = 0.0;
    /// Smallest Euclidean pixel distance between the masks; infinity if one is empty.
    double min_distance = std::numeric_limits<double>::infinity();

    std::size_t positive_count() const noexcept;
    std::size_t negative_count() const noexcept;
};

/// Threshold is `magnitude_fraction` of the largest gradient norm. Distances
/// use a brute-force pair search for small masks and an exact squared
/// Euclidean distance transform otherwise.
RegionPartition partition_regions(const GrayImage& img, double alpha, double magnitude_fraction = 0.01);

/// ||a - b|| / ||b|| over matching maps; 0 when both vanish.
double relative_l2_error(const ResponseMap& a, const ResponseMap& b);

struct EquivalenceRow {
    double sigma;
    double alpha;
    double d_alpha;
    double rel_error;
    bool within_bound;  // sigma <= d_alpha
};

/// Rows in (sigma, alpha) grid order; rows are independent and are computed
/// concurrently when threads > 1.
std::vector<EquivalenceRow> equivalence_report(const GrayImage& img, const std::vector<double>& sigmas,
                                               const std::vector<double>& alphas,
                                               double magnitude_fraction = 0.01, int threads = 1);

/// CSV `sigma,alpha,d_alpha,rel_error,within_bound`.
void write_csv(std::ostream& out, const std::vector<EquivalenceRow>& rows);

struct KernelPair {
    /// Cosine exponent is 1 / cosine_epsilon.
    double cosine_epsilon;
    /// Dispersion of the angular Gaussian exp(-alpha^2 / (2 gaussian_epsilon)).
    double gaussian_epsilon;
};

struct KernelDistance {
    KernelPair pair;
    double sup_distance;
};

/// The three published comparison pairs: cosine 1, 1/5, 1/9 against Gaussian 1/5, 1/9, 1/13.
std::vector<KernelPair> caption_kernel_pairs();

/// sup over alpha_i = -pi + 2 pi i / grid of |max(0, cos a)^(1/eps_c) - exp(-a^2 / (2 eps_g))|.
std::vector<KernelDistance> cosine_power_vs_angular_gaussian(const std::vector<KernelPair>& pairs,
                                                             int grid = 2048);

}  // namespace invdesc
