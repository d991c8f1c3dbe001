/**
 * @file siftlike.hpp
 * @brief SIFT-family approximations of the contrast-marginalized likelihood.
 *
 * Angular kernels, the sift integrand, gradient-orientation histograms, the
 * 4x4xB descriptor, DSP-SIFT scale pooling, clamping and rotation
 * canonization by dominant orientations.
 *
 * Histograms store mass per unit angle: a bin value times the bin width
 * 2 pi / B is the mass of that bin, so histograms compare directly with
 * continuous densities over the circle.
 */
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "invdesc/imagecore.hpp"

namespace invdesc {

/// Triangle of half-width epsilon radians and unit integral.
struct BilinearKernel {
    double epsilon;
};
/// exp(-sin^2(alpha) / (2 epsilon^2)).
struct TildeGaussianKernel {
    double epsilon;
};
/// max(0, cos alpha)^inv_power.
struct RectifiedCosinePowerKernel {
    double inv_power;
};
/// exp(-alpha^2 / (2 epsilon^2)) on the wrapped branch.
struct AngularGaussianKernel {
    double epsilon;
};

using Kernel =
    std::variant<BilinearKernel, TildeGaussianKernel, RectifiedCosinePowerKernel, AngularGaussianKernel>;

double eval_kernel(const Kernel& k, double alpha);

/// kappa_eps(alpha - beta) * gamma with the bilinear kernel.
double sift_integrand(double alpha, double beta, double gamma, double epsilon);

struct OrientationHistogram {
    std::vector<double> values;

    int bins() const noexcept { return static_cast<int>(values.size()); }
    double bin_width() const noexcept;
    /// 2 pi b / B - pi.
    double bin_center(int b) const noexcept;
    /// Bin-width-weighted sum, i.e. the integral over the circle.
    double total_mass() const noexcept;
};

double bin_center(int b, int bins) noexcept;

struct CellBounds {
    int row = 0;
    int col = 0;
    int rows = 0;
    int cols = 0;
};

enum class SpatialWeighting { Gaussian, Bilinear, Uniform };

/// mass[b] = sum_p w(p) k(center_b - angle(p)) |grad(p)| over the cell's pixels.
/// Gaussian weights are exp(-d^2 / (2 sigma^2)) about the cell centre; bilinear
/// weights are the tent product with half-width sigma; uniform weights are 1
/// and ignore sigma.
OrientationHistogram accumulate_histogram(const PolarGradient& polar, const CellBounds& cell, int bins,
                                          const Kernel& kernel, double spatial_sigma,
                                          SpatialWeighting weighting = SpatialWeighting::Gaussian);

/// Clips every bin at tau_frac * max and renormalizes to unit integral.
OrientationHistogram clamp_normalize(const OrientationHistogram& h, double tau_frac);

struct SiftParams {
    int bins = 8;
    int grid = 4;
    /// Defaults to a bilinear kernel one bin wide.
    std::optional<Kernel> kernel;
    /// Defaults to half the cell side.
    std::optional<double> spatial_sigma;
    SpatialWeighting weighting = SpatialWeighting::Gaussian;
    double presmooth_sigma = 0.0;

    Kernel resolved_kernel() const;
    double resolved_spatial_sigma(int cell_side) const;
};

struct SiftDescriptor {
    int grid = 4;
    int bins = 8;
    /// (cell_row * grid + cell_col) * bins + bin.
    std::vector<double> values;
    SiftParams params;

    double at(int cell_row, int cell_col, int bin) const {
        return values[static_cast<std::size_t>((cell_row * grid + cell_col) * bins + bin)];
    }
};

SiftDescriptor sift_descriptor(const Patch& patch, const SiftParams& params = {});

/// Scale samples with normalized weights proportional to rate * exp(-rate * s).
struct ScalePrior {
    std::vector<double> scales;
    std::vector<double> weights;
    double rate = 1.0;
};

ScalePrior make_exponential_prior(std::vector<double> scales, double rate);
/// Scales 2^(k/2) for k in [-2, 2], rate 1.
ScalePrior default_scale_prior();
/// Throws std::invalid_argument on empty, nonpositive or unnormalized priors.
void validate(const ScalePrior& prior);

/// Resamples a square window of `source_side` pixels centred at (row, col)
/// onto an `out_side` grid by bilinear interpolation.
GrayImage resample_window(const GrayImage& parent, double center_row, double center_col,
                          double source_side, int out_side);

/// Prior-weighted sum of single-scale descriptors; scale s pools the window of
/// side s * patch.side around the patch centre, resampled to patch.side pixels.
SiftDescriptor dsp_sift_descriptor(const GrayImage& parent, const Patch& patch, const ScalePrior& prior,
                                   const SiftParams& params = {});

/// Parabolically refined peaks of the magnitude-weighted orientation histogram
/// of the patch, strongest first; empty when the patch carries no gradient.
std::vector<double> dominant_orientations(const Patch& patch, int max_count, double prominence = 0.8,
                                          int bins = 36);

/// One CSV row of grid * grid * bins values, 17 significant digits.
void write_csv_row(std::ostream& out, const SiftDescriptor& d);
/// JSON object with the values and the parameters that produced them.
std::string to_json(const SiftDescriptor& d);

}  // namespace invdesc
