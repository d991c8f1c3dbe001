/**
 * @file contrastinv.hpp
 * @brief Contrast-marginalized orientation likelihood p(alpha | grad x).
 *
 * The test gradient is modelled as an isotropic Gaussian around the training
 * gradient (per-component standard deviation epsilon). Integrating its norm
 * out in polar form leaves a density over the test orientation alone, which
 * is invariant to monotonic contrast changes of the test image.
 */
#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <variant>
#include <vector>

#include "invdesc/imagecore.hpp"

namespace invdesc {

/// Raised when joint normalization meets a training patch with zero gradient energy.
class DegeneratePatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Noise of fixed scale epsilon, in intensity-gradient units.
struct FixedNoise {
    double epsilon = 0.5;
};

/// Noise proportional to the training gradient norm; epsilon is dimensionless.
struct ProportionalNoise {
    double epsilon = 0.5;
};

/// Noise variance sigma^2 times the mean squared gradient norm of the training patch.
struct JointNormalizedNoise {
    double sigma = 0.5;
    double rho_hat_sq = 1.0;
};

using NoiseModel = std::variant<FixedNoise, ProportionalNoise, JointNormalizedNoise>;

/// Throws std::invalid_argument unless every scale parameter is positive and finite.
void validate(const NoiseModel& model);

/// Orientation and norm of one training gradient.
struct PolarSample {
    double angle = 0.0;
    double magnitude = 0.0;
};

struct LikelihoodCurve {
    std::vector<double> alphas;
    std::vector<double> values;
    NoiseModel model;
    PolarSample grad_x;

    /// Periodic trapezoid rule over one period.
    double integral() const;
};

/// Standard normal CDF via erfc; absolute error well under 1e-12.
double std_normal_cdf(double a);

/// M(m, eps) = integral over [0, inf) of rho * N(rho; m, eps^2).
double half_gaussian_moment(double m, double eps);

/// log M(m, eps), accurate where M itself underflows (m / eps very negative).
double log_half_gaussian_moment(double m, double eps);

/// Density over the test orientation alpha given one training gradient.
double contrast_marginal(double alpha, PolarSample grad_x, const NoiseModel& model);

/// Natural log of contrast_marginal, evaluated without forming the product.
double log_contrast_marginal(double alpha, PolarSample grad_x, const NoiseModel& model);

/// Uniform grid alpha_i = -pi + 2 pi i / n_grid, n_grid >= 8.
LikelihoodCurve likelihood_curve(PolarSample grad_x, const NoiseModel& model, int n_grid);

/// Mean squared gradient norm of a field.
double mean_squared_gradient(const PolarGradient& grad);

/// Joint-normalized model for a training field; throws DegeneratePatchError if flat.
JointNormalizedNoise joint_normalized_for(const PolarGradient& grad_x, double sigma);

/// Sum over pixels of log p(alpha_i | grad x_i). Under JointNormalizedNoise the
/// rho_hat_sq of `model` is replaced by the training field's own mean squared norm.
double patch_log_likelihood(const PolarGradient& alpha_field, const PolarGradient& grad_field,
                            const NoiseModel& model);

/// CSV with header `alpha,value`, 17 significant digits.
void write_csv(std::ostream& out, const LikelihoodCurve& curve);

}  // namespace invdesc
