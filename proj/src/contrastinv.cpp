#include "invdesc/contrastinv.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <type_traits>

namespace invdesc {
namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;  // 1 / sqrt(2 pi)

// Below this standardized mean the closed form loses digits to cancellation
// and the asymptotic series takes over.
constexpr double kAsymptoticCutoff = -10.0;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// g(t) = phi(t) + t Psi(t), the standardized half-Gaussian first moment.
double unit_moment(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t) + t * std_normal_cdf(t); }

// log g(t) for t < kAsymptoticCutoff:
// g(-x) = phi(x) * sum_k (-1)^k (2k+1)!! / x^(2k+2)
double log_unit_moment_tail(double t) {
    const double x = -t;
    const double inv_x2 = 1.0 / (x * x);
    double term = inv_x2;
    double sum = term;
    for (int k = 1; k < 40; ++k) {
        const double next = -term * (2 * k + 1) * inv_x2;
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-18 * sum) break;
    }
    return std::log(kInvSqrt2Pi) - 0.5 * x * x + std::log(sum);
}

struct EffectiveParams {
    double gamma;
    double eps;
};

EffectiveParams effective(PolarSample grad_x, const NoiseModel& model) {
    validate(model);
    if (!(grad_x.magnitude >= 0.0) || !std::isfinite(grad_x.magnitude)) {
        throw std::invalid_argument("contrast_marginal: gradient magnitude must be finite and >= 0");
    }
    return std::visit(
        [&](const auto& m) -> EffectiveParams {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FixedNoise>) {
                return {grad_x.magnitude, m.epsilon};
            } else if constexpr (std::is_same_v<T, ProportionalNoise>) {
                return {1.0, m.epsilon};
            } else {
                return {grad_x.magnitude / std::sqrt(m.rho_hat_sq), m.sigma};
            }
        },
        model);
}

}  // namespace

void validate(const NoiseModel& model) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, JointNormalizedNoise>) {
                if (!positive_finite(m.sigma) || !positive_finite(m.rho_hat_sq)) {
                    throw std::invalid_argument("JointNormalizedNoise: sigma and rho_hat_sq must be positive");
                }
            } else {
                if (!positive_finite(m.epsilon)) {
                    throw std::invalid_argument("noise epsilon must be positive and finite");
                }
            }
        },
        model);
}

double std_normal_cdf(double a) { return 0.5 * std::erfc(-a / std::numbers::sqrt2); }

double half_gaussian_moment(double m, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("half_gaussian_moment: eps must be positive");
    const double t = m / eps;
    if (t < kAsymptoticCutoff) return eps * std::exp(log_unit_moment_tail(t));
    return eps * kInvSqrt2Pi * std::exp(-0.5 * t * t) + m * std_normal_cdf(t);
}

double log_half_gaussian_moment(double m, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("log_half_gaussian_moment: eps must be positive");
    const double t = m / eps;
    if (t < kAsymptoticCutoff) return std::log(eps) + log_unit_moment_tail(t);
    return std::log(eps) + std::log(unit_moment(t));
}

double contrast_marginal(double alpha, PolarSample grad_x, const NoiseModel& model) {
    const auto [gamma, eps] = effective(grad_x, model);
    const double delta = alpha - grad_x.angle;
    const double s = std::sin(delta) * gamma;
    const double m = std::cos(delta) * gamma;
    return kInvSqrt2Pi / eps * std::exp(-0.5 * s * s / (eps * eps)) * half_gaussian_moment(m, eps);
}

double log_contrast_marginal(double alpha, PolarSample grad_x, const NoiseModel& model) {
    const auto [gamma, eps] = effective(grad_x, model);
    const double delta = alpha - grad_x.angle;
    const double s = std::sin(delta) * gamma;
    const double m = std::cos(delta) * gamma;
    return std::log(kInvSqrt2Pi / eps) - 0.5 * s * s / (eps * eps) + log_half_gaussian_moment(m, eps);
}

double LikelihoodCurve::integral() const {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * 2.0 * std::numbers::pi / static_cast<double>(values.size());
}

LikelihoodCurve likelihood_curve(PolarSample grad_x, const NoiseModel& model, int n_grid) {
    if (n_grid < 8) throw std::invalid_argument("likelihood_curve: n_grid must be >= 8");
    validate(model);
    LikelihoodCurve curve{{}, {}, model, grad_x};
    curve.alphas.resize(n_grid);
    curve.values.resize(n_grid);
    for (int i = 0; i < n_grid; ++i) {
        const double alpha = -std::numbers::pi + 2.0 * std::numbers::pi * i / n_grid;
        curve.alphas[i] = alpha;
        curve.values[i] = contrast_marginal(alpha, grad_x, model);
    }
    return curve;
}

double mean_squared_gradient(const PolarGradient& grad) {
    if (grad.magnitude.empty()) return 0.0;
    double sum = 0.0;
    for (double g : grad.magnitude) sum += g * g;
    return sum / static_cast<double>(grad.magnitude.size());
}

JointNormalizedNoise joint_normalized_for(const PolarGradient& grad_x, double sigma) {
    const double rho_hat_sq = mean_squared_gradient(grad_x);
    if (!(rho_hat_sq > 0.0)) {
        throw DegeneratePatchError("joint normalization undefined: training patch has zero gradient");
    }
    return {sigma, rho_hat_sq};
}

double patch_log_likelihood(const PolarGradient& alpha_field, const PolarGradient& grad_field,
                            const NoiseModel& model) {
    if (alpha_field.width != grad_field.width || alpha_field.height != grad_field.height ||
        alpha_field.size() != grad_field.size()) {
        throw std::invalid_argument("patch_log_likelihood: field dimensions differ");
    }
    NoiseModel effective_model = model;
    if (const auto* joint = std::get_if<JointNormalizedNoise>(&model)) {
        effective_model = joint_normalized_for(grad_field, joint->sigma);
    }
    validate(effective_model);
    double total = 0.0;
    for (std::size_t i = 0; i < alpha_field.size(); ++i) {
        total += log_contrast_marginal(alpha_field.angle[i],
                                       {grad_field.angle[i], grad_field.magnitude[i]}, effective_model);
    }
    return total;
}

void write_csv(std::ostream& out, const LikelihoodCurve& curve) {
    out << "alpha,value\n";
    char buf[64];
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", curve.alphas[i], curve.values[i]);
        out << buf;
    }
}

}  // namespace invdesc
