/**
 * @file salcore.hpp
 * @brief Sampled anti-aliased likelihood over translation-scale windows.
 *
 * A group element g = (tx, ty, s) places a square sample window whose pixel
 * (r, c) reads the test image at (row, col) = (s r + ty, s c + tx). Each
 * sampled g_i is scored by local marginalization over a small stencil of
 * offsets (mean-pooling in the log domain) and the samples compete by a
 * max (max-pooling).
 */
#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "invdesc/contrastinv.hpp"
#include "invdesc/imagecore.hpp"

namespace invdesc {

struct GroupElement {
    double tx = 0.0;
    double ty = 0.0;
    double s = 1.0;

    static GroupElement identity() noexcept { return {}; }
    friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

/// (t, s) o (t', s') = (t + s t', s s').
GroupElement compose(const GroupElement& a, const GroupElement& b) noexcept;
/// Throws std::invalid_argument unless s is positive and all fields finite.
void validate(const GroupElement& g);

/// True when the side x side window of g lies inside [0, h-1] x [0, w-1].
bool window_inside(const GrayImage& img, const GroupElement& g, int side) noexcept;

/// Bilinearly resampled window; throws std::out_of_range if it escapes the image.
Patch apply_group(const GrayImage& y, const GroupElement& g, int side);

/// Lattice of windows: translations every `stride` pixels (starting at
/// `margin`) for each scale base^(k - (scale_steps - 1) / 2), k < scale_steps.
struct RegularSampling {
    int stride = 8;
    int scale_steps = 1;
    double scale_base = 1.1;
    int margin = 0;
};

/// Difference-of-Gaussians extrema over translation and scale. Gaussian
/// levels sit at sigma0 * step^k; a detection at level sigma becomes a window
/// of scale sigma / sigma0 centred on the extremum.
struct AdaptiveSampling {
    int max_samples = 64;
    double sigma0 = 1.6;
    double step = 1.2599210498948732;  // 2^(1/3)
    int levels = 3;
    double relative_threshold = 0.03;
    double absolute_threshold = 1e-6;
};

using SamplingScheme = std::variant<RegularSampling, AdaptiveSampling>;

/// Group samples for windows of `side` pixels. Regular yields the full
/// lattice in (scale, row, col) order; adaptive yields in-bounds extrema by
/// decreasing |DoG| response, capped at max_samples.
std::vector<GroupElement> sample_group(const SamplingScheme& scheme, const GrayImage& img, int side);

struct PoolingWeights {
    std::vector<GroupElement> offsets;
    std::vector<double> weights;
};

/// Throws std::invalid_argument on misaligned, negative or unnormalized weights.
void validate(const PoolingWeights& w);

/// 3x3 translations of +-translation_step px crossed with scales {1/f, 1, f},
/// Gaussian weights in (dx, dy, log s). Scale offsets keep the window centre
/// fixed, so they depend on the window side.
PoolingWeights default_pooling_weights(int side, double translation_step = 1.0, double scale_factor = 1.1);

/// Degenerate stencil holding only the identity.
PoolingWeights identity_pooling();

struct PooledScore {
    double score;
    /// Per-offset log-likelihoods of the surviving offsets, in stencil order.
    std::vector<double> offset_scores;
    /// Renormalized weights of the surviving offsets.
    std::vector<double> weights;
};

/// log sum_k w_k exp(L(g_i o offset_k)). Offsets whose window escapes the image
/// are dropped and the rest renormalized, provided at least half the stencil
/// survives; otherwise std::out_of_range.
PooledScore pooled_score(const Patch& x, const GrayImage& y, const GroupElement& g, const PoolingWeights& w,
                         const NoiseModel& model);

double antialiased_score(const Patch& x, const GrayImage& y, const GroupElement& g, const PoolingWeights& w,
                         const NoiseModel& model);

struct SalSample {
    GroupElement g;
    double score;
};

struct SalResult {
    std::vector<SalSample> samples;
    std::size_t best_index = 0;
    double best_score = 0.0;
};

/// Scores every sample (concurrently when threads > 1) and max-pools;
/// ties resolve to the lowest index. Throws std::invalid_argument when empty.
SalResult sal_likelihood(const Patch& x, const GrayImage& y, const std::vector<GroupElement>& samples,
                         const PoolingWeights& w, const NoiseModel& model, int threads = 1);

SalResult sal_likelihood(const Patch& x, const GrayImage& y, const SamplingScheme& scheme,
                         const PoolingWeights& w, const NoiseModel& model, int threads = 1);

/// CSV `index,tx,ty,s,score`.
void write_csv(std::ostream& out, const SalResult& result);
/// One-line JSON summary of the argmax.
std::string summary_json(const SalResult& result);

}  // namespace invdesc
