#include "invdesc/salcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "invdesc/parallel.hpp"

namespace invdesc {
namespace {

constexpr std::size_t kNoWindow = static_cast<std::size_t>(-1);

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double log_sum_exp(const std::vector<double>& log_terms) {
    const double peak = *std::max_element(log_terms.begin(), log_terms.end());
    if (!std::isfinite(peak)) return peak;
    double sum = 0.0;
    for (double t : log_terms) sum += std::exp(t - peak);
    return peak + std::log(sum);
}

std::vector<GroupElement> regular_lattice(const RegularSampling& r, const GrayImage& img, int side) {
    if (r.stride < 1 || r.scale_steps < 1 || !(r.scale_base > 0.0) || r.margin < 0) {
        throw std::invalid_argument("RegularSampling: stride and scale steps must be >= 1, base > 0");
    }
    std::vector<GroupElement> out;
    for (int k = 0; k < r.scale_steps; ++k) {
        const double s = std::pow(r.scale_base, k - 0.5 * (r.scale_steps - 1));
        const double extent = s * (side - 1);
        for (int ty = r.margin; ty + extent <= img.height() - 1 - r.margin; ty += r.stride) {
            for (int tx = r.margin; tx + extent <= img.width() - 1 - r.margin; tx += r.stride) {
                out.push_back({static_cast<double>(tx), static_cast<double>(ty), s});
            }
        }
    }
    if (out.empty()) throw std::invalid_argument("sample_group: image too small for a single sample window");
    return out;
}

std::vector<GroupElement> dog_extrema(const AdaptiveSampling& a, const GrayImage& img, int side) {
    if (a.levels < 1 || !(a.sigma0 > 0.0) || !(a.step > 1.0) || a.max_samples < 0) {
        throw std::invalid_argument("AdaptiveSampling: need levels >= 1, sigma0 > 0, step > 1");
    }
    const int w = img.width();
    const int h = img.height();
    if (w < 3 || h < 3) return {};

    std::vector<GrayImage> gauss;
    for (int k = 0; k < a.levels + 3; ++k) gauss.push_back(gaussian_smooth(img, a.sigma0 * std::pow(a.step, k)));
    std::vector<std::vector<double>> dog(gauss.size() - 1, std::vector<double>(img.size()));
    double peak = 0.0;
    for (std::size_t k = 0; k < dog.size(); ++k) {
        const auto hi = gauss[k + 1].values();
        const auto lo = gauss[k].values();
        for (std::size_t i = 0; i < img.size(); ++i) {
            dog[k][i] = hi[i] - lo[i];
            peak = std::max(peak, std::abs(dog[k][i]));
        }
    }
    const double threshold = std::max(a.absolute_threshold, a.relative_threshold * peak);

    struct Detection {
        double strength;
        GroupElement g;
    };
    std::vector<Detection> found;
    for (int k = 1; k <= a.levels; ++k) {
        const double s = std::pow(a.step, k);
        for (int r = 1; r < h - 1; ++r) {
            for (int c = 1; c < w - 1; ++c) {
                const double v = dog[k][static_cast<std::size_t>(r) * w + c];
                if (std::abs(v) <= threshold) continue;
                bool is_max = true;
                bool is_min = true;
                for (int dk = -1; dk <= 1 && (is_max || is_min); ++dk) {
                    for (int dr = -1; dr <= 1; ++dr) {
                        for (int dc = -1; dc <= 1; ++dc) {
                            if (dk == 0 && dr == 0 && dc == 0) continue;
                            const double n = dog[k + dk][static_cast<std::size_t>(r + dr) * w + (c + dc)];
                            is_max = is_max && v > n;
                            is_min = is_min && v < n;
                        }
                    }
                }
                if (!is_max && !is_min) continue;
                const double half = 0.5 * s * (side - 1);
                const GroupElement g{c - half, r - half, s};
                if (window_inside(img, g, side)) found.push_back({std::abs(v), g});
            }
        }
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Detection& x, const Detection& y) { return x.strength > y.strength; });
    if (found.size() > static_cast<std::size_t>(a.max_samples)) found.resize(a.max_samples);
    std::vector<GroupElement> out;
    out.reserve(found.size());
    for (const auto& d : found) out.push_back(d.g);
    return out;
}

double window_log_likelihood(const PolarGradient& train, const GrayImage& y, const GroupElement& h, int side,
                             const NoiseModel& model) {
    const PolarGradient test = to_polar(compute_gradient(apply_group(y, h, side).pixels));
    return patch_log_likelihood(test, train, model);
}

// Mean-pools the offsets for which `score_of(k, &score)` reports an in-bounds window.
template <class ScoreOf>
PooledScore pool(const PoolingWeights& w, ScoreOf&& score_of) {
    PooledScore out{0.0, {}, {}};
    double kept = 0.0;
    for (std::size_t k = 0; k < w.offsets.size(); ++k) {
        double score = 0.0;
        if (!score_of(k, &score)) continue;
        out.offset_scores.push_back(score);
        out.weights.push_back(w.weights[k]);
        kept += w.weights[k];
    }
    if (2 * out.offset_scores.size() < w.offsets.size() || !(kept > 0.0)) {
        throw std::out_of_range("antialiased_score: fewer than half of the pooling offsets fit in the image");
    }
    std::vector<double> terms(out.offset_scores.size());
    for (std::size_t k = 0; k < terms.size(); ++k) {
        out.weights[k] /= kept;
        terms[k] = std::log(out.weights[k]) + out.offset_scores[k];
    }
    out.score = log_sum_exp(terms);
    return out;
}

}  // namespace

GroupElement compose(const GroupElement& a, const GroupElement& b) noexcept {
    return {a.tx + a.s * b.tx, a.ty + a.s * b.ty, a.s * b.s};
}

void validate(const GroupElement& g) {
    if (!std::isfinite(g.tx) || !std::isfinite(g.ty) || !std::isfinite(g.s) || !(g.s > 0.0)) {
        throw std::invalid_argument("GroupElement: translation must be finite and scale positive");
    }
}

namespace {

constexpr double kPositionGrid = 1048576.0;  // 2^20

struct Axis {
    long long base;
    double frac;
};

struct AxisTap {
    int i0;
    int i1;
    double frac;
};

Axis split_axis(double t) {
    const double base = std::floor(t);
    return {static_cast<long long>(base), std::round((t - base) * kPositionGrid) / kPositionGrid};
}

// Neighbouring pixel indices and blend weight for base + frac + local; the
// clamp guards the far edge against the last ulp of s * (side - 1).
AxisTap axis_tap(const Axis& a, double local, int extent) {
    const double pos = a.frac + local;
    const double whole = std::floor(pos);
    long long i0 = a.base + static_cast<long long>(whole);
    double frac = pos - whole;
    if (i0 >= extent - 1) {
        i0 = extent - 1;
        frac = 0.0;
    }
    const int lo = static_cast<int>(i0);
    return {lo, frac > 0.0 ? lo + 1 : lo, frac};
}

}  // namespace

bool window_inside(const GrayImage& img, const GroupElement& g, int side) noexcept {
    const double extent = g.s * (side - 1);
    return g.tx >= 0.0 && g.ty >= 0.0 && g.tx + extent <= img.width() - 1 && g.ty + extent <= img.height() - 1;
}

Patch apply_group(const GrayImage& y, const GroupElement& g, int side) {
    validate(g);
    if (side < 1) throw std::invalid_argument("apply_group: side must be positive");
    if (!window_inside(y, g, side)) throw std::out_of_range("apply_group: window escapes the image");
    // Positions are split into an integer base and a local offset so that an
    // integer shift of the image reproduces every window bit for bit. The
    // fractional part is snapped to 2^-20 px, which absorbs the rounding that
    // composing with stencil offsets leaves at different magnitudes.
    const Axis rows = split_axis(g.ty);
    const Axis cols = split_axis(g.tx);
    std::vector<AxisTap> col_taps(side);
    for (int c = 0; c < side; ++c) col_taps[c] = axis_tap(cols, g.s * c, y.width());
    GrayImage out(side, side);
    for (int r = 0; r < side; ++r) {
        const AxisTap rt = axis_tap(rows, g.s * r, y.height());
        for (int c = 0; c < side; ++c) {
            const AxisTap& ct = col_taps[c];
            const double top = std::lerp(y.at(rt.i0, ct.i0), y.at(rt.i0, ct.i1), ct.frac);
            const double bottom = std::lerp(y.at(rt.i1, ct.i0), y.at(rt.i1, ct.i1), ct.frac);
            out.at(r, c) = std::lerp(top, bottom, rt.frac);
        }
    }
    return {{static_cast<int>(std::lround(g.ty)), static_cast<int>(std::lround(g.tx))}, side, std::move(out)};
}

std::vector<GroupElement> sample_group(const SamplingScheme& scheme, const GrayImage& img, int side) {
    if (side < 1) throw std::invalid_argument("sample_group: side must be positive");
    if (const auto* r = std::get_if<RegularSampling>(&scheme)) return regular_lattice(*r, img, side);
    return dog_extrema(std::get<AdaptiveSampling>(scheme), img, side);
}

void validate(const PoolingWeights& w) {
    if (w.offsets.empty() || w.offsets.size() != w.weights.size()) {
        throw std::invalid_argument("PoolingWeights: offsets and weights must be nonempty and aligned");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
        validate(w.offsets[i]);
        if (!(w.weights[i] >= 0.0) || !std::isfinite(w.weights[i])) {
            throw std::invalid_argument("PoolingWeights: weights must be finite and nonnegative");
        }
        sum += w.weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("PoolingWeights: weights must sum to 1");
}

PoolingWeights default_pooling_weights(int side, double translation_step, double scale_factor) {
    if (side < 1 || !(translation_step > 0.0) || !(scale_factor > 1.0)) {
        throw std::invalid_argument("default_pooling_weights: need side >= 1, step > 0, factor > 1");
    }
    const double centre = 0.5 * (side - 1);
    const double log_f = std::log(scale_factor);
    PoolingWeights w;
    double sum = 0.0;
    for (double s : {1.0 / scale_factor, 1.0, scale_factor}) {
        const double ls = std::log(s) / log_f;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                w.offsets.push_back({dx * translation_step + (1.0 - s) * centre,
                                     dy * translation_step + (1.0 - s) * centre, s});
                w.weights.push_back(std::exp(-0.5 * (dx * dx + dy * dy + ls * ls)));
                sum += w.weights.back();
            }
        }
    }
    for (double& v : w.weights) v /= sum;
    return w;
}

PoolingWeights identity_pooling() { return {{GroupElement::identity()}, {1.0}}; }

PooledScore pooled_score(const Patch& x, const GrayImage& y, const GroupElement& g, const PoolingWeights& w,
                         const NoiseModel& model) {
    validate(w);
    validate(g);
    const PolarGradient train = to_polar(compute_gradient(x.pixels));
    return pool(w, [&](std::size_t k, double* score) {
        const GroupElement h = compose(g, w.offsets[k]);
        if (!window_inside(y, h, x.side)) return false;
        *score = window_log_likelihood(train, y, h, x.side, model);
        return true;
    });
}

double antialiased_score(const Patch& x, const GrayImage& y, const GroupElement& g, const PoolingWeights& w,
                         const NoiseModel& model) {
    return pooled_score(x, y, g, w, model).score;
}

SalResult sal_likelihood(const Patch& x, const GrayImage& y, const std::vector<GroupElement>& samples,
                         const PoolingWeights& w, const NoiseModel& model, int threads) {
    if (samples.empty()) throw std::invalid_argument("sal_likelihood: empty sample set");
    validate(w);
    for (const auto& g : samples) validate(g);
    const PolarGradient train = to_polar(compute_gradient(x.pixels));

    // Neighbouring samples share pooled windows; score each distinct window once.
    std::map<std::tuple<double, double, double>, std::size_t> slot_of;
    std::vector<GroupElement> windows;
    std::vector<std::size_t> slots(samples.size() * w.offsets.size(), kNoWindow);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t k = 0; k < w.offsets.size(); ++k) {
            const GroupElement h = compose(samples[i], w.offsets[k]);
            if (!window_inside(y, h, x.side)) continue;
            const auto [it, fresh] = slot_of.try_emplace({h.tx, h.ty, h.s}, windows.size());
            if (fresh) windows.push_back(h);
            slots[i * w.offsets.size() + k] = it->second;
        }
    }
    std::vector<double> window_scores(windows.size());
    parallel_for(windows.size(), threads, [&](std::size_t j) {
        window_scores[j] = window_log_likelihood(train, y, windows[j], x.side, model);
    });

    SalResult result;
    result.samples.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto pooled = pool(w, [&](std::size_t k, double* score) {
            const std::size_t slot = slots[i * w.offsets.size() + k];
            if (slot == kNoWindow) return false;
            *score = window_scores[slot];
            return true;
        });
        result.samples[i] = {samples[i], pooled.score};
    }
    result.best_index = 0;
    result.best_score = result.samples[0].score;
    for (std::size_t i = 1; i < result.samples.size(); ++i) {
        if (result.samples[i].score > result.best_score) {
            result.best_index = i;
            result.best_score = result.samples[i].score;
        }
    }
    return result;
}

SalResult sal_likelihood(const Patch& x, const GrayImage& y, const SamplingScheme& scheme,
                         const PoolingWeights& w, const NoiseModel& model, int threads) {
    return sal_likelihood(x, y, sample_group(scheme, y, x.side), w, model, threads);
}

void write_csv(std::ostream& out, const SalResult& result) {
    out << "index,tx,ty,s,score\n";
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
        const auto& smp = result.samples[i];
        out << i << ',' << format_g(smp.g.tx) << ',' << format_g(smp.g.ty) << ',' << format_g(smp.g.s) << ','
            << format_g(smp.score) << '\n';
    }
}

std::string summary_json(const SalResult& result) {
    if (result.samples.empty()) return nlohmann::json{{"samples", 0}}.dump();
    const auto& best = result.samples[result.best_index];
    return nlohmann::json{{"samples", result.samples.size()},
                          {"best_index", result.best_index},
                          {"best_score", result.best_score},
                          {"tx", best.g.tx},
                          {"ty", best.g.ty},
                          {"s", best.g.s}}
        .dump();
}

}  // namespace invdesc
