// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "invdesc/contrastinv.hpp"
#include "invdesc/experiments.hpp"
#include "invdesc/hierarchy.hpp"
#include "invdesc/reluequiv.hpp"
#include "invdesc/salcore.hpp"
#include "invdesc/siftlike.hpp"
#include "support/oracles.hpp"

using namespace invdesc;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const fs::path kRepoData = INVDESC_REPO_DATA_DIR;
const std::string kCli = INVDESC_CLI_PATH;

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

RunConfig corpus_config() {
    RunConfig cfg;
    for (const char* name : {"camera_256.pgm", "coins_256.pgm", "moon_256.pgm"}) {
        cfg.inputs.push_back(kRepoData / "corpus" / name);
    }
    return cfg;
}

const std::vector<GrayImage>& corpus() {
    static const std::vector<GrayImage> images = load_inputs(corpus_config());
    return images;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome closed_form_vs_quadrature() {
    Timer timer;
    double worst = 0.0;
    int points = 0;
    for (double d : {0.0, 0.3, 0.7, 1.2, kPi / 2, 2.5}) {
        for (double gamma : {0.0, 0.1, 1.0, 5.0}) {
            for (double eps : {0.1, 0.5, 1.0}) {
                const double ref = oracle::marginal_by_quadrature(d, 0.0, gamma, eps);
                worst = std::max(worst, std::abs(contrast_marginal(d, {0.0, gamma}, FixedNoise{eps}) - ref));
                ++points;
            }
        }
    }
    const double t = timer.seconds();
    return {points == 72 && worst < 1e-8 && t < 5.0,
            fmt("%d points, max |closed form - quadrature| = %.3g (< 1e-8), %.2f s (< 5 s)", points, worst, t)};
}

Outcome normalization() {
    CounterRng rng(2, 0);
    double worst = 0.0;
    int curves = 0;
    for (int i = 0; i < 20; ++i) {
        const PolarSample g{rng.uniform(-kPi, kPi), rng.uniform(0.0, 5.0)};
        const NoiseModel models[] = {FixedNoise{rng.uniform(0.1, 1.0)}, ProportionalNoise{rng.uniform(0.1, 1.0)},
                                     JointNormalizedNoise{rng.uniform(0.1, 1.0), rng.uniform(0.01, 4.0)}};
        for (const auto& m : models) {
            worst = std::max(worst, std::abs(likelihood_curve(g, m, 4096).integral() - 1.0));
            ++curves;
        }
    }
    return {worst < 1e-6, fmt("%d curves at 4096 points, max |integral - 1| = %.3g (< 1e-6)", curves, worst)};
}

Outcome flat_patch_limit() {
    // A zero training gradient under fixed noise, and a zero-gradient pixel
    // under joint normalization; the proportional model has no flat case
    // because its noise vanishes with the gradient.
    CounterRng rng(3, 0);
    const double uniform = 1.0 / (2.0 * kPi);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double beta = rng.uniform(-kPi, kPi);
        const NoiseModel models[] = {FixedNoise{rng.uniform(0.01, 2.0)},
                                     JointNormalizedNoise{rng.uniform(0.1, 1.0), rng.uniform(0.01, 4.0)}};
        for (const auto& m : models) {
            for (double v : likelihood_curve({beta, 0.0}, m, 512).values) worst = std::max(worst, std::abs(v - uniform));
        }
    }
    return {worst < 1e-9, fmt("gamma = 0, max |p - 1/(2 pi)| = %.3g (< 1e-9)", worst)};
}

Outcome affine_invariance() {
    CounterRng rng(4, 0);
    double worst = 0.0;
    int compared = 0;
    for (const auto& img : corpus()) {
        for (int trial = 0; trial < 3; ++trial) {
            const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height() - 16)));
            const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width() - 16)));
            const GrayImage x = crop(img, {r, c}, 16, 16);
            const auto px = to_polar(compute_gradient(x));
            if (!(mean_squared_gradient(px) > 0.0)) continue;
            const auto mx = joint_normalized_for(px, 0.5);
            for (double a : {0.5, 2.0, 10.0}) {
                for (double b : {0.0, 0.3}) {
                    GrayImage y = x;
                    for (double& v : y.values()) v = a * v + b;
                    const auto py = to_polar(compute_gradient(y));
                    const auto my = joint_normalized_for(py, 0.5);
                    for (std::size_t i = 0; i < px.size(); i += 5) {
                        const auto cx = likelihood_curve({px.angle[i], px.magnitude[i]}, mx, 256);
                        const auto cy = likelihood_curve({py.angle[i], py.magnitude[i]}, my, 256);
                        for (std::size_t k = 0; k < cx.values.size(); ++k) {
                            worst = std::max(worst, std::abs(cx.values[k] - cy.values[k]));
                        }
                        ++compared;
                    }
                }
            }
        }
    }
    return {compared > 0 && worst < 1e-10,
            fmt("%d curve pairs over a in {0.5, 2, 10}, b in {0, 0.3}, max difference = %.3g (< 1e-10)", compared,
                worst)};
}

Outcome clamping_study() {
    Timer timer;
    auto cfg = corpus_config();
    cfg.bins = 8;
    cfg.tau = 0.2;
    const auto s = run_clamp_study(corpus(), cfg);
    const double t = timer.seconds();
    const auto& eight = s.distance[0];
    const auto& sixty_four = s.distance[1];
    const auto best = std::min_element(eight.begin(), eight.end()) - eight.begin();
    const auto at = [&](double tau) {
        return std::find_if(s.taus.begin(), s.taus.end(), [&](double v) { return std::abs(v - tau) < 1e-12; }) -
               s.taus.begin();
    };
    const auto i_unclamped = at(1.0);
    const auto i_02 = at(0.2);
    const double argmin = s.taus[static_cast<std::size_t>(best)];
    const bool in_range = argmin >= 0.10 - 1e-12 && argmin <= 0.30 + 1e-12;
    const bool ordered = eight[i_unclamped] > eight[i_02];
    // Frozen from the first validated run at seed 42.
    const bool fixtures = std::abs(eight[i_unclamped] - 0.46333225076037571) < 1e-9 &&
                          std::abs(eight[i_02] - 0.14397410015489509) < 1e-9 &&
                          std::abs(sixty_four[i_02] - 0.14536575856986336) < 1e-9;
    return {in_range && ordered && fixtures && eight[i_02] < sixty_four[i_02] && t < 60.0,
            fmt("argmin tau = %.2f in [0.10, 0.30], d(1.0) = %.17g > d(0.2) = %.17g, 64-bin d(0.2) = %.17g, "
                "fixtures %s, %.1f s (< 60 s)",
                argmin, eight[i_unclamped], eight[i_02], sixty_four[i_02], fixtures ? "match" : "differ", t)};
}

Outcome peakedness() {
    auto cfg = corpus_config();
    cfg.trials = 2000;
    cfg.eps = 0.5;
    const auto s = run_curve(corpus(), cfg);
    int eligible = 0;
    int peaked = 0;
    for (const auto& t : s.trials) {
        if (!(t.gamma > 0.05)) continue;
        ++eligible;
        if (peak_to_mean(t.sift) > peak_to_mean(t.marginal)) ++peaked;
    }
    const double share = eligible > 0 ? static_cast<double>(peaked) / eligible : 0.0;
    return {eligible >= 20 && share >= 0.95,
            fmt("%d of %d pixels with gamma > 0.05 (%.1f%%, >= 95%%)", peaked, eligible, 100.0 * share)};
}

// Intensity rises along columns only, so grad . r keeps one sign for every
// orientation with cos(alpha) != 0.
GrayImage monotone_image(int side) {
    GrayImage img(side, side);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) img.at(r, c) = 0.5 + 0.4 * std::tanh(0.15 * (c - side / 2));
    return img;
}

Outcome relu_equivalence() {
    const auto s = run_relu_compare({}, corpus_config());
    std::string errors;
    bool increasing = true;
    for (std::size_t i = 0; i < s.two_edge.size(); ++i) {
        errors += fmt("%s%.4g", i ? ", " : "", s.two_edge[i].rel_error);
        if (i > 0 && !(s.two_edge[i].rel_error > s.two_edge[i - 1].rel_error)) increasing = false;
    }
    const double at_quarter = s.two_edge.front().rel_error;
    double one_signed = 0.0;
    for (const auto& row : equivalence_report(monotone_image(96), {1.0, 2.0, 4.0, 8.0}, {0.0, 0.4, -0.9})) {
        one_signed = std::max(one_signed, row.rel_error);
    }
    return {at_quarter < 1e-2 && increasing && one_signed < 1e-10,
            fmt("sigma = d/4 error %.4g (needs < 1e-2), errors over sigma/d {0.25..4}: %s (%s), one-signed max "
                "%.3g (< 1e-10)",
                at_quarter, errors.c_str(), increasing ? "increasing" : "not increasing", one_signed)};
}

Outcome kernel_approximation() {
    const auto d = cosine_power_vs_angular_gaussian(caption_kernel_pairs());
    bool decreasing = d.size() == 3;
    for (std::size_t i = 1; i < d.size(); ++i) decreasing = decreasing && d[i].sup_distance < d[i - 1].sup_distance;
    return {decreasing, fmt("sup distances %.6g, %.6g, %.6g", d[0].sup_distance, d[1].sup_distance,
                            d[2].sup_distance)};
}

Outcome sal_recovery() {
    auto cfg = corpus_config();
    const auto s = run_sal_match(corpus(), cfg);
    double aligned = 0.0;
    double off = 0.0;
    for (const auto& t : s.trials) (t.aligned ? aligned : off) = std::max(t.aligned ? aligned : off, t.pose_error);

    // Shifting the image by a lattice vector relabels the samples it keeps.
    CounterRng rng(9, 0);
    const auto& img = corpus()[0];
    const int stride = 4;
    const int side = 12;
    const auto lattice = RegularSampling{stride, 1, 1.1, 2};
    const auto w = default_pooling_weights(side);
    const NoiseModel model = FixedNoise{0.5};
    double worst_shift = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const int r = static_cast<int>(rng.below(160));
        const int c = static_cast<int>(rng.below(160));
        const GrayImage y = crop(img, {r, c}, 64, 64);
        const Patch x{{0, 0}, side, crop(img, {r + 20, c + 24}, side, side)};
        const int sx = stride * (1 + trial);
        const int sy = stride * trial;
        const GrayImage moved = crop(y, {sy, sx}, 64 - sx, 64 - sy);
        const auto full = sal_likelihood(x, y, lattice, w, model);
        const auto part = sal_likelihood(x, moved, lattice, w, model);
        for (const auto& p : part.samples) {
            const auto it = std::find_if(full.samples.begin(), full.samples.end(), [&](const SalSample& f) {
                return f.g.tx == p.g.tx + sx && f.g.ty == p.g.ty + sy;
            });
            worst_shift = it == full.samples.end() ? INFINITY : std::max(worst_shift, std::abs(it->score - p.score));
        }
    }
    return {aligned == 0.0 && off <= 0.5 * s.stride && worst_shift < 1e-6,
            fmt("%zu trials, aligned pose error %.3g (= 0), off-lattice max %.3g (<= %.1f), lattice-shift score "
                "difference %.3g (< 1e-6)",
                s.trials.size(), aligned, off, 0.5 * s.stride, worst_shift)};
}

Outcome hierarchy_identity() {
    RunConfig cfg;
    cfg.models = 50;
    double abs_err = 0.0;
    double prob_err = 0.0;
    const auto rows = run_hierarchy_check(cfg);
    for (const auto& r : rows) {
        abs_err = std::max(abs_err, r.max_abs_discrepancy);
        prob_err = std::max(prob_err, r.total_probability_error);
    }
    return {rows.size() == 50 && abs_err < 1e-12 && prob_err < 1e-10,
            fmt("%zu models, max |layered - direct| = %.3g (< 1e-12), total probability error %.3g (< 1e-10)",
                rows.size(), abs_err, prob_err)};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "invdesc_acceptance_determinism";
    fs::remove_all(root);
    std::string inputs;
    for (const auto& p : corpus_config().inputs) inputs += " --input \"" + p.string() + "\"";
    const std::vector<std::string> commands = {
        "curve --svg" + inputs,
        "clamp-study --trials 60 --svg" + inputs,
        "relu-compare" + inputs,
        "sal-match --trials 4" + inputs,
        "hierarchy-check --models 20",
    };
    int files = 0;
    std::string differing;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const fs::path a = root / std::to_string(i) / "a";
        const fs::path b = root / std::to_string(i) / "b";
        for (const auto& [dir, threads] : {std::pair{a, 1}, std::pair{b, 4}}) {
            fs::create_directories(dir);
            const std::string cmd = "\"" + kCli + "\" " + commands[i] + " --seed 7 --threads " +
                                    std::to_string(threads) + " --out \"" + dir.string() + "\" >/dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + commands[i]};
        }
        for (const auto& entry : fs::directory_iterator(a)) {
            ++files;
            const fs::path other = b / entry.path().filename();
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
                differing += " " + entry.path().filename().string();
            }
        }
        if (std::distance(fs::directory_iterator(a), fs::directory_iterator{}) !=
            std::distance(fs::directory_iterator(b), fs::directory_iterator{})) {
            differing += " (file sets differ for " + commands[i] + ")";
        }
    }
    fs::remove_all(root);
    return {differing.empty() && files > 0,
            fmt("%zu subcommands, %d files compared at 1 vs 4 threads%s%s", commands.size(), files,
                differing.empty() ? ", all identical" : ", differing:", differing.c_str())};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"closed form vs quadrature", closed_form_vs_quadrature},
        {"normalization", normalization},
        {"flat-patch uniform limit", flat_patch_limit},
        {"affine invariance of joint normalization", affine_invariance},
        {"clamping study", clamping_study},
        {"peakedness", peakedness},
        {"ReLU equivalence", relu_equivalence},
        {"kernel approximation", kernel_approximation},
        {"SAL recovery", sal_recovery},
        {"hierarchy identity", hierarchy_identity},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
