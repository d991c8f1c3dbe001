#include "invdesc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "invdesc/contrastinv.hpp"
#include "invdesc/parallel.hpp"
#include "invdesc/rng.hpp"
#include "invdesc/siftlike.hpp"
#include "invdesc/svg.hpp"

namespace invdesc {
namespace {

constexpr double kPi = std::numbers::pi;

// Sub-samples per bin when averaging the continuous marginal over a bin.
constexpr int kBinSubsamples = 32;

// Mean squared gradient below which a training patch counts as flat.
constexpr double kMinPatchEnergy = 1e-4;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (cfg.out_dir / name).string());
    return out;
}

void require_inputs(const std::vector<GrayImage>& images) {
    if (images.empty()) throw std::invalid_argument("at least one --input image is required");
}

int trials_or(const RunConfig& cfg, int fallback) { return cfg.trials > 0 ? cfg.trials : fallback; }

std::vector<double> uniform_grid(int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = -kPi + 2.0 * kPi * i / n;
    return g;
}

struct Moments {
    std::vector<double> mean;
    std::vector<double> sd3;
};

// Across-trial mean and three sample standard deviations, pointwise.
Moments moments(const std::vector<const std::vector<double>*>& curves) {
    const std::size_t n = curves.front()->size();
    Moments m{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    const double count = static_cast<double>(curves.size());
    for (const auto* c : curves) {
        for (std::size_t i = 0; i < n; ++i) m.mean[i] += (*c)[i] / count;
    }
    if (curves.size() > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            double ss = 0.0;
            for (const auto* c : curves) ss += ((*c)[i] - m.mean[i]) * ((*c)[i] - m.mean[i]);
            m.sd3[i] = 3.0 * std::sqrt(ss / (count - 1.0));
        }
    }
    return m;
}

void write_curve_csv(std::ostream& out, const CurveStudy& s, bool bins) {
    const auto& grid = bins ? s.bin_grid : s.grid;
    out << "kind,trial,alpha,sift,marginal\n";
    std::vector<const std::vector<double>*> sift, marg;
    for (std::size_t t = 0; t < s.trials.size(); ++t) {
        const auto& tr = s.trials[t];
        const auto& sv = bins ? tr.sift_bins : tr.sift;
        const auto& mv = bins ? tr.marginal_bins : tr.marginal;
        sift.push_back(&sv);
        marg.push_back(&mv);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out << "trial," << t << ',' << fmt(grid[i]) << ',' << fmt(sv[i]) << ',' << fmt(mv[i]) << '\n';
        }
    }
    const auto ms = moments(sift);
    const auto mm = moments(marg);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << "mean,-1," << fmt(grid[i]) << ',' << fmt(ms.mean[i]) << ',' << fmt(mm.mean[i]) << '\n';
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << "sd3,-1," << fmt(grid[i]) << ',' << fmt(ms.sd3[i]) << ',' << fmt(mm.sd3[i]) << '\n';
    }
}

}  // namespace

NoiseModel noise_model(const RunConfig& cfg) {
    NoiseModel m;
    if (cfg.noise == "fixed") {
        m = FixedNoise{cfg.eps};
    } else if (cfg.noise == "proportional") {
        m = ProportionalNoise{cfg.eps};
    } else if (cfg.noise == "joint") {
        m = JointNormalizedNoise{cfg.eps, 1.0};
    } else {
        throw std::invalid_argument("unknown noise model '" + cfg.noise + "' (fixed, proportional, joint)");
    }
    validate(m);
    return m;
}

std::vector<GrayImage> load_inputs(const RunConfig& cfg) {
    std::vector<GrayImage> images;
    for (const auto& p : cfg.inputs) images.push_back(load_image(p));
    return images;
}

double peak_to_mean(const std::vector<double>& curve) {
    if (curve.empty()) return 0.0;
    double sum = 0.0;
    double peak = 0.0;
    for (double v : curve) {
        sum += v;
        peak = std::max(peak, v);
    }
    return sum > 0.0 ? peak / (sum / static_cast<double>(curve.size())) : 0.0;
}

// ---- curve ---------------------------------------------------------------

CurveStudy run_curve(const std::vector<GrayImage>& images, const RunConfig& cfg) {
    require_inputs(images);
    if (cfg.grid < 8 || cfg.bins < 2) throw std::invalid_argument("curve: need grid >= 8 and bins >= 2");
    for (const auto& img : images) {
        if (img.width() < 3 || img.height() < 3) throw std::invalid_argument("curve: inputs must be at least 3x3");
    }
    std::vector<PolarGradient> polar;
    for (const auto& img : images) polar.push_back(to_polar(compute_gradient(img)));

    CurveStudy s;
    s.grid = uniform_grid(cfg.grid);
    for (int b = 0; b < cfg.bins; ++b) s.bin_grid.push_back(bin_center(b, cfg.bins));
    s.kernel_epsilon = 2.0 * kPi / cfg.bins;
    const FixedNoise model{cfg.eps};
    validate(NoiseModel{model});
    s.trials.resize(static_cast<std::size_t>(trials_or(cfg, 100)));

    parallel_for(s.trials.size(), cfg.threads, [&](std::size_t t) {
        CounterRng rng(cfg.seed, t);
        CurveTrial tr;
        tr.image = static_cast<int>(rng.below(images.size()));
        const auto& img = images[tr.image];
        tr.row = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height() - 2)));
        tr.col = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width() - 2)));
        const std::size_t i = polar[tr.image].index(tr.row, tr.col);
        tr.beta = polar[tr.image].angle[i];
        tr.gamma = polar[tr.image].magnitude[i];
        const PolarSample grad{tr.beta, tr.gamma};
        auto fill = [&](const std::vector<double>& grid, std::vector<double>& sift, std::vector<double>& marg) {
            for (double d : grid) {
                sift.push_back(sift_integrand(tr.beta + d, tr.beta, tr.gamma, s.kernel_epsilon));
                marg.push_back(contrast_marginal(tr.beta + d, grad, model));
            }
        };
        fill(s.grid, tr.sift, tr.marginal);
        fill(s.bin_grid, tr.sift_bins, tr.marginal_bins);
        s.trials[t] = std::move(tr);
    });
    return s;
}

void write_curve(const CurveStudy& study, const RunConfig& cfg) {
    {
        auto out = open_output(cfg, "curve.csv");
        write_curve_csv(out, study, false);
    }
    {
        auto out = open_output(cfg, "curve_bins.csv");
        write_curve_csv(out, study, true);
    }
    if (!cfg.svg) return;
    std::vector<const std::vector<double>*> sift, marg;
    for (const auto& t : study.trials) {
        sift.push_back(&t.sift);
        marg.push_back(&t.marginal);
    }
    const auto ms = moments(sift);
    const auto mm = moments(marg);
    auto lo = [](const Moments& m) {
        std::vector<double> v(m.mean.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.mean[i] - m.sd3[i];
        return v;
    };
    auto hi = [](const Moments& m) {
        std::vector<double> v(m.mean.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.mean[i] + m.sd3[i];
        return v;
    };
    SvgPlot plot{"sift integrand vs contrast marginal", "alpha - beta (rad)", "value", {}, {}};
    plot.bands.push_back({study.grid, lo(ms), hi(ms), "#d62728", 0.15});
    plot.bands.push_back({study.grid, lo(mm), hi(mm), "#1f77b4", 0.15});
    plot.series.push_back({"sift mean", study.grid, ms.mean, "#d62728", 2.0, 1.0});
    plot.series.push_back({"marginal mean", study.grid, mm.mean, "#1f77b4", 2.0, 1.0});
    write_svg(plot, cfg.out_dir / "curve.svg");
}

// ---- clamp-study ---------------------------------------------------------

ClampStudy run_clamp_study(const std::vector<GrayImage>& images, const RunConfig& cfg) {
    require_inputs(images);
    const int side = cfg.patch;
    if (side < 2 || cfg.bins < 2) throw std::invalid_argument("clamp-study: need patch >= 2 and bins >= 2");
    for (const auto& img : images) {
        if (img.width() < side + 3 || img.height() < side + 3) {
            throw std::invalid_argument("clamp-study: inputs must exceed the patch side by 3 px");
        }
    }
    std::vector<PolarGradient> polar;
    for (const auto& img : images) polar.push_back(to_polar(compute_gradient(img)));

    ClampStudy s;
    s.bins = {cfg.bins};
    if (cfg.bins != 64) s.bins.push_back(64);
    s.taus = {1.0, 0.5, 0.4, 0.3, 0.2, 0.1};
    if (std::find(s.taus.begin(), s.taus.end(), cfg.tau) == s.taus.end()) s.taus.push_back(cfg.tau);
    s.trials = trials_or(cfg, 300);
    // One angular kernel for every bin count: only the sampling of the circle changes.
    const Kernel kernel = BilinearKernel{2.0 * kPi / cfg.bins};
    const FixedNoise model{cfg.eps};
    validate(NoiseModel{model});

    std::vector<std::vector<std::vector<double>>> per_trial(
        static_cast<std::size_t>(s.trials), std::vector<std::vector<double>>(s.bins.size()));
    parallel_for(per_trial.size(), cfg.threads, [&](std::size_t t) {
        CounterRng rng(cfg.seed, t);
        int image = 0;
        CellBounds cell;
        OrientationHistogram probe;
        // Redraw until the patch carries gradient; the stream makes this reproducible.
        for (int attempt = 0;; ++attempt) {
            if (attempt == 1000) throw std::runtime_error("clamp-study: inputs have no textured patches");
            image = static_cast<int>(rng.below(images.size()));
            const auto& img = images[image];
            cell = {1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height() - side - 2))),
                    1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width() - side - 2))), side, side};
            probe = accumulate_histogram(polar[image], cell, s.bins[0], kernel, 1.0, SpatialWeighting::Uniform);
            if (*std::max_element(probe.values.begin(), probe.values.end()) > 0.0) break;
        }
        const auto& field = polar[image];
        std::vector<PolarSample> pixels;
        for (int r = cell.row; r < cell.row + side; ++r) {
            for (int c = cell.col; c < cell.col + side; ++c) {
                const std::size_t i = field.index(r, c);
                pixels.push_back({field.angle[i], field.magnitude[i]});
            }
        }
        for (std::size_t bi = 0; bi < s.bins.size(); ++bi) {
            const int bins = s.bins[bi];
            const double width = 2.0 * kPi / bins;
            const auto hist =
                bi == 0 ? probe : accumulate_histogram(field, cell, bins, kernel, 1.0, SpatialWeighting::Uniform);
            std::vector<double> target(bins, 0.0);
            for (int b = 0; b < bins; ++b) {
                for (int k = 0; k < kBinSubsamples; ++k) {
                    const double alpha = bin_center(b, bins) + width * ((k + 0.5) / kBinSubsamples - 0.5);
                    double acc = 0.0;
                    for (const auto& p : pixels) acc += contrast_marginal(alpha, p, model);
                    target[b] += acc / static_cast<double>(pixels.size());
                }
                target[b] /= kBinSubsamples;
            }
            auto& dist = per_trial[t][bi];
            for (double tau : s.taus) {
                const auto clamped = clamp_normalize(hist, tau);
                double l1 = 0.0;
                for (int b = 0; b < bins; ++b) l1 += std::abs(clamped.values[b] - target[b]) * width;
                dist.push_back(l1);
            }
        }
    });

    s.distance.assign(s.bins.size(), std::vector<double>(s.taus.size(), 0.0));
    for (const auto& trial : per_trial) {
        for (std::size_t bi = 0; bi < s.bins.size(); ++bi) {
            for (std::size_t ti = 0; ti < s.taus.size(); ++ti) s.distance[bi][ti] += trial[bi][ti] / s.trials;
        }
    }
    return s;
}

void write_clamp_study(const ClampStudy& study, const RunConfig& cfg) {
    auto out = open_output(cfg, "clamp_study.csv");
    out << "bins,tau,l1_distance\n";
    for (std::size_t bi = 0; bi < study.bins.size(); ++bi) {
        for (std::size_t ti = 0; ti < study.taus.size(); ++ti) {
            out << study.bins[bi] << ',' << fmt(study.taus[ti]) << ',' << fmt(study.distance[bi][ti]) << '\n';
        }
    }
    if (!cfg.svg) return;
    SvgPlot plot{"clamped histogram vs marginal", "clamping fraction tau", "mean L1 distance", {}, {}};
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c"};
    for (std::size_t bi = 0; bi < study.bins.size(); ++bi) {
        std::vector<std::size_t> order(study.taus.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return study.taus[a] < study.taus[b]; });
        SvgSeries series{std::to_string(study.bins[bi]) + " bins", {}, {}, colors[bi % 3], 2.0, 1.0};
        for (auto i : order) {
            series.x.push_back(study.taus[i]);
            series.y.push_back(study.distance[bi][i]);
        }
        plot.series.push_back(std::move(series));
    }
    write_svg(plot, cfg.out_dir / "clamp_study.svg");
}

// ---- relu-compare --------------------------------------------------------

GrayImage two_edge_image(int bar_width, int side) {
    if (bar_width < 1 || side < bar_width + 4) throw std::invalid_argument("two_edge_image: bar does not fit");
    GrayImage img(side, side, 0.0);
    const int first = side / 2 - bar_width / 2;
    for (int r = 0; r < side; ++r) {
        for (int c = first; c < first + bar_width; ++c) img.at(r, c) = 1.0;
    }
    return img;
}

ReluStudy run_relu_compare(const std::vector<GrayImage>& images, const RunConfig& cfg) {
    ReluStudy s;
    const GrayImage bar = two_edge_image(9, 260);
    s.separation = partition_regions(bar, 0.0).min_distance;
    s.ratios = {0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> sigmas;
    for (double r : s.ratios) sigmas.push_back(r * s.separation);
    s.two_edge = equivalence_report(bar, sigmas, {0.0}, 0.01, cfg.threads);
    s.kernels = cosine_power_vs_angular_gaussian(caption_kernel_pairs());

    std::vector<double> alphas;
    for (int b = 0; b < 8; ++b) alphas.push_back(bin_center(b, 8));
    for (const auto& img : images) {
        // A central window keeps the direct convolutions cheap.
        const int w = std::min(img.width(), 96);
        const int h = std::min(img.height(), 96);
        const GrayImage window = crop(img, {(img.height() - h) / 2, (img.width() - w) / 2}, w, h);
        s.per_input.push_back(equivalence_report(window, cfg.sigmas, alphas, 0.01, cfg.threads));
    }
    return s;
}

void write_relu_compare(const ReluStudy& study, const RunConfig& cfg) {
    {
        auto out = open_output(cfg, "relu_two_edge.csv");
        write_csv(out, study.two_edge);
    }
    {
        auto out = open_output(cfg, "relu_kernels.csv");
        out << "cosine_epsilon,gaussian_epsilon,sup_distance\n";
        for (const auto& k : study.kernels) {
            out << fmt(k.pair.cosine_epsilon) << ',' << fmt(k.pair.gaussian_epsilon) << ',' << fmt(k.sup_distance)
                << '\n';
        }
    }
    for (std::size_t i = 0; i < study.per_input.size(); ++i) {
        auto out = open_output(cfg, "relu_report_" + std::to_string(i) + ".csv");
        write_csv(out, study.per_input[i]);
    }
    if (!cfg.svg) return;
    SvgPlot plot{"relu vs histogram response, two-edge bar", "sigma / d", "relative L2 error", {}, {}};
    SvgSeries series{"alpha = 0", study.ratios, {}, "#1f77b4", 2.0, 1.0};
    for (const auto& row : study.two_edge) series.y.push_back(row.rel_error);
    plot.series.push_back(std::move(series));
    write_svg(plot, cfg.out_dir / "relu_two_edge.svg");
}

// ---- sal-match -----------------------------------------------------------

SalStudy run_sal_match(const std::vector<GrayImage>& images, const RunConfig& cfg) {
    require_inputs(images);
    const int side = cfg.patch;
    const int margin = 2;
    SalStudy s;
    s.stride = cfg.stride;
    s.test_side = 4 * side;
    if (side < 4 || s.stride < 1) throw std::invalid_argument("sal-match: need patch >= 4 and stride >= 1");
    for (const auto& img : images) {
        if (img.width() < s.test_side || img.height() < s.test_side) {
            throw std::invalid_argument("sal-match: inputs must be at least " + std::to_string(s.test_side) + " px");
        }
    }
    const RegularSampling scheme{s.stride, cfg.scale_steps, 1.1, margin};
    const PoolingWeights weights = default_pooling_weights(side);
    const NoiseModel model = noise_model(cfg);
    const int trials = trials_or(cfg, 8);
    s.trials.resize(static_cast<std::size_t>(2 * trials));

    // Trials run sequentially; the samples inside each one are scored in parallel.
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(cfg.seed, static_cast<std::uint64_t>(t));
        const int image = static_cast<int>(rng.below(images.size()));
        const auto& img = images[image];
        auto draw = [&](int extent, int limit) {
            return static_cast<int>(rng.below(static_cast<std::uint64_t>(limit - extent + 1)));
        };
        const int bg_row = draw(s.test_side, img.height());
        const int bg_col = draw(s.test_side, img.width());
        const GrayImage background = crop(img, {bg_row, bg_col}, s.test_side, s.test_side);
        // Textureless training patches carry no pose information, and patches
        // cut from inside the background would leave a second exact copy in
        // the test window; redraw both kinds.
        Patch x;
        for (int attempt = 0;; ++attempt) {
            if (attempt == 1000) throw std::runtime_error("sal-match: inputs have no textured patches outside the test window");
            const int r = draw(side, img.height());
            const int c = draw(side, img.width());
            const bool overlaps = r < bg_row + s.test_side && bg_row < r + side && c < bg_col + s.test_side &&
                                  bg_col < c + side;
            if (overlaps) continue;
            x = {{0, 0}, side, crop(img, {r, c}, side, side)};
            if (mean_squared_gradient(to_polar(compute_gradient(x.pixels))) > kMinPatchEnergy) break;
        }
        const auto lattice = sample_group(scheme, background, side);

        for (int variant = 0; variant < 2; ++variant) {
            const bool aligned = variant == 0;
            int pr;
            int pc;
            if (aligned) {
                const auto& g = lattice[rng.below(lattice.size())];
                pr = static_cast<int>(g.ty);
                pc = static_cast<int>(g.tx);
            } else {
                const int hi = s.test_side - side - margin;
                pr = margin + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - margin + 1)));
                pc = margin + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - margin + 1)));
            }
            GrayImage y = background;
            for (int r = 0; r < side; ++r) {
                for (int c = 0; c < side; ++c) y.at(pr + r, pc + c) = x.pixels.at(r, c);
            }
            const SalResult res = sal_likelihood(x, y, lattice, weights, model, cfg.threads);
            const auto& best = res.samples[res.best_index].g;
            SalTrial tr;
            tr.trial = t;
            tr.aligned = aligned;
            tr.image = image;
            tr.plant_row = pr;
            tr.plant_col = pc;
            tr.best = best;
            tr.best_score = res.best_score;
            tr.pose_error = std::max(std::abs(best.ty - pr), std::abs(best.tx - pc));
            tr.samples = res.samples.size();
            s.trials[static_cast<std::size_t>(2 * t + variant)] = tr;
        }
    }
    return s;
}

void write_sal_match(const SalStudy& study, const RunConfig& cfg) {
    auto out = open_output(cfg, "sal_match.csv");
    out << "trial,aligned,image,plant_row,plant_col,best_tx,best_ty,best_s,pose_error,best_score,samples\n";
    double worst_aligned = 0.0;
    double worst_off = 0.0;
    for (const auto& t : study.trials) {
        out << t.trial << ',' << (t.aligned ? 1 : 0) << ',' << t.image << ',' << t.plant_row << ',' << t.plant_col
            << ',' << fmt(t.best.tx) << ',' << fmt(t.best.ty) << ',' << fmt(t.best.s) << ',' << fmt(t.pose_error)
            << ',' << fmt(t.best_score) << ',' << t.samples << '\n';
        double& worst = t.aligned ? worst_aligned : worst_off;
        worst = std::max(worst, t.pose_error);
    }
    auto summary = open_output(cfg, "sal_match.json");
    summary << nlohmann::json{{"stride", study.stride},
                              {"test_side", study.test_side},
                              {"trials", study.trials.size()},
                              {"max_aligned_pose_error", worst_aligned},
                              {"max_off_lattice_pose_error", worst_off}}
                   .dump()
            << '\n';
}

// ---- hierarchy-check -----------------------------------------------------

std::vector<HierarchyRow> run_hierarchy_check(const RunConfig& cfg) {
    if (cfg.models < 1) throw std::invalid_argument("hierarchy-check: need at least one model");
    std::vector<HierarchyRow> rows(static_cast<std::size_t>(cfg.models));
    parallel_for(rows.size(), cfg.threads, [&](std::size_t m) {
        CounterRng rng(cfg.seed, m);
        HierarchyRow row;
        row.model = static_cast<int>(m);
        row.shape.n = 2 + static_cast<int>(rng.below(7));
        row.shape.alphabet = 2;
        row.shape.k1 = 1 + static_cast<int>(rng.below(3));
        row.shape.k2 = 1 + static_cast<int>(rng.below(3));
        row.shape.classes = 1 + static_cast<int>(rng.below(2));
        row.shape.part_support = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(row.shape.n)));
        const ToyLayeredModel model = random_toy_model(rng, row.shape);
        for (int theta = 0; theta < model.classes(); ++theta) {
            double total = 0.0;
            for (const auto& y : enumerate_signals(model.n, model.alphabet)) {
                const double layered = layered_marginal(y, model, theta);
                const double direct = direct_marginal(y, model, theta);
                const double diff = std::abs(layered - direct);
                row.max_abs_discrepancy = std::max(row.max_abs_discrepancy, diff);
                if (direct > 0.0) row.max_rel_discrepancy = std::max(row.max_rel_discrepancy, diff / direct);
                total += layered;
            }
            row.total_probability_error = std::max(row.total_probability_error, std::abs(total - 1.0));
        }
        rows[m] = row;
    });
    return rows;
}

void write_hierarchy_check(const std::vector<HierarchyRow>& rows, const RunConfig& cfg) {
    auto out = open_output(cfg, "hierarchy_check.csv");
    out << "model,n,alphabet,k1,k2,classes,part_support,max_abs_discrepancy,max_rel_discrepancy,"
           "total_probability_error\n";
    for (const auto& r : rows) {
        out << r.model << ',' << r.shape.n << ',' << r.shape.alphabet << ',' << r.shape.k1 << ',' << r.shape.k2 << ','
            << r.shape.classes << ',' << r.shape.part_support << ',' << fmt(r.max_abs_discrepancy) << ','
            << fmt(r.max_rel_discrepancy) << ',' << fmt(r.total_probability_error) << '\n';
    }
}

}  // namespace invdesc
