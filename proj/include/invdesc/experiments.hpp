/**
 * @file experiments.hpp
 * @brief Seeded experiment drivers behind the command-line subcommands.
 *
 * Every driver draws trial t from CounterRng(seed, t), runs trials through
 * parallel_for and stores results by trial index, so outputs do not depend
 * on the thread count.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "invdesc/contrastinv.hpp"
#include "invdesc/hierarchy.hpp"
#include "invdesc/imagecore.hpp"
#include "invdesc/reluequiv.hpp"
#include "invdesc/salcore.hpp"

namespace invdesc {

struct RunConfig {
    std::uint64_t seed = 42;
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out_dir = ".";
    /// Patch side for clamp-study (cells) and sal-match (training patch).
    int patch = 16;
    /// Noise scale of the fixed-noise marginal.
    double eps = 0.5;
    /// Filter scales for relu-compare on the input images.
    std::vector<double> sigmas{1.0, 2.0, 4.0};
    /// Extra clamping fraction appended to the clamp sweep when not already in it.
    double tau = 0.2;
    int bins = 8;
    /// 0 selects the subcommand's default trial count.
    int trials = 0;
    int grid = 256;
    /// Lattice stride of sal-match; 2 lets the +-1 px pooling stencil cover every cell.
    int stride = 2;
    int scale_steps = 1;
    int models = 50;
    /// Noise model for sal-match: "fixed", "proportional" or "joint" (scale eps).
    std::string noise = "joint";
    bool svg = false;
    int threads = 1;
};

/// Noise model named by cfg.noise with scale cfg.eps.
NoiseModel noise_model(const RunConfig& cfg);

/// Loads every input; throws ImageIoError on the first unreadable file.
std::vector<GrayImage> load_inputs(const RunConfig& cfg);

/// max / mean of a sampled curve (0 for an all-zero curve).
double peak_to_mean(const std::vector<double>& curve);

// ---- curve ---------------------------------------------------------------

struct CurveTrial {
    int image = 0;
    int row = 0;
    int col = 0;
    double beta = 0.0;
    double gamma = 0.0;
    std::vector<double> sift;
    std::vector<double> marginal;
    std::vector<double> sift_bins;
    std::vector<double> marginal_bins;
};

/// Curves are indexed by the orientation difference alpha - beta so trials
/// with different training orientations overlay.
struct CurveStudy {
    std::vector<double> grid;
    std::vector<double> bin_grid;
    double kernel_epsilon = 0.0;
    std::vector<CurveTrial> trials;
};

CurveStudy run_curve(const std::vector<GrayImage>& images, const RunConfig& cfg);
/// curve.csv and curve_bins.csv (`kind,trial,alpha,sift,marginal`), plus curve.svg.
void write_curve(const CurveStudy& study, const RunConfig& cfg);

// ---- clamp-study ---------------------------------------------------------

struct ClampStudy {
    std::vector<int> bins;
    std::vector<double> taus;
    /// distance[bin_index][tau_index]: mean integrated L1 distance.
    std::vector<std::vector<double>> distance;
    int trials = 0;
};

/// Clamped patch histograms against the pixel-averaged, bin-averaged
/// marginal, for the configured bin count and for 64 bins.
ClampStudy run_clamp_study(const std::vector<GrayImage>& images, const RunConfig& cfg);
/// clamp_study.csv (`bins,tau,l1_distance`), plus clamp_study.svg.
void write_clamp_study(const ClampStudy& study, const RunConfig& cfg);

// ---- relu-compare --------------------------------------------------------

/// Unit-height vertical bar of `bar_width` columns centred in a square image.
GrayImage two_edge_image(int bar_width, int side);

struct ReluStudy {
    double separation = 0.0;
    std::vector<double> ratios;
    std::vector<EquivalenceRow> two_edge;
    std::vector<KernelDistance> kernels;
    std::vector<std::vector<EquivalenceRow>> per_input;
};

ReluStudy run_relu_compare(const std::vector<GrayImage>& images, const RunConfig& cfg);
/// relu_two_edge.csv, relu_kernels.csv and relu_report_<i>.csv.
void write_relu_compare(const ReluStudy& study, const RunConfig& cfg);

// ---- sal-match -----------------------------------------------------------

struct SalTrial {
    int trial = 0;
    bool aligned = false;
    int image = 0;
    int plant_row = 0;
    int plant_col = 0;
    GroupElement best;
    double best_score = 0.0;
    double pose_error = 0.0;
    std::size_t samples = 0;
};

struct SalStudy {
    int stride = 0;
    int test_side = 0;
    std::vector<SalTrial> trials;
};

/// Plants a training patch into a test window, once on the sample lattice and
/// once off it, and records the max-pooled pose error (Chebyshev, pixels).
SalStudy run_sal_match(const std::vector<GrayImage>& images, const RunConfig& cfg);
/// sal_match.csv and sal_match.json.
void write_sal_match(const SalStudy& study, const RunConfig& cfg);

// ---- hierarchy-check -----------------------------------------------------

struct HierarchyRow {
    int model = 0;
    ToyModelShape shape;
    double max_abs_discrepancy = 0.0;
    double max_rel_discrepancy = 0.0;
    double total_probability_error = 0.0;
};

/// Layered against direct marginals over every signal and class of each
/// seeded random model; total probability from the layered evaluation.
std::vector<HierarchyRow> run_hierarchy_check(const RunConfig& cfg);
/// hierarchy_check.csv.
void write_hierarchy_check(const std::vector<HierarchyRow>& rows, const RunConfig& cfg);

}  // namespace invdesc
