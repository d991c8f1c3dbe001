// invdesc: command-line driver for the descriptor experiments.
//
//   invdesc <subcommand> --seed N --input PATH... --out DIR [options]
//
// Exit status is 0 on success, 1 for usage errors and 2 for runtime failures
// (unreadable input, invalid parameters discovered while running).

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "invdesc/experiments.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

enum class Command { Curve, ClampStudy, ReluCompare, SalMatch, HierarchyCheck };

void add_common(CLI::App* sub, invdesc::RunConfig& cfg, bool needs_input) {
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    auto* in = sub->add_option("--input", cfg.inputs, "Input images (8-bit grayscale PGM or PNG)");
    if (needs_input) in->required();
    sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--trials", cfg.trials, "Trial count (0 = subcommand default)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_flag("--svg", cfg.svg, "Also write SVG plots");
}

void run(Command cmd, const invdesc::RunConfig& cfg) {
    using namespace invdesc;
    const auto images = load_inputs(cfg);
    switch (cmd) {
        case Command::Curve: write_curve(run_curve(images, cfg), cfg); break;
        case Command::ClampStudy: write_clamp_study(run_clamp_study(images, cfg), cfg); break;
        case Command::ReluCompare: write_relu_compare(run_relu_compare(images, cfg), cfg); break;
        case Command::SalMatch: write_sal_match(run_sal_match(images, cfg), cfg); break;
        case Command::HierarchyCheck: write_hierarchy_check(run_hierarchy_check(cfg), cfg); break;
    }
}

}  // namespace

int main(int argc, char** argv) {
    invdesc::RunConfig cfg;
    Command cmd = Command::Curve;

    CLI::App app{"Contrast-invariant descriptor experiments"};
    app.require_subcommand(1);

    auto* curve = app.add_subcommand("curve", "Sift integrand vs contrast marginal at random pixels");
    add_common(curve, cfg, true);
    curve->add_option("--eps", cfg.eps, "Noise scale")->check(CLI::PositiveNumber)->capture_default_str();
    curve->add_option("--bins", cfg.bins, "Orientation bins")->check(CLI::Range(2, 4096))->capture_default_str();
    curve->add_option("--grid", cfg.grid, "Continuous grid size")->check(CLI::Range(8, 1 << 20))->capture_default_str();
    curve->callback([&] { cmd = Command::Curve; });

    auto* clamp = app.add_subcommand("clamp-study", "Clamped histograms vs the marginal over tau");
    add_common(clamp, cfg, true);
    clamp->add_option("--eps", cfg.eps, "Noise scale")->check(CLI::PositiveNumber)->capture_default_str();
    clamp->add_option("--bins", cfg.bins, "Coarse bin count")->check(CLI::Range(2, 4096))->capture_default_str();
    clamp->add_option("--tau", cfg.tau, "Extra clamping fraction")->check(CLI::Range(1e-9, 1.0))->capture_default_str();
    clamp->add_option("--patch", cfg.patch, "Patch side")->check(CLI::Range(2, 4096))->capture_default_str();
    clamp->callback([&] { cmd = Command::ClampStudy; });

    auto* relu = app.add_subcommand("relu-compare", "ReLU filter bank vs rectified histograms");
    add_common(relu, cfg, false);
    relu->add_option("--sigma", cfg.sigmas, "Filter scales for the input images")
        ->check(CLI::Range(0.5, 64.0))
        ->capture_default_str();
    relu->callback([&] { cmd = Command::ReluCompare; });

    auto* sal = app.add_subcommand("sal-match", "Recover planted patches by max-pooled SAL scores");
    add_common(sal, cfg, true);
    sal->add_option("--noise", cfg.noise, "Noise model")
        ->check(CLI::IsMember({"fixed", "proportional", "joint"}))
        ->capture_default_str();
    sal->add_option("--eps", cfg.eps, "Noise scale")->check(CLI::PositiveNumber)->capture_default_str();
    sal->add_option("--patch", cfg.patch, "Training patch side")->check(CLI::Range(4, 1024))->capture_default_str();
    sal->add_option("--stride", cfg.stride, "Lattice stride")->check(CLI::Range(1, 1024))->capture_default_str();
    sal->add_option("--scales", cfg.scale_steps, "Lattice scale steps")->check(CLI::Range(1, 16))->capture_default_str();
    sal->callback([&] { cmd = Command::SalMatch; });

    auto* hier = app.add_subcommand("hierarchy-check", "Layered vs direct marginals on random toy models");
    add_common(hier, cfg, false);
    hier->add_option("--models", cfg.models, "Model count")->check(CLI::Range(1, 100000))->capture_default_str();
    hier->callback([&] { cmd = Command::HierarchyCheck; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "invdesc: usage error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        run(cmd, cfg);
    } catch (const std::exception& e) {
        std::cerr << "invdesc: error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return EXIT_SUCCESS;
}
