// Python bindings: images are float64 numpy arrays of shape (height, width).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "invdesc/contrastinv.hpp"
#include "invdesc/experiments.hpp"
#include "invdesc/hierarchy.hpp"
#include "invdesc/imagecore.hpp"
#include "invdesc/reluequiv.hpp"
#include "invdesc/rng.hpp"
#include "invdesc/salcore.hpp"
#include "invdesc/siftlike.hpp"

namespace py = pybind11;
using namespace invdesc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const Array& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(std::span<const double> values, int width, int height) {
    Array out({height, width});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

Array to_array(const std::vector<double>& values) {
    Array out(static_cast<py::ssize_t>(values.size()));
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

NoiseModel make_noise(const std::string& name, double eps, double rho_hat_sq) {
    if (name == "fixed") return FixedNoise{eps};
    if (name == "proportional") return ProportionalNoise{eps};
    if (name == "joint") return JointNormalizedNoise{eps, rho_hat_sq};
    throw std::invalid_argument("noise must be 'fixed', 'proportional' or 'joint'");
}

Patch whole_patch(const Array& a) {
    GrayImage img = to_image(a);
    if (img.width() != img.height()) throw std::invalid_argument("patch must be square");
    const int side = img.width();
    return {{0, 0}, side, std::move(img)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Contrast-invariant local descriptors and sampled likelihoods";

    py::register_exception<ImageIoError>(m, "ImageIoError", PyExc_OSError);
    py::register_exception<DegeneratePatchError>(m, "DegeneratePatchError", PyExc_ValueError);

    m.def(
        "load_image",
        [](const std::string& path) {
            const GrayImage img = load_image(path);
            return to_array(img.values(), img.width(), img.height());
        },
        py::arg("path"), "Loads a PGM or PNG as intensities in [0, 1].");

    m.def(
        "gradient",
        [](const Array& img, double presmooth_sigma) {
            const auto g = compute_gradient(to_image(img), presmooth_sigma);
            return py::make_tuple(to_array(g.gx, g.width, g.height), to_array(g.gy, g.width, g.height));
        },
        py::arg("image"), py::arg("presmooth_sigma") = 0.0, "Central-difference gradient (gx, gy).");

    m.def(
        "polar_gradient",
        [](const Array& img) {
            const auto p = to_polar(compute_gradient(to_image(img)));
            return py::make_tuple(to_array(p.angle, p.width, p.height), to_array(p.magnitude, p.width, p.height));
        },
        py::arg("image"), "Gradient orientation in [-pi, pi) and norm.");

    m.def("half_gaussian_moment", &half_gaussian_moment, py::arg("m"), py::arg("eps"));

    m.def(
        "contrast_marginal",
        [](double alpha, double beta, double gamma, const std::string& noise, double eps, double rho_hat_sq) {
            return contrast_marginal(alpha, {beta, gamma}, make_noise(noise, eps, rho_hat_sq));
        },
        py::arg("alpha"), py::arg("beta"), py::arg("gamma"), py::arg("noise") = "fixed", py::arg("eps") = 0.5,
        py::arg("rho_hat_sq") = 1.0, "Density of test orientation alpha given training gradient (beta, gamma).");

    m.def(
        "likelihood_curve",
        [](double beta, double gamma, const std::string& noise, double eps, double rho_hat_sq, int n_grid) {
            const auto c = likelihood_curve({beta, gamma}, make_noise(noise, eps, rho_hat_sq), n_grid);
            return py::make_tuple(to_array(c.alphas), to_array(c.values));
        },
        py::arg("beta"), py::arg("gamma"), py::arg("noise") = "fixed", py::arg("eps") = 0.5,
        py::arg("rho_hat_sq") = 1.0, py::arg("n_grid") = 256);

    m.def(
        "sift_descriptor",
        [](const Array& patch, int bins, int grid) {
            SiftParams params;
            params.bins = bins;
            params.grid = grid;
            const auto d = sift_descriptor(whole_patch(patch), params);
            Array out({grid, grid, bins});
            std::copy(d.values.begin(), d.values.end(), out.mutable_data());
            return out;
        },
        py::arg("patch"), py::arg("bins") = 8, py::arg("grid") = 4,
        "Descriptor of a square patch, shaped (grid, grid, bins).");

    m.def(
        "clamp_normalize",
        [](const std::vector<double>& values, double tau) { return to_array(clamp_normalize({values}, tau).values); },
        py::arg("histogram"), py::arg("tau"));

    m.def(
        "kernel_sup_distances",
        [] {
            std::vector<py::tuple> rows;
            for (const auto& k : cosine_power_vs_angular_gaussian(caption_kernel_pairs())) {
                rows.push_back(py::make_tuple(k.pair.cosine_epsilon, k.pair.gaussian_epsilon, k.sup_distance));
            }
            return rows;
        },
        "(cosine eps, Gaussian dispersion, sup distance) for the three comparison pairs.");

    m.def(
        "relu_equivalence",
        [](const Array& img, const std::vector<double>& sigmas, const std::vector<double>& alphas) {
            py::list rows;
            for (const auto& r : equivalence_report(to_image(img), sigmas, alphas)) {
                py::dict d;
                d["sigma"] = r.sigma;
                d["alpha"] = r.alpha;
                d["d_alpha"] = r.d_alpha;
                d["rel_error"] = r.rel_error;
                d["within_bound"] = r.within_bound;
                rows.append(d);
            }
            return rows;
        },
        py::arg("image"), py::arg("sigmas"), py::arg("alphas"));

    m.def(
        "two_edge_image", [](int bar_width, int side) {
            const GrayImage img = two_edge_image(bar_width, side);
            return to_array(img.values(), img.width(), img.height());
        },
        py::arg("bar_width"), py::arg("side"));

    m.def(
        "sal_match",
        [](const Array& patch, const Array& image, int stride, const std::string& noise, double eps, int threads) {
            const Patch x = whole_patch(patch);
            const auto res = sal_likelihood(x, to_image(image), RegularSampling{stride, 1, 1.1, 2},
                                            default_pooling_weights(x.side), make_noise(noise, eps, 1.0), threads);
            const auto& best = res.samples[res.best_index];
            py::dict d;
            d["tx"] = best.g.tx;
            d["ty"] = best.g.ty;
            d["s"] = best.g.s;
            d["score"] = res.best_score;
            d["samples"] = res.samples.size();
            return d;
        },
        py::arg("patch"), py::arg("image"), py::arg("stride") = 2, py::arg("noise") = "fixed", py::arg("eps") = 0.5,
        py::arg("threads") = 1, "Max-pooled pose of a patch over a regular lattice with the default stencil.");

    m.def(
        "hierarchy_check",
        [](int models, std::uint64_t seed) {
            RunConfig cfg;
            cfg.models = models;
            cfg.seed = seed;
            py::list rows;
            for (const auto& r : run_hierarchy_check(cfg)) {
                py::dict d;
                d["model"] = r.model;
                d["max_abs_discrepancy"] = r.max_abs_discrepancy;
                d["max_rel_discrepancy"] = r.max_rel_discrepancy;
                d["total_probability_error"] = r.total_probability_error;
                rows.append(d);
            }
            return rows;
        },
        py::arg("models") = 50, py::arg("seed") = 42);
}
