#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "invdesc/reluequiv.hpp"
#include "support/oracles.hpp"

using namespace invdesc;

namespace {

constexpr double kPi = std::numbers::pi;

// Unit bar of `width` columns centred in a side x side image.
GrayImage bar_image(int width, int side) {
    GrayImage img(side, side, 0.0);
    const int first = side / 2 - width / 2;
    for (int r = 0; r < side; ++r)
        for (int c = first; c < first + width; ++c) img.at(r, c) = 1.0;
    return img;
}

// Smooth step rising along u: every central difference is >= 0 in u and 0 in v.
GrayImage rising_step(int side) {
    GrayImage img(side, side);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) img.at(r, c) = 0.5 + 0.4 * std::tanh(0.3 * (c - side / 2.0));
    return img;
}

std::vector<double> gauss_1d(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> g;
    double z = 0.0;
    for (int q = -radius; q <= radius; ++q) {
        g.push_back(std::exp(-(q * q) / (2.0 * sigma * sigma)));
        z += g.back();
    }
    for (double& v : g) v /= z;
    return g;
}

// <grad x, r(alpha)> from per-pixel central differences (replicate border).
std::vector<double> projected_gradient(const GrayImage& x, double alpha) {
    const int w = x.width();
    const int h = x.height();
    std::vector<double> out(x.size());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double gx = 0.5 * (x.at(r, std::min(c + 1, w - 1)) - x.at(r, std::max(c - 1, 0)));
            const double gy = 0.5 * (x.at(std::min(r + 1, h - 1), c) - x.at(std::max(r - 1, 0), c));
            out[static_cast<std::size_t>(r) * w + c] = gx * std::cos(alpha) + gy * std::sin(alpha);
        }
    }
    return out;
}

// sum_q N(q) f(p - q) over the valid region, with f optionally rectified.
std::vector<double> brute_smooth(const GrayImage& x, double sigma, double alpha, bool rectify) {
    const auto g = gauss_1d(sigma);
    const int radius = static_cast<int>(g.size() / 2);
    const int half = radius + 1;
    const auto proj = projected_gradient(x, alpha);
    std::vector<double> out;
    for (int r = half; r < x.height() - half; ++r) {
        for (int c = half; c < x.width() - half; ++c) {
            double acc = 0.0;
            for (int qv = -radius; qv <= radius; ++qv) {
                for (int qu = -radius; qu <= radius; ++qu) {
                    double f = proj[static_cast<std::size_t>(r - qv) * x.width() + (c - qu)];
                    if (rectify) f = std::max(0.0, f);
                    acc += g[qv + radius] * g[qu + radius] * f;
                }
            }
            out.push_back(acc);
        }
    }
    return out;
}

double brute_min_distance(const RegionPartition& p) {
    std::vector<std::pair<int, int>> pos, neg;
    for (int r = 0; r < p.height; ++r) {
        for (int c = 0; c < p.width; ++c) {
            if (p.positive[r * p.width + c]) pos.emplace_back(r, c);
            if (p.negative[r * p.width + c]) neg.emplace_back(r, c);
        }
    }
    double best = INFINITY;
    for (const auto& a : pos)
        for (const auto& b : neg)
            best = std::min(best, std::hypot(double(a.first - b.first), double(a.second - b.second)));
    return best;
}

}  // namespace

TEST_CASE("oriented_filter examples") {
    CounterRng rng(71, 0);
    for (double sigma : {0.5, 0.8, 1.0, 2.0, 3.7, 6.0}) {
        const double alpha = rng.uniform(-kPi, kPi);
        const auto f = oriented_filter(sigma, alpha);
        CHECK(f.gaussian_radius == static_cast<int>(std::ceil(3.0 * sigma)));
        CHECK(f.side() % 2 == 1);
        double sum = 0.0;
        for (double t : f.taps) sum += t;
        CHECK(std::abs(sum) < 1e-10);
        const auto g = oriented_filter(sigma, alpha + kPi);
        for (std::size_t i = 0; i < f.taps.size(); ++i) CHECK(std::abs(g.taps[i] + f.taps[i]) <= 1e-15);
    }
    CHECK_THROWS_AS(oriented_filter(0.49, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(oriented_filter(NAN, 0.0), std::invalid_argument);
}

TEST_CASE("filter taps are central differences of the sampled Gaussian") {
    for (double sigma : {2.0, 3.0, 5.5}) {
        for (double alpha : {0.0, 0.6, -2.2}) {
            const auto f = oriented_filter(sigma, alpha);
            const auto g = gauss_1d(sigma);
            const int radius = static_cast<int>(g.size() / 2);
            const auto n = [&](int v, int u) {
                if (std::abs(u) > radius || std::abs(v) > radius) return 0.0;
                return g[v + radius] * g[u + radius];
            };
            for (int v = -f.half(); v <= f.half(); ++v) {
                for (int u = -f.half(); u <= f.half(); ++u) {
                    const double du = (n(v, u + 1) - n(v, u - 1)) / 2.0;
                    const double dv = (n(v + 1, u) - n(v - 1, u)) / 2.0;
                    CHECK(std::abs(f.at(v, u) - (du * std::cos(alpha) + dv * std::sin(alpha))) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("filter taps approach the analytic Gaussian derivative as sigma grows") {
    // Compared where both difference points stay inside the truncated
    // support; at the cut the difference sees a jump that does not shrink.
    double previous = INFINITY;
    for (double sigma : {2.0, 4.0, 8.0}) {
        const double alpha = 0.4;
        const auto f = oriented_filter(sigma, alpha);
        const auto g = gauss_1d(sigma);
        const int radius = static_cast<int>(g.size() / 2);
        double peak = 0.0;
        double err = 0.0;
        for (int v = 1 - radius; v < radius; ++v) {
            for (int u = 1 - radius; u < radius; ++u) {
                const double n = g[v + radius] * g[u + radius];
                const double analytic = -(u * std::cos(alpha) + v * std::sin(alpha)) / (sigma * sigma) * n;
                peak = std::max(peak, std::abs(analytic));
                err = std::max(err, std::abs(f.at(v, u) - analytic));
            }
        }
        CHECK(err / peak < previous);
        previous = err / peak;
    }
    CHECK(previous < 2e-2);
}

TEST_CASE("relu_response examples") {
    SUBCASE("flat image") {
        const auto r = relu_response(GrayImage(30, 30, 0.6), oriented_filter(2.0, 0.3));
        for (double v : r.values) CHECK(v == 0.0);
    }
    SUBCASE("nonnegative everywhere") {
        CounterRng rng(72, 0);
        const auto r = relu_response(oracle::random_image(rng, 30, 30), oriented_filter(1.5, 1.0));
        for (double v : r.values) CHECK(v >= 0.0);
    }
    SUBCASE("ramp c u with alpha = 0 responds with c") {
        for (double c : {0.01, 0.003}) {
            GrayImage img(40, 30);
            for (int r = 0; r < 30; ++r)
                for (int u = 0; u < 40; ++u) img.at(r, u) = c * u;
            for (double sigma : {1.0, 2.5}) {
                const auto resp = relu_response(img, oriented_filter(sigma, 0.0));
                for (double v : resp.values) CHECK(std::abs(v - c) < 1e-6);
            }
        }
    }
    SUBCASE("layout and size checks") {
        const auto f = oriented_filter(2.0, 0.0);  // half = 7
        const auto r = relu_response(GrayImage(20, 17, 0.0), f);
        CHECK(r.offset == 7);
        CHECK(r.width == 6);
        CHECK(r.height == 3);
        CHECK(relu_response(GrayImage(15, 40, 0.0), f).width == 1);
        CHECK_THROWS_AS(relu_response(GrayImage(14, 40, 0.0), f), std::invalid_argument);
    }
}

TEST_CASE("property: convolution identity on the interior") {
    CounterRng rng(73, 0);
    for (int trial = 0; trial < 6; ++trial) {
        const auto x = oracle::random_image(rng, 28, 26);
        const double sigma = rng.uniform(0.5, 2.5);
        const double alpha = rng.uniform(-kPi, kPi);
        const auto lin = linear_response(x, oriented_filter(sigma, alpha));
        const auto ref = brute_smooth(x, sigma, alpha, false);
        REQUIRE(ref.size() == lin.values.size());
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(lin.values[i] - ref[i]) < 1e-6);
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(lin.values[i] - ref[i]) < 1e-13);
    }
}

TEST_CASE("histogram_side examples") {
    SUBCASE("flat image") {
        const auto h = histogram_side(GrayImage(24, 24, 0.1), 1.5, 0.0);
        for (double v : h.values) CHECK(v == 0.0);
    }
    SUBCASE("one-signed projection equals the unrectified response") {
        const auto x = rising_step(40);
        for (double alpha : {0.0, 0.7, -1.2}) {
            const auto h = histogram_side(x, 2.0, alpha);
            const auto lin = linear_response(x, oriented_filter(2.0, alpha));
            for (std::size_t i = 0; i < h.values.size(); ++i) CHECK(std::abs(h.values[i] - lin.values[i]) < 1e-12);
        }
    }
    SUBCASE("random 32x32 matches a brute-force double loop") {
        CounterRng rng(74, 0);
        const auto x = oracle::random_image(rng, 32, 32);
        for (double alpha : {0.0, 1.1, -2.9}) {
            const auto h = histogram_side(x, 1.5, alpha);
            const auto ref = brute_smooth(x, 1.5, alpha, true);
            REQUIRE(ref.size() == h.values.size());
            for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(h.values[i] - ref[i]) <= 1e-12 * std::max(1.0, ref[i]));
        }
    }
}

TEST_CASE("property: exactness under sign constancy") {
    CounterRng rng(75, 0);
    for (int trial = 0; trial < 8; ++trial) {
        // Monotone in u: random positive increments per column.
        const int side = 36;
        std::vector<double> col(side);
        double acc = 0.0;
        for (double& v : col) v = acc += rng.uniform(0.0, 0.03);
        GrayImage x(side, side);
        for (int r = 0; r < side; ++r)
            for (int c = 0; c < side; ++c) x.at(r, c) = col[c];
        const double alpha = rng.uniform(-1.5, 1.5);
        const double sigma = rng.uniform(0.5, 3.0);
        const auto relu = relu_response(x, oriented_filter(sigma, alpha));
        const auto hist = histogram_side(x, sigma, alpha);
        for (std::size_t i = 0; i < relu.values.size(); ++i) CHECK(std::abs(relu.values[i] - hist.values[i]) < 1e-10);
    }
}

TEST_CASE("property: rectified pair sums to the absolute response") {
    CounterRng rng(76, 0);
    for (int trial = 0; trial < 6; ++trial) {
        const auto x = oracle::random_image(rng, 30, 30);
        const double sigma = rng.uniform(0.5, 2.5);
        const double alpha = rng.uniform(-kPi, kPi);
        const auto f = oriented_filter(sigma, alpha);
        const auto pos = relu_response(x, f);
        const auto neg = relu_response(x, oriented_filter(sigma, alpha + kPi));
        const auto lin = linear_response(x, f);
        for (std::size_t i = 0; i < lin.values.size(); ++i) {
            CHECK(std::abs(pos.values[i] + neg.values[i] - std::abs(lin.values[i])) < 1e-10);
        }
    }
}

TEST_CASE("partition_regions examples") {
    SUBCASE("flat image") {
        const auto p = partition_regions(GrayImage(20, 20, 0.5), 0.0);
        CHECK(p.positive_count() == 0);
        CHECK(p.negative_count() == 0);
        CHECK(std::isinf(p.min_distance));
    }
    SUBCASE("single step edge along its normal") {
        GrayImage img(20, 20, 0.0);
        for (int r = 0; r < 20; ++r)
            for (int c = 10; c < 20; ++c) img.at(r, c) = 1.0;
        const auto p = partition_regions(img, 0.0);
        CHECK(p.positive_count() == 40);
        CHECK(p.negative_count() == 0);
        CHECK(std::isinf(p.min_distance));
        CHECK(p.positive[5 * 20 + 9] == 1);
        CHECK(p.positive[5 * 20 + 10] == 1);
    }
    SUBCASE("two opposite edges w apart") {
        for (int w : {3, 6, 9, 14}) {
            const auto p = partition_regions(bar_image(w, 48), 0.0);
            CHECK(std::abs(p.min_distance - w) <= 1.0);
            for (std::size_t i = 0; i < p.positive.size(); ++i) CHECK_FALSE((p.positive[i] && p.negative[i]));
            CHECK(p.min_distance > 0.0);
        }
    }
}

TEST_CASE("distance transform agrees with brute force on large masks") {
    // A tent along u makes ~12k-pixel masks, beyond the brute-force switch.
    GrayImage tent(160, 160);
    for (int r = 0; r < 160; ++r)
        for (int c = 0; c < 160; ++c) tent.at(r, c) = std::abs(c - 80) / 160.0 + 0.001 * std::sin(0.1 * r);
    const auto p = partition_regions(tent, 0.0);
    REQUIRE(p.positive_count() > 10000);
    REQUIRE(p.negative_count() > 10000);
    CHECK(p.min_distance == brute_min_distance(p));
    CounterRng rng(77, 0);
    const auto smooth = gaussian_smooth(oracle::random_image(rng, 150, 150), 4.0);
    const auto q = partition_regions(smooth, 0.8, 0.0);
    REQUIRE(q.positive_count() + q.negative_count() > 10000);
    CHECK(q.min_distance == brute_min_distance(q));
}

TEST_CASE("equivalence_report examples") {
    SUBCASE("flat image has zero error in every row") {
        const auto rows = equivalence_report(GrayImage(40, 40, 0.5), {1.0, 2.0}, {0.0, 1.0, 2.0});
        REQUIRE(rows.size() == 6);
        for (const auto& r : rows) CHECK(r.rel_error == 0.0);
        CHECK(rows[0].sigma == 1.0);
        CHECK(rows[3].sigma == 2.0);
        CHECK(rows[4].alpha == 1.0);
    }
    SUBCASE("one-signed image is exact at every sigma") {
        const auto rows = equivalence_report(rising_step(80), {0.5, 1.0, 2.0, 4.0, 8.0}, {0.0, 0.5});
        for (const auto& r : rows) {
            CHECK(r.rel_error < 1e-10);
            CHECK(std::isinf(r.d_alpha));
            CHECK(r.within_bound);
        }
    }
    SUBCASE("wide support on the two-edge image is far from equivalent") {
        const auto bar = bar_image(9, 260);
        const double d = partition_regions(bar, 0.0).min_distance;
        CHECK(d == 8.0);
        const auto rows = equivalence_report(bar, {4.0 * d}, {0.0});
        CHECK(rows[0].rel_error > 1e-1);
        CHECK_FALSE(rows[0].within_bound);
    }
    SUBCASE("threads do not change the report") {
        CounterRng rng(78, 0);
        const auto x = oracle::random_image(rng, 40, 40);
        const auto a = equivalence_report(x, {1.0, 2.0}, {0.0, 1.0, 2.0}, 0.01, 1);
        const auto b = equivalence_report(x, {1.0, 2.0}, {0.0, 1.0, 2.0}, 0.01, 3);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].rel_error == b[i].rel_error);
    }
}

TEST_CASE("property: two-edge error grows with sigma / d") {
    const auto bar = bar_image(9, 260);
    const double d = partition_regions(bar, 0.0).min_distance;
    std::vector<double> sigmas;
    for (double ratio : {0.25, 0.5, 1.0, 2.0, 4.0}) sigmas.push_back(ratio * d);
    const auto rows = equivalence_report(bar, sigmas, {0.0});
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].rel_error >= rows[i - 1].rel_error);
}

TEST_CASE("two-edge separation gap: sigma = d / 4 stays below 1e-2") {
    const auto bar = bar_image(9, 260);
    const double d = partition_regions(bar, 0.0).min_distance;
    const auto rows = equivalence_report(bar, {d / 4.0}, {0.0});
    CHECK(rows[0].within_bound);
    CHECK(rows[0].rel_error < 1e-2);
}

TEST_CASE("cosine power versus angular Gaussian") {
    const auto pairs = caption_kernel_pairs();
    REQUIRE(pairs.size() == 3);
    for (const auto& p : pairs) {
        CHECK(std::pow(std::max(0.0, std::cos(0.0)), 1.0 / p.cosine_epsilon) == 1.0);
        CHECK(std::exp(-0.0 / (2.0 * p.gaussian_epsilon)) == 1.0);
    }
    const auto d = cosine_power_vs_angular_gaussian(pairs);
    REQUIRE(d.size() == 3);
    CHECK(d[2].sup_distance < d[0].sup_distance);
    CHECK(d[1].sup_distance < d[0].sup_distance);
    CHECK(d[2].sup_distance < d[1].sup_distance);
    CHECK(d[0].sup_distance == doctest::Approx(0.4962141811094865).epsilon(1e-14));
    CHECK(d[1].sup_distance == doctest::Approx(0.196114826004733).epsilon(1e-14));
    CHECK(d[2].sup_distance == doctest::Approx(0.12371145072743844).epsilon(1e-14));
    CHECK_THROWS_AS(cosine_power_vs_angular_gaussian({{0.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("report CSV layout") {
    std::ostringstream out;
    write_csv(out, {{2.0, 0.5, INFINITY, 0.25, true}, {32.0, 0.0, 8.0, 0.9, false}});
    CHECK(out.str() == "sigma,alpha,d_alpha,rel_error,within_bound\n2,0.5,inf,0.25,1\n32,0,8,0.90000000000000002,0\n");
}
