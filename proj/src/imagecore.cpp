#include "invdesc/imagecore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace invdesc {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("GrayImage: dimensions must be positive");
    }
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("GrayImage: dimensions must be positive");
    }
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("GrayImage: value count does not match dimensions");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("GrayImage: non-finite value");
    }
}

double wrap_angle(double a) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (a >= -std::numbers::pi && a < std::numbers::pi) return a;
    double w = std::fmod(a + std::numbers::pi, two_pi);
    if (w < 0.0) w += two_pi;
    w -= std::numbers::pi;
    // fmod rounding can land exactly on +pi
    if (w >= std::numbers::pi) w -= two_pi;
    return w;
}

GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
    if (!(sigma > 0.0)) return img;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += kernel[k + radius];
    }
    for (double& k : kernel) k /= sum;

    const int w = img.width();
    const int h = img.height();
    GrayImage tmp(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * img.at(r, std::clamp(c + k, 0, w - 1));
            }
            tmp.at(r, c) = acc;
        }
    }
    GrayImage out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * tmp.at(std::clamp(r + k, 0, h - 1), c);
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

GradientField compute_gradient(const GrayImage& img, double presmooth_sigma) {
    if (img.width() < 3 || img.height() < 3) {
        throw std::invalid_argument("compute_gradient: image must be at least 3x3");
    }
    const GrayImage src = presmooth_sigma > 0.0 ? gaussian_smooth(img, presmooth_sigma) : img;
    const int w = src.width();
    const int h = src.height();
    GradientField g{w, h, std::vector<double>(src.size()), std::vector<double>(src.size())};
    for (int r = 0; r < h; ++r) {
        const int up = std::max(r - 1, 0);
        const int down = std::min(r + 1, h - 1);
        for (int c = 0; c < w; ++c) {
            const int left = std::max(c - 1, 0);
            const int right = std::min(c + 1, w - 1);
            const std::size_t i = g.index(r, c);
            g.gx[i] = 0.5 * (src.at(r, right) - src.at(r, left));
            g.gy[i] = 0.5 * (src.at(down, c) - src.at(up, c));
        }
    }
    return g;
}

PolarGradient to_polar(const GradientField& g) {
    const std::size_t n = g.gx.size();
    PolarGradient p{g.width, g.height, std::vector<double>(n), std::vector<double>(n),
                    std::vector<bool>(n, false)};
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::hypot(g.gx[i], g.gy[i]);
        p.magnitude[i] = mag;
        if (mag == 0.0) {
            p.angle[i] = 0.0;
            p.zero_magnitude[i] = true;
        } else {
            p.angle[i] = wrap_angle(std::atan2(g.gy[i], g.gx[i]));
        }
    }
    return p;
}

GradientField from_polar(const PolarGradient& p) {
    const std::size_t n = p.angle.size();
    GradientField g{p.width, p.height, std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        g.gx[i] = p.magnitude[i] * std::cos(p.angle[i]);
        g.gy[i] = p.magnitude[i] * std::sin(p.angle[i]);
    }
    return g;
}

GrayImage crop(const GrayImage& img, PixelIndex origin, int width, int height) {
    if (width < 1 || height < 1 || origin.row < 0 || origin.col < 0 ||
        origin.row + height > img.height() || origin.col + width > img.width()) {
        throw std::out_of_range("crop: window escapes image bounds");
    }
    GrayImage out(width, height);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) out.at(r, c) = img.at(origin.row + r, origin.col + c);
    }
    return out;
}

Patch extract_patch(const GrayImage& img, PixelIndex center, int side) {
    if (side < 1) throw std::invalid_argument("extract_patch: side must be positive");
    const PixelIndex origin{center.row - side / 2, center.col - side / 2};
    if (origin.row < 0 || origin.col < 0 || origin.row + side > img.height() ||
        origin.col + side > img.width()) {
        throw std::out_of_range("extract_patch: requested square of side " + std::to_string(side) +
                                " escapes the image");
    }
    return Patch{origin, side, crop(img, origin, side, side)};
}

double sample_bilinear(const GrayImage& img, double row, double col) {
    if (!img.contains(row, col)) {
        throw std::out_of_range("sample_bilinear: position outside image");
    }
    const int r0 = static_cast<int>(std::floor(row));
    const int c0 = static_cast<int>(std::floor(col));
    const double fr = row - r0;
    const double fc = col - c0;
    const int r1 = fr > 0.0 ? r0 + 1 : r0;
    const int c1 = fc > 0.0 ? c0 + 1 : c0;
    if (fr == 0.0 && fc == 0.0) return img.at(r0, c0);
    // std::lerp returns equal endpoints unchanged, so resampling a flat region
    // stays exactly flat instead of picking up rounding-level gradients.
    const double top = std::lerp(img.at(r0, c0), img.at(r0, c1), fc);
    const double bottom = std::lerp(img.at(r1, c0), img.at(r1, c1), fc);
    return std::lerp(top, bottom, fr);
}

GrayImage rotate90(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    GrayImage out(h, w);
    for (int r = 0; r < w; ++r) {
        for (int c = 0; c < h; ++c) out.at(r, c) = img.at(c, w - 1 - r);
    }
    return out;
}

}  // namespace invdesc
