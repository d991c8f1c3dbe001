/**
 * @file imagecore.hpp
 * @brief Grayscale images, gradient fields and square patches.
 *
 * Pixel (row, col) addresses row-major storage. The horizontal coordinate u
 * runs along columns, the vertical coordinate v along rows (downwards), so
 * gx = d/du and gy = d/dv.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace invdesc {

/// Thrown by loaders for unreadable or unsupported image files.
class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PixelIndex {
    int row = 0;
    int col = 0;
    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

class GrayImage {
public:
    GrayImage() = default;
    /// Constant image. Throws std::invalid_argument for zero dimensions.
    GrayImage(int width, int height, double fill = 0.0);
    /// Takes ownership of row-major values; size must equal width * height.
    GrayImage(int width, int height, std::vector<double> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double at(int row, int col) const { return values_[index(row, col)]; }
    double& at(int row, int col) { return values_[index(row, col)]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool contains(double row, double col) const noexcept {
        return row >= 0.0 && col >= 0.0 && row <= height_ - 1 && col <= width_ - 1;
    }

private:
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> gx;
    std::vector<double> gy;

    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(col);
    }
};

/// Orientation in [-pi, pi) and nonnegative norm per pixel. `zero_magnitude`
/// flags pixels whose angle was defined as 0 because the gradient vanished.
struct PolarGradient {
    int width = 0;
    int height = 0;
    std::vector<double> angle;
    std::vector<double> magnitude;
    std::vector<bool> zero_magnitude;

    std::size_t size() const noexcept { return angle.size(); }
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(col);
    }
};

/// Square window of a parent image. Owns a copy of its pixels; `origin`
/// records where the top-left pixel sat in the parent.
struct Patch {
    PixelIndex origin;
    int side = 0;
    GrayImage pixels;
};

/// Wraps an angle to [-pi, pi).
double wrap_angle(double a) noexcept;

/// Reads an 8-bit binary PGM (P5) or 8-bit grayscale PNG, scaling bytes by 1/255.
GrayImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM, rounding values clamped to [0, 1].
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Separable Gaussian smoothing with replicate borders (kernel radius ceil(3 sigma)).
GrayImage gaussian_smooth(const GrayImage& img, double sigma);

/// Central differences in the interior, replicate padding at the border.
/// A positive `presmooth_sigma` smooths the image before differencing.
GradientField compute_gradient(const GrayImage& img, double presmooth_sigma = 0.0);

PolarGradient to_polar(const GradientField& g);
GradientField from_polar(const PolarGradient& p);

/// Square of `side` pixels whose origin is center - side / 2 (integer division).
Patch extract_patch(const GrayImage& img, PixelIndex center, int side);

/// Copies a rectangular block; throws std::out_of_range if it escapes the image.
GrayImage crop(const GrayImage& img, PixelIndex origin, int width, int height);

/// Bilinear sample at fractional (row, col). Integer positions return the stored
/// value exactly. Throws std::out_of_range outside [0, h-1] x [0, w-1].
double sample_bilinear(const GrayImage& img, double row, double col);

/// Rotates the pixel array by 90 degrees counter-clockwise as displayed
/// (out(r, c) = in(c, w - 1 - r)).
GrayImage rotate90(const GrayImage& img);

}  // namespace invdesc
