#pragma once

// Histogram-of-oriented-gradients descriptors for face and eye patches.

#include <cstddef>
#include <vector>

namespace gazelab {

/// Row-major grayscale raster with intensities in [0, 1].
class GrayPatch {
public:
    GrayPatch() = default;
    /// Throws ParameterError when the size does not match or a value is
    /// outside [0, 1].
    GrayPatch(int width, int height, std::vector<double> pixels);
    static GrayPatch filled(int width, int height, double value);

    int width() const { return width_; }
    int height() const { return height_; }
    double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    const std::vector<double>& pixels() const { return pixels_; }

    friend bool operator==(const GrayPatch&, const GrayPatch&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> pixels_;
};

struct HogParams {
    int cell_size = 8;
    int n_bins = 9;       // unsigned orientations over [0, 180)
    int block_size = 2;   // cells per block side, stride one cell
    double clip_threshold = 0.2;

    friend bool operator==(const HogParams&, const HogParams&) = default;
};

/// Throws ParameterError on non-positive values or a clip outside (0, 1].
void validate(const HogParams& params);

struct HogLayout {
    int cells_x = 0;
    int cells_y = 0;
    int bins = 0;
    int block_size = 0;

    int blocks_x() const { return cells_x - block_size + 1; }
    int blocks_y() const { return cells_y - block_size + 1; }
    int block_length() const { return block_size * block_size * bins; }
    std::size_t size() const { return static_cast<std::size_t>(blocks_x()) * blocks_y() * block_length(); }

    friend bool operator==(const HogLayout&, const HogLayout&) = default;
};

/// Concatenated L2-hys normalized blocks, in block raster order; within a
/// block, cells in raster order and bins innermost.
struct HogDescriptor {
    HogLayout layout;
    std::vector<double> values;
};

/// Regularizer inside the block norm, sqrt(|v|^2 + eps^2).
inline constexpr double kHogNormEpsilon = 1e-12;

HogLayout hog_layout(int width, int height, const HogParams& params);

/// Centered-difference gradients with replicated borders, magnitude-weighted
/// votes split linearly between the two nearest bin centers (bin b centered
/// at b * 180 / n_bins, wrapping), per-cell histograms, and L2-hys block
/// normalization. Throws ParameterError when the patch size is not a multiple
/// of the cell size or holds fewer cells than a block.
HogDescriptor compute_hog(const GrayPatch& patch, const HogParams& params);

/// Euclidean distance; throws LayoutMismatchError on differing layouts.
double descriptor_distance(const HogDescriptor& a, const HogDescriptor& b);

struct PixelBox {
    double x = 0.0;  // left edge, pixels
    double y = 0.0;  // top edge
    double width = 0.0;
    double height = 0.0;
};

struct RegionSizes {
    int face_width = 64;
    int face_height = 64;
    int eyes_width = 64;
    int eyes_height = 16;

    friend bool operator==(const RegionSizes&, const RegionSizes&) = default;
};

/// Bilinear resample of a box (pixel-center sampling, clamped at the image
/// border) to out_width x out_height. Throws ParameterError when the box
/// leaves the image or is empty.
GrayPatch resample_box(const GrayPatch& image, const PixelBox& box, int out_width, int out_height);

struct RegionPatches {
    GrayPatch face;
    GrayPatch eyes;
};

RegionPatches extract_regions(const GrayPatch& image, const PixelBox& face_box, const PixelBox& eye_box,
                              const RegionSizes& sizes = {});

}  // namespace gazelab
