#include "gazelab/descriptor.hpp"

#include "gazelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gazelab {

GrayPatch::GrayPatch(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 0 || height < 0 || pixels_.size() != static_cast<std::size_t>(width) * height) {
        throw ParameterError("patch holds " + std::to_string(pixels_.size()) + " values, expected " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
    for (double v : pixels_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ParameterError("patch intensity outside [0, 1]");
        }
    }
}

GrayPatch GrayPatch::filled(int width, int height, double value) {
    return GrayPatch(width, height, std::vector<double>(static_cast<std::size_t>(width) * height, value));
}

void validate(const HogParams& p) {
    if (p.cell_size < 1 || p.n_bins < 1 || p.block_size < 1) {
        throw ParameterError("HoG cell size, bin count and block size must be positive");
    }
    if (!(p.clip_threshold > 0.0 && p.clip_threshold <= 1.0)) {
        throw ParameterError("HoG clip threshold must lie in (0, 1]");
    }
}

HogLayout hog_layout(int width, int height, const HogParams& params) {
    validate(params);
    if (width <= 0 || height <= 0 || width % params.cell_size != 0 || height % params.cell_size != 0) {
        throw ParameterError("patch " + std::to_string(width) + "x" + std::to_string(height) +
                             " is not a multiple of the cell size " + std::to_string(params.cell_size));
    }
    HogLayout layout{width / params.cell_size, height / params.cell_size, params.n_bins, params.block_size};
    if (layout.blocks_x() < 1 || layout.blocks_y() < 1) {
        throw ParameterError("patch holds fewer cells than one block");
    }
    return layout;
}

HogDescriptor compute_hog(const GrayPatch& patch, const HogParams& params) {
    const HogLayout layout = hog_layout(patch.width(), patch.height(), params);
    const int w = patch.width();
    const int h = patch.height();
    const int bins = params.n_bins;
    const double bin_width = 180.0 / bins;

    std::vector<double> cells(static_cast<std::size_t>(layout.cells_x) * layout.cells_y * bins, 0.0);
    for (int y = 0; y < h; ++y) {
        const int up = std::max(y - 1, 0);
        const int down = std::min(y + 1, h - 1);
        double* row_hist = &cells[static_cast<std::size_t>(y / params.cell_size) * layout.cells_x * bins];
        for (int x = 0; x < w; ++x) {
            const double gx = patch.at(std::min(x + 1, w - 1), y) - patch.at(std::max(x - 1, 0), y);
            const double gy = patch.at(x, down) - patch.at(x, up);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) {
                continue;
            }
            double theta = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            if (theta < 0.0) {
                theta += 180.0;
            }
            if (theta >= 180.0) {
                theta -= 180.0;
            }
            const double pos = theta / bin_width;
            const double base = std::floor(pos);
            const double frac = pos - base;
            const int lo = static_cast<int>(base) % bins;
            const int hi = (lo + 1) % bins;
            double* hist = row_hist + static_cast<std::size_t>(x / params.cell_size) * bins;
            hist[lo] += mag * (1.0 - frac);
            hist[hi] += mag * frac;
        }
    }

    HogDescriptor out;
    out.layout = layout;
    out.values.reserve(layout.size());
    std::vector<double> block(layout.block_length());
    for (int by = 0; by < layout.blocks_y(); ++by) {
        for (int bx = 0; bx < layout.blocks_x(); ++bx) {
            std::size_t n = 0;
            for (int cy = by; cy < by + params.block_size; ++cy) {
                for (int cx = bx; cx < bx + params.block_size; ++cx) {
                    const double* hist = &cells[(static_cast<std::size_t>(cy) * layout.cells_x + cx) * bins];
                    std::copy(hist, hist + bins, block.begin() + n);
                    n += bins;
                }
            }
            // L2-hys: normalize, clip, renormalize.
            for (int pass = 0; pass < 2; ++pass) {
                double ss = 0.0;
                for (double v : block) {
                    ss += v * v;
                }
                const double inv = 1.0 / std::sqrt(ss + kHogNormEpsilon * kHogNormEpsilon);
                for (double& v : block) {
                    v *= inv;
                    if (pass == 0) {
                        v = std::min(v, params.clip_threshold);
                    }
                }
            }
            out.values.insert(out.values.end(), block.begin(), block.end());
        }
    }
    return out;
}

double descriptor_distance(const HogDescriptor& a, const HogDescriptor& b) {
    if (!(a.layout == b.layout) || a.values.size() != b.values.size()) {
        throw LayoutMismatchError("descriptor layouts differ");
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

GrayPatch resample_box(const GrayPatch& image, const PixelBox& box, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1 || !(box.width > 0.0) || !(box.height > 0.0)) {
        throw ParameterError("empty region box or output size");
    }
    if (!(box.x >= 0.0) || !(box.y >= 0.0) || box.x + box.width > image.width() ||
        box.y + box.height > image.height()) {
        throw ParameterError("region box leaves the " + std::to_string(image.width()) + "x" +
                             std::to_string(image.height()) + " image");
    }
    const double sx = box.width / out_width;
    const double sy = box.height / out_height;
    const double max_x = image.width() - 1;
    const double max_y = image.height() - 1;
    std::vector<double> pixels;
    pixels.reserve(static_cast<std::size_t>(out_width) * out_height);
    for (int oy = 0; oy < out_height; ++oy) {
        const double src_y = std::clamp(box.y + (oy + 0.5) * sy - 0.5, 0.0, max_y);
        const int y0 = static_cast<int>(std::floor(src_y));
        const int y1 = std::min(y0 + 1, image.height() - 1);
        const double fy = src_y - y0;
        for (int ox = 0; ox < out_width; ++ox) {
            const double src_x = std::clamp(box.x + (ox + 0.5) * sx - 0.5, 0.0, max_x);
            const int x0 = static_cast<int>(std::floor(src_x));
            const int x1 = std::min(x0 + 1, image.width() - 1);
            const double fx = src_x - x0;
            const double top = image.at(x0, y0) * (1.0 - fx) + image.at(x1, y0) * fx;
            const double bottom = image.at(x0, y1) * (1.0 - fx) + image.at(x1, y1) * fx;
            pixels.push_back(std::clamp(top * (1.0 - fy) + bottom * fy, 0.0, 1.0));
        }
    }
    return GrayPatch(out_width, out_height, std::move(pixels));
}

RegionPatches extract_regions(const GrayPatch& image, const PixelBox& face_box, const PixelBox& eye_box,
                              const RegionSizes& sizes) {
    return {resample_box(image, face_box, sizes.face_width, sizes.face_height),
            resample_box(image, eye_box, sizes.eyes_width, sizes.eyes_height)};
}

}  // namespace gazelab
