#include "sis/coverage_mask.hpp"

#include <algorithm>
#include <cmath>

#include "sis/errors.hpp"
#include "sis/kernels/mask_kernels.hpp"

namespace sis {

CoverageMask::CoverageMask(int width, int height)
    : width_(width), height_(height), words_per_row_((static_cast<std::size_t>(width) + 63) / 64) {
    if (width < 1 || height < 1) throw InputError("mask dimensions must be positive");
    bits_.assign(words_per_row_ * static_cast<std::size_t>(height), 0);
}

bool CoverageMask::test(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
    const std::uint64_t w = bits_[static_cast<std::size_t>(y) * words_per_row_ + static_cast<std::size_t>(x) / 64];
    return (w >> (x % 64)) & 1u;
}

void CoverageMask::set(int x, int y, bool value) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) throw InputError("pixel outside mask");
    std::uint64_t& w = bits_[static_cast<std::size_t>(y) * words_per_row_ + static_cast<std::size_t>(x) / 64];
    const std::uint64_t bit = std::uint64_t{1} << (x % 64);
    w = value ? (w | bit) : (w & ~bit);
}

void CoverageMask::fill_span(int y, int x0, int x1) {
    if (y < 0 || y >= height_) return;
    x0 = std::max(x0, 0);
    x1 = std::min(x1, width_);
    if (x0 >= x1) return;
    std::uint64_t* row = bits_.data() + static_cast<std::size_t>(y) * words_per_row_;
    const int w0 = x0 / 64, w1 = (x1 - 1) / 64;
    const std::uint64_t first = ~std::uint64_t{0} << (x0 % 64);
    const std::uint64_t last = ~std::uint64_t{0} >> (63 - (x1 - 1) % 64);
    if (w0 == w1) {
        row[w0] |= first & last;
        return;
    }
    row[w0] |= first;
    for (int w = w0 + 1; w < w1; ++w) row[w] = ~std::uint64_t{0};
    row[w1] |= last;
}

bool CoverageMask::any_within(Vec2 p, double radius) const {
    const int x0 = static_cast<int>(std::floor(p.x - radius)), x1 = static_cast<int>(std::ceil(p.x + radius));
    const int y0 = static_cast<int>(std::floor(p.y - radius)), y1 = static_cast<int>(std::ceil(p.y + radius));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (test(x, y) && distance({x + 0.5, y + 0.5}, p) <= radius + 0.5) return true;
    return false;
}

std::uint64_t CoverageMask::popcount() const { return kernels::active_kernels().popcount(bits_.data(), bits_.size()); }

void CoverageMask::merge(const CoverageMask& other) {
    if (other.width_ != width_ || other.height_ != height_) throw InputError("mask dimensions differ");
    kernels::active_kernels().or_into(bits_.data(), other.bits_.data(), bits_.size());
}

void rasterize_into(CoverageMask& mask, std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return;
    BBox bb = bounds(poly);
    const int y_begin = std::max(0, static_cast<int>(std::ceil(bb.min_y - 0.5)));
    const int y_end = std::min(mask.height(), static_cast<int>(std::ceil(bb.max_y - 0.5)));
    std::vector<double> xs;
    for (int y = y_begin; y < y_end; ++y) {
        const double yc = y + 0.5;
        xs.clear();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            Vec2 a = poly[i], b = poly[j];
            if ((a.y > yc) != (b.y > yc)) xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // Pixel x covered iff xs[k] <= x + 0.5 < xs[k+1].
            const int x0 = static_cast<int>(std::ceil(xs[k] - 0.5));
            const int x1 = static_cast<int>(std::ceil(xs[k + 1] - 0.5));
            mask.fill_span(y, x0, x1);
        }
    }
}

CoverageMask rasterize(std::span<const Polygon> polys, int width, int height) {
    CoverageMask mask(width, height);
    for (const auto& p : polys) rasterize_into(mask, p);
    return mask;
}

}  // namespace sis
