#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sis/geometry.hpp"

namespace sis {

// Row-major bit grid; bit (x, y) set means pixel (x, y) is covered by garment.
class CoverageMask {
public:
    CoverageMask() = default;
    CoverageMask(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t words_per_row() const { return words_per_row_; }
    std::span<const std::uint64_t> words() const { return bits_; }
    std::span<std::uint64_t> words() { return bits_; }

    bool test(int x, int y) const;
    void set(int x, int y, bool value = true);
    // Sets pixels [x0, x1) of row y, clipped to the grid.
    void fill_span(int y, int x0, int x1);

    // True if any covered pixel lies within radius of p.
    bool any_within(Vec2 p, double radius) const;

    std::uint64_t popcount() const;

    void merge(const CoverageMask& other);  // union in place

    friend bool operator==(const CoverageMask&, const CoverageMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::size_t words_per_row_ = 0;
    std::vector<std::uint64_t> bits_;
};

// Pixel (x, y) is covered when its center (x + 0.5, y + 0.5) is inside the polygon
// (even-odd rule). Result is OR-ed into the mask.
void rasterize_into(CoverageMask& mask, std::span<const Vec2> poly);
CoverageMask rasterize(std::span<const Polygon> polys, int width, int height);

}  // namespace sis
