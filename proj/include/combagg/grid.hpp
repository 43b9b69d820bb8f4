#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "combagg/lattice.hpp"

namespace combagg {

/// Dense box of values that enlarges itself on write outside the box.
/// Reads outside the box return the fill value.
template <class T>
class GrowableGrid {
public:
    GrowableGrid(std::int64_t half_x, std::int64_t half_y, T fill = T{})
        : fill_(fill) {
        reshape(-half_x, half_x, -half_y, half_y);
    }

    bool inside(std::int64_t x, std::int64_t y) const {
        return x >= x0_ && x <= x1_ && y >= y0_ && y <= y1_;
    }

    T get(std::int64_t x, std::int64_t y) const {
        return inside(x, y) ? cells_[index(x, y)] : fill_;
    }
    T get(Vertex v) const { return get(v.x, v.y); }

    T& ref(std::int64_t x, std::int64_t y) {
        if (!inside(x, y)) grow_to(x, y);
        return cells_[index(x, y)];
    }
    T& ref(Vertex v) { return ref(v.x, v.y); }

    // Visits every cell whose value differs from the fill value, in (x, y) order.
    template <class F>
    void for_each_set(F&& f) const {
        for (std::int64_t x = x0_; x <= x1_; ++x)
            for (std::int64_t y = y0_; y <= y1_; ++y) {
                const T& value = cells_[index(x, y)];
                if (value != fill_) f(Vertex{x, y}, value);
            }
    }

private:
    std::size_t index(std::int64_t x, std::int64_t y) const {
        return static_cast<std::size_t>((x - x0_) * (y1_ - y0_ + 1) + (y - y0_));
    }

    void reshape(std::int64_t x0, std::int64_t x1, std::int64_t y0, std::int64_t y1) {
        std::vector<T> next(static_cast<std::size_t>((x1 - x0 + 1) * (y1 - y0 + 1)), fill_);
        const std::int64_t h = y1 - y0 + 1;
        if (!cells_.empty()) {
            for (std::int64_t x = x0_; x <= x1_; ++x)
                for (std::int64_t y = y0_; y <= y1_; ++y)
                    next[static_cast<std::size_t>((x - x0) * h + (y - y0))] = cells_[index(x, y)];
        }
        cells_.swap(next);
        x0_ = x0;
        x1_ = x1;
        y0_ = y0;
        y1_ = y1;
    }

    void grow_to(std::int64_t x, std::int64_t y) {
        const std::int64_t wx = x1_ - x0_ + 1, wy = y1_ - y0_ + 1;
        std::int64_t nx0 = x0_, nx1 = x1_, ny0 = y0_, ny1 = y1_;
        if (x < x0_) nx0 = std::min(x, x0_ - wx / 2 - 1);
        if (x > x1_) nx1 = std::max(x, x1_ + wx / 2 + 1);
        if (y < y0_) ny0 = std::min(y, y0_ - wy / 2 - 1);
        if (y > y1_) ny1 = std::max(y, y1_ + wy / 2 + 1);
        reshape(nx0, nx1, ny0, ny1);
    }

    T fill_;
    std::vector<T> cells_;
    std::int64_t x0_ = 0, x1_ = -1, y0_ = 0, y1_ = -1;
};

}  // namespace combagg
