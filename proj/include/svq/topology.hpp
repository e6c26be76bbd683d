#ifndef SVQ_TOPOLOGY_HPP
#define SVQ_TOPOLOGY_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "svq/errors.hpp"

namespace svq {

// Code-array layout. A ring is a wrapped 1xM grid, a line an unwrapped one;
// everything reduces to (rows, cols, wrap). Neighbourhoods are Chebyshev
// balls in layout coordinates, truncated at the edges when wrap is off.
class Topology {
public:
    enum class Layout { Ring, Line, Grid };

    static Topology ring(int m, int radius) {
        return Topology(Layout::Ring, 1, m, true, radius);
    }
    static Topology line(int m, int radius) {
        return Topology(Layout::Line, 1, m, false, radius);
    }
    static Topology grid(int rows, int cols, bool wrap, int radius) {
        return Topology(Layout::Grid, rows, cols, wrap, radius);
    }

    Layout layout() const { return layout_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool wrap() const { return wrap_; }
    int radius() const { return radius_; }
    int size() const { return rows_ * cols_; }

    int row_of(int y) const { return y / cols_; }
    int col_of(int y) const { return y % cols_; }
    int index(int r, int c) const { return r * cols_ + c; }

    // signed coordinate delta on one axis, shortest way round when wrapped
    static int axis_delta(int a, int b, int extent, bool wrap) {
        int d = a - b;
        if (wrap) {
            d %= extent;
            if (d > extent / 2) d -= extent;
            if (d < -(extent - 1) / 2) d += extent;
        }
        return d;
    }

    int chebyshev(int a, int b) const {
        const int dr = axis_delta(row_of(a), row_of(b), rows_, wrap_);
        const int dc = axis_delta(col_of(a), col_of(b), cols_, wrap_);
        return std::max(std::abs(dr), std::abs(dc));
    }

    double dist2(int a, int b) const {
        const int dr = axis_delta(row_of(a), row_of(b), rows_, wrap_);
        const int dc = axis_delta(col_of(a), col_of(b), cols_, wrap_);
        return static_cast<double>(dr) * dr + static_cast<double>(dc) * dc;
    }

    // members of the Chebyshev ball of the given radius around y, ascending
    std::vector<int> ball(int y, int radius) const {
        std::vector<int> out;
        const int r0 = row_of(y), c0 = col_of(y);
        for (int dr = -radius; dr <= radius; ++dr) {
            for (int dc = -radius; dc <= radius; ++dc) {
                int r = r0 + dr, c = c0 + dc;
                if (wrap_) {
                    r = ((r % rows_) + rows_) % rows_;
                    c = ((c % cols_) + cols_) % cols_;
                } else if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
                    continue;
                }
                out.push_back(index(r, c));
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // N(y') for every context y'
    std::vector<std::vector<int>> neighbourhoods() const {
        std::vector<std::vector<int>> out(size());
        for (int y = 0; y < size(); ++y) out[y] = ball(y, radius_);
        return out;
    }

    std::string layout_name() const {
        switch (layout_) {
            case Layout::Ring: return "ring";
            case Layout::Line: return "line";
            default: return "grid";
        }
    }

private:
    Topology(Layout layout, int rows, int cols, bool wrap, int radius)
        : layout_(layout), rows_(rows), cols_(cols), wrap_(wrap), radius_(radius) {
        if (rows < 1 || cols < 1) throw ConfigError("Topology: empty layout");
        if (radius < 0) throw ConfigError("Topology: negative neighbourhood radius");
    }

    Layout layout_;
    int rows_, cols_;
    bool wrap_;
    int radius_;
};

} // namespace svq

#endif
