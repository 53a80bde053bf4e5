#include "nilbs/occupancy.hpp"

#include <algorithm>
#include <cmath>

#include "nilbs/errors.hpp"

namespace nilbs {

namespace {

// > 0 when p lies left of the directed line a -> b
double is_left(Vec2 a, Vec2 b, Vec2 p) {
    return (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = is_left(c, d, a);
    const double d2 = is_left(c, d, b);
    const double d3 = is_left(a, b, c);
    const double d4 = is_left(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    if (d1 == 0 && on_segment(c, d, a)) return true;
    if (d2 == 0 && on_segment(c, d, b)) return true;
    if (d3 == 0 && on_segment(a, b, c)) return true;
    if (d4 == 0 && on_segment(a, b, d)) return true;
    return false;
}

} // namespace

int winding_number(std::span<const Vec2> polygon, Vec2 p) {
    int wn = 0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[(i + 1) % n];
        if (a.y <= p.y) {
            if (b.y > p.y && is_left(a, b, p) > 0) {
                ++wn;
            }
        } else {
            if (b.y <= p.y && is_left(a, b, p) < 0) {
                --wn;
            }
        }
    }
    return wn;
}

int point_in_polygon(std::span<const Vec2> polygon, Vec2 p) {
    return winding_number(polygon, p) != 0 ? 1 : 0;
}

bool is_simple_polygon(std::span<const Vec2> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[(i + 1) % n];
        if (a.x == b.x && a.y == b.y) {
            return false; // degenerate edge
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            // skip the edge itself and the two edges sharing a vertex with it
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) {
                continue;
            }
            if (segments_intersect(a, b, polygon[j], polygon[(j + 1) % n])) {
                return false;
            }
        }
    }
    return true;
}

Vec2 OccupancyGrid::node_position(int ix, int iy) const {
    const double sx = (bbox_max.x - bbox_min.x) / (nx - 1);
    const double sy = (bbox_max.y - bbox_min.y) / (ny - 1);
    return {bbox_min.x + ix * sx, bbox_min.y + iy * sy};
}

void OccupancyGrid::validate() const {
    if (nx < 2 || ny < 2) {
        throw InvalidResolution("grid resolution must be at least 2 per axis");
    }
    if (!(bbox_max.x > bbox_min.x) || !(bbox_max.y > bbox_min.y)) {
        throw ConfigError("grid bbox_max must exceed bbox_min componentwise");
    }
    if (values.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
        throw ConfigError("grid value count does not match resolution");
    }
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ConfigError("grid values must lie in [0,1]");
        }
    }
}

OccupancyGrid bake_grid(std::span<const Vec2> polygon, Vec2 bbox_min, Vec2 bbox_max,
                        int nx, int ny) {
    if (nx < 2 || ny < 2) {
        throw InvalidResolution("bake resolution must be at least 2 per axis");
    }
    if (!(bbox_max.x > bbox_min.x) || !(bbox_max.y > bbox_min.y)) {
        throw ConfigError("bake bbox_max must exceed bbox_min componentwise");
    }
    OccupancyGrid grid;
    grid.bbox_min = bbox_min;
    grid.bbox_max = bbox_max;
    grid.nx = nx;
    grid.ny = ny;
    grid.values.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            grid.values[static_cast<std::size_t>(iy) * nx + ix] =
                static_cast<double>(point_in_polygon(polygon, grid.node_position(ix, iy)));
        }
    }
    return grid;
}

namespace {

struct CellLookup {
    bool inside = false;
    int ix = 0, iy = 0;
    double fx = 0.0, fy = 0.0;
    double sx = 1.0, sy = 1.0; // node spacing
};

CellLookup locate(const OccupancyGrid& grid, Vec2 p) {
    CellLookup c;
    if (p.x < grid.bbox_min.x || p.x > grid.bbox_max.x || p.y < grid.bbox_min.y ||
        p.y > grid.bbox_max.y) {
        return c;
    }
    c.inside = true;
    c.sx = (grid.bbox_max.x - grid.bbox_min.x) / (grid.nx - 1);
    c.sy = (grid.bbox_max.y - grid.bbox_min.y) / (grid.ny - 1);
    const double u = (p.x - grid.bbox_min.x) / c.sx;
    const double v = (p.y - grid.bbox_min.y) / c.sy;
    c.ix = std::clamp(static_cast<int>(std::floor(u)), 0, grid.nx - 2);
    c.iy = std::clamp(static_cast<int>(std::floor(v)), 0, grid.ny - 2);
    c.fx = u - c.ix;
    c.fy = v - c.iy;
    return c;
}

} // namespace

double query_grid(const OccupancyGrid& grid, Vec2 p) {
    const CellLookup c = locate(grid, p);
    if (!c.inside) {
        return 0.0;
    }
    const double v00 = grid.at(c.ix, c.iy);
    const double v10 = grid.at(c.ix + 1, c.iy);
    const double v01 = grid.at(c.ix, c.iy + 1);
    const double v11 = grid.at(c.ix + 1, c.iy + 1);
    // nested lerps keep constant cells exact
    const double lo = v00 + c.fx * (v10 - v00);
    const double hi = v01 + c.fx * (v11 - v01);
    return lo + c.fy * (hi - lo);
}

GridSample query_grid_grad(const OccupancyGrid& grid, Vec2 p) {
    GridSample s;
    const CellLookup c = locate(grid, p);
    if (!c.inside) {
        return s;
    }
    const double v00 = grid.at(c.ix, c.iy);
    const double v10 = grid.at(c.ix + 1, c.iy);
    const double v01 = grid.at(c.ix, c.iy + 1);
    const double v11 = grid.at(c.ix + 1, c.iy + 1);
    const double lo = v00 + c.fx * (v10 - v00);
    const double hi = v01 + c.fx * (v11 - v01);
    s.value = lo + c.fy * (hi - lo);
    s.ddx = ((v10 - v00) + c.fy * ((v11 - v01) - (v10 - v00))) / c.sx;
    s.ddy = (hi - lo) / c.sy;
    return s;
}

} // namespace nilbs
