#pragma once

#include <span>
#include <vector>

#include "nilbs/transform.hpp"

namespace nilbs {

// Winding number of a closed polygon around p. Edge crossings follow the
// usual half-open rule (an upward edge counts its start height, not its end),
// so points exactly on an edge classify deterministically.
int winding_number(std::span<const Vec2> polygon, Vec2 p);

// 1 iff the winding number is nonzero; self-overlapping regions stay solid.
int point_in_polygon(std::span<const Vec2> polygon, Vec2 p);

// No two non-adjacent edges intersect, no adjacent edges overlap.
bool is_simple_polygon(std::span<const Vec2> polygon);

// Rest-pose occupancy sampled on a regular node lattice spanning the bbox
// inclusively. values is row-major: values[iy * nx + ix].
struct OccupancyGrid {
    Vec2 bbox_min;
    Vec2 bbox_max;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;

    double at(int ix, int iy) const {
        return values[static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + ix];
    }
    Vec2 node_position(int ix, int iy) const;
    void validate() const; // throws ConfigError / InvalidResolution
};

// throws InvalidResolution when a resolution is < 2, ConfigError for bad bbox
OccupancyGrid bake_grid(std::span<const Vec2> polygon, Vec2 bbox_min, Vec2 bbox_max,
                        int nx, int ny);

// Bilinear interpolation of the four surrounding nodes; 0 outside the bbox.
double query_grid(const OccupancyGrid& grid, Vec2 p);

struct GridSample {
    double value = 0.0;
    double ddx = 0.0;
    double ddy = 0.0;
};

// Value plus its (piecewise-constant) spatial gradient.
GridSample query_grid_grad(const OccupancyGrid& grid, Vec2 p);

} // namespace nilbs
