#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace balanceflow {

/// Energy landscape sampling for n = 3, where a symmetric zero-diagonal
/// matrix is determined by (x12, x23, x31). The default grid lives on the
/// coordinate sphere x12^2 + x23^2 + x31^2 = 1 (whose matrices have
/// Frobenius norm sqrt(2), so the energy ranges over [-2/sqrt(3),
/// 2/sqrt(3)]); `matrix_norm` rescales the samples to unit-Frobenius
/// matrices instead. Colatitude samples are cell-centered, so the poles are
/// never evaluated; longitude starts at 0.
struct LandscapeOptions {
    int n_lon = 400;
    int n_lat = 200;
    bool stereographic = false;  // also emit the north-pole projection
    bool matrix_norm = false;    // scale coordinates by 1/sqrt(2)
};

struct LandscapeGrid {
    LandscapeOptions options;
    // Row-major over (lat, lon).
    std::vector<double> x12, x23, x31, dissonance;
    std::vector<double> proj_x, proj_y;  // filled when options.stereographic

    std::size_t index(int lat, int lon) const {
        return static_cast<std::size_t>(lat) * options.n_lon + lon;
    }
};

/// One strict local minimum of the sampled energy.
struct GridMinimum {
    int lat = 0;
    int lon = 0;
    double x12 = 0, x23 = 0, x31 = 0;
    double dissonance = 0;
};

/// Sample the energy over the grid. Coordinates map as
/// (x12, x23, x31) = r (sin t cos p, sin t sin p, cos t) with r = 1 or
/// 1/sqrt(2); the energy is evaluated on the assembled symmetric matrix.
LandscapeGrid landscape_grid(const LandscapeOptions& options = {});

/// Strict local minima against the 8-neighborhood, with longitude
/// wraparound; boundary rows compare only existing neighbors.
std::vector<GridMinimum> local_minima(const LandscapeGrid& grid);

/// CSV columns x12, x23, x31, dissonance[, proj_x, proj_y]; `metadata`,
/// when nonempty, is written first as a '#' comment line.
void write_landscape_csv(std::ostream& out, const LandscapeGrid& grid,
                         const std::string& metadata = {});

}  // namespace balanceflow
