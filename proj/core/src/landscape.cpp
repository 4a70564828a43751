#include "balanceflow/landscape.hpp"

#include "balanceflow/dissonance.hpp"
#include "balanceflow/matrix.hpp"
#include "balanceflow/matrix_io.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace balanceflow {

LandscapeGrid landscape_grid(const LandscapeOptions& options) {
    if (options.n_lon < 4 || options.n_lat < 2)
        throw std::invalid_argument("grid must be at least 4 x 2");
    LandscapeGrid grid;
    grid.options = options;
    const std::size_t cells =
        static_cast<std::size_t>(options.n_lon) * static_cast<std::size_t>(options.n_lat);
    grid.x12.resize(cells);
    grid.x23.resize(cells);
    grid.x31.resize(cells);
    grid.dissonance.resize(cells);
    if (options.stereographic) {
        grid.proj_x.resize(cells);
        grid.proj_y.resize(cells);
    }

    const double radius = options.matrix_norm ? 1.0 / std::sqrt(2.0) : 1.0;
    const double pi = std::acos(-1.0);
    Matrix x = Matrix::Zero(3, 3);
    for (int i = 0; i < options.n_lat; ++i) {
        const double theta = pi * (i + 0.5) / options.n_lat;
        const double st = std::sin(theta), ct = std::cos(theta);
        for (int j = 0; j < options.n_lon; ++j) {
            const double phi = 2.0 * pi * j / options.n_lon;
            const double a = radius * st * std::cos(phi);
            const double b = radius * st * std::sin(phi);
            const double c = radius * ct;
            x(0, 1) = x(1, 0) = a;
            x(1, 2) = x(2, 1) = b;
            x(2, 0) = x(0, 2) = c;
            const std::size_t idx = grid.index(i, j);
            grid.x12[idx] = a;
            grid.x23[idx] = b;
            grid.x31[idx] = c;
            grid.dissonance[idx] = dissonance(x);
            if (options.stereographic) {
                // Projection from the pole (0, 0, r) onto the equator plane.
                const double denom = radius - c;
                grid.proj_x[idx] = a / denom;
                grid.proj_y[idx] = b / denom;
            }
        }
    }
    return grid;
}

std::vector<GridMinimum> local_minima(const LandscapeGrid& grid) {
    const int n_lat = grid.options.n_lat, n_lon = grid.options.n_lon;
    std::vector<GridMinimum> minima;
    for (int i = 0; i < n_lat; ++i) {
        for (int j = 0; j < n_lon; ++j) {
            const double d = grid.dissonance[grid.index(i, j)];
            bool strict = true;
            for (int di = -1; di <= 1 && strict; ++di) {
                const int ni = i + di;
                if (ni < 0 || ni >= n_lat) continue;
                for (int dj = -1; dj <= 1 && strict; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int nj = (j + dj + n_lon) % n_lon;
                    if (grid.dissonance[grid.index(ni, nj)] <= d) strict = false;
                }
            }
            if (!strict) continue;
            const std::size_t idx = grid.index(i, j);
            minima.push_back(
                {i, j, grid.x12[idx], grid.x23[idx], grid.x31[idx], grid.dissonance[idx]});
        }
    }
    return minima;
}

void write_landscape_csv(std::ostream& out, const LandscapeGrid& grid,
                         const std::string& metadata) {
    if (!metadata.empty()) out << "# " << metadata << "\n";
    out << "x12,x23,x31,dissonance";
    if (grid.options.stereographic) out << ",proj_x,proj_y";
    out << '\n';
    for (std::size_t idx = 0; idx < grid.dissonance.size(); ++idx) {
        out << format_double(grid.x12[idx]) << ',' << format_double(grid.x23[idx]) << ','
            << format_double(grid.x31[idx]) << ',' << format_double(grid.dissonance[idx]);
        if (grid.options.stereographic)
            out << ',' << format_double(grid.proj_x[idx]) << ',' << format_double(grid.proj_y[idx]);
        out << '\n';
    }
}

}  // namespace balanceflow
