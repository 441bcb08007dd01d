#include "entrykin/grid.hpp"

#include <cmath>

#include <fmt/format.h>

#include "entrykin/errors.hpp"

namespace entrykin {

Grid::Grid(double x_min, double x_max, int n_cells) : x_min_(x_min), x_max_(x_max), n_(n_cells) {
    if (!(std::isfinite(x_min) && std::isfinite(x_max) && x_min < 0.0 && x_max > 0.0))
        throw ContractViolation(fmt::format("grid needs x_min < 0 < x_max (got [{}, {}])", x_min, x_max));
    if (n_cells < 16) throw ContractViolation(fmt::format("grid needs at least 16 cells (got {})", n_cells));
    dx_ = (x_max - x_min) / n_cells;
}

std::vector<double> Grid::centers() const {
    std::vector<double> c(size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = center(i);
    return c;
}

std::vector<double> gaussian_density(const Grid& grid, double mean, double sd) {
    if (!(sd > 0.0)) throw ContractViolation("gaussian sd must be > 0");
    std::vector<double> f(grid.size());
    const double s = 1.0 / (sd * std::sqrt(2.0));
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double lo = (grid.face(i) - mean) * s, hi = (grid.face(i + 1) - mean) * s;
        // erfc of the side farther from the mean keeps tail cells accurate.
        double w = hi <= 0.0 ? 0.5 * (std::erfc(-hi) - std::erfc(-lo)) : 0.5 * (std::erfc(lo) - std::erfc(hi));
        if (lo < 0.0 && hi > 0.0) w = 0.5 * (std::erf(hi) - std::erf(lo));
        f[i] = w;
        total += w;
    }
    if (!(total > 0.0)) throw ContractViolation("gaussian has no mass on the grid");
    for (auto& v : f) v /= total * grid.dx();
    return f;
}

double grid_mass(const std::vector<double>& f, const Grid& grid) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * grid.dx();
}

}  // namespace entrykin
