#pragma once

#include <vector>

namespace entrykin {

/// Uniform 1-D cell grid on [x_min, x_max]. Requires x_min < 0 < x_max and n_cells >= 16.
class Grid {
public:
    Grid(double x_min, double x_max, int n_cells);

    [[nodiscard]] double x_min() const noexcept { return x_min_; }
    [[nodiscard]] double x_max() const noexcept { return x_max_; }
    [[nodiscard]] int n_cells() const noexcept { return n_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(n_); }
    [[nodiscard]] double dx() const noexcept { return dx_; }
    [[nodiscard]] double center(std::size_t i) const noexcept { return x_min_ + (static_cast<double>(i) + 0.5) * dx_; }
    /// Left face of cell i; face(n_cells) is x_max.
    [[nodiscard]] double face(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }
    [[nodiscard]] std::vector<double> centers() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double x_min_;
    double x_max_;
    int n_;
    double dx_;
};

/// Unit-mass Gaussian N(mean, sd^2) averaged over each cell (exact cell integrals), then
/// renormalized so that sum(f) * dx == 1 on the grid.
[[nodiscard]] std::vector<double> gaussian_density(const Grid& grid, double mean, double sd);

/// sum(f) * dx.
[[nodiscard]] double grid_mass(const std::vector<double>& f, const Grid& grid);

}  // namespace entrykin
