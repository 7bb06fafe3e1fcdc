#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lattice_lab {

/// Uniform cell-centered grid on [-p_max, p_max] with an even number of
/// cells, so p = 0 always falls on the middle face and centers come in
/// +/- pairs.
class Grid {
public:
    Grid(double p_max, std::size_t n);

    [[nodiscard]] double p_max() const noexcept { return p_max_; }
    [[nodiscard]] std::size_t size() const noexcept { return centers_.size(); }
    [[nodiscard]] double dp() const noexcept { return dp_; }
    /// n cell centers, strictly increasing.
    [[nodiscard]] std::span<const double> centers() const noexcept { return centers_; }
    /// n + 1 faces, faces()[0] = -p_max and faces()[n] = p_max.
    [[nodiscard]] std::span<const double> faces() const noexcept { return faces_; }

private:
    double p_max_;
    double dp_;
    std::vector<double> centers_;
    std::vector<double> faces_;
};

/// w(p, t) sampled as cell averages (density per unit momentum).
struct Field {
    Grid grid;
    double t = 0.0;
    std::vector<double> values;

    /// Sum of values * dp.
    [[nodiscard]] double mass() const noexcept;
};

/// Sum over cells of |a - b| * dp; both fields must share a grid size.
[[nodiscard]] double l1_distance(const Field& a, std::span<const double> b);

}  // namespace lattice_lab
