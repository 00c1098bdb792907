#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace klim {

/// Strictly increasing sequence of times, node[0] = t_start, node[n_steps] = t_end.
class TimeGrid {
public:
    enum class Spacing { uniform, logarithmic, custom };

    static TimeGrid uniform(double t_start, double t_end, std::size_t n_steps);
    /// Geometric spacing; requires t_start > 0.
    static TimeGrid logarithmic(double t_start, double t_end, std::size_t n_steps);
    static TimeGrid from_nodes(std::vector<double> nodes);

    Spacing spacing() const noexcept { return spacing_; }
    std::size_t n_steps() const noexcept { return nodes_.size() - 1; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double t_start() const noexcept { return nodes_.front(); }
    double t_end() const noexcept { return nodes_.back(); }
    double operator[](std::size_t k) const noexcept { return nodes_[k]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    /// Index of the node equal to t within rel_tol * max(1, |t|), if any.
    std::optional<std::size_t> find_node(double t, double rel_tol = 1e-10) const noexcept;
    /// Largest k with node[k] <= t, clamped to [0, n_steps - 1]; t must lie in [t_start, t_end].
    std::size_t locate(double t) const noexcept;
    /// Nodes at the given sorted indices.
    TimeGrid subgrid(std::span<const std::size_t> indices) const;

private:
    TimeGrid(Spacing spacing, std::vector<double> nodes);

    Spacing spacing_;
    std::vector<double> nodes_;
};

/// Indices of `times` on `grid`; throws RangeError naming the first time that is not a node.
std::vector<std::size_t> node_indices(const TimeGrid& grid, std::span<const double> times,
                                      double rel_tol = 1e-10);

}  // namespace klim
