#include "klim/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "klim/error.hpp"

namespace klim {

TimeGrid::TimeGrid(Spacing spacing, std::vector<double> nodes)
    : spacing_(spacing), nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw PreconditionError("time grid needs at least one step");
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        if (!std::isfinite(nodes_[k])) throw PreconditionError("time grid node is not finite");
        if (k > 0 && !(nodes_[k] > nodes_[k - 1]))
            throw PreconditionError("time grid nodes must be strictly increasing");
    }
    if (nodes_.front() < 0.0) throw PreconditionError("time grid must start at a non-negative time");
}

TimeGrid TimeGrid::uniform(double t_start, double t_end, std::size_t n_steps) {
    if (n_steps == 0) throw PreconditionError("n_steps must be positive");
    if (!(t_end > t_start)) throw PreconditionError("t_end must exceed t_start");
    std::vector<double> nodes(n_steps + 1);
    const double span = t_end - t_start;
    for (std::size_t k = 0; k <= n_steps; ++k)
        nodes[k] = t_start + span * (static_cast<double>(k) / static_cast<double>(n_steps));
    nodes.back() = t_end;
    return TimeGrid(Spacing::uniform, std::move(nodes));
}

TimeGrid TimeGrid::logarithmic(double t_start, double t_end, std::size_t n_steps) {
    if (n_steps == 0) throw PreconditionError("n_steps must be positive");
    if (!(t_start > 0.0)) throw PreconditionError("logarithmic grid needs t_start > 0");
    if (!(t_end > t_start)) throw PreconditionError("t_end must exceed t_start");
    std::vector<double> nodes(n_steps + 1);
    const double log_ratio = std::log(t_end / t_start);
    for (std::size_t k = 0; k <= n_steps; ++k)
        nodes[k] = t_start * std::exp(log_ratio * (static_cast<double>(k) / static_cast<double>(n_steps)));
    nodes.front() = t_start;
    nodes.back() = t_end;
    return TimeGrid(Spacing::logarithmic, std::move(nodes));
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) { return TimeGrid(Spacing::custom, std::move(nodes)); }

std::optional<std::size_t> TimeGrid::find_node(double t, double rel_tol) const noexcept {
    const double tol = rel_tol * std::max(1.0, std::abs(t));
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
    if (it != nodes_.end() && std::abs(*it - t) <= tol) return static_cast<std::size_t>(it - nodes_.begin());
    return std::nullopt;
}

std::size_t TimeGrid::locate(double t) const noexcept {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    std::size_t k = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return std::min(k, n_steps() - 1);
}

TimeGrid TimeGrid::subgrid(std::span<const std::size_t> indices) const {
    std::vector<double> nodes;
    nodes.reserve(indices.size());
    for (std::size_t k : indices) {
        if (k >= nodes_.size()) throw RangeError("subgrid index out of range");
        nodes.push_back(nodes_[k]);
    }
    return TimeGrid(Spacing::custom, std::move(nodes));
}

std::vector<std::size_t> node_indices(const TimeGrid& grid, std::span<const double> times, double rel_tol) {
    std::vector<std::size_t> out;
    out.reserve(times.size());
    for (double t : times) {
        auto k = grid.find_node(t, rel_tol);
        if (!k) throw RangeError("time " + std::to_string(t) + " is not a node of the simulation grid");
        out.push_back(*k);
    }
    return out;
}

}  // namespace klim
