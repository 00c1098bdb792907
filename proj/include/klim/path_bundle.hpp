#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "klim/time_grid.hpp"

namespace klim {

/// Ensemble of (V, X) trajectories recorded on `grid`.
///
/// Storage is row-major, one row per path. A path that crosses the explosion
/// threshold keeps its values up to the last recorded time before the crossing;
/// later entries are NaN and `explosion_index` is the first invalid column.
struct PathBundle {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::vector<double> v;
    std::vector<double> x;
    std::vector<std::uint8_t> exploded;
    std::vector<std::int64_t> explosion_index;
    std::vector<double> explosion_time;
    double explosion_threshold = std::numeric_limits<double>::infinity();

    PathBundle(TimeGrid grid, std::size_t n_paths);

    std::size_t n_times() const noexcept { return grid.size(); }
    double& v_at(std::size_t path, std::size_t k) noexcept { return v[path * n_times() + k]; }
    double v_at(std::size_t path, std::size_t k) const noexcept { return v[path * n_times() + k]; }
    double& x_at(std::size_t path, std::size_t k) noexcept { return x[path * n_times() + k]; }
    double x_at(std::size_t path, std::size_t k) const noexcept { return x[path * n_times() + k]; }
    std::span<const double> v_row(std::size_t path) const noexcept {
        return {v.data() + path * n_times(), n_times()};
    }
    std::span<const double> x_row(std::size_t path) const noexcept {
        return {x.data() + path * n_times(), n_times()};
    }

    bool valid(std::size_t path, std::size_t k) const noexcept {
        return !exploded[path] || static_cast<std::int64_t>(k) < explosion_index[path];
    }
    std::size_t exploded_count() const noexcept;
    double exploded_fraction() const noexcept;

    /// Valid velocities (or positions) at column k, in path order.
    std::vector<double> v_column(std::size_t k) const;
    std::vector<double> x_column(std::size_t k) const;
};

/// CSV with header `path_id,t,v,x,exploded`, one row per (path, time), LF endings.
void write_csv(const PathBundle& bundle, std::ostream& out);

/// Little-endian binary dump.
///
///   bytes 0..3   magic "KLIM"
///   u32          format version (1)
///   u64          n_paths
///   u64          n_times
///   f64[n_times]            recorded times
///   f64[n_paths * n_times]  velocities, row-major by path
///   f64[n_paths * n_times]  positions, row-major by path
///   i64[n_paths]            explosion index (-1 when the path never exploded)
void write_binary(const PathBundle& bundle, std::ostream& out);
PathBundle read_binary(std::istream& in);

inline constexpr std::uint32_t kBinaryFormatVersion = 1;

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double value);

}  // namespace klim
