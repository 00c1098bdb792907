#include "klim/path_bundle.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "klim/error.hpp"

namespace klim {

PathBundle::PathBundle(TimeGrid grid_, std::size_t n_paths_)
    : grid(std::move(grid_)),
      n_paths(n_paths_),
      v(n_paths_ * grid.size(), 0.0),
      x(n_paths_ * grid.size(), 0.0),
      exploded(n_paths_, 0),
      explosion_index(n_paths_, -1),
      explosion_time(n_paths_, std::numeric_limits<double>::quiet_NaN()) {}

std::size_t PathBundle::exploded_count() const noexcept {
    std::size_t n = 0;
    for (auto e : exploded) n += e != 0;
    return n;
}

double PathBundle::exploded_fraction() const noexcept {
    return n_paths == 0 ? 0.0 : static_cast<double>(exploded_count()) / static_cast<double>(n_paths);
}

std::vector<double> PathBundle::v_column(std::size_t k) const {
    std::vector<double> out;
    out.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        if (valid(i, k)) out.push_back(v_at(i, k));
    return out;
}

std::vector<double> PathBundle::x_column(std::size_t k) const {
    std::vector<double> out;
    out.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        if (valid(i, k)) out.push_back(x_at(i, k));
    return out;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void write_csv(const PathBundle& bundle, std::ostream& out) {
    out << "path_id,t,v,x,exploded\n";
    for (std::size_t i = 0; i < bundle.n_paths; ++i) {
        const char* flag = bundle.exploded[i] ? "1" : "0";
        for (std::size_t k = 0; k < bundle.n_times(); ++k) {
            out << i << ',' << format_double(bundle.grid[k]) << ',' << format_double(bundle.v_at(i, k)) << ','
                << format_double(bundle.x_at(i, k)) << ',' << flag << '\n';
        }
    }
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("truncated KLIM binary stream");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_binary(const PathBundle& bundle, std::ostream& out) {
    out.write("KLIM", 4);
    put_le<std::uint32_t>(out, kBinaryFormatVersion);
    put_le<std::uint64_t>(out, bundle.n_paths);
    put_le<std::uint64_t>(out, bundle.n_times());
    for (double t : bundle.grid.nodes()) put_le(out, t);
    for (double value : bundle.v) put_le(out, value);
    for (double value : bundle.x) put_le(out, value);
    for (std::int64_t idx : bundle.explosion_index) put_le(out, idx);
}

PathBundle read_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "KLIM", 4) != 0) throw Error("not a KLIM binary stream");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kBinaryFormatVersion) throw Error("unsupported KLIM format version " + std::to_string(version));
    const auto n_paths = get_le<std::uint64_t>(in);
    const auto n_times = get_le<std::uint64_t>(in);
    std::vector<double> times(n_times);
    for (auto& t : times) t = get_le<double>(in);
    PathBundle bundle(TimeGrid::from_nodes(std::move(times)), n_paths);
    for (auto& value : bundle.v) value = get_le<double>(in);
    for (auto& value : bundle.x) value = get_le<double>(in);
    for (std::size_t i = 0; i < n_paths; ++i) {
        bundle.explosion_index[i] = get_le<std::int64_t>(in);
        bundle.exploded[i] = bundle.explosion_index[i] >= 0;
    }
    return bundle;
}

}  // namespace klim
