#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace combagg {

// Backbone vertices have y == 0; every other vertex sits on the tooth above
// or below (x, 0).
struct Vertex {
    std::int64_t x = 0;
    std::int64_t y = 0;

    constexpr bool on_backbone() const noexcept { return y == 0; }
    friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;
};

inline constexpr Vertex kOrigin{0, 0};

enum class GraphKind { Comb2, Line };

std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& name);

// Packs a vertex into one 64-bit key. Coordinates must fit in 32 bits.
std::uint64_t pack(Vertex v);
Vertex unpack(std::uint64_t key);

struct VertexHash {
    std::size_t operator()(const Vertex& v) const noexcept;
};

/// Neighbors in the fixed rotor order.
///
/// Backbone: East, North, West, South. Tooth: North, South. Line: East, West.
/// Only the first `degree(v, kind)` entries are meaningful.
struct Neighbors {
    std::array<Vertex, 4> at{};
    int count = 0;

    const Vertex* begin() const { return at.data(); }
    const Vertex* end() const { return at.data() + count; }
    std::size_t size() const { return static_cast<std::size_t>(count); }
    const Vertex& operator[](std::size_t i) const { return at[i]; }
};

Neighbors neighbors(Vertex v, GraphKind kind);

constexpr int degree(Vertex v, GraphKind kind) noexcept {
    return (kind == GraphKind::Comb2 && v.y == 0) ? 4 : 2;
}

// Shortest-path length on the comb.
std::int64_t comb_distance(Vertex a, Vertex b) noexcept;

// Shortest-path length on whichever graph `kind` names; Line ignores y.
std::int64_t graph_distance(Vertex a, Vertex b, GraphKind kind) noexcept;

/// Finite vertex set on one graph, stored as packed keys.
class Region {
public:
    explicit Region(GraphKind kind = GraphKind::Comb2) : kind_(kind) {}

    GraphKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return keys_.size(); }
    bool empty() const noexcept { return keys_.empty(); }

    bool contains(Vertex v) const { return keys_.count(pack(v)) != 0; }
    bool insert(Vertex v) { return keys_.insert(pack(v)).second; }
    bool erase(Vertex v) { return keys_.erase(pack(v)) != 0; }

    // Lexicographic (x, y) order.
    std::vector<Vertex> sorted_vertices() const;

    template <class F>
    void for_each(F&& f) const {
        for (auto key : keys_) f(unpack(key));
    }

    bool is_subset_of(const Region& other) const;
    bool is_connected() const;

    friend bool operator==(const Region& a, const Region& b) {
        return a.kind_ == b.kind_ && a.keys_ == b.keys_;
    }

private:
    GraphKind kind_;
    std::unordered_set<std::uint64_t> keys_;
};

struct RegionBoundary {
    Region outer;  // outside the region, adjacent to it
    Region inner;  // inside the region, adjacent to the complement
};

RegionBoundary region_boundary(const Region& r);

// Vertices of a that are not in b.
Region region_difference(const Region& a, const Region& b);

// Multi-source breadth-first distances from `sources`, restricted to vertices
// for which `allowed` is true. Unreached vertices are absent from the result.
std::unordered_map<Vertex, std::int64_t, VertexHash> bfs_distances(
    const Region& sources, const std::function<bool(Vertex)>& allowed, GraphKind kind);

// CSV with header "x,y", sorted by (x, y), LF endings.
void write_region_csv(std::ostream& out, const Region& r);
void write_region_csv(const std::string& path, const Region& r);
Region read_region_csv(std::istream& in, GraphKind kind = GraphKind::Comb2);
Region read_region_csv(const std::string& path, GraphKind kind = GraphKind::Comb2);

}  // namespace combagg

template <>
struct std::hash<combagg::Vertex> : combagg::VertexHash {};
