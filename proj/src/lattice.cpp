#include "combagg/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace combagg {

std::string to_string(GraphKind kind) {
    return kind == GraphKind::Comb2 ? "comb2" : "line";
}

GraphKind graph_kind_from_string(const std::string& name) {
    if (name == "comb2" || name == "comb") return GraphKind::Comb2;
    if (name == "line") return GraphKind::Line;
    throw std::invalid_argument("unknown graph kind: " + name);
}

std::uint64_t pack(Vertex v) {
    constexpr auto lo = std::numeric_limits<std::int32_t>::min();
    constexpr auto hi = std::numeric_limits<std::int32_t>::max();
    if (v.x < lo || v.x > hi || v.y < lo || v.y > hi)
        throw std::out_of_range("vertex coordinate exceeds 32-bit packing range");
    auto ux = static_cast<std::uint32_t>(static_cast<std::int32_t>(v.x));
    auto uy = static_cast<std::uint32_t>(static_cast<std::int32_t>(v.y));
    return (static_cast<std::uint64_t>(ux) << 32) | uy;
}

Vertex unpack(std::uint64_t key) {
    auto x = static_cast<std::int32_t>(static_cast<std::uint32_t>(key >> 32));
    auto y = static_cast<std::int32_t>(static_cast<std::uint32_t>(key & 0xffffffffu));
    return {x, y};
}

std::size_t VertexHash::operator()(const Vertex& v) const noexcept {
    // splitmix64 finalizer over the two coordinates
    std::uint64_t h = static_cast<std::uint64_t>(v.x) * 0x9e3779b97f4a7c15ULL ^
                      static_cast<std::uint64_t>(v.y);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return static_cast<std::size_t>(h);
}

Neighbors neighbors(Vertex v, GraphKind kind) {
    Neighbors n;
    if (kind == GraphKind::Line) {
        n.at[0] = {v.x + 1, 0};
        n.at[1] = {v.x - 1, 0};
        n.count = 2;
    } else if (v.y == 0) {
        n.at[0] = {v.x + 1, 0};
        n.at[1] = {v.x, 1};
        n.at[2] = {v.x - 1, 0};
        n.at[3] = {v.x, -1};
        n.count = 4;
    } else {
        n.at[0] = {v.x, v.y + 1};
        n.at[1] = {v.x, v.y - 1};
        n.count = 2;
    }
    return n;
}

std::int64_t comb_distance(Vertex a, Vertex b) noexcept {
    if (a.x == b.x) return std::abs(a.y - b.y);
    return std::abs(a.y) + std::abs(a.x - b.x) + std::abs(b.y);
}

std::int64_t graph_distance(Vertex a, Vertex b, GraphKind kind) noexcept {
    if (kind == GraphKind::Line) return std::abs(a.x - b.x);
    return comb_distance(a, b);
}

std::vector<Vertex> Region::sorted_vertices() const {
    std::vector<Vertex> out;
    out.reserve(keys_.size());
    for (auto key : keys_) out.push_back(unpack(key));
    std::sort(out.begin(), out.end());
    return out;
}

bool Region::is_subset_of(const Region& other) const {
    if (size() > other.size()) return false;
    return std::all_of(keys_.begin(), keys_.end(),
                       [&](std::uint64_t k) { return other.keys_.count(k) != 0; });
}

bool Region::is_connected() const {
    if (keys_.empty()) return true;
    std::unordered_set<std::uint64_t> seen;
    std::deque<Vertex> queue{unpack(*keys_.begin())};
    seen.insert(*keys_.begin());
    while (!queue.empty()) {
        Vertex v = queue.front();
        queue.pop_front();
        for (Vertex w : neighbors(v, kind_)) {
            auto key = pack(w);
            if (keys_.count(key) && seen.insert(key).second) queue.push_back(w);
        }
    }
    return seen.size() == keys_.size();
}

RegionBoundary region_boundary(const Region& r) {
    RegionBoundary b{Region(r.kind()), Region(r.kind())};
    r.for_each([&](Vertex v) {
        for (Vertex w : neighbors(v, r.kind())) {
            if (!r.contains(w)) {
                b.outer.insert(w);
                b.inner.insert(v);
            }
        }
    });
    return b;
}

Region region_difference(const Region& a, const Region& b) {
    Region out(a.kind());
    a.for_each([&](Vertex v) {
        if (!b.contains(v)) out.insert(v);
    });
    return out;
}

std::unordered_map<Vertex, std::int64_t, VertexHash> bfs_distances(
    const Region& sources, const std::function<bool(Vertex)>& allowed, GraphKind kind) {
    std::unordered_map<Vertex, std::int64_t, VertexHash> dist;
    std::deque<Vertex> queue;
    sources.for_each([&](Vertex v) {
        dist.emplace(v, 0);
        queue.push_back(v);
    });
    while (!queue.empty()) {
        Vertex v = queue.front();
        queue.pop_front();
        const auto dv = dist[v];
        for (Vertex w : neighbors(v, kind)) {
            if (!allowed(w) || dist.count(w)) continue;
            dist.emplace(w, dv + 1);
            queue.push_back(w);
        }
    }
    return dist;
}

void write_region_csv(std::ostream& out, const Region& r) {
    out << "x,y\n";
    for (const Vertex& v : r.sorted_vertices()) out << v.x << ',' << v.y << '\n';
}

void write_region_csv(const std::string& path, const Region& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_region_csv(out, r);
}

namespace {

std::int64_t parse_int(std::string_view field, std::size_t line_no) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw std::invalid_argument("malformed integer '" + std::string(field) + "' on line " +
                                    std::to_string(line_no));
    return value;
}

}  // namespace

Region read_region_csv(std::istream& in, GraphKind kind) {
    Region r(kind);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            // extra columns (x,y,value dumps) are accepted; the first two must be x,y
            if (line.rfind("x,y", 0) != 0)
                throw std::invalid_argument("missing 'x,y' header in region CSV");
            header_seen = true;
            continue;
        }
        auto c1 = line.find(',');
        if (c1 == std::string::npos)
            throw std::invalid_argument("expected 'x,y' on line " + std::to_string(line_no));
        auto c2 = line.find(',', c1 + 1);
        std::string_view sv(line);
        Vertex v{parse_int(sv.substr(0, c1), line_no),
                 parse_int(sv.substr(c1 + 1, c2 == std::string::npos ? std::string::npos
                                                                   : c2 - c1 - 1),
                           line_no)};
        if (kind == GraphKind::Line && v.y != 0)
            throw std::invalid_argument("line graph vertex with nonzero y on line " +
                                        std::to_string(line_no));
        r.insert(v);
    }
    if (!header_seen) throw std::invalid_argument("empty region CSV");
    return r;
}

Region read_region_csv(const std::string& path, GraphKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open region CSV: " + path);
    return read_region_csv(in, kind);
}

}  // namespace combagg
