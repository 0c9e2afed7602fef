#include "clusterfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace clusterfem {

namespace {

double tri_signed_area(const Vertex& a, const Vertex& b, const Vertex& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double edge_length(const Vertex& a, const Vertex& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

}  // namespace

std::uint64_t Mesh::edge_key(int a, int b) {
    const std::uint64_t lo = static_cast<std::uint64_t>(std::min(a, b));
    const std::uint64_t hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

std::array<int, 2> Mesh::edge_vertices(std::uint64_t key) {
    return {static_cast<int>(key & 0xffffffffu), static_cast<int>(key >> 32)};
}

Mesh::Mesh(std::vector<Vertex> vertices, std::vector<Element> elements)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
    finalize_edges();
}

void Mesh::finalize_edges() {
    edges_.clear();
    edges_.reserve(elements_.size() * 2);
    for (int e = 0; e < num_elements(); ++e) {
        const auto& t = elements_[static_cast<std::size_t>(e)];
        if (tri_signed_area(vertices_[static_cast<std::size_t>(t.v[0])],
                            vertices_[static_cast<std::size_t>(t.v[1])],
                            vertices_[static_cast<std::size_t>(t.v[2])]) <= 0.0) {
            throw std::invalid_argument("Mesh: element " + std::to_string(e) +
                                        " is degenerate or not counterclockwise");
        }
        for (int k = 0; k < 3; ++k) {
            auto& info = edges_[edge_key(t.v[k], t.v[(k + 1) % 3])];
            if (info.elems[0] < 0) {
                info.elems[0] = e;
            } else if (info.elems[1] < 0) {
                info.elems[1] = e;
            } else {
                throw std::invalid_argument("Mesh: edge shared by more than two elements");
            }
        }
    }
    boundary_vertex_.assign(vertices_.size(), 0);
    for (auto& [key, info] : edges_) {
        if (info.incidence() == 1) {
            if (info.kind == EdgeKind::interior) info.kind = EdgeKind::outer;
            const auto vv = edge_vertices(key);
            boundary_vertex_[static_cast<std::size_t>(vv[0])] = 1;
            boundary_vertex_[static_cast<std::size_t>(vv[1])] = 1;
        } else {
            info.kind = EdgeKind::interior;
        }
    }
}

double Mesh::element_diameter(int e) const {
    const auto& t = elements_[static_cast<std::size_t>(e)];
    double h = 0.0;
    for (int k = 0; k < 3; ++k) {
        h = std::max(h, edge_length(vertices_[static_cast<std::size_t>(t.v[k])],
                                    vertices_[static_cast<std::size_t>(t.v[(k + 1) % 3])]));
    }
    return h;
}

double Mesh::signed_area(int e) const {
    const auto& t = elements_[static_cast<std::size_t>(e)];
    return tri_signed_area(vertices_[static_cast<std::size_t>(t.v[0])],
                           vertices_[static_cast<std::size_t>(t.v[1])],
                           vertices_[static_cast<std::size_t>(t.v[2])]);
}

double Mesh::min_angle() const {
    double best = 4.0;  // > pi
    for (int e = 0; e < num_elements(); ++e) {
        const auto& t = elements_[static_cast<std::size_t>(e)];
        for (int k = 0; k < 3; ++k) {
            const auto& a = vertices_[static_cast<std::size_t>(t.v[k])];
            const auto& b = vertices_[static_cast<std::size_t>(t.v[(k + 1) % 3])];
            const auto& c = vertices_[static_cast<std::size_t>(t.v[(k + 2) % 3])];
            const double ux = b.x - a.x, uy = b.y - a.y;
            const double vx = c.x - a.x, vy = c.y - a.y;
            const double dot = ux * vx + uy * vy;
            const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
            best = std::min(best, std::acos(std::clamp(dot / (nu * nv), -1.0, 1.0)));
        }
    }
    return best;
}

double Mesh::max_diameter() const {
    double h = 0.0;
    for (int e = 0; e < num_elements(); ++e) h = std::max(h, element_diameter(e));
    return h;
}

bool Mesh::element_contains(int e, double x, double y, double tol) const {
    const auto& t = elements_[static_cast<std::size_t>(e)];
    const auto& a = vertices_[static_cast<std::size_t>(t.v[0])];
    const auto& b = vertices_[static_cast<std::size_t>(t.v[1])];
    const auto& c = vertices_[static_cast<std::size_t>(t.v[2])];
    const double area = tri_signed_area(a, b, c);
    const double l0 = tri_signed_area({x, y}, b, c) / area;
    const double l1 = tri_signed_area(a, {x, y}, c) / area;
    const double l2 = tri_signed_area(a, b, {x, y}) / area;
    return l0 >= -tol && l1 >= -tol && l2 >= -tol;
}

void Mesh::audit_conforming() const {
    EdgeMap table;
    for (int e = 0; e < num_elements(); ++e) {
        const auto& t = elements_[static_cast<std::size_t>(e)];
        if (signed_area(e) <= 0.0) {
            throw std::logic_error("audit: nonpositive element area at element " + std::to_string(e));
        }
        for (int k = 0; k < 3; ++k) {
            auto& info = table[edge_key(t.v[k], t.v[(k + 1) % 3])];
            if (info.elems[0] < 0) {
                info.elems[0] = e;
            } else if (info.elems[1] < 0) {
                info.elems[1] = e;
            } else {
                throw std::logic_error("audit: edge with more than two incident elements");
            }
        }
    }
    if (table.size() != edges_.size()) throw std::logic_error("audit: stale edge table");
    for (const auto& [key, info] : table) {
        const auto it = edges_.find(key);
        if (it == edges_.end()) throw std::logic_error("audit: missing edge entry");
        const int n = info.incidence();
        if (n < 1 || n > 2) throw std::logic_error("audit: bad edge incidence");
        if (n != it->second.incidence()) throw std::logic_error("audit: incidence mismatch");
        if (n == 2 && it->second.kind != EdgeKind::interior)
            throw std::logic_error("audit: interior edge flagged as boundary");
        if (n == 1 && it->second.kind == EdgeKind::interior)
            throw std::logic_error("audit: boundary edge flagged as interior");
    }
}

void Mesh::dump(std::ostream& out) const {
    char buf[64];
    out << num_vertices() << ' ' << num_elements() << '\n';
    for (const auto& v : vertices_) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g", v.x, v.y);
        out << buf << '\n';
    }
    for (const auto& t : elements_) {
        out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
    }
}

std::string Mesh::dump_string() const {
    std::ostringstream os;
    dump(os);
    return os.str();
}

// ---------------------------------------------------------------------------
// Initial meshes
// ---------------------------------------------------------------------------

namespace {

struct SlitSegment {
    // Axis-aligned: along == 0 means the segment is {y = 0, x in [lo, hi]},
    // along == 1 means {x = 0, y in [lo, hi]}. `tip` is the interior endpoint.
    int along;
    double lo, hi;
    double tip;
};

constexpr double kCoordTol = 1e-12;

const std::array<SlitSegment, 4>& slit_segments() {
    static const std::array<SlitSegment, 4> segs{{
        {0, 0.5, 1.0, 0.5},    // right
        {0, -1.0, -0.5, -0.5}, // left
        {1, 0.5, 1.0, 0.5},    // top
        {1, -1.0, -0.5, -0.5}, // bottom
    }};
    return segs;
}

bool on_segment(const SlitSegment& s, double x, double y) {
    const double t = (s.along == 0) ? y : x;
    const double u = (s.along == 0) ? x : y;
    return std::abs(t) <= kCoordTol && u >= s.lo - kCoordTol && u <= s.hi + kCoordTol;
}

// Strictly past the tip, so the vertex needs one copy per side.
bool needs_duplicate(const SlitSegment& s, double x, double y) {
    if (!on_segment(s, x, y)) return false;
    const double u = (s.along == 0) ? x : y;
    return std::abs(u - s.tip) > kCoordTol;
}

struct GridBuilder {
    double x0, y0, spacing;
    int nx, ny;  // squares per axis
    std::vector<Vertex> vertices;
    std::vector<Element> elements;
    // grid node (i, j) -> vertex id (plus side); second id for duplicated nodes
    std::vector<int> node_id, node_id_minus;
    bool with_slits = false;

    GridBuilder(double x0_, double y0_, double spacing_, int nx_, int ny_)
        : x0(x0_), y0(y0_), spacing(spacing_), nx(nx_), ny(ny_),
          node_id(static_cast<std::size_t>((nx + 1) * (ny + 1)), -1),
          node_id_minus(static_cast<std::size_t>((nx + 1) * (ny + 1)), -1) {}

    int grid_index(int i, int j) const { return j * (nx + 1) + i; }

    int node(int i, int j, double side_x, double side_y) {
        const double x = x0 + i * spacing;
        const double y = y0 + j * spacing;
        const int gi = grid_index(i, j);
        if (node_id[static_cast<std::size_t>(gi)] < 0) {
            node_id[static_cast<std::size_t>(gi)] = static_cast<int>(vertices.size());
            vertices.push_back({x, y});
        }
        if (with_slits) {
            for (const auto& s : slit_segments()) {
                if (!needs_duplicate(s, x, y)) continue;
                const double side = (s.along == 0) ? side_y : side_x;
                if (side < 0.0) {
                    if (node_id_minus[static_cast<std::size_t>(gi)] < 0) {
                        node_id_minus[static_cast<std::size_t>(gi)] = static_cast<int>(vertices.size());
                        vertices.push_back({x, y});
                    }
                    return node_id_minus[static_cast<std::size_t>(gi)];
                }
                break;
            }
        }
        return node_id[static_cast<std::size_t>(gi)];
    }

    // Four triangles around the square's center; refinement edge of each is
    // the square side opposite the center.
    void add_square(int i, int j) {
        const double cx = x0 + (i + 0.5) * spacing;
        const double cy = y0 + (j + 0.5) * spacing;
        const int center = static_cast<int>(vertices.size());
        vertices.push_back({cx, cy});
        const int c0 = node(i, j, cx, cy);
        const int c1 = node(i + 1, j, cx, cy);
        const int c2 = node(i + 1, j + 1, cx, cy);
        const int c3 = node(i, j + 1, cx, cy);
        elements.push_back({{c0, c1, center}, 0});
        elements.push_back({{c1, c2, center}, 0});
        elements.push_back({{c2, c3, center}, 0});
        elements.push_back({{c3, c0, center}, 0});
    }
};

void classify_slit_edges(Mesh::EdgeMap& edges, const std::vector<Vertex>& vertices) {
    for (auto& [key, info] : edges) {
        if (info.incidence() != 1) continue;
        const auto vv = Mesh::edge_vertices(key);
        const auto& a = vertices[static_cast<std::size_t>(vv[0])];
        const auto& b = vertices[static_cast<std::size_t>(vv[1])];
        for (const auto& s : slit_segments()) {
            if (on_segment(s, a.x, a.y) && on_segment(s, b.x, b.y)) {
                info.kind = EdgeKind::slit;
                break;
            }
        }
    }
}

}  // namespace

Mesh build_initial(DomainSpec domain, int subdivisions) {
    if (subdivisions < 1) throw std::invalid_argument("build_initial: subdivisions must be >= 1");
    const int s = subdivisions;
    switch (domain) {
        case DomainSpec::unit_square: {
            GridBuilder g(0.0, 0.0, 1.0 / s, s, s);
            for (int j = 0; j < s; ++j)
                for (int i = 0; i < s; ++i) g.add_square(i, j);
            return Mesh(std::move(g.vertices), std::move(g.elements));
        }
        case DomainSpec::square2: {
            GridBuilder g(-1.0, -1.0, 2.0 / s, s, s);
            for (int j = 0; j < s; ++j)
                for (int i = 0; i < s; ++i) g.add_square(i, j);
            return Mesh(std::move(g.vertices), std::move(g.elements));
        }
        case DomainSpec::slit: {
            if (s % 4 != 0) {
                throw std::invalid_argument(
                    "build_initial: slit domain needs subdivisions divisible by 4 so that the "
                    "slit endpoints (+-0.5, +-1) are mesh vertices; got " + std::to_string(s));
            }
            GridBuilder g(-1.0, -1.0, 2.0 / s, s, s);
            g.with_slits = true;
            for (int j = 0; j < s; ++j)
                for (int i = 0; i < s; ++i) g.add_square(i, j);
            Mesh mesh(std::move(g.vertices), std::move(g.elements));
            classify_slit_edges(mesh.edges_, mesh.vertices_);
            return mesh;
        }
        case DomainSpec::lshape: {
            if (s % 2 != 0) {
                throw std::invalid_argument(
                    "build_initial: lshape needs even subdivisions so the reentrant corner is a "
                    "mesh vertex; got " + std::to_string(s));
            }
            GridBuilder g(-1.0, -1.0, 2.0 / s, s, s);
            for (int j = 0; j < s; ++j) {
                for (int i = 0; i < s; ++i) {
                    const double cx = -1.0 + (i + 0.5) * g.spacing;
                    const double cy = -1.0 + (j + 0.5) * g.spacing;
                    if (cx > 0.0 && cy < 0.0) continue;  // removed quadrant
                    g.add_square(i, j);
                }
            }
            return Mesh(std::move(g.vertices), std::move(g.elements));
        }
    }
    throw std::invalid_argument("build_initial: unknown domain");
}

// ---------------------------------------------------------------------------
// Newest-vertex bisection with recursive conforming closure
// ---------------------------------------------------------------------------

namespace {

class Refiner {
public:
    explicit Refiner(const Mesh& mesh)
        : vertices_(mesh.vertices()), elements_(mesh.elements()), edges_(mesh.edges()),
          original_count_(mesh.num_elements()), rewritten_(mesh.elements().size(), 0) {}

    void refine_marked(const std::vector<int>& marked) {
        for (int e : marked) {
            if (e < 0 || e >= original_count_) {
                throw std::invalid_argument("refine: marked element id out of range");
            }
        }
        std::vector<int> ordered(marked);
        std::sort(ordered.begin(), ordered.end());
        ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());
        for (int e : ordered) {
            if (!rewritten_[static_cast<std::size_t>(e)]) refine_element(e, 0);
        }
    }

    std::vector<Vertex> take_vertices() { return std::move(vertices_); }
    std::vector<Element> take_elements() { return std::move(elements_); }
    Mesh::EdgeMap take_edges() { return std::move(edges_); }

private:
    std::uint64_t ref_edge_key(int e) const {
        const auto& t = elements_[static_cast<std::size_t>(e)];
        return Mesh::edge_key(t.v[0], t.v[1]);
    }

    // Bisect element e; its neighbor across the refinement edge is bisected
    // first (recursively) whenever it does not share that refinement edge.
    void refine_element(int e, int depth) {
        if (depth > static_cast<int>(elements_.size()) + 8) {
            throw std::logic_error("refine: closure recursion failed to terminate "
                                   "(incompatible initial refinement edges?)");
        }
        const std::uint64_t key = ref_edge_key(e);
        const auto it = edges_.find(key);
        int nb = it->second.other(e);
        if (nb >= 0 && ref_edge_key(nb) != key) {
            refine_element(nb, depth + 1);
            nb = edges_.find(key)->second.other(e);
        }
        bisect_pair(e, nb, key);
    }

    // Bisect e (and nb, when present) across their common refinement edge.
    void bisect_pair(int e, int nb, std::uint64_t key) {
        const auto info = edges_.find(key)->second;
        const auto vv = Mesh::edge_vertices(key);
        const int mid = static_cast<int>(vertices_.size());
        const auto& a = vertices_[static_cast<std::size_t>(vv[0])];
        const auto& b = vertices_[static_cast<std::size_t>(vv[1])];
        vertices_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});

        edges_.erase(key);
        edges_[Mesh::edge_key(vv[0], mid)].kind = info.kind;
        edges_[Mesh::edge_key(mid, vv[1])].kind = info.kind;

        split_element(e, mid);
        if (nb >= 0) split_element(nb, mid);
    }

    // Replace element slot e by its first child and append the second child.
    // Children: (peak, v0, mid) and (v1, peak, mid); the new refinement edges
    // are the legs of the parent, the midpoint becomes the newest vertex.
    void split_element(int e, int mid) {
        const Element t = elements_[static_cast<std::size_t>(e)];
        const int child2 = static_cast<int>(elements_.size());
        elements_[static_cast<std::size_t>(e)] = Element{{t.v[2], t.v[0], mid}, t.generation + 1};
        elements_.push_back(Element{{t.v[1], t.v[2], mid}, t.generation + 1});
        if (e < original_count_) rewritten_[static_cast<std::size_t>(e)] = 1;

        // Edge (v2, v0) stays with slot e; (v1, v2) moves to child2.
        reassign(Mesh::edge_key(t.v[1], t.v[2]), e, child2);
        attach(Mesh::edge_key(t.v[0], mid), e);
        attach(Mesh::edge_key(mid, t.v[1]), child2);
        auto& inner = edges_[Mesh::edge_key(t.v[2], mid)];
        inner.kind = EdgeKind::interior;
        attach_info(inner, e);
        attach_info(inner, child2);
    }

    void attach(std::uint64_t key, int e) { attach_info(edges_[key], e); }

    static void attach_info(Mesh::EdgeInfo& info, int e) {
        if (info.elems[0] < 0) {
            info.elems[0] = e;
        } else if (info.elems[1] < 0) {
            info.elems[1] = e;
        } else {
            throw std::logic_error("refine: edge incidence overflow");
        }
    }

    void reassign(std::uint64_t key, int from, int to) {
        auto& info = edges_.find(key)->second;
        if (info.elems[0] == from) {
            info.elems[0] = to;
        } else {
            info.elems[1] = to;
        }
    }

    std::vector<Vertex> vertices_;
    std::vector<Element> elements_;
    Mesh::EdgeMap edges_;
    const int original_count_;
    std::vector<char> rewritten_;
};

}  // namespace

Mesh refine(const Mesh& mesh, const std::vector<int>& marked) {
    Refiner refiner(mesh);
    refiner.refine_marked(marked);
    Mesh out;
    out.vertices_ = refiner.take_vertices();
    out.elements_ = refiner.take_elements();
    out.edges_ = refiner.take_edges();
    out.boundary_vertex_.assign(out.vertices_.size(), 0);
    for (const auto& [key, info] : out.edges_) {
        if (info.incidence() == 1) {
            const auto vv = Mesh::edge_vertices(key);
            out.boundary_vertex_[static_cast<std::size_t>(vv[0])] = 1;
            out.boundary_vertex_[static_cast<std::size_t>(vv[1])] = 1;
        }
    }
    return out;
}

Mesh uniform_refine(const Mesh& mesh, int rounds) {
    if (rounds < 1) throw std::invalid_argument("uniform_refine: rounds must be >= 1");
    Mesh current = mesh;
    for (int pass = 0; pass < 2 * rounds; ++pass) {
        std::vector<int> all(static_cast<std::size_t>(current.num_elements()));
        for (int e = 0; e < current.num_elements(); ++e) all[static_cast<std::size_t>(e)] = e;
        current = refine(current, all);
    }
    return current;
}

const char* to_string(DomainSpec domain) {
    switch (domain) {
        case DomainSpec::unit_square: return "square";
        case DomainSpec::square2: return "square2";
        case DomainSpec::slit: return "slit";
        case DomainSpec::lshape: return "lshape";
    }
    return "?";
}

DomainSpec domain_from_string(const std::string& name) {
    if (name == "square" || name == "unit_square") return DomainSpec::unit_square;
    if (name == "square2") return DomainSpec::square2;
    if (name == "slit") return DomainSpec::slit;
    if (name == "lshape") return DomainSpec::lshape;
    throw std::invalid_argument("unknown domain '" + name + "'");
}

}  // namespace clusterfem
