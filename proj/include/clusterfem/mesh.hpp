#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace clusterfem {

struct Vertex {
    double x = 0.0;
    double y = 0.0;
};

/// A triangle. The refinement edge is (v[0], v[1]) by storage convention;
/// v[2] is the newest vertex (the peak). Orientation is counterclockwise.
struct Element {
    std::array<int, 3> v{-1, -1, -1};
    int generation = 0;
};

enum class DomainSpec { unit_square, square2, slit, lshape };

enum class EdgeKind : std::uint8_t { interior, outer, slit };

/// Conforming 2D triangulation with newest-vertex-bisection bookkeeping.
///
/// Slits (cracks) are represented by vertex duplication: vertices on a slit
/// carry one topological copy per side, so the edge table never identifies
/// the two sides. A Mesh is immutable after construction; refine() returns
/// a new mesh.
class Mesh {
public:
    struct EdgeInfo {
        std::array<int, 2> elems{-1, -1};
        EdgeKind kind = EdgeKind::interior;

        int incidence() const { return (elems[0] >= 0 ? 1 : 0) + (elems[1] >= 0 ? 1 : 0); }
        int other(int e) const { return elems[0] == e ? elems[1] : elems[0]; }
    };
    using EdgeMap = std::unordered_map<std::uint64_t, EdgeInfo>;

    Mesh(std::vector<Vertex> vertices, std::vector<Element> elements);

    static std::uint64_t edge_key(int a, int b);
    static std::array<int, 2> edge_vertices(std::uint64_t key);

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Element>& elements() const { return elements_; }
    const EdgeMap& edges() const { return edges_; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_elements() const { return static_cast<int>(elements_.size()); }

    /// Element diameter h_T (longest edge length).
    double element_diameter(int e) const;
    double signed_area(int e) const;
    double min_angle() const;
    double max_diameter() const;

    bool vertex_on_boundary(int v) const { return boundary_vertex_[static_cast<std::size_t>(v)]; }

    /// True if (x, y) lies in element e up to an absolute barycentric tolerance.
    bool element_contains(int e, double x, double y, double tol = 1e-12) const;

    /// Full conformity audit: rebuilds the edge table and checks that every
    /// edge has one or two incident elements and all areas are positive.
    /// Throws std::logic_error on violation.
    void audit_conforming() const;

    /// Plain-text dump: "nv ne", nv lines "x y", ne lines "v0 v1 v2".
    void dump(std::ostream& out) const;
    std::string dump_string() const;

private:
    Mesh() = default;
    void finalize_edges();  // build edge table + boundary flags from elements

    std::vector<Vertex> vertices_;
    std::vector<Element> elements_;
    EdgeMap edges_;
    std::vector<char> boundary_vertex_;

    friend Mesh refine(const Mesh&, const std::vector<int>&);
    friend Mesh build_initial(DomainSpec, int);
};

/// Structured initial mesh for one of the built-in domains. Each macro square
/// is split into four triangles by its center vertex, and the refinement edge
/// of every triangle is the square side opposite the center, which makes the
/// initial edge assignment compatible for newest-vertex bisection.
Mesh build_initial(DomainSpec domain, int subdivisions);

/// Bisect all marked elements at least once and apply recursive conforming
/// closure. Returns a new mesh; the input is untouched.
Mesh refine(const Mesh& mesh, const std::vector<int>& marked);

/// `rounds` rounds of uniform refinement; one round is two refine-all passes,
/// so the mesh size h halves per round.
Mesh uniform_refine(const Mesh& mesh, int rounds);

const char* to_string(DomainSpec domain);
DomainSpec domain_from_string(const std::string& name);

}  // namespace clusterfem
