#pragma once

#include "netsemi/errors.hpp"
#include "netsemi/matrix.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace netsemi {

/// Edge counts of a network: m bounded edges, q outgoing and r incoming unbounded edges.
struct NetworkSignature {
    std::size_t m = 0;
    std::size_t q = 0;
    std::size_t r = 0;

    NetworkSignature() = default;
    NetworkSignature(std::size_t bounded, std::size_t outgoing, std::size_t incoming)
        : m(bounded), q(outgoing), r(incoming)
    {
        if (m + q + r == 0) {
            throw SpecError("signature needs at least one edge");
        }
    }

    std::size_t boundary_rows() const { return m + q; }
    std::size_t boundary_cols() const { return m + r; }

    friend bool operator==(const NetworkSignature&, const NetworkSignature&) = default;
};

/// The four blocks of a boundary matrix.
struct BoundaryBlocks {
    Matrix b11; ///< m x m, bounded -> bounded
    Matrix b12; ///< m x r, incoming -> bounded
    Matrix b21; ///< q x m, bounded -> outgoing
    Matrix b22; ///< q x r, incoming -> outgoing
};

/// Coupling matrix of the vertex conditions [u(0); v(0)] = B [u(1); w(0)].
///
/// Rows are ordered bounded-then-outgoing, columns bounded-then-incoming.
class BoundaryMatrix {
  public:
    BoundaryMatrix(NetworkSignature signature, Matrix entries)
        : signature_(signature), entries_(std::move(entries))
    {
        if (static_cast<std::size_t>(entries_.rows()) != signature_.boundary_rows()
            || static_cast<std::size_t>(entries_.cols()) != signature_.boundary_cols()) {
            throw SpecError("boundary matrix is " + std::to_string(entries_.rows()) + "x"
                            + std::to_string(entries_.cols()) + " but signature requires "
                            + std::to_string(signature_.boundary_rows()) + "x"
                            + std::to_string(signature_.boundary_cols()));
        }
        if (!entries_.allFinite()) {
            throw SpecError("boundary matrix has non-finite entries");
        }
    }

    const NetworkSignature& signature() const { return signature_; }
    const Matrix& entries() const { return entries_; }

    auto b11() const { return entries_.topLeftCorner(idx(signature_.m), idx(signature_.m)); }
    auto b12() const { return entries_.topRightCorner(idx(signature_.m), idx(signature_.r)); }
    auto b21() const { return entries_.bottomLeftCorner(idx(signature_.q), idx(signature_.m)); }
    auto b22() const { return entries_.bottomRightCorner(idx(signature_.q), idx(signature_.r)); }

  private:
    static Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

    NetworkSignature signature_;
    Matrix entries_;
};

inline BoundaryBlocks split_blocks(const BoundaryMatrix& b)
{
    return {b.b11(), b.b12(), b.b21(), b.b22()};
}

/// Inverse of split_blocks.
inline BoundaryMatrix join_blocks(const BoundaryBlocks& blocks)
{
    const auto m = blocks.b11.rows();
    const auto q = blocks.b21.rows();
    const auto r = blocks.b12.cols();
    if (blocks.b11.cols() != m || blocks.b12.rows() != m || blocks.b21.cols() != m
        || blocks.b22.rows() != q || blocks.b22.cols() != r) {
        throw SpecError("block dimensions do not tile a boundary matrix");
    }
    Matrix full(m + q, m + r);
    full << blocks.b11, blocks.b12, blocks.b21, blocks.b22;
    return BoundaryMatrix(NetworkSignature(static_cast<std::size_t>(m), static_cast<std::size_t>(q),
                                           static_cast<std::size_t>(r)),
                          std::move(full));
}

// ---------------------------------------------------------------------------
// Graph description

/// Vertex/edge description of a network together with per-vertex routing weights.
///
/// Bounded edges run from `tail` (parameter 0) to `head` (parameter 1). Each
/// weight routes a fraction of one incoming signal at a vertex (a bounded edge
/// value at 1, or an incoming unbounded edge value at 0) into one outgoing slot
/// (a bounded edge value at 0, or an outgoing unbounded edge value at 0).
struct GraphSpec {
    struct BoundedEdge {
        std::string id;
        std::string tail;
        std::string head;
    };
    struct HalfLineEdge {
        std::string id;
        std::string vertex;
    };
    struct Weight {
        std::string vertex;
        std::string to;   ///< bounded or outgoing edge id
        std::string from; ///< bounded or incoming edge id
        double value = 0.0;
    };

    std::vector<std::string> vertices;
    std::vector<BoundedEdge> bounded_edges;
    std::vector<HalfLineEdge> outgoing_edges;
    std::vector<HalfLineEdge> incoming_edges;
    std::vector<Weight> weights;
    /// When set, the weights of every incoming signal must sum to this value (1 for Kirchhoff).
    std::optional<double> column_sum;

    NetworkSignature signature() const
    {
        return {bounded_edges.size(), outgoing_edges.size(), incoming_edges.size()};
    }
};

inline BoundaryMatrix assemble_from_graph(const GraphSpec& spec)
{
    const NetworkSignature sig = spec.signature();

    std::set<std::string> vertices;
    for (const auto& v : spec.vertices) {
        if (!vertices.insert(v).second) {
            throw SpecError("duplicate vertex id '" + v + "'");
        }
    }
    auto require_vertex = [&](const std::string& v, const std::string& what) {
        if (vertices.count(v) == 0) {
            throw SpecError(what + " is anchored at unknown vertex '" + v + "'");
        }
    };

    // Edge id -> (row index, anchor vertex) for slots and (column index, anchor vertex) for signals.
    std::map<std::string, std::pair<std::size_t, std::string>> slots;
    std::map<std::string, std::pair<std::size_t, std::string>> signals;
    std::set<std::string> ids;
    auto claim = [&](const std::string& id) {
        if (!ids.insert(id).second) {
            throw SpecError("duplicate edge id '" + id + "'");
        }
    };

    for (std::size_t j = 0; j < spec.bounded_edges.size(); ++j) {
        const auto& e = spec.bounded_edges[j];
        claim(e.id);
        require_vertex(e.tail, "bounded edge '" + e.id + "' (end 0)");
        require_vertex(e.head, "bounded edge '" + e.id + "' (end 1)");
        slots[e.id] = {j, e.tail};
        signals[e.id] = {j, e.head};
    }
    for (std::size_t j = 0; j < spec.outgoing_edges.size(); ++j) {
        const auto& e = spec.outgoing_edges[j];
        claim(e.id);
        require_vertex(e.vertex, "outgoing edge '" + e.id + "'");
        slots[e.id] = {sig.m + j, e.vertex};
    }
    for (std::size_t j = 0; j < spec.incoming_edges.size(); ++j) {
        const auto& e = spec.incoming_edges[j];
        claim(e.id);
        require_vertex(e.vertex, "incoming edge '" + e.id + "'");
        signals[e.id] = {sig.m + j, e.vertex};
    }

    Matrix entries = Matrix::Zero(static_cast<Eigen::Index>(sig.boundary_rows()),
                                  static_cast<Eigen::Index>(sig.boundary_cols()));
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::vector<bool> slot_fed(sig.boundary_rows(), false);
    for (const auto& w : spec.weights) {
        require_vertex(w.vertex, "weight");
        const auto slot = slots.find(w.to);
        if (slot == slots.end()) {
            throw SpecError("weight target '" + w.to + "' is not a bounded or outgoing edge");
        }
        if (slot->second.second != w.vertex) {
            throw SpecError("weight target '" + w.to + "' does not start at vertex '" + w.vertex + "'");
        }
        const auto signal = signals.find(w.from);
        if (signal == signals.end()) {
            throw SpecError("weight source '" + w.from + "' is not a bounded or incoming edge");
        }
        if (signal->second.second != w.vertex) {
            throw SpecError("weight source '" + w.from + "' is not incident to vertex '" + w.vertex + "'");
        }
        if (!std::isfinite(w.value)) {
            throw SpecError("weight from '" + w.from + "' to '" + w.to + "' is not finite");
        }
        const auto cell = std::make_pair(slot->second.first, signal->second.first);
        if (!seen.insert(cell).second) {
            throw SpecError("duplicate weight from '" + w.from + "' to '" + w.to + "'");
        }
        entries(static_cast<Eigen::Index>(cell.first), static_cast<Eigen::Index>(cell.second)) = w.value;
        slot_fed[cell.first] = true;
    }
    for (const auto& [id, slot] : slots) {
        if (!slot_fed[slot.first]) {
            throw SpecError("edge '" + id + "' receives no weights at vertex '" + slot.second + "'");
        }
    }
    if (spec.column_sum) {
        for (const auto& [id, signal] : signals) {
            const double sum = entries.col(static_cast<Eigen::Index>(signal.first)).sum();
            if (std::abs(sum - *spec.column_sum) > 1e-12) {
                throw SpecError("weights of signal '" + id + "' sum to " + std::to_string(sum)
                                + ", expected " + std::to_string(*spec.column_sum));
            }
        }
    }
    return BoundaryMatrix(sig, std::move(entries));
}

// ---------------------------------------------------------------------------
// Well-posedness

/// Boundary condition rewritten as V0e (v(0), w(0)) + V0i u(0) - V1i u(1) = 0.
struct WellposednessReport {
    Matrix v0e; ///< (m+q) x (q+r)
    Matrix v0i; ///< (m+q) x m
    Matrix v1i; ///< (m+q) x m
    Matrix r0;  ///< (m+q) x (q+r+m), equal to (V0e, -V0i)
    std::size_t rank = 0;
    bool wellposed = false;

    std::size_t required_rank() const { return static_cast<std::size_t>(r0.rows()); }
};

inline WellposednessReport wellposedness(const BoundaryMatrix& b)
{
    const auto& sig = b.signature();
    const auto m = static_cast<Eigen::Index>(sig.m);
    const auto q = static_cast<Eigen::Index>(sig.q);
    const auto r = static_cast<Eigen::Index>(sig.r);

    WellposednessReport rep;
    rep.v0e = Matrix::Zero(m + q, q + r);
    rep.v0e.topRightCorner(m, r) = -b.b12();
    rep.v0e.bottomLeftCorner(q, q) = Matrix::Identity(q, q);
    rep.v0e.bottomRightCorner(q, r) = -b.b22();

    rep.v0i = Matrix::Zero(m + q, m);
    rep.v0i.topRows(m) = Matrix::Identity(m, m);

    rep.v1i.resize(m + q, m);
    rep.v1i << b.b11(), b.b21();

    rep.r0.resize(m + q, q + r + m);
    rep.r0 << rep.v0e, -rep.v0i;

    rep.rank = rank(rep.r0, 1e-10);
    rep.wellposed = rep.rank == sig.boundary_rows();
    return rep;
}

} // namespace netsemi
