#pragma once

#include "netsemi/edge_function.hpp"
#include "netsemi/errors.hpp"
#include "netsemi/matrix.hpp"
#include "netsemi/network.hpp"
#include "netsemi/state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

namespace netsemi {

/// t - x (or t - x - 1) this close to an integer counts as lying on a characteristic.
inline constexpr double kCharacteristicTolerance = 1e-12;

/// Number of completed traversals of a bounded edge behind the point (x, t).
///
/// `argument` is where the initial bounded-edge data is read: n - t + x for
/// the bounded branch, n - t + x + 1 for the outgoing branch. On a
/// characteristic the argument is resolved to exactly 0.
struct ShiftIndex {
    std::size_t n = 0;
    bool on_characteristic = false;
    double argument = 0.0;
};

namespace detail {

inline ShiftIndex resolve_shift(double d)
{
    ShiftIndex s;
    const double k = std::round(d);
    if (std::abs(d - k) <= kCharacteristicTolerance) {
        s.on_characteristic = true;
        if (k >= 0.0) {
            s.n = static_cast<std::size_t>(k);
            s.argument = 0.0;
        } else {
            // Only reachable at the far end of the unit interval at the line's start.
            s.n = 0;
            s.argument = -k;
        }
        return s;
    }
    s.n = d < 0.0 ? 0 : static_cast<std::size_t>(std::ceil(d));
    s.argument = static_cast<double>(s.n) - d;
    return s;
}

} // namespace detail

/// Shift index for a bounded edge point: smallest n >= 0 with n - t + x in [0, 1).
inline ShiftIndex shift_index_u(double x, double t)
{
    if (!(x >= -kDomainTolerance && x <= 1.0 + kDomainTolerance)) {
        throw DomainError("bounded-edge position " + std::to_string(x) + " outside [0,1]");
    }
    if (!(t >= 0.0)) {
        throw DomainError("time must be nonnegative");
    }
    return detail::resolve_shift(t - std::clamp(x, 0.0, 1.0));
}

/// Shift index for an outgoing edge point behind the wave front (t >= x):
/// smallest n >= 0 with n - t + x + 1 in [0, 1).
inline ShiftIndex shift_index_v(double x, double t)
{
    if (!(x >= -kDomainTolerance)) {
        throw DomainError("outgoing-edge position " + std::to_string(x) + " is negative");
    }
    if (!(t >= x)) {
        throw DomainError("shift_index_v needs t >= x; use the initial-data branch for t < x");
    }
    return detail::resolve_shift(t - std::max(x, 0.0) - 1.0);
}

/// Memoized powers of a square matrix. Concurrent readers are fine; growth is serialized.
class MatrixPowerCache {
  public:
    explicit MatrixPowerCache(Matrix base) : base_(std::move(base))
    {
        if (base_.rows() != base_.cols()) {
            throw SpecError("matrix power cache needs a square matrix");
        }
        powers_.push_back(Matrix::Identity(base_.rows(), base_.cols()));
    }

    const Matrix& base() const { return base_; }

    const Matrix& power(std::size_t k) const
    {
        {
            std::shared_lock lock(mutex_);
            if (k < powers_.size()) {
                return powers_[k];
            }
        }
        std::unique_lock lock(mutex_);
        while (powers_.size() <= k) {
            powers_.push_back(base_ * powers_.back());
        }
        return powers_[k];
    }

    std::size_t cached() const
    {
        std::shared_lock lock(mutex_);
        return powers_.size();
    }

  private:
    Matrix base_;
    mutable std::deque<Matrix> powers_; // deque keeps references stable while growing
    mutable std::shared_mutex mutex_;
};

/// Closed-form transport semigroup T(t) of a network with boundary matrix B.
class Semigroup {
  public:
    explicit Semigroup(BoundaryMatrix b)
        : b_(std::move(b)), blocks_(split_blocks(b_)), powers_(std::make_shared<MatrixPowerCache>(blocks_.b11))
    {
    }

    const BoundaryMatrix& boundary() const { return b_; }
    const NetworkSignature& signature() const { return b_.signature(); }
    const MatrixPowerCache& powers() const { return *powers_; }

    /// u(x, t) on all bounded edges, 0 <= x <= 1.
    Vector eval_u(const StateVector& s0, double x, double t) const
    {
        const ShiftIndex idx = shift_index_u(x, t);
        const double xc = std::clamp(x, 0.0, 1.0);
        return traversed(s0, idx, t - xc);
    }

    /// v(x, t) on all outgoing edges, x >= 0. The line t = x > 0 uses the boundary branch;
    /// t = 0 always returns v0 so that T(0) is the identity.
    Vector eval_v(const StateVector& s0, double x, double t) const
    {
        if (!(t >= 0.0)) {
            throw DomainError("time must be nonnegative");
        }
        if (t < x || t == 0.0) {
            return evaluate_all(s0.v, x - t);
        }
        const ShiftIndex idx = shift_index_v(x, t);
        const double xc = std::max(x, 0.0);
        const Vector incoming_now = evaluate_all(s0.w, t - xc);
        return blocks_.b21 * traversed(s0, idx, t - xc - 1.0) + blocks_.b22 * incoming_now;
    }

    /// w(x, t) = w0(x + t) on all incoming edges; B plays no role.
    Vector eval_w(const StateVector& s0, double x, double t) const
    {
        if (!(t >= 0.0)) {
            throw DomainError("time must be nonnegative");
        }
        return evaluate_all(s0.w, x + t);
    }

    Vector eval(EdgeKind k, const StateVector& s0, double x, double t) const
    {
        switch (k) {
        case EdgeKind::Bounded: return eval_u(s0, x, t);
        case EdgeKind::Outgoing: return eval_v(s0, x, t);
        case EdgeKind::Incoming: return eval_w(s0, x, t);
        }
        return {};
    }

    /// T(t)s0 sampled on the given grids, as piecewise-linear edge functions.
    StateVector apply(const StateVector& s0, double t, const EdgeGrids& grids) const
    {
        s0.check(signature());
        StateVector out;
        for (auto k : kAllKinds) {
            const auto& gs = grids.of(k);
            const std::size_t count = s0.of(k).size();
            if (gs.size() != count) {
                throw SpecError(std::string("grid count mismatch for ") + to_string(k) + " edges");
            }
            std::vector<std::vector<double>> values(count);
            for (std::size_t j = 0; j < count; ++j) {
                values[j].reserve(gs[j].size());
                for (double x : gs[j]) {
                    values[j].push_back(eval(k, s0, x, t)(static_cast<Eigen::Index>(j)));
                }
            }
            for (std::size_t j = 0; j < count; ++j) {
                out.of(k).push_back(EdgeFunction::grid(domain_of(k), gs[j], std::move(values[j])));
            }
        }
        return out;
    }

    /// T(t)s0 as exact pointwise rules, so that it can be fed back into T(s).
    StateVector lift(const StateVector& s0, double t) const
    {
        s0.check(signature());
        auto self = std::make_shared<const Semigroup>(*this);
        auto data = std::make_shared<const StateVector>(s0);
        const bool approx = s0.approximate();

        const auto bounds = component_bounds(s0, t);
        StateVector out;
        for (auto k : kAllKinds) {
            std::vector<double> breaks;
            if (k != EdgeKind::Incoming) {
                const double end = k == EdgeKind::Bounded ? 1.0 : t;
                for (double x = t; x >= 0.0; x -= 1.0) {
                    if (x <= end) breaks.push_back(x);
                }
            } else {
                for (const auto& f : s0.w) {
                    for (double b : f.breakpoints()) {
                        if (b - t >= 0.0) breaks.push_back(b - t);
                    }
                }
            }
            for (std::size_t j = 0; j < s0.of(k).size(); ++j) {
                auto fn = [self, data, k, j, t](double x) {
                    return self->eval(k, *data, x, t)(static_cast<Eigen::Index>(j));
                };
                out.of(k).push_back(EdgeFunction::callable(domain_of(k), fn, bounds[static_cast<std::size_t>(k)], breaks, approx));
            }
        }
        return out;
    }

  private:
    /// P^n u0(arg) + sum_{k<n} P^k B12 w0(start - k), with P = B11.
    Vector traversed(const StateVector& s0, const ShiftIndex& idx, double start) const
    {
        const auto m = static_cast<Eigen::Index>(signature().m);
        Vector acc = Vector::Zero(m);
        if (m == 0) {
            return acc;
        }
        acc = powers_->power(idx.n) * evaluate_all(s0.u, idx.argument);
        for (std::size_t k = 0; k < idx.n; ++k) {
            const Vector incoming = evaluate_all(s0.w, start - static_cast<double>(k));
            acc += powers_->power(k) * (blocks_.b12 * incoming);
        }
        return acc;
    }

    /// Crude sup bounds of |T(t)s0| per kind, from the data bounds and matrix norms.
    std::array<double, 3> component_bounds(const StateVector& s0, double t) const
    {
        auto sup = [](const std::vector<EdgeFunction>& fs) {
            double s = 0.0;
            for (const auto& f : fs) s = std::max(s, f.sup_bound());
            return s;
        };
        const double bu = sup(s0.u);
        const double bv = sup(s0.v);
        const double bw = sup(s0.w);
        const auto n_max = static_cast<std::size_t>(std::ceil(std::max(t, 0.0))) + 1;
        double u_bound = 0.0;
        double geometric = 0.0;
        for (std::size_t k = 0; k <= n_max; ++k) {
            const double pk = inf_norm(powers_->power(k));
            u_bound = std::max(u_bound, pk * bu + geometric * bw);
            geometric += pk * inf_norm(blocks_.b12);
        }
        const double v_bound = std::max(bv, inf_norm(blocks_.b21) * u_bound + inf_norm(blocks_.b22) * bw);
        return {u_bound, v_bound, bw};
    }

    BoundaryMatrix b_;
    BoundaryBlocks blocks_;
    std::shared_ptr<MatrixPowerCache> powers_;
};

/// max |[u(0,t); v(0,t)] - B [u(1,t); w(0,t)]| for the explicit solution.
inline double boundary_violation(const Semigroup& sg, const StateVector& s0, double t)
{
    const auto& sig = sg.signature();
    Vector lhs(static_cast<Eigen::Index>(sig.m + sig.q));
    lhs << sg.eval_u(s0, 0.0, t), sg.eval_v(s0, 0.0, t);
    Vector rhs(static_cast<Eigen::Index>(sig.m + sig.r));
    rhs << sg.eval_u(s0, 1.0, t), sg.eval_w(s0, 0.0, t);
    return magnitude(Vector(lhs - sg.boundary().entries() * rhs));
}

} // namespace netsemi
