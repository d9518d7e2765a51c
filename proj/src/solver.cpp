#include "twincg/solver.hpp"

#include <cmath>
#include <cstring>

namespace twincg {

namespace {

bool bits_equal(const DenseVector& a, const DenseVector& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

void check_rho(double rho) {
    if (std::isnan(rho) || rho < 0.0) {
        throw BreakdownError("breakdown: rho is negative or NaN");
    }
}

// Lines 1-4 shared by CG and PCG; returns nothing, leaves r updated.
void advance_iterate(SolverState& s, const CsrMatrix& a) {
    spmv(a, s.p, s.q);
    const double pq = dot(s.p, s.q);
    if (!(pq > 0.0)) {
        throw BreakdownError("breakdown: <p, Ap> is not positive");
    }
    const double alpha = s.rho / pq;
    axpy(alpha, s.p, s.x);
    axpy(-alpha, s.q, s.r);
}

} // namespace

JacobiPreconditioner JacobiPreconditioner::from_matrix(const CsrMatrix& a) {
    JacobiPreconditioner m;
    m.inv_diag.resize(a.n());
    for (std::size_t i = 0; i < a.n(); ++i) {
        const double d = a.at(i, i);
        if (!(d > 0.0)) {
            throw std::invalid_argument("Jacobi preconditioner: diagonal entry " +
                                        std::to_string(i) + " is not positive");
        }
        m.inv_diag[i] = 1.0 / d;
        if (!std::isfinite(m.inv_diag[i])) {
            throw std::invalid_argument("Jacobi preconditioner: non-finite inverse at " +
                                        std::to_string(i));
        }
    }
    return m;
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    if (r.size() != inv_diag.size() || z.size() != inv_diag.size()) {
        throw DimensionError("Jacobi apply: length mismatch");
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        z[i] = inv_diag[i] * r[i];
    }
}

bool same_iterate(const SolverState& a, const SolverState& b) {
    return a.iter == b.iter && bits_equal(a.x, b.x) && bits_equal(a.r, b.r) &&
           bits_equal(a.p, b.p) && bits_equal(a.z, b.z) && bits_equal(a.rho, b.rho) &&
           bits_equal(a.res_norm, b.res_norm);
}

bool matches_checkpoint(const SolverState& s, const Checkpoint& c) {
    return s.iter == c.iter && bits_equal(s.x, c.x) && bits_equal(s.r, c.r) &&
           bits_equal(s.p, c.p) && bits_equal(s.z, c.z) && bits_equal(s.rho, c.rho);
}

SolverState init_state(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0,
                       const JacobiPreconditioner* precond) {
    if (b.size() != a.n() || x0.size() != a.n()) {
        throw DimensionError("init_state: b and x0 must have length n");
    }
    const std::size_t n = a.n();
    SolverState s;
    s.x.assign(x0.begin(), x0.end());
    s.q.assign(n, 0.0);
    s.r = spmv(a, s.x);
    for (std::size_t i = 0; i < n; ++i) {
        s.r[i] = b[i] - s.r[i];
    }
    if (precond != nullptr) {
        s.z.assign(n, 0.0);
        precond->apply(s.r, s.z);
        s.p = s.z;
        s.rho = dot(s.r, s.z);
    } else {
        s.p = s.r;
        s.rho = dot(s.r, s.r);
    }
    s.res_norm = norm2(s.r);
    return s;
}

void cg_step(SolverState& s, const CsrMatrix& a) {
    advance_iterate(s, a);
    const double rho_next = dot(s.r, s.r);
    check_rho(rho_next);
    const double beta = rho_next / s.rho;
    xpby(s.r, beta, s.p);
    s.rho = rho_next;
    s.res_norm = norm2(s.r);
    ++s.iter;
}

void pcg_step(SolverState& s, const CsrMatrix& a, const JacobiPreconditioner& m) {
    advance_iterate(s, a);
    m.apply(s.r, s.z);
    const double rho_next = dot(s.r, s.z);
    check_rho(rho_next);
    const double beta = rho_next / s.rho;
    xpby(s.z, beta, s.p);
    s.rho = rho_next;
    s.res_norm = norm2(s.r);
    ++s.iter;
}

void step(SolverState& s, const CsrMatrix& a, const JacobiPreconditioner* m) {
    if (m != nullptr) {
        pcg_step(s, a, *m);
    } else {
        cg_step(s, a);
    }
}

Checkpoint save_checkpoint(const SolverState& s) {
    return Checkpoint{s.iter, s.x, s.r, s.p, s.z, s.rho};
}

void restore_checkpoint(SolverState& s, const Checkpoint& c) {
    if (c.x.size() != s.n() || c.r.size() != s.n() || c.p.size() != s.n() ||
        c.z.size() != s.z.size()) {
        throw DimensionError("restore_checkpoint: checkpoint from a different problem");
    }
    s.iter = c.iter;
    s.x = c.x;
    s.r = c.r;
    s.p = c.p;
    s.z = c.z;
    s.rho = c.rho;
    s.res_norm = norm2(s.r);
}

} // namespace twincg
