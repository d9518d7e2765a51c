#ifndef TWINCG_SOLVER_HPP
#define TWINCG_SOLVER_HPP

#include "twincg/sparse.hpp"

#include <optional>

namespace twincg {

/// ⟨p, q⟩ ≤ 0 or a negative/NaN ρ. Non-SPD input or a fault-corrupted iterate.
class BreakdownError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// M = diag(A), stored as its elementwise inverse.
struct JacobiPreconditioner {
    DenseVector inv_diag;

    /// Throws std::invalid_argument if any diagonal entry is not positive.
    static JacobiPreconditioner from_matrix(const CsrMatrix& a);

    void apply(std::span<const double> r, std::span<double> z) const;
};

/// Everything one replica carries between CG iterations.
struct SolverState {
    std::size_t iter = 0;
    DenseVector x;
    DenseVector r;
    DenseVector p;
    DenseVector q;  // A·p scratch
    DenseVector z;  // PCG only, empty for CG
    double rho = 0.0;  // ⟨r,r⟩ (CG) or ⟨r,z⟩ (PCG)
    double res_norm = 0.0;

    std::size_t n() const noexcept { return x.size(); }
    bool preconditioned() const noexcept { return !z.empty(); }
};

/// Bitwise equality of the iterate (q is scratch and excluded).
bool same_iterate(const SolverState& a, const SolverState& b);

/// Deep copy of an iterate for rollback.
struct Checkpoint {
    std::size_t iter = 0;
    DenseVector x;
    DenseVector r;
    DenseVector p;
    DenseVector z;
    double rho = 0.0;
};

bool matches_checkpoint(const SolverState& s, const Checkpoint& c);

/// r = b − A·x0, p = r (or z = M⁻¹r, p = z), iter = 0.
SolverState init_state(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0,
                       const JacobiPreconditioner* precond = nullptr);

/// One iteration of textbook CG, in place.
void cg_step(SolverState& s, const CsrMatrix& a);

/// One iteration of Jacobi-preconditioned CG, in place.
void pcg_step(SolverState& s, const CsrMatrix& a, const JacobiPreconditioner& m);

/// Dispatches on whether the state carries z.
void step(SolverState& s, const CsrMatrix& a, const JacobiPreconditioner* m);

Checkpoint save_checkpoint(const SolverState& s);
void restore_checkpoint(SolverState& s, const Checkpoint& c);

/// res_norm ≤ tol · b_norm
inline bool converged(const SolverState& s, double b_norm, double tol) {
    return s.res_norm <= tol * b_norm;
}

} // namespace twincg

#endif // TWINCG_SOLVER_HPP
