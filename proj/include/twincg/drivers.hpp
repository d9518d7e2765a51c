#ifndef TWINCG_DRIVERS_HPP
#define TWINCG_DRIVERS_HPP

#include "twincg/runtime.hpp"

namespace twincg {

struct RunOptions {
    ResilienceConfig cfg{};
    Precond precond = Precond::none;
    FaultPlan faults{};
    ExecMode mode = ExecMode::simulated;
    std::chrono::milliseconds timeout{60000};
    WindowObserver observer;  // optional, called inside every window
};

/// Unprotected (P)CG with fault injection. x0 = 0.
RunReport run_standard_cg(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt);

/// Single replica; D2 every d iterations, rollback on failure, checkpoint on
/// a passing window every checkpoint_interval iterations.
RunReport run_online_abft(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt);

/// Two lock-stepped replicas: D1 on residual norms, D2 only on mismatch,
/// forward recovery when exactly one replica fails D2, rollback when both do.
RunReport run_twin_cg(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt);

/// Three replicas with pairwise-D1 majority vote.
RunReport run_tmr(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt);

RunReport run_variant(Variant v, const CsrMatrix& a, std::span<const double> b,
                      const RunOptions& opt);

/// b = A·1, the right-hand side used when none is supplied.
DenseVector ones_rhs(const CsrMatrix& a);

} // namespace twincg

#endif // TWINCG_DRIVERS_HPP
