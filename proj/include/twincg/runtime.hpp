#ifndef TWINCG_RUNTIME_HPP
#define TWINCG_RUNTIME_HPP

#include "twincg/faults.hpp"
#include "twincg/resilience.hpp"

#include <chrono>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>

namespace twincg {

enum class ExecMode { concurrent, simulated };
enum class Precond { none, jacobi };

std::string_view to_string(ExecMode m);
std::string_view to_string(Precond p);

enum class ReplicaStatus { running, converged, broken };

/// One redundant solver instance. Owns its matrix, right-hand side, state and
/// fault stream; outside a window nothing else touches it.
class Replica {
public:
    Replica(std::size_t id, const CsrMatrix& a, std::span<const double> b, Precond precond,
            const FaultPlan& plan);

    std::size_t id() const noexcept { return id_; }
    const SolverState& state() const noexcept { return state_; }
    SolverState& state() noexcept { return state_; }
    const CsrMatrix& matrix() const noexcept { return matrix_; }
    CsrMatrix& matrix() noexcept { return matrix_; }
    std::span<const double> rhs() const noexcept { return b_; }
    double rhs_norm() const noexcept { return b_norm_; }
    ReplicaStatus status() const noexcept { return status_; }

    /// Work iterations executed so far, replays included.
    std::size_t steps() const noexcept { return steps_; }
    std::size_t window_steps() const noexcept { return window_steps_; }
    std::size_t window_faults() const noexcept { return window_faults_; }
    std::size_t total_faults() const noexcept { return total_faults_; }

    /// Steps until state().iter == target_iter, the relative residual drops to
    /// tol, or a breakdown. Faults are injected before and undone after each
    /// step. Resets the per-window counters.
    void advance(std::size_t target_iter, double tol);

    /// Residual norm as published at a window; NaN once broken.
    double published_norm() const noexcept;

    bool d2(double eps2) const;

    /// Forward recovery: become a bit-exact copy of `healthy`'s iterate.
    void adopt(const Replica& healthy);
    /// Rollback recovery.
    void rollback(const Checkpoint& c);

private:
    void refresh_status(double tol);

    std::size_t id_;
    CsrMatrix matrix_;
    DenseVector b_;
    double b_norm_;
    std::optional<JacobiPreconditioner> precond_;
    SolverState state_;
    FaultInjector injector_;
    ReplicaStatus status_ = ReplicaStatus::running;
    double tol_ = 0.0;
    std::size_t steps_ = 0;
    std::size_t window_steps_ = 0;
    std::size_t window_faults_ = 0;
    std::size_t total_faults_ = 0;
};

/// A replica reported an iteration other than the window's.
class LockStepViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A replica failed to reach a rendezvous in time.
class RendezvousTimeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data exchanged inside one synchronization window.
struct SyncWindow {
    std::size_t window_iter = 0;
    std::vector<std::size_t> iters;
    std::vector<double> exchanged_norms;
    std::vector<ReplicaStatus> statuses;
    std::vector<std::optional<bool>> verdicts;  // D2, filled only when needed
    bool d1_passed = false;
    bool need_d2 = false;
};

/// Run-level bookkeeping the window resolver advances.
struct RunControl {
    std::size_t work = 0;         // total work iterations so far
    std::size_t next_target = 0;  // iteration the replicas run to next
    bool done = false;
    bool converged = false;
    std::size_t result_replica = 0;
    Checkpoint checkpoint;  // single shared copy
};

/// Collects every replica's iteration, norm and status. Replicas still running
/// must sit exactly at window_iter; converged or broken ones may have stopped
/// early.
SyncWindow rendezvous(std::span<const Replica> replicas, std::size_t window_iter);

/// D1 stage: fills d1_passed and need_d2 for the variant's policy.
void run_d1(SyncWindow& w, Variant variant, const ResilienceConfig& cfg);

/// Decides and applies the recovery action. Mutates replicas (FR/RR) and the
/// shared checkpoint; updates counters and termination in ctl and report.
WindowOutcome resolve_window(SyncWindow& w, Variant variant, const ResilienceConfig& cfg,
                             std::span<Replica> replicas, RunControl& ctl, RunReport& report);

/// Ends the window: abort check and the next lock-step target.
void release(const SyncWindow& w, const ResilienceConfig& cfg, std::span<const Replica> replicas,
             RunControl& ctl);

/// Reusable barrier with a completion step and a deadline. The last party to
/// arrive runs the completion before anyone is released. A timeout or a
/// throwing completion poisons the barrier for every party.
class WindowBarrier {
public:
    WindowBarrier(std::size_t parties, std::chrono::milliseconds timeout);

    /// Returns the time this caller spent blocked.
    std::chrono::duration<double> arrive_and_wait(const std::function<void()>& completion);

    /// Releases all waiters with an error; used when a party dies.
    void poison(std::exception_ptr error);
    std::exception_ptr error() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t parties_;
    std::chrono::milliseconds timeout_;
    std::size_t arrived_ = 0;
    std::size_t generation_ = 0;
    std::exception_ptr error_;
};

/// Called after every window is resolved, before replicas resume.
using WindowObserver =
    std::function<void(const WindowRecord&, std::span<const Replica>, const Checkpoint&)>;

} // namespace twincg

#endif // TWINCG_RUNTIME_HPP
