#include "twincg/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twincg {

std::string_view to_string(ExecMode m) {
    return m == ExecMode::concurrent ? "concurrent" : "simulated";
}

std::string_view to_string(Precond p) { return p == Precond::jacobi ? "jacobi" : "none"; }

Replica::Replica(std::size_t id, const CsrMatrix& a, std::span<const double> b, Precond precond,
                 const FaultPlan& plan)
    : id_(id), matrix_(a), b_(b.begin(), b.end()), b_norm_(norm2(b)), injector_(plan, id) {
    if (precond == Precond::jacobi) {
        precond_ = JacobiPreconditioner::from_matrix(matrix_);
    }
    const DenseVector x0(matrix_.n(), 0.0);
    state_ = init_state(matrix_, b_, x0, precond_ ? &*precond_ : nullptr);
}

void Replica::refresh_status(double tol) {
    if (status_ == ReplicaStatus::broken) {
        return;
    }
    status_ = converged(state_, b_norm_, tol) ? ReplicaStatus::converged : ReplicaStatus::running;
}

void Replica::advance(std::size_t target_iter, double tol) {
    tol_ = tol;
    window_steps_ = 0;
    window_faults_ = 0;
    refresh_status(tol);
    const JacobiPreconditioner* m = precond_ ? &*precond_ : nullptr;
    while (status_ == ReplicaStatus::running && state_.iter < target_iter) {
        const auto events = injector_.begin_iteration(matrix_, steps_);
        window_faults_ += events.size();
        total_faults_ += events.size();
        try {
            step(state_, matrix_, m);
        } catch (const BreakdownError&) {
            status_ = ReplicaStatus::broken;
        } catch (...) {
            undo(matrix_, events);
            throw;
        }
        undo(matrix_, events);
        ++steps_;
        ++window_steps_;
        refresh_status(tol);
    }
}

double Replica::published_norm() const noexcept {
    return status_ == ReplicaStatus::broken ? std::numeric_limits<double>::quiet_NaN()
                                            : state_.res_norm;
}

bool Replica::d2(double eps2) const {
    if (status_ == ReplicaStatus::broken) {
        return false;
    }
    return d2_check(matrix_, b_, state_, eps2);
}

void Replica::adopt(const Replica& healthy) {
    forward_recover(healthy.state_, state_);
    status_ = healthy.status_;
}

void Replica::rollback(const Checkpoint& c) {
    restore_checkpoint(state_, c);
    status_ = ReplicaStatus::running;
    refresh_status(tol_);
}

SyncWindow rendezvous(std::span<const Replica> replicas, std::size_t window_iter) {
    SyncWindow w;
    w.window_iter = window_iter;
    w.iters.reserve(replicas.size());
    for (const auto& r : replicas) {
        const std::size_t it = r.state().iter;
        const bool stopped_early = r.status() != ReplicaStatus::running;
        if (it > window_iter || (!stopped_early && it != window_iter)) {
            throw LockStepViolation("replica " + std::to_string(r.id()) + " at iteration " +
                                    std::to_string(it) + ", window expects " +
                                    std::to_string(window_iter));
        }
        w.iters.push_back(it);
        w.exchanged_norms.push_back(r.published_norm());
        w.statuses.push_back(r.status());
    }
    w.verdicts.assign(replicas.size(), std::nullopt);
    return w;
}

namespace {

bool agree(const SyncWindow& w, std::size_t i, std::size_t j, double eps1) {
    return w.iters[i] == w.iters[j] && d1_check(w.exchanged_norms[i], w.exchanged_norms[j], eps1);
}

std::optional<std::size_t> first_converged(std::span<const Replica> replicas) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < replicas.size(); ++i) {
        if (replicas[i].status() != ReplicaStatus::converged) {
            continue;
        }
        if (!best || replicas[i].state().iter < replicas[*best].state().iter) {
            best = i;
        }
    }
    return best;
}

void rollback_all(std::span<Replica> replicas, const Checkpoint& c) {
    for (auto& r : replicas) {
        r.rollback(c);
    }
}

} // namespace

void run_d1(SyncWindow& w, Variant variant, const ResilienceConfig& cfg) {
    const std::size_t k = w.iters.size();
    switch (variant) {
    case Variant::standard:
        w.d1_passed = true;
        w.need_d2 = false;
        break;
    case Variant::online_abft:
        // no peer to compare against: D2 every window
        w.d1_passed = true;
        w.need_d2 = true;
        break;
    case Variant::twin_cg:
        w.d1_passed = k == 2 && agree(w, 0, 1, cfg.eps1);
        w.need_d2 = !w.d1_passed;
        break;
    case Variant::tmr: {
        bool all = true;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                all = all && agree(w, i, j, cfg.eps1);
            }
        }
        w.d1_passed = all;
        w.need_d2 = false;
        break;
    }
    }
}

WindowOutcome resolve_window(SyncWindow& w, Variant variant, const ResilienceConfig& cfg,
                             std::span<Replica> replicas, RunControl& ctl, RunReport& report) {
    WindowRecord rec;
    rec.iter = w.window_iter;
    for (const auto& r : replicas) {
        rec.steps = std::max(rec.steps, r.window_steps());
        rec.faults_per_replica.push_back(r.window_faults());
    }
    ctl.work += rec.steps;

    WindowOutcome out{};
    const std::size_t k = replicas.size();

    switch (variant) {
    case Variant::standard:
        break;

    case Variant::online_abft: {
        report.d2_evaluations += 1;
        if (!w.verdicts[0].value_or(false)) {
            rollback_all(replicas, ctl.checkpoint);
            ++report.rr_count;
            out.kind = OutcomeKind::rolled_back;
        }
        break;
    }

    case Variant::twin_cg: {
        if (w.d1_passed) {
            break;
        }
        ++report.d1_failures;
        report.d2_evaluations += k;
        std::vector<std::size_t> failed;
        for (std::size_t i = 0; i < k; ++i) {
            if (!w.verdicts[i].value_or(false)) {
                failed.push_back(i);
            }
        }
        if (failed.size() == 1) {
            const std::size_t faulty = failed.front();
            replicas[faulty].adopt(replicas[1 - faulty]);
            ++report.fr_count;
            out = {OutcomeKind::forward_recovered, faulty};
        } else if (failed.size() == 2) {
            rollback_all(replicas, ctl.checkpoint);
            ++report.rr_count;
            out.kind = OutcomeKind::rolled_back;
        } else {
            out.kind = OutcomeKind::continued_both_passed_d2;
        }
        break;
    }

    case Variant::tmr: {
        if (w.d1_passed) {
            break;
        }
        ++report.d1_failures;
        std::optional<std::size_t> reference;
        for (std::size_t i = 0; i < k && !reference; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                if (agree(w, i, j, cfg.eps1)) {
                    reference = i;
                    break;
                }
            }
        }
        if (!reference) {
            rollback_all(replicas, ctl.checkpoint);
            ++report.rr_count;
            out.kind = OutcomeKind::rolled_back;
            break;
        }
        std::optional<std::size_t> first_faulty;
        for (std::size_t i = 0; i < k; ++i) {
            if (i != *reference && !agree(w, *reference, i, cfg.eps1)) {
                replicas[i].adopt(replicas[*reference]);
                if (!first_faulty) {
                    first_faulty = i;
                }
            }
        }
        ++report.fr_count;
        out = {OutcomeKind::forward_recovered, first_faulty.value_or(0)};
        break;
    }
    }

    if (out.kind != OutcomeKind::rolled_back) {
        if (const auto c = first_converged(replicas)) {
            ctl.done = true;
            ctl.converged = true;
            ctl.result_replica = *c;
        } else if (out.kind == OutcomeKind::no_significant_fault &&
                   w.window_iter % cfg.checkpoint_interval == 0) {
            ctl.checkpoint = save_checkpoint(replicas[0].state());
        }
    }

    rec.outcome = out;
    report.wall_events.push_back(std::move(rec));
    return out;
}

void release(const SyncWindow& w, const ResilienceConfig& cfg, std::span<const Replica> replicas,
             RunControl& ctl) {
    (void)w;
    if (ctl.done) {
        return;
    }
    if (ctl.work >= cfg.max_iter) {
        ctl.done = true;
        ctl.converged = false;
        ctl.result_replica = 0;
        return;
    }
    const std::size_t iter = replicas[0].state().iter;
    for (const auto& r : replicas) {
        if (r.state().iter != iter) {
            throw LockStepViolation("replicas leave a window at different iterations");
        }
    }
    const std::size_t to_boundary = cfg.d - iter % cfg.d;
    ctl.next_target = iter + std::min(to_boundary, cfg.max_iter - ctl.work);
}

WindowBarrier::WindowBarrier(std::size_t parties, std::chrono::milliseconds timeout)
    : parties_(parties), timeout_(timeout) {}

std::chrono::duration<double> WindowBarrier::arrive_and_wait(const std::function<void()>& completion) {
    const auto t0 = std::chrono::steady_clock::now();
    std::unique_lock lock(mutex_);
    if (error_) {
        std::rethrow_exception(error_);
    }
    const std::size_t gen = generation_;
    if (++arrived_ == parties_) {
        try {
            completion();
        } catch (...) {
            error_ = std::current_exception();
            cv_.notify_all();
            throw;
        }
        arrived_ = 0;
        ++generation_;
        cv_.notify_all();
        return std::chrono::steady_clock::now() - t0;
    }
    const bool woke = cv_.wait_for(lock, timeout_, [&] { return generation_ != gen || error_; });
    if (!woke) {
        error_ = std::make_exception_ptr(RendezvousTimeout(
            "rendezvous timed out after " + std::to_string(timeout_.count()) + " ms"));
        cv_.notify_all();
    }
    if (generation_ == gen) {
        std::rethrow_exception(error_);
    }
    return std::chrono::steady_clock::now() - t0;
}

void WindowBarrier::poison(std::exception_ptr error) {
    std::lock_guard lock(mutex_);
    if (!error_) {
        error_ = std::move(error);
    }
    cv_.notify_all();
}

std::exception_ptr WindowBarrier::error() const {
    std::lock_guard lock(mutex_);
    return error_;
}

} // namespace twincg
