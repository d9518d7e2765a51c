#include "twincg/drivers.hpp"

#include <thread>

namespace twincg {

namespace {

void finish_report(RunReport& report, const CsrMatrix& a, std::span<const double> b,
                   const Replica& result) {
    report.x = result.state().x;
    report.final_iter = result.state().iter;
    DenseVector res = spmv(a, report.x);
    for (std::size_t i = 0; i < res.size(); ++i) {
        res[i] = b[i] - res[i];
    }
    report.final_abs_residual = norm2(res);
    const double b_norm = norm2(b);
    report.final_rel_residual =
        b_norm > 0.0 ? report.final_abs_residual / b_norm : report.final_abs_residual;
}

std::vector<Replica> make_replicas(std::size_t k, const CsrMatrix& a, std::span<const double> b,
                                   const RunOptions& opt) {
    std::vector<Replica> replicas;
    replicas.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        replicas.emplace_back(i, a, b, opt.precond, opt.faults);
    }
    return replicas;
}

void validate(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt) {
    opt.cfg.validate();
    opt.faults.model.validate();
    if (b.size() != a.n()) {
        throw DimensionError("right-hand side length does not match matrix");
    }
}

RunReport run_replicated(Variant variant, const CsrMatrix& a, std::span<const double> b,
                         const RunOptions& opt) {
    validate(a, b, opt);
    const ResilienceConfig& cfg = opt.cfg;
    std::vector<Replica> replicas = make_replicas(replica_count(variant), a, b, opt);

    RunReport report;
    report.variant = variant;
    RunControl ctl;
    ctl.checkpoint = save_checkpoint(replicas[0].state());
    ctl.next_target = std::min(cfg.d, cfg.max_iter);

    SyncWindow window;
    const auto open_window = [&] {
        window = rendezvous(replicas, ctl.next_target);
        run_d1(window, variant, cfg);
    };
    const auto close_window = [&] {
        resolve_window(window, variant, cfg, replicas, ctl, report);
        if (opt.observer) {
            opt.observer(report.wall_events.back(), replicas, ctl.checkpoint);
        }
        release(window, cfg, replicas, ctl);
    };

    if (opt.mode == ExecMode::simulated || replicas.size() == 1) {
        while (!ctl.done) {
            for (auto& r : replicas) {
                r.advance(ctl.next_target, cfg.tol);
            }
            open_window();
            if (window.need_d2) {
                for (std::size_t i = 0; i < replicas.size(); ++i) {
                    window.verdicts[i] = replicas[i].d2(cfg.eps2);
                }
            }
            close_window();
        }
    } else {
        WindowBarrier barrier(replicas.size(), opt.timeout);
        std::vector<double> waited(replicas.size(), 0.0);
        std::vector<std::thread> threads;
        threads.reserve(replicas.size());
        for (std::size_t i = 0; i < replicas.size(); ++i) {
            threads.emplace_back([&, i] {
                try {
                    Replica& self = replicas[i];
                    for (;;) {
                        self.advance(ctl.next_target, cfg.tol);
                        waited[i] += barrier.arrive_and_wait(open_window).count();
                        if (window.need_d2) {
                            window.verdicts[i] = self.d2(cfg.eps2);
                        }
                        waited[i] += barrier.arrive_and_wait(close_window).count();
                        if (ctl.done) {
                            break;
                        }
                    }
                } catch (...) {
                    barrier.poison(std::current_exception());
                }
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        if (auto err = barrier.error()) {
            std::rethrow_exception(err);
        }
        for (const double w : waited) {
            report.wait_seconds += w;
        }
    }

    report.iterations = ctl.work;
    report.converged = ctl.converged;
    report.aborted = !ctl.converged;
    for (const auto& r : replicas) {
        report.injected_faults += r.total_faults();
    }
    finish_report(report, a, b, replicas[ctl.result_replica]);
    return report;
}

} // namespace

RunReport run_standard_cg(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt) {
    validate(a, b, opt);
    Replica replica(0, a, b, opt.precond, opt.faults);
    replica.advance(opt.cfg.max_iter, opt.cfg.tol);

    RunReport report;
    report.variant = Variant::standard;
    report.converged = replica.status() == ReplicaStatus::converged;
    report.breakdown = replica.status() == ReplicaStatus::broken;
    report.aborted = !report.converged;
    // a broken-down run can never recover, so it is charged the full budget
    report.iterations = report.breakdown ? opt.cfg.max_iter : replica.steps();
    report.injected_faults = replica.total_faults();
    finish_report(report, a, b, replica);
    return report;
}

RunReport run_online_abft(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt) {
    return run_replicated(Variant::online_abft, a, b, opt);
}

RunReport run_twin_cg(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt) {
    return run_replicated(Variant::twin_cg, a, b, opt);
}

RunReport run_tmr(const CsrMatrix& a, std::span<const double> b, const RunOptions& opt) {
    return run_replicated(Variant::tmr, a, b, opt);
}

RunReport run_variant(Variant v, const CsrMatrix& a, std::span<const double> b,
                      const RunOptions& opt) {
    switch (v) {
    case Variant::standard: return run_standard_cg(a, b, opt);
    case Variant::online_abft: return run_online_abft(a, b, opt);
    case Variant::twin_cg: return run_twin_cg(a, b, opt);
    case Variant::tmr: return run_tmr(a, b, opt);
    }
    throw std::invalid_argument("unknown variant");
}

DenseVector ones_rhs(const CsrMatrix& a) {
    const DenseVector ones(a.n(), 1.0);
    return spmv(a, ones);
}

} // namespace twincg
