#ifndef TWINCG_TEST_SCENARIO_HPP
#define TWINCG_TEST_SCENARIO_HPP

// Scripted-fault runs with an observer that audits every window.

#include "twincg/drivers.hpp"

#include <string>

namespace twincg::test {

struct Audit {
    std::size_t fr_windows = 0;
    std::size_t rr_windows = 0;
    std::size_t fr_mismatch = 0;  // FR window where replicas were not bit-equal afterwards
    std::size_t rr_mismatch = 0;  // RR window where a replica differed from the checkpoint
    // replicas differ in a fault-free window with only fault-free windows since the last recovery
    std::size_t diverged_after = 0;
    bool recovered = false;
    std::vector<std::size_t> window_iters;
};

inline WindowObserver auditor(Audit& audit) {
    return [&audit](const WindowRecord& rec, std::span<const Replica> reps, const Checkpoint& c) {
        audit.window_iters.push_back(rec.iter);
        bool clean = true;
        for (const auto f : rec.faults_per_replica) clean = clean && f == 0;
        if (audit.recovered && clean) {
            for (const auto& r : reps) {
                if (!same_iterate(r.state(), reps[0].state())) ++audit.diverged_after;
            }
        }
        audit.recovered = audit.recovered && clean;
        if (rec.outcome.kind == OutcomeKind::forward_recovered) {
            ++audit.fr_windows;
            audit.recovered = true;
            for (const auto& r : reps) {
                if (!same_iterate(r.state(), reps[0].state())) ++audit.fr_mismatch;
            }
        } else if (rec.outcome.kind == OutcomeKind::rolled_back) {
            ++audit.rr_windows;
            audit.recovered = true;
            for (const auto& r : reps) {
                if (!matches_checkpoint(r.state(), c)) ++audit.rr_mismatch;
            }
        }
    };
}

// Exponent-bit flip on the first stored entry (a diagonal 4.0 on Poisson
// matrices), which turns it into roughly 2e-308.
inline ScriptedFault exponent_flip(std::size_t replica, std::size_t step, std::size_t nnz_index = 0,
                                   int bit = 62) {
    return ScriptedFault{replica, step, nnz_index, bit};
}

inline RunOptions scripted_options(std::vector<ScriptedFault> faults,
                                   ExecMode mode = ExecMode::simulated) {
    RunOptions opt;
    opt.faults.scripted = std::move(faults);
    opt.mode = mode;
    return opt;
}

inline std::vector<OutcomeKind> outcome_kinds(const RunReport& r) {
    std::vector<OutcomeKind> k;
    for (const auto& w : r.wall_events) k.push_back(w.outcome.kind);
    return k;
}

} // namespace twincg::test

#endif // TWINCG_TEST_SCENARIO_HPP
