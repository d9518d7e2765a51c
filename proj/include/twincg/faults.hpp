#ifndef TWINCG_FAULTS_HPP
#define TWINCG_FAULTS_HPP

#include "twincg/sparse.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace twincg {

/// Inclusive range of IEEE-754 bit positions eligible for a flip.
struct BitRange {
    int lo = 0;
    int hi = 63;

    bool valid() const noexcept { return 0 <= lo && lo <= hi && hi <= 63; }
    int width() const noexcept { return hi - lo + 1; }
};

struct FaultModel {
    double lambda = 0.0;  // mean flips per iteration per replica
    BitRange bits{};
    std::uint64_t seed = 0;

    void validate() const;
};

/// One applied flip; enough to undo it exactly.
struct FaultEvent {
    std::size_t nnz_index = 0;
    int bit = 0;
    std::uint64_t original_bits = 0;
};

/// Reproducible uniform source. mt19937_64's output sequence is fixed by the
/// standard; the mappings to [0,1) and to integer ranges are done here so
/// streams are identical across standard libraries.
class FaultRng {
public:
    explicit FaultRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// 53-bit uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Unbiased uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

/// Poisson(lambda) by sequential inversion of one uniform draw.
std::size_t sample_fault_count(double lambda, FaultRng& rng);

/// XORs one bit of values[nnz_index] and records the prior word.
FaultEvent flip_bit(CsrMatrix& a, std::size_t nnz_index, int bit);

/// Samples a fault count, then for each fault a uniform nonzero and a
/// uniform bit in model.bits. Events come back in application order.
std::vector<FaultEvent> inject(CsrMatrix& a, const FaultModel& model, FaultRng& rng);

/// Reverts events in reverse order, so repeated hits on one word unwind.
void undo(CsrMatrix& a, std::span<const FaultEvent> events);

/// A flip forced at a given step of a given replica. `step` counts work
/// iterations executed by that replica (0-based), so replayed iterations after
/// a rollback do not re-trigger it.
struct ScriptedFault {
    std::size_t replica = 0;
    std::size_t step = 0;
    std::size_t nnz_index = 0;
    int bit = 0;
};

/// Random model plus optional scripted flips; shared by all replicas of a run.
struct FaultPlan {
    FaultModel model{};
    std::vector<ScriptedFault> scripted;
};

/// Per-replica injector. Stream seed is model.seed XOR replica id.
class FaultInjector {
public:
    FaultInjector(const FaultPlan& plan, std::size_t replica_id);

    /// Applies this step's random and scripted flips to `a`.
    std::vector<FaultEvent> begin_iteration(CsrMatrix& a, std::size_t step);

private:
    FaultModel model_;
    std::vector<ScriptedFault> scripted_;
    FaultRng rng_;
};

} // namespace twincg

#endif // TWINCG_FAULTS_HPP
