#include "twincg/faults.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace twincg {

void FaultModel::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("fault model: lambda must be finite and >= 0");
    }
    if (!bits.valid()) {
        throw std::invalid_argument("fault model: bit range must satisfy 0 <= lo <= hi <= 63");
    }
}

std::uint64_t FaultRng::below(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("FaultRng::below: empty range");
    }
    // reject the top partial block of 2^64 so every residue is equally likely
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v = engine_();
    while (v >= limit) {
        v = engine_();
    }
    return v % bound;
}

std::size_t sample_fault_count(double lambda, FaultRng& rng) {
    if (lambda <= 0.0) {
        return 0;
    }
    const double u = rng.uniform01();
    double p = std::exp(-lambda);
    double cdf = p;
    std::size_t k = 0;
    // terms underflow long before k reaches this for any sane rate
    while (u >= cdf && k < 10000) {
        ++k;
        p *= lambda / static_cast<double>(k);
        cdf += p;
        if (p == 0.0) {
            break;
        }
    }
    return k;
}

FaultEvent flip_bit(CsrMatrix& a, std::size_t nnz_index, int bit) {
    auto values = a.values_mut();
    if (nnz_index >= values.size() || bit < 0 || bit > 63) {
        throw std::out_of_range("flip_bit: target outside matrix values");
    }
    const auto original = std::bit_cast<std::uint64_t>(values[nnz_index]);
    values[nnz_index] = std::bit_cast<double>(original ^ (std::uint64_t{1} << bit));
    return FaultEvent{nnz_index, bit, original};
}

std::vector<FaultEvent> inject(CsrMatrix& a, const FaultModel& model, FaultRng& rng) {
    std::vector<FaultEvent> events;
    const std::size_t count = sample_fault_count(model.lambda, rng);
    if (count == 0) {
        return events;
    }
    if (a.nnz() == 0) {
        throw std::invalid_argument("inject: matrix has no nonzeros");
    }
    events.reserve(count);
    for (std::size_t f = 0; f < count; ++f) {
        const auto idx = static_cast<std::size_t>(rng.below(a.nnz()));
        const int bit =
            model.bits.lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(model.bits.width())));
        events.push_back(flip_bit(a, idx, bit));
    }
    return events;
}

void undo(CsrMatrix& a, std::span<const FaultEvent> events) {
    auto values = a.values_mut();
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
        values[it->nnz_index] = std::bit_cast<double>(it->original_bits);
    }
}

FaultInjector::FaultInjector(const FaultPlan& plan, std::size_t replica_id)
    : model_(plan.model), rng_(plan.model.seed ^ static_cast<std::uint64_t>(replica_id)) {
    model_.validate();
    for (const auto& s : plan.scripted) {
        if (s.replica == replica_id) {
            scripted_.push_back(s);
        }
    }
}

std::vector<FaultEvent> FaultInjector::begin_iteration(CsrMatrix& a, std::size_t step) {
    auto events = inject(a, model_, rng_);
    for (const auto& s : scripted_) {
        if (s.step == step) {
            events.push_back(flip_bit(a, s.nnz_index, s.bit));
        }
    }
    return events;
}

} // namespace twincg
