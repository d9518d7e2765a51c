#ifndef TWINCG_RESILIENCE_HPP
#define TWINCG_RESILIENCE_HPP

#include "twincg/solver.hpp"

#include <string_view>
#include <vector>

namespace twincg {

/// Detection/recovery schedule and thresholds.
struct ResilienceConfig {
    std::size_t d = 5;                     // detection interval (iterations)
    std::size_t checkpoint_interval = 10;  // must be a multiple of d
    double eps1 = 1e-15;                   // D1: |‖r¹‖ − ‖r²‖| < eps1
    double eps2 = 1e-10;                   // D2: ‖b − Ax − r‖ / ‖A‖ < eps2
    double tol = 1e-10;                    // ‖r‖ ≤ tol·‖b‖
    std::size_t max_iter = 6000;

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;
};

enum class Variant { standard, online_abft, twin_cg, tmr };

std::string_view to_string(Variant v);
/// "standard", "online-abft", "twincg", "tmr"; throws on anything else.
Variant parse_variant(std::string_view name);

/// Number of replicas a variant runs.
std::size_t replica_count(Variant v);

enum class OutcomeKind {
    no_significant_fault,
    forward_recovered,
    rolled_back,
    continued_both_passed_d2,
};

std::string_view to_string(OutcomeKind k);

struct WindowOutcome {
    OutcomeKind kind = OutcomeKind::no_significant_fault;
    std::size_t faulty_replica = 0;  // meaningful for forward_recovered only

    friend bool operator==(const WindowOutcome&, const WindowOutcome&) = default;
};

/// One synchronization window as it happened.
struct WindowRecord {
    std::size_t iter = 0;   // window_iter
    WindowOutcome outcome{};
    std::size_t steps = 0;  // iterations executed in the window (max over replicas)
    std::vector<std::size_t> faults_per_replica;

    friend bool operator==(const WindowRecord&, const WindowRecord&) = default;
};

struct RunReport {
    Variant variant = Variant::standard;
    std::size_t iterations = 0;  // total work iterations, replays included
    std::size_t fr_count = 0;
    std::size_t rr_count = 0;
    bool converged = false;
    bool aborted = false;
    bool breakdown = false;  // unprotected run hit a CG breakdown
    double final_rel_residual = 0.0;  // ‖b − A·x‖ / ‖b‖ on the pristine matrix
    double final_abs_residual = 0.0;
    std::size_t final_iter = 0;  // iteration index of the returned x
    DenseVector x;
    std::vector<WindowRecord> wall_events;
    std::size_t d1_failures = 0;
    std::size_t d2_evaluations = 0;
    std::size_t injected_faults = 0;
    double wait_seconds = 0.0;  // time spent blocked at rendezvous, concurrent mode only
};

/// True iff |norm_a − norm_b| < eps1. NaN anywhere gives false.
bool d1_check(double norm_a, double norm_b, double eps1);

/// ‖b − A·x − r‖ / ‖A‖_F; NaN propagates.
double residual_gap(const CsrMatrix& a, std::span<const double> b, const SolverState& s);

/// True iff residual_gap < eps2. NaN gives false.
bool d2_check(const CsrMatrix& a, std::span<const double> b, const SolverState& s, double eps2);

/// faulty becomes a bit-exact copy of healthy.
void forward_recover(const SolverState& healthy, SolverState& faulty);

// Closed-form fault statistics for k replicas and a detection interval d.

/// 1 − (1 − λ)^k
double p_fault_iter(double lambda, std::size_t replicas);
/// (e^{−λ})^{d·k}
double p_clean_window(double lambda, std::size_t d, std::size_t replicas);
/// 2·e^{−dλ}·(1 − e^{−dλ})
double p_exactly_one_faulty(double lambda, std::size_t d);
/// (1 − e^{−dλ})²
double p_both_faulty(double lambda, std::size_t d);

} // namespace twincg

#endif // TWINCG_RESILIENCE_HPP
