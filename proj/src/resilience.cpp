#include "twincg/resilience.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace twincg {

void ResilienceConfig::validate() const {
    if (d < 1) {
        throw std::invalid_argument("detection interval d must be >= 1");
    }
    if (checkpoint_interval < 1 || checkpoint_interval % d != 0) {
        throw std::invalid_argument("checkpoint interval must be a positive multiple of d");
    }
    if (!(eps1 > 0.0) || !(eps2 > 0.0) || !(tol > 0.0)) {
        throw std::invalid_argument("eps1, eps2 and tol must be > 0");
    }
    if (max_iter < 1) {
        throw std::invalid_argument("max_iter must be >= 1");
    }
}

std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::standard: return "standard";
    case Variant::online_abft: return "online-abft";
    case Variant::twin_cg: return "twincg";
    case Variant::tmr: return "tmr";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    if (name == "standard") return Variant::standard;
    if (name == "online-abft") return Variant::online_abft;
    if (name == "twincg") return Variant::twin_cg;
    if (name == "tmr") return Variant::tmr;
    throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

std::size_t replica_count(Variant v) {
    switch (v) {
    case Variant::twin_cg: return 2;
    case Variant::tmr: return 3;
    default: return 1;
    }
}

std::string_view to_string(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::no_significant_fault: return "no-significant-fault";
    case OutcomeKind::forward_recovered: return "forward-recovered";
    case OutcomeKind::rolled_back: return "rolled-back";
    case OutcomeKind::continued_both_passed_d2: return "continued-both-passed-d2";
    }
    return "?";
}

bool d1_check(double norm_a, double norm_b, double eps1) {
    return std::fabs(norm_a - norm_b) < eps1;
}

double residual_gap(const CsrMatrix& a, std::span<const double> b, const SolverState& s) {
    if (b.size() != a.n() || s.n() != a.n() || s.r.size() != a.n()) {
        throw DimensionError("residual_gap: state does not match matrix");
    }
    DenseVector gap = spmv(a, s.x);
    for (std::size_t i = 0; i < gap.size(); ++i) {
        gap[i] = b[i] - gap[i] - s.r[i];
    }
    return norm2(gap) / matrix_norm(a);
}

bool d2_check(const CsrMatrix& a, std::span<const double> b, const SolverState& s, double eps2) {
    return residual_gap(a, b, s) < eps2;
}

void forward_recover(const SolverState& healthy, SolverState& faulty) {
    if (healthy.n() != faulty.n() || healthy.z.size() != faulty.z.size()) {
        throw DimensionError("forward_recover: replicas solve different problems");
    }
    if (&healthy != &faulty) {
        faulty = healthy;
    }
}

double p_fault_iter(double lambda, std::size_t replicas) {
    return 1.0 - std::pow(1.0 - lambda, static_cast<double>(replicas));
}

double p_clean_window(double lambda, std::size_t d, std::size_t replicas) {
    return std::pow(std::exp(-lambda), static_cast<double>(d * replicas));
}

double p_exactly_one_faulty(double lambda, std::size_t d) {
    const double clean = std::exp(-static_cast<double>(d) * lambda);
    return 2.0 * clean * (1.0 - clean);
}

double p_both_faulty(double lambda, std::size_t d) {
    const double hit = 1.0 - std::exp(-static_cast<double>(d) * lambda);
    return hit * hit;
}

} // namespace twincg
