// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL. Criterion 8 needs apache1.mtx, looked up in $TWINCG_APACHE1 and
// then tests/data/apache1.mtx.

#include "scenario.hpp"
#include "test_util.hpp"

#include "twincg/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

using namespace twincg;
using namespace twincg::test;

namespace {

enum class Verdict { pass, fail, skip };

struct Result {
    Verdict verdict;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1
Result fault_free_equivalence() {
    const auto t0 = Clock::now();
    std::ostringstream detail;
    bool ok = true;
    for (const char* src : {"poisson2d:40", "poisson3d:10"}) {
        const auto a = MatrixSource::parse(src).load();
        const auto b = ones_rhs(a);
        RunOptions opt;
        opt.cfg.tol = 1e-10;
        const auto ref = run_standard_cg(a, b, opt);
        ok = ok && ref.converged;
        detail << src << " iter=" << ref.iterations;
        for (auto v : {Variant::online_abft, Variant::twin_cg, Variant::tmr}) {
            for (auto mode : {ExecMode::simulated, ExecMode::concurrent}) {
                opt.mode = mode;
                const auto r = run_variant(v, a, b, opt);
                const bool same = r.converged && r.iterations == ref.iterations && same_bits(r.x, ref.x);
                if (!same) {
                    detail << " [" << to_string(v) << "/" << to_string(mode)
                           << " iter=" << r.iterations << "]";
                }
                ok = ok && same;
            }
        }
        detail << "; ";
    }
    const double t = seconds_since(t0);
    detail << fmt("%.2f s", t);
    return {ok && t < 10.0 ? Verdict::pass : Verdict::fail, detail.str()};
}

// 2
Result analytic_probabilities() {
    const double f = p_fault_iter(0.01, 2);
    const double c = p_clean_window(0.01, 5, 2);
    const double one = p_exactly_one_faulty(0.01, 5);
    const double both = p_both_faulty(0.01, 5);
    const bool ok = std::abs(f - 0.0199) < 1e-15 && std::abs(c - std::exp(-0.1)) < 1e-15 &&
                    std::abs(c - 0.90484) < 5e-6 && one >= 0.0925 && one <= 0.0931 &&
                    both >= 0.0023 && both <= 0.0025;
    return {ok ? Verdict::pass : Verdict::fail,
            "fault_iter=" + fmt("%.17g", f) + " clean=" + fmt("%.6f", c) +
                " one=" + fmt("%.6f", one) + " both=" + fmt("%.6f", both)};
}

// 3
Result monte_carlo() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream detail;
    for (double lambda : {0.01, 0.1}) {
        const auto r = probe_probabilities(ProbeSpec{lambda, 5, 1000000, 2024});
        detail << "lambda=" << lambda << " z=";
        for (int k = 0; k < 3; ++k) {
            const double z = (r.empirical[k] - r.analytic[k]) / r.std_error[k];
            ok = ok && std::abs(z) < 3.0;
            detail << fmt("%+.2f", z) << (k < 2 ? "," : "; ");
        }
    }
    const double t = seconds_since(t0);
    detail << fmt("%.2f s", t);
    return {ok && t < 30.0 ? Verdict::pass : Verdict::fail, detail.str()};
}

// 4
Result recovery_bit_exactness() {
    const auto a = gen_poisson2d(12);
    const auto b = ones_rhs(a);
    struct Case {
        Variant v;
        std::vector<ScriptedFault> faults;
    };
    const std::vector<Case> scripted{
        {Variant::twin_cg, {exponent_flip(0, 3)}},
        {Variant::twin_cg, {exponent_flip(1, 3)}},
        {Variant::twin_cg, {exponent_flip(0, 1), exponent_flip(1, 3, 5)}},
        {Variant::twin_cg, {exponent_flip(0, 26), exponent_flip(1, 28, 3)}},
        {Variant::twin_cg, {exponent_flip(1, 2), exponent_flip(0, 13), exponent_flip(1, 14, 7)}},
        {Variant::tmr, {exponent_flip(2, 4)}},
        {Variant::tmr, {exponent_flip(0, 1), exponent_flip(1, 2, 5), ScriptedFault{2, 3, 10, 63}}},
        {Variant::online_abft, {exponent_flip(0, 7)}},
        {Variant::online_abft, {exponent_flip(0, 12)}},
    };
    Audit audit;
    std::size_t runs = 0;
    for (const auto& c : scripted) {
        for (auto mode : {ExecMode::simulated, ExecMode::concurrent}) {
            auto opt = scripted_options(c.faults, mode);
            opt.observer = auditor(audit);
            audit.recovered = false;
            run_variant(c.v, a, b, opt);
            ++runs;
        }
    }
    // random exponent faults on top
    const auto a2 = gen_poisson2d(20);
    const auto b2 = ones_rhs(a2);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (auto v : {Variant::online_abft, Variant::twin_cg, Variant::tmr}) {
            RunOptions opt;
            opt.faults.model = FaultModel{0.1, {52, 62}, seed};
            opt.observer = auditor(audit);
            audit.recovered = false;
            run_variant(v, a2, b2, opt);
            ++runs;
        }
    }
    const bool ok = audit.fr_windows > 0 && audit.rr_windows > 0 && audit.fr_mismatch == 0 &&
                    audit.rr_mismatch == 0 && audit.diverged_after == 0;
    std::ostringstream d;
    d << runs << " runs, " << audit.fr_windows << " FR / " << audit.rr_windows
      << " RR windows; mismatches FR=" << audit.fr_mismatch << " RR=" << audit.rr_mismatch
      << " later divergence=" << audit.diverged_after;
    return {ok ? Verdict::pass : Verdict::fail, d.str()};
}

// 5
Result injection_involution() {
    auto a = gen_poisson2d(20);
    const std::vector<double> snap(a.values().begin(), a.values().end());
    FaultRng rng(5);
    const FaultModel model{3.0, {0, 63}, 5};
    std::size_t double_hits = 0;
    std::size_t flips = 0;
    bool ok = true;
    for (int cycle = 0; cycle < 100000 && ok; ++cycle) {
        auto ev = inject(a, model, rng);
        // force a same-word double hit every 100 cycles
        if (cycle % 100 == 0 && !ev.empty()) ev.push_back(flip_bit(a, ev[0].nnz_index, (ev[0].bit + 1) % 64));
        for (std::size_t i = 0; i < ev.size(); ++i)
            for (std::size_t j = i + 1; j < ev.size(); ++j)
                double_hits += ev[i].nnz_index == ev[j].nnz_index;
        flips += ev.size();
        undo(a, ev);
        ok = same_bits(std::vector<double>(a.values().begin(), a.values().end()), snap);
    }
    ok = ok && double_hits > 0;
    return {ok ? Verdict::pass : Verdict::fail,
            "1e5 cycles, " + std::to_string(flips) + " flips, " + std::to_string(double_hits) +
                " same-word double hits"};
}

// 6
Result residual_consistency() {
    double worst = 0.0;
    std::size_t steps = 0;
    for (const char* src : {"poisson2d:10", "poisson2d:20", "poisson2d:40", "poisson3d:6", "poisson3d:10"}) {
        const auto a = MatrixSource::parse(src).load();
        const auto m = JacobiPreconditioner::from_matrix(a);
        for (const auto& b : {ones_rhs(a), random_vector(a.n(), 17)}) {
            const double bn = norm2(b);
            for (const JacobiPreconditioner* pc : {static_cast<const JacobiPreconditioner*>(nullptr), &m}) {
                auto s = init_state(a, b, DenseVector(a.n(), 0.0), pc);
                while (!converged(s, bn, 1e-10) && s.iter < 6000) {
                    step(s, a, pc);
                    worst = std::max(worst, residual_gap(a, b, s));
                    ++steps;
                }
            }
        }
    }
    return {worst < 1e-12 ? Verdict::pass : Verdict::fail,
            "max gap " + fmt("%.3e", worst) + " over " + std::to_string(steps) + " iterations"};
}

// 7
Result table_pattern() {
    const auto t0 = Clock::now();
    ExperimentSpec spec;
    spec.matrix = MatrixSource::parse("poisson2d:40");
    spec.lambda = 0.1;
    spec.bits = {52, 62};
    spec.reps = 60;
    spec.mode = ExecMode::concurrent;
    const auto res = run_experiment(spec);
    const auto& st = res.stats;  // standard, online-abft, twincg, tmr
    const auto& std_cg = st[0];
    const auto& abft = st[1];
    const auto& twin = st[2];
    const bool ok = res.failures.empty() && twin.mean_rr < abft.mean_rr && twin.mean_fr > 0.0 &&
                    twin.abort_fraction <= std_cg.abort_fraction &&
                    twin.mean_iterations <= abft.mean_iterations;
    const double t = seconds_since(t0);
    std::ostringstream d;
    d << "RR twin/abft=" << twin.mean_rr << "/" << abft.mean_rr << " FR twin=" << twin.mean_fr
      << " abort twin/std=" << twin.abort_fraction << "/" << std_cg.abort_fraction
      << " iter twin/abft=" << twin.mean_iterations << "/" << abft.mean_iterations << "; "
      << fmt("%.2f s", t);
    return {ok && t < 300.0 ? Verdict::pass : Verdict::fail, d.str()};
}

// 8
Result apache1_reproduction() {
    std::filesystem::path path;
    if (const char* env = std::getenv("TWINCG_APACHE1")) path = env;
    if (path.empty() || !std::filesystem::exists(path)) {
        path = std::filesystem::path(TWINCG_TEST_DATA_DIR) / "apache1.mtx";
    }
    if (!std::filesystem::exists(path)) {
        return {Verdict::skip, "apache1.mtx not found (set TWINCG_APACHE1)"};
    }
    ExperimentSpec spec;
    spec.matrix = MatrixSource::parse(path.string());
    spec.lambda = 0.01;
    spec.reps = 10;
    const auto a = spec.matrix.load();
    bool ok = a.nnz() == 542184;
    std::ostringstream d;
    d << "nnz=" << a.nnz();
    spec.variants = {Variant::standard, Variant::online_abft, Variant::twin_cg};
    const auto res = run_experiment(spec, a);
    for (const auto& s : res.stats) {
        const bool v_ok = s.abort_fraction == 0.0 && std::abs(s.mean_iterations - 548.0) <= 0.05 * 548.0;
        ok = ok && v_ok;
        d << " " << to_string(s.variant) << "=" << s.mean_iterations;
    }
    return {ok ? Verdict::pass : Verdict::fail, d.str()};
}

// 9
Result determinism() {
    bool ok = true;
    std::size_t bytes = 0;
    auto check = [&](ExperimentSpec spec) {
        spec.mode = ExecMode::simulated;
        const auto c1 = to_csv(run_experiment(spec).rows);
        const auto c2 = to_csv(run_experiment(spec).rows);
        ok = ok && c1 == c2;
        bytes += c1.size();
    };
    ExperimentSpec s1;
    s1.matrix = MatrixSource::parse("poisson2d:20");
    s1.lambda = 0.1;
    s1.bits = {52, 62};
    s1.reps = 10;
    s1.seed = 7;
    check(s1);
    ExperimentSpec s2;
    s2.matrix = MatrixSource::parse("poisson3d:6");
    s2.lambda = 0.05;
    s2.reps = 5;
    s2.precond = Precond::jacobi;
    check(s2);
    ExperimentSpec s3;
    s3.matrix = MatrixSource::parse("poisson2d:15");
    s3.variants = {Variant::twin_cg};
    s3.lambda = 0.2;
    s3.reps = 1;
    s3.seed = 7;
    check(s3);
    return {ok ? Verdict::pass : Verdict::fail, std::to_string(bytes) + " CSV bytes compared"};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Result()>>> criteria{
        {"fault-free equivalence", fault_free_equivalence},
        {"analytic probabilities", analytic_probabilities},
        {"monte carlo agreement", monte_carlo},
        {"recovery bit-exactness", recovery_bit_exactness},
        {"fault-injection involution", injection_involution},
        {"residual-consistency margin", residual_consistency},
        {"qualitative recovery pattern", table_pattern},
        {"apache1 reproduction", apache1_reproduction},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Result r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {Verdict::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = r.verdict == Verdict::pass ? "PASS" : r.verdict == Verdict::fail ? "FAIL" : "SKIP";
        failures += r.verdict == Verdict::fail;
        std::printf("criterion %zu %-30s %s  %s\n", i + 1, criteria[i].first, tag, r.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
