#include "twincg/experiment.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace twincg {

namespace {

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::size_t parse_grid(const std::string& text, const std::string& digits) {
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
        throw UsageError("bad matrix source '" + text + "', expected e.g. poisson2d:40");
    }
    return std::stoul(digits);
}

BitRange parse_bits(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw UsageError("--bits expects LO:HI, got '" + text + "'");
    }
    BitRange r;
    try {
        std::size_t used = 0;
        r.lo = std::stoi(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("lo");
        const std::string hi = text.substr(colon + 1);
        r.hi = std::stoi(hi, &used);
        if (used != hi.size()) throw std::invalid_argument("hi");
    } catch (const std::logic_error&) {
        throw UsageError("--bits expects integers LO:HI, got '" + text + "'");
    }
    if (!r.valid()) {
        throw UsageError("--bits range must satisfy 0 <= LO <= HI <= 63, got '" + text + "'");
    }
    return r;
}

std::vector<Variant> parse_variants(const std::string& text) {
    if (text == "all") {
        return {Variant::standard, Variant::online_abft, Variant::twin_cg, Variant::tmr};
    }
    try {
        return {parse_variant(text)};
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

template <class Fn>
void parse_with(CLI::App& app, int argc, const char* const* argv, Fn&& finish) {
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help(), true);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    finish();
}

} // namespace

MatrixSource MatrixSource::parse(const std::string& text) {
    MatrixSource s;
    if (text.rfind("poisson2d:", 0) == 0) {
        s.kind = Kind::poisson2d;
        s.grid = parse_grid(text, text.substr(10));
    } else if (text.rfind("poisson3d:", 0) == 0) {
        s.kind = Kind::poisson3d;
        s.grid = parse_grid(text, text.substr(10));
    } else if (text.empty()) {
        throw UsageError("empty matrix source");
    } else {
        s.kind = Kind::file;
        s.path = text;
    }
    if (s.kind != Kind::file && s.grid < 2) {
        throw UsageError("grid side must be >= 2 in '" + text + "'");
    }
    return s;
}

std::string MatrixSource::label() const {
    switch (kind) {
    case Kind::poisson2d: return "poisson2d:" + std::to_string(grid);
    case Kind::poisson3d: return "poisson3d:" + std::to_string(grid);
    case Kind::file: return path;
    }
    return path;
}

CsrMatrix MatrixSource::load() const {
    switch (kind) {
    case Kind::poisson2d: return gen_poisson2d(grid);
    case Kind::poisson3d: return gen_poisson3d(grid);
    case Kind::file: return load_matrix_market(path);
    }
    throw std::logic_error("unreachable");
}

ExperimentSpec parse_args(int argc, const char* const* argv) {
    ExperimentSpec spec;
    CLI::App app{"Fault-injected CG experiment runner"};
    app.name("twincg_cli run");

    std::string matrix;
    std::string variant = "all";
    std::string bits;
    std::string precond = "none";
    std::string mode = "concurrent";
    app.add_option("--matrix", matrix, "Matrix Market file, poisson2d:K or poisson3d:K")->required();
    app.add_option("--variant", variant, "standard | online-abft | twincg | tmr | all");
    app.add_option("--lambda", spec.lambda, "mean bit flips per iteration per replica");
    app.add_option("--bits", bits, "eligible bit positions LO:HI (default 0:63)");
    app.add_option("--seed", spec.seed, "base RNG seed; rep j uses seed + j");
    app.add_option("--reps", spec.reps, "repetitions per variant");
    app.add_option("--d", spec.cfg.d, "detection interval");
    app.add_option("--ckpt", spec.cfg.checkpoint_interval, "checkpoint interval");
    app.add_option("--eps1", spec.cfg.eps1, "D1 threshold");
    app.add_option("--eps2", spec.cfg.eps2, "D2 threshold");
    app.add_option("--tol", spec.cfg.tol, "relative convergence tolerance");
    app.add_option("--max-iter", spec.cfg.max_iter, "abort bound");
    app.add_option("--precond", precond, "none | jacobi");
    app.add_option("--out", spec.out, "CSV output path (default stdout)");
    app.add_option("--mode", mode, "concurrent | simulated");

    parse_with(app, argc, argv, [&] {
        spec.matrix = MatrixSource::parse(matrix);
        spec.variants = parse_variants(variant);
        if (!bits.empty()) {
            spec.bits = parse_bits(bits);
        }
        if (precond == "jacobi") {
            spec.precond = Precond::jacobi;
        } else if (precond != "none") {
            throw UsageError("--precond must be none or jacobi");
        }
        if (mode == "simulated") {
            spec.mode = ExecMode::simulated;
        } else if (mode != "concurrent") {
            throw UsageError("--mode must be concurrent or simulated");
        }
        if (spec.reps < 1) {
            throw UsageError("--reps must be >= 1");
        }
        if (!(spec.lambda >= 0.0) || !std::isfinite(spec.lambda)) {
            throw UsageError("--lambda must be finite and >= 0");
        }
        try {
            spec.cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    });
    return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    return run_experiment(spec, spec.matrix.load());
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const CsrMatrix& a) {
    const DenseVector b = ones_rhs(a);
    ExperimentResult result;
    for (const Variant v : spec.variants) {
        for (std::size_t rep = 0; rep < spec.reps; ++rep) {
            RunOptions opt;
            opt.cfg = spec.cfg;
            opt.precond = spec.precond;
            opt.mode = spec.mode;
            opt.faults.model = FaultModel{spec.lambda, spec.bits, spec.seed + rep};

            RunRow row;
            row.variant = v;
            row.rep = rep;
            row.seed = spec.seed + rep;
            try {
                const RunReport r = run_variant(v, a, b, opt);
                row.iterations = r.iterations;
                row.fr = r.fr_count;
                row.rr = r.rr_count;
                row.aborted = r.aborted;
                row.final_rel_residual = r.final_rel_residual;
            } catch (const std::exception& e) {
                row.iterations = spec.cfg.max_iter;
                row.aborted = true;
                row.final_rel_residual = std::nan("");
                result.failures.push_back(std::string(to_string(v)) + " rep " +
                                          std::to_string(rep) + ": " + e.what());
            }
            result.rows.push_back(row);
        }
    }
    result.stats = aggregate(result.rows, spec.variants);
    return result;
}

std::string to_csv(const std::vector<RunRow>& rows) {
    std::ostringstream out;
    out << csv_header << '\n';
    for (const auto& r : rows) {
        out << to_string(r.variant) << ',' << r.rep << ',' << r.seed << ',' << r.iterations << ','
            << r.fr << ',' << r.rr << ',' << (r.aborted ? 1 : 0) << ','
            << format_double("%.17g", r.final_rel_residual) << '\n';
    }
    return out.str();
}

std::vector<AggregateStats> aggregate(const std::vector<RunRow>& rows,
                                      const std::vector<Variant>& order) {
    std::vector<AggregateStats> stats;
    for (const Variant v : order) {
        AggregateStats s;
        s.variant = v;
        double fr = 0, rr = 0, it = 0, ab = 0;
        for (const auto& r : rows) {
            if (r.variant != v) continue;
            ++s.runs;
            fr += static_cast<double>(r.fr);
            rr += static_cast<double>(r.rr);
            it += static_cast<double>(r.iterations);
            ab += r.aborted ? 1.0 : 0.0;
        }
        if (s.runs > 0) {
            const auto n = static_cast<double>(s.runs);
            s.mean_fr = fr / n;
            s.mean_rr = rr / n;
            s.mean_iterations = it / n;
            s.abort_fraction = ab / n;
        }
        stats.push_back(s);
    }
    return stats;
}

std::string format_table(const ExperimentSpec& spec, const std::vector<AggregateStats>& stats) {
    std::ostringstream out;
    out << "Problem " << spec.matrix.label() << "  lambda=" << format_double("%g", spec.lambda)
        << "  bits=" << spec.bits.lo << ':' << spec.bits.hi << "  reps=" << spec.reps
        << "  precond=" << to_string(spec.precond) << '\n';
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %14s %14s %14s %10s\n", "solver", "# RR", "# FR",
                  "# Iter", "% aborted");
    out << line;
    for (const auto& s : stats) {
        const char* name = "";
        switch (s.variant) {
        case Variant::standard: name = "StandardCG"; break;
        case Variant::online_abft: name = "Online-ABFT"; break;
        case Variant::twin_cg: name = "TwinCG"; break;
        case Variant::tmr: name = "TMR"; break;
        }
        const bool has_rr = s.variant != Variant::standard;
        const bool has_fr = s.variant == Variant::twin_cg || s.variant == Variant::tmr;
        std::snprintf(line, sizeof line, "%-14s %14s %14s %14s %9s%%\n", name,
                      has_rr ? format_double("%.12g", s.mean_rr).c_str() : "-",
                      has_fr ? format_double("%.12g", s.mean_fr).c_str() : "-",
                      format_double("%.12g", s.mean_iterations).c_str(),
                      format_double("%.12g", 100.0 * s.abort_fraction).c_str());
        out << line;
    }
    return out.str();
}

ProbeSpec parse_probe_args(int argc, const char* const* argv) {
    ProbeSpec spec;
    CLI::App app{"Compare closed-form window fault probabilities with Monte Carlo"};
    app.name("twincg_cli probe");
    app.add_option("--lambda", spec.lambda, "mean bit flips per iteration per replica");
    app.add_option("--d", spec.d, "detection interval");
    app.add_option("--samples", spec.samples, "simulated windows");
    app.add_option("--seed", spec.seed, "RNG seed");
    parse_with(app, argc, argv, [&] {
        if (!(spec.lambda >= 0.0) || !(spec.lambda < 1.0)) {
            throw UsageError("--lambda must lie in [0, 1)");
        }
        if (spec.d < 1 || spec.samples < 1) {
            throw UsageError("--d and --samples must be >= 1");
        }
    });
    return spec;
}

ProbeReport probe_probabilities(const ProbeSpec& spec) {
    ProbeReport rep;
    rep.spec = spec;
    rep.analytic = {p_clean_window(spec.lambda, spec.d, 2), p_exactly_one_faulty(spec.lambda, spec.d),
                    p_both_faulty(spec.lambda, spec.d)};

    FaultRng rng(spec.seed);
    std::array<std::size_t, 3> counts{};
    for (std::size_t s = 0; s < spec.samples; ++s) {
        std::size_t faulty = 0;
        for (int replica = 0; replica < 2; ++replica) {
            std::size_t flips = 0;
            for (std::size_t i = 0; i < spec.d; ++i) {
                flips += sample_fault_count(spec.lambda, rng);
            }
            faulty += flips > 0 ? 1 : 0;
        }
        ++counts[faulty];
    }
    const auto n = static_cast<double>(spec.samples);
    for (std::size_t c = 0; c < 3; ++c) {
        rep.empirical[c] = static_cast<double>(counts[c]) / n;
        const double p = rep.analytic[c];
        rep.std_error[c] = std::sqrt(p * (1.0 - p) / n);
    }
    return rep;
}

std::string format_probe(const ProbeReport& r) {
    std::ostringstream out;
    out << "lambda=" << format_double("%g", r.spec.lambda) << "  d=" << r.spec.d
        << "  samples=" << r.spec.samples << "  seed=" << r.spec.seed << '\n';
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %12s %12s %12s %8s\n", "window", "analytic",
                  "monte-carlo", "std-error", "z");
    out << line;
    const char* names[3] = {"clean", "exactly-one", "both"};
    for (std::size_t c = 0; c < 3; ++c) {
        const double z =
            r.std_error[c] > 0 ? (r.empirical[c] - r.analytic[c]) / r.std_error[c] : 0.0;
        std::snprintf(line, sizeof line, "%-14s %12.6f %12.6f %12.2e %8.2f\n", names[c],
                      r.analytic[c], r.empirical[c], r.std_error[c], z);
        out << line;
    }
    return out.str();
}

} // namespace twincg
