#ifndef TWINCG_EXPERIMENT_HPP
#define TWINCG_EXPERIMENT_HPP

#include "twincg/drivers.hpp"

#include <array>
#include <string>

namespace twincg {

/// Bad command line. `help()` marks an explicit --help request, whose text is
/// in what().
class UsageError : public std::runtime_error {
public:
    UsageError(const std::string& message, bool help = false)
        : std::runtime_error(message), help_(help) {}
    bool help() const noexcept { return help_; }

private:
    bool help_;
};

/// A Matrix Market path, or "poisson2d:K" / "poisson3d:K".
struct MatrixSource {
    enum class Kind { file, poisson2d, poisson3d };
    Kind kind = Kind::poisson2d;
    std::string path;
    std::size_t grid = 0;

    static MatrixSource parse(const std::string& text);
    std::string label() const;
    CsrMatrix load() const;
};

struct ExperimentSpec {
    MatrixSource matrix;
    std::vector<Variant> variants{Variant::standard, Variant::online_abft, Variant::twin_cg,
                                  Variant::tmr};
    Precond precond = Precond::none;
    double lambda = 0.0;
    BitRange bits{};
    std::uint64_t seed = 0;
    std::size_t reps = 60;
    ResilienceConfig cfg{};
    ExecMode mode = ExecMode::concurrent;
    std::string out;  // CSV destination, empty = stdout
};

/// Parses the run flags (argv[0] is the program name). Throws UsageError.
ExperimentSpec parse_args(int argc, const char* const* argv);

struct RunRow {
    Variant variant = Variant::standard;
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    std::size_t fr = 0;
    std::size_t rr = 0;
    bool aborted = false;
    double final_rel_residual = 0.0;
};

struct AggregateStats {
    Variant variant = Variant::standard;
    std::size_t runs = 0;
    double mean_fr = 0.0;
    double mean_rr = 0.0;
    double mean_iterations = 0.0;
    double abort_fraction = 0.0;
};

struct ExperimentResult {
    std::vector<RunRow> rows;
    std::vector<AggregateStats> stats;
    std::vector<std::string> failures;  // runs that raised instead of finishing
};

/// reps runs per variant, seed + rep for rep j of every variant.
ExperimentResult run_experiment(const ExperimentSpec& spec);
/// Same, on an already loaded matrix.
ExperimentResult run_experiment(const ExperimentSpec& spec, const CsrMatrix& a);

inline constexpr const char* csv_header =
    "variant,rep,seed,iterations,fr,rr,aborted,final_rel_residual";

std::string to_csv(const std::vector<RunRow>& rows);
/// Means over rows, grouped by variant in the order given.
std::vector<AggregateStats> aggregate(const std::vector<RunRow>& rows,
                                      const std::vector<Variant>& order);
/// Console table in the # RR / # FR / # Iter / % aborted layout.
std::string format_table(const ExperimentSpec& spec, const std::vector<AggregateStats>& stats);

struct ProbeSpec {
    double lambda = 0.01;
    std::size_t d = 5;
    std::size_t samples = 1000000;
    std::uint64_t seed = 0;
};

ProbeSpec parse_probe_args(int argc, const char* const* argv);

/// Window classes for two replicas: clean, exactly one faulty, both faulty.
struct ProbeReport {
    ProbeSpec spec;
    std::array<double, 3> analytic{};
    std::array<double, 3> empirical{};
    std::array<double, 3> std_error{};  // of the empirical frequency, from the analytic p
};

ProbeReport probe_probabilities(const ProbeSpec& spec);
std::string format_probe(const ProbeReport& report);

} // namespace twincg

#endif // TWINCG_EXPERIMENT_HPP
