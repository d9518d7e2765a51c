#include "twincg/twincg.h"

#include "twincg/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <new>
#include <string>

struct tcg_matrix {
    twincg::CsrMatrix a;
};

struct tcg_experiment {
    twincg::ExperimentSpec spec;
};

struct tcg_results {
    twincg::ExperimentResult result;
    std::string csv;
    std::string table;
};

namespace {

thread_local std::string last_error;
thread_local std::string probe_text;

tcg_status fail(tcg_status code, const std::string& message) {
    last_error = message;
    return code;
}

// Maps the C++ exception hierarchy onto status codes.
template <class Fn>
tcg_status guarded(Fn&& fn) {
    try {
        fn();
        return TCG_OK;
    } catch (const twincg::UsageError& e) {
        return fail(e.help() ? TCG_HELP_REQUESTED : TCG_ERR_USAGE, e.what());
    } catch (const twincg::ParseError& e) {
        return fail(TCG_ERR_PARSE, e.what());
    } catch (const twincg::DimensionError& e) {
        return fail(TCG_ERR_DIMENSION, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(TCG_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::out_of_range& e) {
        return fail(TCG_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(TCG_ERR_RUNTIME, "out of memory");
    } catch (const std::exception& e) {
        const std::string what = e.what();
        if (what.rfind("cannot open", 0) == 0 || what.rfind("cannot write", 0) == 0 ||
            what.rfind("write failed", 0) == 0) {
            return fail(TCG_ERR_IO, what);
        }
        return fail(TCG_ERR_RUNTIME, what);
    } catch (...) {
        return fail(TCG_ERR_RUNTIME, "unknown error");
    }
}

twincg::Variant to_variant(tcg_variant v) {
    switch (v) {
    case TCG_VARIANT_STANDARD: return twincg::Variant::standard;
    case TCG_VARIANT_ONLINE_ABFT: return twincg::Variant::online_abft;
    case TCG_VARIANT_TWINCG: return twincg::Variant::twin_cg;
    case TCG_VARIANT_TMR: return twincg::Variant::tmr;
    }
    throw std::invalid_argument("unknown variant");
}

tcg_variant from_variant(twincg::Variant v) {
    switch (v) {
    case twincg::Variant::standard: return TCG_VARIANT_STANDARD;
    case twincg::Variant::online_abft: return TCG_VARIANT_ONLINE_ABFT;
    case twincg::Variant::twin_cg: return TCG_VARIANT_TWINCG;
    case twincg::Variant::tmr: return TCG_VARIANT_TMR;
    }
    return TCG_VARIANT_STANDARD;
}

void require(const void* p, const char* what) {
    if (p == nullptr) {
        throw std::invalid_argument(std::string(what) + " must not be NULL");
    }
}

} // namespace

extern "C" {

const char* tcg_version(void) { return "1.0.0"; }

const char* tcg_last_error(void) { return last_error.c_str(); }

const char* tcg_variant_name(tcg_variant v) {
    switch (v) {
    case TCG_VARIANT_STANDARD: return "standard";
    case TCG_VARIANT_ONLINE_ABFT: return "online-abft";
    case TCG_VARIANT_TWINCG: return "twincg";
    case TCG_VARIANT_TMR: return "tmr";
    }
    return "unknown";
}

tcg_status tcg_matrix_load(const char* path, tcg_matrix** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new tcg_matrix{twincg::load_matrix_market(path)};
    });
}

tcg_status tcg_matrix_from_source(const char* source, tcg_matrix** out) {
    return guarded([&] {
        require(source, "source");
        require(out, "out");
        *out = new tcg_matrix{twincg::MatrixSource::parse(source).load()};
    });
}

tcg_status tcg_matrix_save(const tcg_matrix* m, const char* path) {
    return guarded([&] {
        require(m, "matrix");
        require(path, "path");
        twincg::write_matrix_market(m->a, std::filesystem::path(path));
    });
}

void tcg_matrix_free(tcg_matrix* m) { delete m; }

size_t tcg_matrix_dim(const tcg_matrix* m) { return m ? m->a.n() : 0; }

size_t tcg_matrix_nnz(const tcg_matrix* m) { return m ? m->a.nnz() : 0; }

double tcg_matrix_norm(const tcg_matrix* m) { return m ? twincg::matrix_norm(m->a) : 0.0; }

tcg_status tcg_spmv(const tcg_matrix* m, const double* x, size_t n, double* y) {
    return guarded([&] {
        require(m, "matrix");
        require(x, "x");
        require(y, "y");
        twincg::spmv(m->a, std::span<const double>(x, n), std::span<double>(y, n));
    });
}

void tcg_config_default(tcg_config* cfg) {
    if (cfg == nullptr) return;
    const twincg::ResilienceConfig d;
    *cfg = tcg_config{d.d, d.checkpoint_interval, d.eps1, d.eps2, d.tol, d.max_iter};
}

tcg_status tcg_run(const tcg_matrix* m, const double* b, size_t n, tcg_variant variant,
                   tcg_precond precond, const tcg_config* cfg, const tcg_fault_model* faults,
                   tcg_mode mode, tcg_run_report* report, double* x_out) {
    return guarded([&] {
        require(m, "matrix");
        require(report, "report");
        if (n != m->a.n()) {
            throw twincg::DimensionError("n does not match matrix dimension");
        }
        twincg::RunOptions opt;
        if (cfg != nullptr) {
            opt.cfg = twincg::ResilienceConfig{cfg->d,   cfg->checkpoint_interval, cfg->eps1,
                                               cfg->eps2, cfg->tol, cfg->max_iter};
        }
        if (faults != nullptr) {
            opt.faults.model = twincg::FaultModel{faults->lambda, {faults->bit_lo, faults->bit_hi},
                                                  faults->seed};
        }
        opt.precond = precond == TCG_PRECOND_JACOBI ? twincg::Precond::jacobi : twincg::Precond::none;
        opt.mode = mode == TCG_MODE_SIMULATED ? twincg::ExecMode::simulated
                                              : twincg::ExecMode::concurrent;
        const twincg::DenseVector rhs =
            b != nullptr ? twincg::DenseVector(b, b + n) : twincg::ones_rhs(m->a);
        const twincg::RunReport r = twincg::run_variant(to_variant(variant), m->a, rhs, opt);
        *report = tcg_run_report{from_variant(r.variant),
                                 r.iterations,
                                 r.fr_count,
                                 r.rr_count,
                                 r.converged ? 1 : 0,
                                 r.aborted ? 1 : 0,
                                 r.final_rel_residual,
                                 r.final_abs_residual,
                                 r.wall_events.size(),
                                 r.d1_failures,
                                 r.d2_evaluations,
                                 r.injected_faults,
                                 r.wait_seconds};
        if (x_out != nullptr) {
            std::copy(r.x.begin(), r.x.end(), x_out);
        }
    });
}

double tcg_p_fault_iter(double lambda, size_t replicas) {
    return twincg::p_fault_iter(lambda, replicas);
}

double tcg_p_clean_window(double lambda, size_t d, size_t replicas) {
    return twincg::p_clean_window(lambda, d, replicas);
}

double tcg_p_exactly_one_faulty(double lambda, size_t d) {
    return twincg::p_exactly_one_faulty(lambda, d);
}

double tcg_p_both_faulty(double lambda, size_t d) { return twincg::p_both_faulty(lambda, d); }

tcg_status tcg_probe(double lambda, size_t d, size_t samples, uint64_t seed,
                     tcg_probe_report* out) {
    return guarded([&] {
        require(out, "out");
        if (!(lambda >= 0.0 && lambda < 1.0) || d < 1 || samples < 1) {
            throw std::invalid_argument("probe needs 0 <= lambda < 1, d >= 1, samples >= 1");
        }
        const auto r = twincg::probe_probabilities({lambda, d, samples, seed});
        *out = tcg_probe_report{lambda, d, samples, {}, {}, {}};
        for (int c = 0; c < 3; ++c) {
            out->analytic[c] = r.analytic[c];
            out->empirical[c] = r.empirical[c];
            out->std_error[c] = r.std_error[c];
        }
    });
}

tcg_status tcg_probe_command(int argc, const char* const* argv, const char** text_out) {
    return guarded([&] {
        require(text_out, "text_out");
        const auto spec = twincg::parse_probe_args(argc, argv);
        probe_text = twincg::format_probe(twincg::probe_probabilities(spec));
        *text_out = probe_text.c_str();
    });
}

tcg_status tcg_experiment_parse(int argc, const char* const* argv, tcg_experiment** out) {
    return guarded([&] {
        require(out, "out");
        *out = new tcg_experiment{twincg::parse_args(argc, argv)};
    });
}

void tcg_experiment_free(tcg_experiment* e) { delete e; }

const char* tcg_experiment_output_path(const tcg_experiment* e) {
    return (e == nullptr || e->spec.out.empty()) ? nullptr : e->spec.out.c_str();
}

tcg_status tcg_experiment_run(const tcg_experiment* e, tcg_results** out) {
    return guarded([&] {
        require(e, "experiment");
        require(out, "out");
        auto res = std::make_unique<tcg_results>();
        res->result = twincg::run_experiment(e->spec);
        res->csv = twincg::to_csv(res->result.rows);
        res->table = twincg::format_table(e->spec, res->result.stats);
        *out = res.release();
    });
}

void tcg_results_free(tcg_results* r) { delete r; }

const char* tcg_results_csv(const tcg_results* r) { return r ? r->csv.c_str() : ""; }

const char* tcg_results_table(const tcg_results* r) { return r ? r->table.c_str() : ""; }

size_t tcg_results_variant_count(const tcg_results* r) {
    return r ? r->result.stats.size() : 0;
}

tcg_status tcg_results_aggregate(const tcg_results* r, size_t index, tcg_aggregate* out) {
    return guarded([&] {
        require(r, "results");
        require(out, "out");
        const auto& s = r->result.stats.at(index);
        *out = tcg_aggregate{from_variant(s.variant), s.runs,          s.mean_fr,
                             s.mean_rr,               s.mean_iterations, s.abort_fraction};
    });
}

size_t tcg_results_failure_count(const tcg_results* r) {
    return r ? r->result.failures.size() : 0;
}

const char* tcg_results_failure(const tcg_results* r, size_t index) {
    if (r == nullptr || index >= r->result.failures.size()) {
        return nullptr;
    }
    return r->result.failures[index].c_str();
}

tcg_status tcg_results_write_csv(const tcg_results* r, const char* path) {
    return guarded([&] {
        require(r, "results");
        require(path, "path");
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error(std::string("cannot write '") + path + "'");
        }
        out << r->csv;
        if (!out) {
            throw std::runtime_error(std::string("write failed for '") + path + "'");
        }
    });
}

} // extern "C"
