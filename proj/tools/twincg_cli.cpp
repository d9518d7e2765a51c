// Command-line front end. Talks to the library only through twincg.h.
//
//   twincg_cli [run] --matrix SRC [flags]   fault-injection experiment, CSV out
//   twincg_cli probe [--lambda L --d D --samples N --seed S]

#include "twincg/twincg.h"

#include <cstdio>
#include <cstring>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

int report_status(tcg_status st) {
    if (st == TCG_HELP_REQUESTED) {
        std::fputs(tcg_last_error(), stdout);
        return exit_ok;
    }
    std::fprintf(stderr, "twincg_cli: %s\n", tcg_last_error());
    return st == TCG_ERR_USAGE ? exit_usage : exit_runtime;
}

int run_probe(int argc, const char* const* argv) {
    const char* text = nullptr;
    const tcg_status st = tcg_probe_command(argc, argv, &text);
    if (st != TCG_OK) {
        return report_status(st);
    }
    std::fputs(text, stdout);
    return exit_ok;
}

int run_experiment(int argc, const char* const* argv) {
    tcg_experiment* exp = nullptr;
    tcg_status st = tcg_experiment_parse(argc, argv, &exp);
    if (st != TCG_OK) {
        return report_status(st);
    }
    tcg_results* res = nullptr;
    st = tcg_experiment_run(exp, &res);
    if (st != TCG_OK) {
        tcg_experiment_free(exp);
        return report_status(st);
    }

    int code = exit_ok;
    const char* out_path = tcg_experiment_output_path(exp);
    if (out_path != nullptr) {
        st = tcg_results_write_csv(res, out_path);
        if (st != TCG_OK) {
            code = report_status(st);
        }
        std::fputs(tcg_results_table(res), stdout);
    } else {
        // CSV owns stdout; the table goes to stderr
        std::fputs(tcg_results_csv(res), stdout);
        std::fputs(tcg_results_table(res), stderr);
    }
    for (size_t i = 0; i < tcg_results_failure_count(res); ++i) {
        std::fprintf(stderr, "run failed: %s\n", tcg_results_failure(res, i));
    }

    tcg_results_free(res);
    tcg_experiment_free(exp);
    return code;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<const char*> args(argv, argv + argc);
    if (argc > 1 && std::strcmp(argv[1], "probe") == 0) {
        args.erase(args.begin() + 1);
        return run_probe(static_cast<int>(args.size()), args.data());
    }
    if (argc > 1 && std::strcmp(argv[1], "run") == 0) {
        args.erase(args.begin() + 1);
    }
    return run_experiment(static_cast<int>(args.size()), args.data());
}
