// flicsim command-line driver.
//
//   measure   one-off Pst measurement of a synthesized point
//   sweep     run a plan file: results CSV, SVG charts, summary report
//   validate  built-in conformance suite
//
// Exit codes: 0 success, 1 runtime or check failure, 2 usage error.
#include <atomic>
#include <csignal>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "flicsim/flicsim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::atomic<bool> g_cancel{false};

void handle_interrupt(int) { g_cancel.store(true); }

struct MeasureArgs {
    double mc = 1.0;
    double fc = 50.0;
    double urms = 230.0;
    std::string shape = "sin";
    double fm = 8.8;
    double depth = 0.0;
    double fs = 80000.0;
    double window = 600.0;
    double settle = 30.0;
    bool paper_protocol = false;
    std::string dump_pinst;
    std::string out_dir = ".";
};

int cmd_measure(const MeasureArgs& args) {
    flicsim::CarrierSpec carrier;
    carrier.fc_hz = args.fc;
    carrier.urms_v = args.urms;
    carrier.clip_level = args.mc;
    carrier.validate();

    flicsim::ModulatingSpec mod;
    mod.shape = flicsim::parse_shape(args.shape);
    mod.fm_hz = args.fm;
    mod.depth_pct = args.depth;
    mod.validate();

    flicsim::SweepPlan plan;
    plan.carriers = {carrier};
    plan.shapes = {mod.shape};
    plan.fm_grid_hz = {mod.fm_hz};
    plan.depth_grid_pct = {mod.depth_pct};
    plan.front_end.synthesis_rate_hz = args.fs;
    plan.durations.settle_s = args.paper_protocol ? 600.0 : args.settle;
    plan.durations.measure_s = args.paper_protocol ? 600.0 : args.window;
    plan.meter.window_s = plan.durations.measure_s;
    plan.validate();

    const flicsim::SweepRecord rec = flicsim::run_point(carrier, mod, plan);
    if (rec.failed) {
        std::cerr << "measurement failed: " << rec.error << "\n";
        return kExitFailure;
    }

    std::printf("m_c        : %g\n", carrier.clip_level);
    std::printf("shape      : %s\n", std::string(flicsim::short_name(mod.shape)).c_str());
    std::printf("f_m        : %g Hz\n", mod.fm_hz);
    std::printf("depth      : %g %%\n", mod.depth_pct);
    std::printf("chain      : %g Hz synthesis, FIR order %d cutoff %g Hz, /%d -> %g Hz\n",
                plan.front_end.synthesis_rate_hz, plan.front_end.fir_order,
                plan.front_end.fir_cutoff_hz, plan.front_end.decimation,
                plan.front_end.meter_rate_hz());
    std::printf("window     : %g s after %g s settle\n", plan.meter.window_s,
                plan.durations.settle_s);
    std::printf("Pst        : %.6f%s\n", rec.pst,
                rec.below_floor ? "  (below instrument floor 0.05)" : "");
    if (rec.wall_time_s > 0.0) std::printf("wall time  : %.2f s\n", rec.wall_time_s);

    if (!args.dump_pinst.empty()) {
        std::filesystem::path dump_path(args.dump_pinst);
        if (dump_path.is_relative()) {
            std::filesystem::create_directories(args.out_dir);
            dump_path = std::filesystem::path(args.out_dir) / dump_path;
        }
        // re-run the chain to capture the trace; run_point does not
        // retain intermediates
        const double duration = plan.durations.settle_s + plan.durations.measure_s + 0.5;
        const flicsim::SignalBuffer carrier_buf =
            flicsim::synthesize_carrier(carrier, args.fs, duration);
        const flicsim::SignalBuffer mod_buf =
            flicsim::synthesize_modulating(mod, args.fs, duration);
        const flicsim::SignalBuffer input =
            flicsim::modulate(carrier_buf, mod_buf, mod.depth_pct);
        const flicsim::SignalBuffer at_meter =
            flicsim::apply_front_end(input, plan.front_end);
        flicsim::FlickermeterConfig cfg = plan.meter;
        cfg.input_rate_hz = plan.front_end.meter_rate_hz();
        cfg.settle_s = plan.durations.settle_s;
        flicsim::write_pinst_csv(dump_path.string(), flicsim::p_inst_trace(at_meter, cfg));
        std::printf("P_inst     : written to %s\n", dump_path.string().c_str());
    }
    return kExitOk;
}

struct SweepArgs {
    std::string plan_path;
    std::string out_dir = ".";
    int workers = 1;
    bool paper_protocol = false;
    bool fresh = false;
};

int cmd_sweep(const SweepArgs& args) {
    flicsim::SweepPlan plan = flicsim::load_plan(args.plan_path);
    if (args.paper_protocol) {
        plan.durations.settle_s = 600.0;
        plan.durations.measure_s = 600.0;
        plan.meter.window_s = 600.0;
        plan.validate();
    }

    std::filesystem::create_directories(args.out_dir);
    const std::string checkpoint_path = args.out_dir + "/" + plan.run_id + ".checkpoint";
    if (args.fresh) std::filesystem::remove(checkpoint_path);

    flicsim::RunOptions opts;
    opts.workers = args.workers;
    opts.checkpoint_path = checkpoint_path;
    opts.cancel = &g_cancel;
    opts.on_point = [](std::size_t done, std::size_t total, const flicsim::SweepRecord& r) {
        std::fprintf(stderr, "[%zu/%zu] m_c=%g %s f_m=%g Hz depth=%g%% -> Pst %.4f%s%s\n", done,
                     total, r.mc, std::string(flicsim::short_name(r.shape)).c_str(), r.fm_hz,
                     r.depth_pct, r.pst, r.below_floor ? " (below floor)" : "",
                     r.failed ? " FAILED" : "");
    };

    std::signal(SIGINT, handle_interrupt);
    std::signal(SIGTERM, handle_interrupt);
    const flicsim::SweepResult result = flicsim::run_sweep(plan, opts);

    if (!result.complete) {
        std::cerr << "sweep interrupted; finished points are preserved in " << checkpoint_path
                  << " and the same command resumes the run\n";
        return kExitFailure;
    }

    const std::string csv_path = args.out_dir + "/" + plan.run_id + "_results.csv";
    flicsim::write_results_csv(csv_path, result);
    flicsim::write_meta_json(args.out_dir + "/" + plan.run_id + "_meta.json", result);

    const flicsim::SummaryReport report = flicsim::summarize(result);
    const std::string summary_path = args.out_dir + "/" + plan.run_id + "_summary.txt";
    {
        std::ofstream out(summary_path);
        out << report.render();
    }
    const std::vector<std::string> plots = flicsim::write_sweep_plots(result, args.out_dir);

    std::printf("results    : %s\n", csv_path.c_str());
    std::printf("summary    : %s\n", summary_path.c_str());
    for (const std::string& p : plots) std::printf("chart      : %s\n", p.c_str());
    if (!result.errors.empty()) {
        std::fprintf(stderr, "%zu point(s) failed:\n", result.errors.size());
        for (const std::string& e : result.errors) std::fprintf(stderr, "  %s\n", e.c_str());
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_validate(double perturb_k) {
    flicsim::WeightingConstants wc;
    wc.k *= perturb_k;
    const flicsim::ConformanceReport report = flicsim::run_conformance_suite(wc);
    std::cout << report.render();
    return report.all_passed() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flicker severity simulation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", flicsim::kVersion);

    MeasureArgs margs;
    CLI::App* measure = app.add_subcommand("measure", "measure Pst for one synthesized point");
    measure->add_option("--mc", margs.mc, "carrier clipping level m_c in (0, 1]");
    measure->add_option("--fc", margs.fc, "carrier frequency [Hz]")->capture_default_str();
    measure->add_option("--urms", margs.urms, "carrier rms voltage [V]")->capture_default_str();
    measure->add_option("--shape", margs.shape, "modulating shape: sin|tri|trap|rect")
        ->capture_default_str();
    measure->add_option("--fm", margs.fm, "modulating frequency [Hz]");
    measure->add_option("--depth", margs.depth, "modulation depth dU/U [%]");
    measure->add_option("--fs", margs.fs, "synthesis sample rate [Hz]")->capture_default_str();
    measure->add_option("--window", margs.window, "Pst window [s]")->capture_default_str();
    measure->add_option("--settle", margs.settle, "discarded settling prefix [s]")
        ->capture_default_str();
    measure->add_flag("--paper-protocol", margs.paper_protocol,
                      "use the 600 s + 600 s long-form protocol");
    measure->add_option("--dump-pinst", margs.dump_pinst,
                        "write the instantaneous flicker trace to this CSV");
    measure->add_option("--out", margs.out_dir, "output directory")->capture_default_str();

    SweepArgs sargs;
    CLI::App* sweep = app.add_subcommand("sweep", "run a sweep plan file");
    sweep->add_option("plan", sargs.plan_path, "plan file (JSON)")->required();
    sweep->add_option("--out", sargs.out_dir, "output directory")->capture_default_str();
    sweep->add_option("--workers", sargs.workers, "worker thread count")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sweep->add_flag("--paper-protocol", sargs.paper_protocol,
                    "override plan durations with the 600 s + 600 s protocol");
    sweep->add_flag("--fresh", sargs.fresh, "discard any existing checkpoint before starting");

    double perturb_k = 1.0;
    CLI::App* validate = app.add_subcommand("validate", "run the built-in conformance suite");
    validate
        ->add_option("--perturb-weighting-k", perturb_k,
                     "multiply the weighting gain constant (fault-injection testing)")
        ->group("");  // hidden from --help

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (measure->parsed()) return cmd_measure(margs);
        if (sweep->parsed()) return cmd_sweep(sargs);
        if (validate->parsed()) return cmd_validate(perturb_k);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
