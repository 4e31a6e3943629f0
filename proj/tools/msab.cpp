#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "msab/runner.hpp"
#include "msab/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertionFailed = 1;
constexpr int kExitUsage = 2;

int worker_threads() {
    if (const char* env = std::getenv("MSAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int cmd_simulate(const std::string& config_path, const std::string& birth_mode_name, int trials,
                 std::uint64_t seed, const std::string& out_dir, bool dump_truth) {
    const auto kv = msab::KeyValueConfig::parse_file(config_path);
    const msab::RunConfig cfg = msab::run_config_from(kv);
    const msab::BirthMode mode = msab::birth_mode_from_string(birth_mode_name);

    const auto results = msab::run_trials(cfg, mode, trials, seed, worker_threads());

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_file(dir / "trial_metrics.csv", msab::trials_to_csv(results));
    write_file(dir / "summary.csv", msab::summary_to_csv(results));

    msab::KeyValueConfig manifest = msab::resolved_config(cfg);
    manifest.set("run.birth_mode", birth_mode_name);
    manifest.set("run.trials", std::to_string(trials));
    manifest.set("run.seed", std::to_string(seed));
    manifest.set("run.config_file", config_path);
    write_file(dir / "manifest.txt", manifest.serialize());

    if (dump_truth) {
        for (int t = 0; t < trials; ++t) {
            msab::ScenarioConfig scenario = cfg.scenario;
            scenario.rng_seed = seed + static_cast<std::uint64_t>(t);
            write_file(dir / ("truth_trial" + std::to_string(t) + ".csv"),
                       msab::truth_to_csv(msab::generate_truth(scenario)));
        }
    }

    double mean_ospa2 = 0.0, mean_births = 0.0, mean_ace = 0.0;
    for (const auto& r : results) {
        mean_ospa2 += r.mean_ospa2() / trials;
        mean_births += r.mean_birth_components() / trials;
        mean_ace += r.mean_abs_card_error_lagged() / trials;
    }
    std::printf("simulate: %d trial(s), birth=%s\n", trials, birth_mode_name.c_str());
    std::printf("  mean OSPA(2)            %.3f\n", mean_ospa2);
    std::printf("  mean |card error| (lag) %.3f\n", mean_ace);
    std::printf("  mean birth components   %.3f\n", mean_births);
    std::printf("  outputs in %s\n", out_dir.c_str());
    return kExitOk;
}

int cmd_oracle(const std::string& which, std::uint64_t seed, int instances, int gibbs_iters,
               int particles) {
    if (which == "tv") {
        const int n = instances > 0 ? instances : 20;
        const auto check = msab::validation::gibbs_tv_check(seed, n, gibbs_iters);
        for (std::size_t i = 0; i < check.tv_per_instance.size(); ++i)
            std::printf("  instance %2zu: TV %.4f\n", i, check.tv_per_instance[i]);
        std::printf("oracle tv: max TV %.4f over %d instances, threshold %.2f -> %s\n",
                    check.max_tv, n, check.threshold, check.pass ? "PASS" : "FAIL");
        return check.pass ? kExitOk : kExitAssertionFailed;
    }
    if (which == "bound") {
        const int n = instances > 0 ? instances : 100;
        const auto check = msab::validation::theorem1_check(seed, n);
        std::printf(
            "oracle bound: %d instances, %d violations (max distance %.3g, max bound %.3g) -> "
            "%s\n",
            check.instances, check.violations, check.max_distance, check.max_bound,
            check.pass() ? "PASS" : "FAIL");
        return check.pass() ? kExitOk : kExitAssertionFailed;
    }
    if (which == "backend-xcheck") {
        const int n = instances > 0 ? instances : 20;
        const auto check = msab::validation::backend_xcheck(seed, n, particles);
        std::printf(
            "oracle backend-xcheck: mean TV %.4f, max TV %.4f over %d instances, threshold %.2f "
            "-> %s\n",
            check.mean_tv, check.max_tv, n, check.threshold, check.pass ? "PASS" : "FAIL");
        return check.pass ? kExitOk : kExitAssertionFailed;
    }
    std::fprintf(stderr, "unknown oracle case '%s' (expected tv, bound, backend-xcheck)\n",
                 which.c_str());
    return kExitUsage;
}

int cmd_bench(std::vector<int> sensors, int measurements, int gibbs_iters, int particles,
              int reps, const std::string& backend_name, std::uint64_t seed,
              const std::string& out_path) {
    if (sensors.empty()) sensors = {2, 3, 4, 6, 8};
    const auto kind = backend_name == "gaussian" ? msab::validation::BenchBackend::Gaussian
                                                 : msab::validation::BenchBackend::Mc;
    const auto result = msab::validation::bench_scaling(kind, sensors, measurements, gibbs_iters,
                                                        particles, reps, seed);
    std::string csv = "sensors,seconds\n";
    for (const auto& p : result.points) {
        std::printf("  V = %d: %.4f s\n", p.sensors, p.seconds);
        csv += std::to_string(p.sensors) + "," + msab::format_double(p.seconds) + "\n";
    }
    std::printf("bench: backend=%s m=%d T=%d Np=%d, log-log slope %.3f\n", backend_name.c_str(),
                measurements, gibbs_iters, particles, result.slope);
    if (!out_path.empty()) write_file(out_path, csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-sensor adaptive birth sampling for labeled RFS trackers"};
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Run tracking scenarios and emit CSV metrics");
    std::string config_path, out_dir = "out";
    std::string birth_mode = "adaptive-gaussian";
    int trials = 1;
    std::uint64_t seed = 0;
    bool dump_truth = false;
    simulate->add_option("--config", config_path, "Scenario config file")->required();
    simulate->add_option("--birth", birth_mode, "Birth procedure")
        ->check(CLI::IsMember({"adaptive-gaussian", "adaptive-mc", "uniform"}));
    simulate->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed, "Base RNG seed");
    simulate->add_option("--out", out_dir, "Output directory");
    simulate->add_flag("--dump-truth", dump_truth, "Also write per-trial truth CSVs");

    auto* oracle = app.add_subcommand("oracle", "Run exhaustive-oracle verification suites");
    std::string oracle_case;
    std::uint64_t oracle_seed = 100;
    int instances = 0;
    int oracle_gibbs_iters = 4000;
    int oracle_particles = 10000;
    oracle->add_option("--case", oracle_case, "Which check: tv, bound, backend-xcheck")
        ->required();
    oracle->add_option("--seed", oracle_seed, "Instance seed");
    oracle->add_option("--instances", instances, "Instance count (0 = case default)");
    oracle->add_option("--gibbs-iters", oracle_gibbs_iters, "Gibbs iterations for the tv case");
    oracle->add_option("--particles", oracle_particles, "Particles for backend-xcheck");

    auto* bench = app.add_subcommand("bench", "Time the Gibbs sampler across sensor counts");
    std::vector<int> sensors;
    int measurements = 10, bench_iters = 30, bench_particles = 400, reps = 3;
    std::string backend_name = "mc", bench_out;
    std::uint64_t bench_seed = 99;
    bench->add_option("--sensors", sensors, "Sensor counts (comma separated)")->delimiter(',');
    bench->add_option("--measurements", measurements, "Measurements per sensor");
    bench->add_option("--gibbs-iters", bench_iters, "Gibbs iterations per run");
    bench->add_option("--particles", bench_particles, "MC particles per estimate");
    bench->add_option("--reps", reps, "Timing repetitions (median)");
    bench->add_option("--backend", backend_name, "Conditional backend")
        ->check(CLI::IsMember({"mc", "gaussian"}));
    bench->add_option("--seed", bench_seed, "Instance seed");
    bench->add_option("--out", bench_out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed())
            return cmd_simulate(config_path, birth_mode, trials, seed, out_dir, dump_truth);
        if (oracle->parsed())
            return cmd_oracle(oracle_case, oracle_seed, instances, oracle_gibbs_iters,
                              oracle_particles);
        if (bench->parsed())
            return cmd_bench(sensors, measurements, bench_iters, bench_particles, reps,
                             backend_name, bench_seed, bench_out);
    } catch (const msab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAssertionFailed;
    }
    return kExitUsage;
}
