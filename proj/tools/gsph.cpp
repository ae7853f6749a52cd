// Command-line front end: run, validate and inspect simulation configurations.

#include "gsph/config.hpp"
#include "gsph/io.hpp"
#include "gsph/timeloop.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <filesystem>
#include <iostream>

namespace {

enum ExitCode { ok = 0, validation = 1, fatal = 2, io_failure = 3 };

struct Options {
    std::string config_path;
    std::string output_dir;
    int threads = 0;
    long seed = 0;
    long max_steps = -1;
};

std::string base_dir_of(const std::string& path)
{
    const auto parent = std::filesystem::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

int cmd_validate(const Options& opt)
{
    const auto cfg = gsph::config::load_config(opt.config_path);
    const auto sim = gsph::timeloop::setup(cfg, base_dir_of(opt.config_path));
    std::cout << "valid: " << opt.config_path << " (" << sim.particles.size() << " particles, " << sim.pairs.size()
              << " pairs)\n";
    return ok;
}

int cmd_info(const Options& opt)
{
    const auto cfg = gsph::config::load_config(opt.config_path);
    const auto sim = gsph::timeloop::setup(cfg, base_dir_of(opt.config_path));
    std::cout << "particles  " << sim.particles.size() << '\n';
    std::cout << "pairs      " << sim.pairs.size() << '\n';
    std::cout << "transients " << sim.transient_count() << '\n';
    for (const auto& s : sim.subdomains) {
        std::cout << "subdomain  " << s.name << " rank " << s.rank << " chart " << gsph::to_string(s.chart.kind())
                  << " h " << s.h << " members " << s.member_ids.size() << " transients " << s.transient_ids.size()
                  << '\n';
    }
    for (const auto& m : cfg.materials) {
        std::cout << "material   " << m.name << " E " << m.elastic.E << " nu " << m.elastic.nu << " rho0 "
                  << m.elastic.rho0 << " c " << m.elastic.sound_speed() << '\n';
    }
    std::cout << "dt         " << sim.next_dt() << (cfg.integrator.dt ? " (fixed)" : " (cfl)") << '\n';
    std::cout << "n_end      " << cfg.integrator.n_end << '\n';
    return ok;
}

int cmd_run(const Options& opt)
{
    const auto cfg = gsph::config::load_config(opt.config_path);
    auto sim = gsph::timeloop::setup(cfg, base_dir_of(opt.config_path));
    gsph::timeloop::RunOptions ro;
    ro.write_snapshots = cfg.output.enabled;
    ro.output_dir = opt.output_dir.empty() ? cfg.output.directory : opt.output_dir;
    ro.format = cfg.output.format;
    ro.output_every = cfg.integrator.output_every;
    ro.progress = &std::cerr;
    const long n_end = opt.max_steps >= 0 ? opt.max_steps : cfg.integrator.n_end;
    const auto summary = gsph::timeloop::run(sim, n_end, ro);
    std::cout << "completed " << summary.steps << " steps, t = " << summary.time << " s, " << summary.snapshots
              << " snapshot(s) in " << ro.output_dir << ", broken bonds " << sim.broken_bond_count() << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Total-Lagrangian generalized SPH solver with overset charts"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opt.config_path, "Configuration file (JSON)")->required();
        sub->add_option("--threads", opt.threads, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", opt.seed, "Reserved; the solver has no stochastic components");
    };
    auto* run = app.add_subcommand("run", "Run a simulation and write snapshots");
    add_common(run);
    run->add_option("--output-dir", opt.output_dir, "Snapshot directory (overrides output.directory)");
    run->add_option("--max-steps", opt.max_steps, "Override integrator.n_end")->check(CLI::NonNegativeNumber);
    auto* validate = app.add_subcommand("validate", "Check a configuration and its geometry");
    add_common(validate);
    auto* info = app.add_subcommand("info", "Print particle, pair and transient counts");
    add_common(info);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return validation;
    }

    if (opt.threads > 0) {
        omp_set_num_threads(opt.threads);
    }

    try {
        if (*run) {
            return cmd_run(opt);
        }
        if (*validate) {
            return cmd_validate(opt);
        }
        return cmd_info(opt);
    } catch (const gsph::config::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation;
    } catch (const gsph::SetupError& e) {
        std::cerr << "error: setup: " << e.what() << '\n';
        return validation;
    } catch (const gsph::RuntimeFatal& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return fatal;
    } catch (const gsph::IoError& e) {
        std::cerr << "error: i/o: " << e.what() << '\n';
        return io_failure;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return fatal;
    }
}
