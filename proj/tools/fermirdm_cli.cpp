// fermirdm command line: run scenarios, list them, sweep a parameter, and
// run the verification suites

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fermirdm/scenarios.hpp"
#include "fermirdm/verify.hpp"

namespace {

namespace fs = std::filesystem;
using fermirdm::scenarios::Scenario;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitVerify = 4;

Scenario resolve_scenario(const std::string& ref) {
    for (const auto& s : fermirdm::scenarios::builtin_scenarios()) {
        if (s.name == ref) return s;
    }
    if (fs::exists(ref)) return fermirdm::scenarios::load_config(ref);
    throw fermirdm::scenarios::ConfigError("'" + ref +
                                           "' is neither a built-in scenario nor a config file");
}

struct RunFlags {
    std::string scenario;
    std::string out_dir;
    bool no_blocking{false};
    bool no_dephasing{false};
    double tmax_override{-1.0};
    double rtol_override{-1.0};
};

Scenario configure(const RunFlags& flags) {
    Scenario s = resolve_scenario(flags.scenario);
    if (flags.no_blocking) s.blocking = false;
    if (flags.no_dephasing) s.full_dephasing = false;
    if (flags.tmax_override > 0.0) s.t_max = flags.tmax_override;
    if (flags.rtol_override > 0.0) s.integ.rtol = flags.rtol_override;
    return s;
}

int do_run(const RunFlags& flags) {
    const Scenario s = configure(flags);
    const auto result = fermirdm::scenarios::run(s, flags.out_dir);
    std::printf("scenario %-10s stop=%-10s t_end=%-12.6g steps=%ld fd_residual=%.3e\n",
                s.name.c_str(),
                result.stats.stop == fermirdm::integrator::StopReason::stationary ? "stationary"
                                                                                  : "time-limit",
                result.stats.final_time, result.stats.steps_accepted, result.fd_residual_max);
    if (!flags.out_dir.empty()) std::printf("outputs in %s\n", flags.out_dir.c_str());
    return kExitOk;
}

int do_sweep(const RunFlags& flags, const std::string& param, int jobs) {
    const auto eq = param.find('=');
    if (eq == std::string::npos) {
        throw fermirdm::scenarios::ConfigError("--param must look like key=v1,v2,...");
    }
    const std::string key = param.substr(0, eq);
    std::vector<std::string> values;
    std::stringstream ss(param.substr(eq + 1));
    std::string field;
    while (std::getline(ss, field, ',')) {
        if (!field.empty()) values.push_back(field);
    }
    if (values.empty()) throw fermirdm::scenarios::ConfigError("--param: no values given");

    const Scenario base = configure(flags);
    struct Slot {
        Scenario scenario;
        fs::path out;
        std::string message;
        int code{kExitOk};
    };
    std::vector<Slot> slots;
    for (const auto& v : values) {
        Slot slot;
        slot.scenario = base;
        fermirdm::scenarios::apply_key(slot.scenario, key, v);
        if (!flags.out_dir.empty()) slot.out = fs::path(flags.out_dir) / (key + "=" + v);
        slots.push_back(std::move(slot));
    }

    // independent runs over immutable inputs; each owns its output directory
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(slots.size())));
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex gate;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t mine;
                {
                    std::lock_guard<std::mutex> lock(gate);
                    if (next >= slots.size()) return;
                    mine = next++;
                }
                Slot& slot = slots[mine];
                try {
                    const auto result = fermirdm::scenarios::run(slot.scenario, slot.out);
                    char buf[256];
                    std::snprintf(buf, sizeof buf, "ok    t_end=%-12.6g fd_residual=%.3e",
                                  result.stats.final_time, result.fd_residual_max);
                    slot.message = buf;
                } catch (const fermirdm::integrator::InvariantViolation& e) {
                    slot.message = std::string("abort ") + e.what();
                    slot.code = kExitInvariant;
                } catch (const std::exception& e) {
                    slot.message = std::string("error ") + e.what();
                    slot.code = kExitConfig;
                }
            }
        });
    }
    for (auto& t : pool) t.join();

    int worst = kExitOk;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        std::printf("%s=%-14s %s\n", key.c_str(), values[k].c_str(), slots[k].message.c_str());
        worst = std::max(worst, slots[k].code);
    }
    return worst;
}

int do_verify(const fermirdm::verify::Options& options) {
    const auto results = fermirdm::verify::run_all(options);
    nlohmann::json report;
    report["pass"] = fermirdm::verify::all_passed(results);
    report["options"] = {{"modes", options.modes},
                         {"tuples", options.tuples},
                         {"states", options.states},
                         {"seed", options.seed}};
    report["suites"] = nlohmann::json::array();
    for (const auto& r : results) {
        report["suites"].push_back({{"name", r.name},
                                    {"pass", r.pass},
                                    {"max_deviation", r.max_deviation},
                                    {"tolerance", r.tolerance},
                                    {"trials", r.trials}});
    }
    std::cout << report.dump(2) << "\n";
    return report["pass"].get<bool>() ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pauli-blocked Redfield dynamics of a tight-binding chain"};
    app.require_subcommand(1);

    RunFlags flags;
    auto add_run_flags = [&flags](CLI::App* cmd) {
        cmd->add_option("--scenario", flags.scenario, "built-in name or config file path")
            ->required();
        cmd->add_option("--out", flags.out_dir, "output directory");
        cmd->add_flag("--no-blocking", flags.no_blocking, "drop the Pauli blocking factors");
        cmd->add_flag("--no-dephasing", flags.no_dephasing, "relax populations only");
        cmd->add_option("--tmax", flags.tmax_override, "override t_max (au)");
        cmd->add_option("--rtol", flags.rtol_override, "override the relative tolerance");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "propagate one scenario");
    add_run_flags(run_cmd);

    CLI::App* list_cmd = app.add_subcommand("list-scenarios", "print the built-in scenarios");

    fermirdm::verify::Options verify_options;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the property suites");
    verify_cmd->add_option("--modes", verify_options.modes, "largest Fock-space mode count")
        ->check(CLI::Range(2, 6));
    verify_cmd->add_option("--trials", verify_options.tuples, "index tuples per state");
    verify_cmd->add_option("--states", verify_options.states, "mixed states per mode count");
    verify_cmd->add_option("--seed", verify_options.seed, "base RNG seed");

    std::string sweep_param;
    int sweep_jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (sweep_jobs < 1) sweep_jobs = 1;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a scenario over parameter values");
    add_run_flags(sweep_cmd);
    sweep_cmd->add_option("--param", sweep_param, "key=v1,v2,... config override list")
        ->required();
    sweep_cmd->add_option("--jobs", sweep_jobs, "concurrent runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return do_run(flags);
        if (list_cmd->parsed()) {
            for (const auto& s : fermirdm::scenarios::builtin_scenarios()) {
                std::printf("%-6s N=%-3d Ne=%-3d T=%-7g hopping=%-7g t_max=%-8g %s\n",
                            s.name.c_str(), s.chain.n_sites, s.chain.n_electrons, s.temperature,
                            s.chain.hopping, s.t_max,
                            s.initial.kind == fermirdm::scenarios::InitialKind::infinite_temperature
                                ? "infinite-temperature start"
                            : s.initial.kind == fermirdm::scenarios::InitialKind::particle_hole
                                ? "particle-hole start"
                            : s.initial.kind == fermirdm::scenarios::InitialKind::left_loaded
                                ? "left-loaded start"
                            : s.initial.kind == fermirdm::scenarios::InitialKind::ground_state
                                ? "ground-state start"
                                : "fd start");
            }
            return kExitOk;
        }
        if (verify_cmd->parsed()) return do_verify(verify_options);
        if (sweep_cmd->parsed()) return do_sweep(flags, sweep_param, sweep_jobs);
    } catch (const fermirdm::integrator::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const fermirdm::scenarios::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
