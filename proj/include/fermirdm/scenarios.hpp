// scenarios.hpp — run configurations, canned experiments, flat key=value
// config files, and the propagation driver with CSV outputs

#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fermirdm/bath.hpp"
#include "fermirdm/constants.hpp"
#include "fermirdm/density.hpp"
#include "fermirdm/generator.hpp"
#include "fermirdm/integrator.hpp"
#include "fermirdm/model.hpp"
#include "fermirdm/observables.hpp"

namespace fermirdm::scenarios {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InitialKind { infinite_temperature, fd, particle_hole, left_loaded, ground_state };

struct InitialCondition {
    InitialKind kind{InitialKind::ground_state};
    double fd_temperature{0.0};        // 0 means: use the bath temperature
    std::string excite_from{"HOMO-2"};  // particle-hole endpoints; HOMO/LUMO±k or 1-based level
    std::string excite_to{"LUMO+2"};
};

struct Scenario {
    std::string name{"custom"};
    model::ChainSpec chain{};
    double temperature{300.0};  // kelvin
    bath::PeakList default_peaks{bath::default_peaks()};
    std::map<int, bath::PeakList> site_peak_overrides;  // 1-based site index
    InitialCondition initial{};
    bool blocking{true};
    bool full_dephasing{true};
    integrator::IntegratorConfig integ{};
    double t_max{1e6};
    double output_cadence{0.0};  // 0: sample every accepted step
    std::vector<double> snapshot_times;

    bath::BathSpec bath_spec() const {
        bath::BathSpec spec = bath::BathSpec::uniform(chain.n_sites, temperature, default_peaks);
        for (const auto& [site, peaks] : site_peak_overrides) {
            if (site < 1 || site > chain.n_sites) {
                throw ConfigError("bath peaks given for site " + std::to_string(site) +
                                  " outside 1.." + std::to_string(chain.n_sites));
            }
            spec.peaks_per_site[static_cast<std::size_t>(site - 1)] = peaks;
        }
        return spec;
    }
};

// ---------------------------------------------------------------------------
// canned experiments

inline std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> all;

    {
        Scenario s;  // 12-site half-filled chain thermalizing from equal populations
        s.name = "fig1";
        s.chain = {12, 1.0, 0.005, 6};
        s.temperature = 500.0;
        s.initial.kind = InitialKind::infinite_temperature;
        s.t_max = 1e7;  // equilibration detection stops the run much earlier
        s.output_cadence = 500.0;
        all.push_back(s);
    }
    {
        Scenario s;  // particle-hole excitation relaxing at room temperature
        s.name = "fig2";
        s.chain = {8, 1.0, 0.05, 4};
        s.temperature = 300.0;
        s.initial.kind = InitialKind::particle_hole;
        s.initial.excite_from = "HOMO-2";
        s.initial.excite_to = "LUMO+2";
        s.t_max = 50000.0;
        s.output_cadence = 5.0;
        all.push_back(s);
    }
    {
        Scenario s;  // electrons released from the left half of the chain
        s.name = "fig3";
        s.chain = {12, 1.0, 0.05, 6};  // chain length is a free parameter here
        s.temperature = 5000.0;
        s.initial.kind = InitialKind::left_loaded;
        s.t_max = 80000.0;  // blocked dephasing is slow at near-step filling
        s.output_cadence = 10.0;
        all.push_back(s);
    }
    {
        Scenario s;  // ground state warming against a hot bath
        s.name = "fig4";
        s.chain = {32, 1.0, 0.05, 16};
        s.temperature = 5000.0;
        s.initial.kind = InitialKind::ground_state;
        s.t_max = 20000.0;
        s.output_cadence = 10.0;
        all.push_back(s);
    }
    return all;
}

inline Scenario find_builtin(const std::string& name) {
    for (auto& s : builtin_scenarios()) {
        if (s.name == name) return s;
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// initial conditions

// HOMO/LUMO±k or a plain 1-based level index.
inline int parse_level(const std::string& text, int n_electrons) {
    std::string t = text;
    int base = 0;
    std::size_t pos = 0;
    if (t.rfind("HOMO", 0) == 0) {
        base = n_electrons;
        pos = 4;
    } else if (t.rfind("LUMO", 0) == 0) {
        base = n_electrons + 1;
        pos = 4;
    }
    try {
        if (pos == 0) return std::stoi(t);
        if (pos == t.size()) return base;
        return base + std::stoi(t.substr(pos));
    } catch (const std::exception&) {
        throw ConfigError("cannot parse level '" + text + "'");
    }
}

inline DensityMatrix initial_condition(const InitialCondition& init,
                                       const model::EigenSystem& es,
                                       const model::ChainSpec& chain, double bath_temperature) {
    const int n = es.size();
    const int ne = chain.n_electrons;
    DensityMatrix dm;
    dm.electron_count = static_cast<double>(ne);
    dm.gamma = Eigen::MatrixXcd::Zero(n, n);

    switch (init.kind) {
        case InitialKind::infinite_temperature: {
            dm.gamma = (static_cast<double>(ne) / n) * Eigen::MatrixXcd::Identity(n, n);
            break;
        }
        case InitialKind::fd: {
            const double t = init.fd_temperature > 0.0 ? init.fd_temperature : bath_temperature;
            const double mu = model::chemical_potential(es.energies, ne, t);
            dm = model::fd_density(es.energies, mu, t);
            break;
        }
        case InitialKind::ground_state: {
            for (int i = 0; i < ne; ++i) dm.gamma(i, i) = 1.0;
            break;
        }
        case InitialKind::particle_hole: {
            const int from = parse_level(init.excite_from, ne);
            const int to = parse_level(init.excite_to, ne);
            if (from < 1 || from > ne) {
                throw ConfigError("excite_from level " + std::to_string(from) +
                                  " is not an occupied level (1.." + std::to_string(ne) + ")");
            }
            if (to <= ne || to > n) {
                throw ConfigError("excite_to level " + std::to_string(to) +
                                  " is not a virtual level (" + std::to_string(ne + 1) + ".." +
                                  std::to_string(n) + ")");
            }
            for (int i = 0; i < ne; ++i) dm.gamma(i, i) = 1.0;
            dm.gamma(from - 1, from - 1) = 0.0;
            dm.gamma(to - 1, to - 1) = 1.0;
            break;
        }
        case InitialKind::left_loaded: {
            Eigen::MatrixXcd site = Eigen::MatrixXcd::Zero(n, n);
            for (int nu = 0; nu < ne; ++nu) site(nu, nu) = 1.0;
            const Eigen::MatrixXcd u = es.orbitals.cast<cxd>();
            dm.gamma = u.transpose() * site * u;
            break;
        }
    }
    validate(dm);
    return dm;
}

// ---------------------------------------------------------------------------
// flat key = value config files

namespace detail {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw ConfigError("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number '" + value + "'");
    }
}

inline long to_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long x = std::stol(value, &used);
        if (used != value.size()) throw ConfigError("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse integer '" + value + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
}

// "(w,a,c);(w,a,c);..."
inline bath::PeakList to_peaks(const std::string& key, const std::string& value) {
    bath::PeakList peaks;
    std::stringstream groups(value);
    std::string group;
    while (std::getline(groups, group, ';')) {
        group = trim(group);
        if (group.empty()) continue;
        if (group.front() != '(' || group.back() != ')') {
            throw ConfigError("key '" + key + "': peak must look like (width,amplitude,center)");
        }
        std::stringstream fields(group.substr(1, group.size() - 2));
        std::string field;
        std::vector<double> xs;
        while (std::getline(fields, field, ',')) xs.push_back(to_double(key, trim(field)));
        if (xs.size() != 3) {
            throw ConfigError("key '" + key + "': peak needs exactly three numbers");
        }
        peaks.push_back({xs[0], xs[1], xs[2]});
    }
    if (peaks.empty()) throw ConfigError("key '" + key + "': no peaks given");
    return peaks;
}

inline std::string peaks_to_string(const bath::PeakList& peaks) {
    std::string out;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        if (k) out += ";";
        out += "(" + fmt(peaks[k].width) + "," + fmt(peaks[k].amplitude) + "," +
               fmt(peaks[k].center) + ")";
    }
    return out;
}

}  // namespace detail

inline void apply_key(Scenario& s, const std::string& key, const std::string& value) {
    using namespace detail;
    if (key == "scenario_name") s.name = value;
    else if (key == "n_sites") s.chain.n_sites = static_cast<int>(to_long(key, value));
    else if (key == "site_energy") s.chain.site_energy = to_double(key, value);
    else if (key == "hopping") s.chain.hopping = to_double(key, value);
    else if (key == "n_electrons") s.chain.n_electrons = static_cast<int>(to_long(key, value));
    else if (key == "temperature") s.temperature = to_double(key, value);
    else if (key == "initial") {
        if (value == "infinite-temperature") s.initial.kind = InitialKind::infinite_temperature;
        else if (value == "fd") s.initial.kind = InitialKind::fd;
        else if (value == "particle-hole") s.initial.kind = InitialKind::particle_hole;
        else if (value == "left-loaded") s.initial.kind = InitialKind::left_loaded;
        else if (value == "ground-state") s.initial.kind = InitialKind::ground_state;
        else throw ConfigError("unknown initial condition '" + value + "'");
    }
    else if (key == "initial_fd_temperature") s.initial.fd_temperature = to_double(key, value);
    else if (key == "excite_from") s.initial.excite_from = value;
    else if (key == "excite_to") s.initial.excite_to = value;
    else if (key == "blocking") s.blocking = to_bool(key, value);
    else if (key == "dephasing") {
        if (value == "full") s.full_dephasing = true;
        else if (value == "populations-only") s.full_dephasing = false;
        else throw ConfigError("dephasing must be 'full' or 'populations-only'");
    }
    else if (key == "rtol") s.integ.rtol = to_double(key, value);
    else if (key == "atol") s.integ.atol = to_double(key, value);
    else if (key == "initial_step") s.integ.initial_step = to_double(key, value);
    else if (key == "min_step") s.integ.min_step = to_double(key, value);
    else if (key == "max_step") s.integ.max_step = to_double(key, value);
    else if (key == "safety") s.integ.safety = to_double(key, value);
    else if (key == "max_steps") s.integ.max_steps = to_long(key, value);
    else if (key == "rehermitize") s.integ.rehermitize = to_bool(key, value);
    else if (key == "stationarity_rel") s.integ.stationarity_rel = to_double(key, value);
    else if (key == "t_max") s.t_max = to_double(key, value);
    else if (key == "output_cadence") s.output_cadence = to_double(key, value);
    else if (key == "snapshot_times") {
        s.snapshot_times.clear();
        std::stringstream ss(value);
        std::string field;
        while (std::getline(ss, field, ',')) {
            field = detail::trim(field);
            if (!field.empty()) s.snapshot_times.push_back(to_double(key, field));
        }
    }
    else if (key == "bath_peaks") s.default_peaks = to_peaks(key, value);
    else if (key.rfind("bath_peaks_site_", 0) == 0) {
        const int site = static_cast<int>(to_long(key, key.substr(16)));
        s.site_peak_overrides[site] = to_peaks(key, value);
    }
    else throw ConfigError("unknown config key '" + key + "'");
}

inline Scenario parse_config(std::istream& in) {
    Scenario s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        try {
            apply_key(s, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return s;
}

inline Scenario load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in);
}

inline std::string serialize_config(const Scenario& s) {
    using detail::fmt;
    std::ostringstream out;
    out << "scenario_name = " << s.name << "\n";
    out << "n_sites = " << s.chain.n_sites << "\n";
    out << "site_energy = " << fmt(s.chain.site_energy) << "\n";
    out << "hopping = " << fmt(s.chain.hopping) << "\n";
    out << "n_electrons = " << s.chain.n_electrons << "\n";
    out << "temperature = " << fmt(s.temperature) << "\n";
    const char* kind = nullptr;
    switch (s.initial.kind) {
        case InitialKind::infinite_temperature: kind = "infinite-temperature"; break;
        case InitialKind::fd: kind = "fd"; break;
        case InitialKind::particle_hole: kind = "particle-hole"; break;
        case InitialKind::left_loaded: kind = "left-loaded"; break;
        case InitialKind::ground_state: kind = "ground-state"; break;
    }
    out << "initial = " << kind << "\n";
    out << "initial_fd_temperature = " << fmt(s.initial.fd_temperature) << "\n";
    out << "excite_from = " << s.initial.excite_from << "\n";
    out << "excite_to = " << s.initial.excite_to << "\n";
    out << "blocking = " << (s.blocking ? "true" : "false") << "\n";
    out << "dephasing = " << (s.full_dephasing ? "full" : "populations-only") << "\n";
    out << "rtol = " << fmt(s.integ.rtol) << "\n";
    out << "atol = " << fmt(s.integ.atol) << "\n";
    out << "initial_step = " << fmt(s.integ.initial_step) << "\n";
    out << "min_step = " << fmt(s.integ.min_step) << "\n";
    out << "max_step = " << fmt(s.integ.max_step) << "\n";
    out << "safety = " << fmt(s.integ.safety) << "\n";
    out << "max_steps = " << s.integ.max_steps << "\n";
    out << "rehermitize = " << (s.integ.rehermitize ? "true" : "false") << "\n";
    out << "stationarity_rel = " << fmt(s.integ.stationarity_rel) << "\n";
    out << "t_max = " << fmt(s.t_max) << "\n";
    out << "output_cadence = " << fmt(s.output_cadence) << "\n";
    if (!s.snapshot_times.empty()) {
        out << "snapshot_times = ";
        for (std::size_t k = 0; k < s.snapshot_times.size(); ++k) {
            if (k) out << ",";
            out << fmt(s.snapshot_times[k]);
        }
        out << "\n";
    }
    out << "bath_peaks = " << detail::peaks_to_string(s.default_peaks) << "\n";
    for (const auto& [site, peaks] : s.site_peak_overrides) {
        out << "bath_peaks_site_" << site << " = " << detail::peaks_to_string(peaks) << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// running

struct RunResult {
    Scenario scenario;
    observables::ObservableSeries series;
    integrator::PropagationStats stats;
    DensityMatrix final_state;
    Eigen::VectorXd energies;
    double mu{0.0};
    Eigen::VectorXd fd_target;          // FD populations at the bath temperature
    double fd_residual_max{0.0};        // max_i |n_i - fd_i| at the final sample
    double canonical_residual_max{0.0}; // max over pairs of |n_i/n_j e^{beta(e_i-e_j)} - 1|
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::string text;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) text += ",";
            text += fmt(m(i, j));
        }
        text += "\n";
    }
    return text;
}

inline std::string series_csv(const observables::ObservableSeries& series, int n) {
    std::string text = "t";
    for (int i = 1; i <= n; ++i) text += ",n_" + std::to_string(i);
    for (int i = 1; i <= n; ++i) text += ",site_" + std::to_string(i);
    text += ",P_g,trace,herm_residual\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        text += fmt(series.time[k]);
        for (int i = 0; i < n; ++i) text += "," + fmt(series.eigen_populations[k](i));
        for (int i = 0; i < n; ++i) text += "," + fmt(series.site_populations[k](i));
        text += "," + fmt(series.ground_state_prob[k]);
        text += "," + fmt(series.trace_real[k]);
        text += "," + fmt(series.hermiticity_residual[k]);
        text += "\n";
    }
    return text;
}

}  // namespace detail

inline generator::GeneratorContext make_context(const Scenario& s) {
    const Eigen::MatrixXd h = model::build_chain(s.chain);
    model::EigenSystem es = model::diagonalize(h);
    model::CouplingSet cs = model::coupling_matrices(es);
    bath::RateTable rates = bath::build_rate_table(es, s.bath_spec());
    return generator::GeneratorContext(
        std::move(es), std::move(cs), std::move(rates),
        s.blocking ? generator::BlockingMode::blocked : generator::BlockingMode::unblocked,
        s.full_dephasing ? generator::DephasingMode::full
                         : generator::DephasingMode::populations_only);
}

// Propagates a scenario and, when output_dir is nonempty, writes
//   manifest.cfg   resolved configuration (re-runnable)
//   series.csv     sampled observables
//   summary.txt    final-state report
//   snapshot_*.csv + snapshots.csv   density snapshots where requested
// On an invariant abort the partial series and an aborted summary are still
// written before the exception continues up.
inline RunResult run(const Scenario& s, const std::filesystem::path& output_dir = {}) {
    s.chain.validate();
    if (s.chain.n_electrons == 0 || s.chain.n_electrons == s.chain.n_sites) {
        throw ConfigError("scenario needs 0 < n_electrons < n_sites");
    }

    const bool writing = !output_dir.empty();
    if (writing) {
        std::filesystem::create_directories(output_dir);
        detail::write_text(output_dir / "manifest.cfg",
                           "# fermirdm " + std::string("0.1.0") + " run manifest\n" +
                               serialize_config(s));
    }

    RunResult result;
    result.scenario = s;

    generator::GeneratorContext ctx = make_context(s);
    const int n = ctx.size();
    result.energies = ctx.eigensystem.energies;
    result.mu = model::chemical_potential(result.energies, s.chain.n_electrons, s.temperature);
    result.fd_target.resize(n);
    for (int i = 0; i < n; ++i) {
        result.fd_target(i) = model::fd_occupation(result.energies(i), result.mu, s.temperature);
    }

    DensityMatrix dm = initial_condition(s.initial, ctx.eigensystem, s.chain, s.temperature);

    integrator::IntegratorConfig config = s.integ;
    config.rate_scale_hint = ctx.dissipative_rate_scale();
    // The occupation-bound abort is armed only where the flow provably keeps
    // the spectrum in [0,1]: blocked kinetics on a coherence-free start.
    // Unblocked runs exceed 1 by design (Boltzmann statistics); runs with
    // initial coherences can transiently overshoot because the equation is a
    // second-order closure, not a completely positive map. Extremes are
    // tracked and reported either way.
    Eigen::MatrixXcd off = dm.gamma;
    off.diagonal().setZero();
    const bool diagonal_start = off.cwiseAbs().maxCoeff() == 0.0;
    config.check_occupations = s.blocking && s.full_dephasing && diagonal_start;

    std::vector<double> pending = s.snapshot_times;
    std::sort(pending.begin(), pending.end());
    std::size_t next_snapshot = 0;

    observables::ObservableSeries series;
    auto observe = [&](double t, const Eigen::MatrixXcd& gamma) {
        series.time.push_back(t);
        series.eigen_populations.push_back(gamma.diagonal().real());
        const Eigen::MatrixXcd site = observables::site_density(gamma, ctx.eigensystem);
        series.site_populations.push_back(site.diagonal().real());
        series.ground_state_prob.push_back(
            observables::ground_state_probability(gamma, result.energies, result.mu));
        series.trace_real.push_back(gamma.trace().real());
        series.hermiticity_residual.push_back(hermiticity_residual(gamma));
        if (series.snapshots.empty()) {
            series.snapshots.emplace_back(t, gamma);  // always keep the initial state
        }
        while (next_snapshot < pending.size() && t >= pending[next_snapshot]) {
            series.snapshots.emplace_back(t, gamma);
            ++next_snapshot;
        }
    };

    auto rhs = [&ctx](double, const Eigen::MatrixXcd& g) { return generator::rhs(g, ctx); };

    auto finalize = [&](bool aborted, const std::string& abort_reason) {
        result.series = series;
        result.final_state = DensityMatrix{dm.gamma, dm.electron_count};
        if (!series.size()) return;
        const Eigen::VectorXd& last = series.eigen_populations.back();
        result.fd_residual_max = (last - result.fd_target).cwiseAbs().maxCoeff();
        const double beta = inverse_temperature(s.temperature);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j || last(j) <= 0.0) continue;
                const double ratio =
                    last(i) / last(j) * std::exp(beta * (result.energies(i) - result.energies(j)));
                worst = std::max(worst, std::abs(ratio - 1.0));
            }
        }
        result.canonical_residual_max = worst;

        if (!writing) return;
        detail::write_text(output_dir / "series.csv", detail::series_csv(series, n));

        std::string index = "index,time,eigen_re,eigen_im,site_re,site_im\n";
        for (std::size_t k = 0; k < series.snapshots.size(); ++k) {
            const auto& [t, gamma] = series.snapshots[k];
            const Eigen::MatrixXcd site = observables::site_density(gamma, ctx.eigensystem);
            const std::string tag = "snapshot_" + std::to_string(k);
            detail::write_text(output_dir / (tag + "_eigen_re.csv"),
                               detail::matrix_csv(gamma.real()));
            detail::write_text(output_dir / (tag + "_eigen_im.csv"),
                               detail::matrix_csv(gamma.imag()));
            detail::write_text(output_dir / (tag + "_site_re.csv"),
                               detail::matrix_csv(site.real()));
            detail::write_text(output_dir / (tag + "_site_im.csv"),
                               detail::matrix_csv(site.imag()));
            index += std::to_string(k) + "," + detail::fmt(t) + "," + tag + "_eigen_re.csv," +
                     tag + "_eigen_im.csv," + tag + "_site_re.csv," + tag + "_site_im.csv\n";
        }
        detail::write_text(output_dir / "snapshots.csv", index);

        std::ostringstream sum;
        using detail::fmt;
        sum << "status = " << (aborted ? "aborted" : "ok") << "\n";
        if (aborted) sum << "abort_reason = " << abort_reason << "\n";
        sum << "stop = "
            << (result.stats.stop == integrator::StopReason::stationary ? "stationary"
                                                                        : "time-limit")
            << "\n";
        sum << "final_time = " << fmt(result.stats.final_time) << "\n";
        sum << "steps_accepted = " << result.stats.steps_accepted << "\n";
        sum << "steps_rejected = " << result.stats.steps_rejected << "\n";
        sum << "max_trace_drift = " << fmt(result.stats.max_trace_drift) << "\n";
        sum << "max_hermiticity_residual = " << fmt(result.stats.max_hermiticity_residual)
            << "\n";
        sum << "min_occupation = " << fmt(result.stats.min_occupation) << "\n";
        sum << "max_occupation = " << fmt(result.stats.max_occupation) << "\n";
        sum << "blocking = " << (s.blocking ? "true" : "false") << "\n";
        sum << "dephasing = " << (s.full_dephasing ? "full" : "populations-only") << "\n";
        sum << "chemical_potential = " << fmt(result.mu) << "\n";
        sum << "fd_residual_max = " << fmt(result.fd_residual_max) << "\n";
        sum << "canonical_residual_max = " << fmt(result.canonical_residual_max) << "\n";
        const char* eq = "undetermined";
        if (result.fd_residual_max < 1e-3) eq = "fermi-dirac";
        else if (result.canonical_residual_max < 1e-3) eq = "canonical";
        sum << "equilibrium = " << eq << "\n";
        for (int i = 0; i < n; ++i) {
            sum << "n_" << (i + 1) << " = " << fmt(series.eigen_populations.back()(i)) << "\n";
        }
        for (int i = 0; i < n; ++i) {
            sum << "fd_" << (i + 1) << " = " << fmt(result.fd_target(i)) << "\n";
        }
        detail::write_text(output_dir / "summary.txt", sum.str());
    };

    try {
        result.stats =
            integrator::propagate(dm.gamma, 0.0, s.t_max, config, rhs, observe, s.output_cadence);
    } catch (const integrator::InvariantViolation& e) {
        result.stats.final_time = e.time;
        finalize(true, e.what());
        throw;
    }

    // final snapshot unless one landed on the final time already
    if (series.snapshots.empty() || series.snapshots.back().first < result.stats.final_time) {
        series.snapshots.emplace_back(result.stats.final_time, dm.gamma);
    }
    finalize(false, {});
    return result;
}

}  // namespace fermirdm::scenarios
