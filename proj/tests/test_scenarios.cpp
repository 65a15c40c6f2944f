#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fermirdm/scenarios.hpp"

using namespace fermirdm;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// trimmed fig1 used where a full equilibration run would be wasteful
scenarios::Scenario short_fig1() {
    auto s = scenarios::find_builtin("fig1");
    s.t_max = 2000.0;
    s.output_cadence = 100.0;
    s.integ.stationarity_rel = 0.0;
    return s;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("fermirdm_test_" + tag)) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("built-in scenarios carry the canonical parameters", "[scenarios]") {
    const auto all = scenarios::builtin_scenarios();
    REQUIRE(all.size() == 4);

    const auto fig1 = scenarios::find_builtin("fig1");
    REQUIRE(fig1.chain.n_sites == 12);
    REQUIRE(fig1.chain.n_electrons == 6);
    REQUIRE(fig1.chain.site_energy == 1.0);
    REQUIRE(fig1.chain.hopping == 0.005);
    REQUIRE(fig1.temperature == 500.0);
    REQUIRE(fig1.initial.kind == scenarios::InitialKind::infinite_temperature);
    REQUIRE(fig1.blocking);
    REQUIRE(fig1.full_dephasing);

    const auto fig2 = scenarios::find_builtin("fig2");
    REQUIRE(fig2.chain.n_sites == 8);
    REQUIRE(fig2.chain.n_electrons == 4);
    REQUIRE(fig2.chain.hopping == 0.05);
    REQUIRE(fig2.temperature == 300.0);
    REQUIRE(fig2.initial.kind == scenarios::InitialKind::particle_hole);
    REQUIRE(fig2.initial.excite_from == "HOMO-2");
    REQUIRE(fig2.initial.excite_to == "LUMO+2");

    const auto fig3 = scenarios::find_builtin("fig3");
    REQUIRE(fig3.chain.n_sites == 12);
    REQUIRE(fig3.chain.hopping == 0.05);
    REQUIRE(fig3.temperature == 5000.0);
    REQUIRE(fig3.initial.kind == scenarios::InitialKind::left_loaded);

    const auto fig4 = scenarios::find_builtin("fig4");
    REQUIRE(fig4.chain.n_sites == 32);
    REQUIRE(fig4.chain.n_electrons == 16);
    REQUIRE(fig4.temperature == 5000.0);
    REQUIRE(fig4.initial.kind == scenarios::InitialKind::ground_state);

    for (const auto& s : all) {
        REQUIRE(s.default_peaks.size() == 4);
        REQUIRE(s.default_peaks[2].amplitude == 0.023);
    }
    REQUIRE_THROWS_AS(scenarios::find_builtin("fig9"), scenarios::ConfigError);
}

TEST_CASE("level references resolve against HOMO and LUMO", "[scenarios]") {
    REQUIRE(scenarios::parse_level("HOMO", 4) == 4);
    REQUIRE(scenarios::parse_level("LUMO", 4) == 5);
    REQUIRE(scenarios::parse_level("HOMO-2", 4) == 2);
    REQUIRE(scenarios::parse_level("LUMO+2", 4) == 7);
    REQUIRE(scenarios::parse_level("HOMO+1", 4) == 5);
    REQUIRE(scenarios::parse_level("3", 4) == 3);
    REQUIRE_THROWS_AS(scenarios::parse_level("MIDDLE", 4), scenarios::ConfigError);
}

TEST_CASE("initial conditions", "[scenarios]") {
    const model::ChainSpec chain{8, 1.0, 0.05, 4};
    const auto es = model::diagonalize(model::build_chain(chain));

    {
        const auto dm = scenarios::initial_condition(
            {scenarios::InitialKind::infinite_temperature}, es, chain, 300.0);
        REQUIRE((dm.gamma - 0.5 * Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        const auto dm =
            scenarios::initial_condition({scenarios::InitialKind::ground_state}, es, chain, 300.0);
        for (int i = 0; i < 8; ++i) {
            REQUIRE(dm.gamma(i, i).real() == (i < 4 ? 1.0 : 0.0));
        }
    }
    {
        scenarios::InitialCondition init{scenarios::InitialKind::particle_hole};
        init.excite_from = "HOMO-2";
        init.excite_to = "LUMO+2";
        const auto dm = scenarios::initial_condition(init, es, chain, 300.0);
        Eigen::VectorXd expected(8);
        expected << 1, 0, 1, 1, 0, 0, 1, 0;
        REQUIRE((dm.gamma.diagonal().real() - expected).cwiseAbs().maxCoeff() == 0.0);

        init.excite_from = "LUMO";  // not occupied
        REQUIRE_THROWS_AS(scenarios::initial_condition(init, es, chain, 300.0),
                          scenarios::ConfigError);
        init.excite_from = "HOMO";
        init.excite_to = "HOMO-1";  // not virtual
        REQUIRE_THROWS_AS(scenarios::initial_condition(init, es, chain, 300.0),
                          scenarios::ConfigError);
    }
    {
        scenarios::InitialCondition init{scenarios::InitialKind::fd};
        init.fd_temperature = 700.0;
        const auto dm = scenarios::initial_condition(init, es, chain, 300.0);
        REQUIRE(dm.gamma.trace().real() == Approx(4.0).margin(1e-10));
    }
}

TEST_CASE("config serialization round-trips", "[scenarios]") {
    auto s = scenarios::find_builtin("fig2");
    s.site_peak_overrides[3] = {{0.002, 0.001, 0.005}};
    s.snapshot_times = {0.0, 12.5, 100.0};
    s.integ.rtol = 3.14159e-9;

    const std::string text = scenarios::serialize_config(s);
    std::istringstream in(text);
    const auto parsed = scenarios::parse_config(in);
    REQUIRE(scenarios::serialize_config(parsed) == text);
    REQUIRE(parsed.chain.n_sites == 8);
    REQUIRE(parsed.integ.rtol == 3.14159e-9);
    REQUIRE(parsed.site_peak_overrides.at(3).size() == 1);
    REQUIRE(parsed.snapshot_times.size() == 3);
}

TEST_CASE("config parser rejects malformed input", "[scenarios]") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return scenarios::parse_config(in);
    };
    REQUIRE_THROWS_AS(parse("nonsense_key = 3\n"), scenarios::ConfigError);
    REQUIRE_THROWS_AS(parse("n_sites = twelve\n"), scenarios::ConfigError);
    REQUIRE_THROWS_AS(parse("just a line\n"), scenarios::ConfigError);
    REQUIRE_THROWS_AS(parse("bath_peaks = 0.1,0.2,0.3\n"), scenarios::ConfigError);
    REQUIRE_THROWS_AS(parse("bath_peaks = (0.1,0.2)\n"), scenarios::ConfigError);
    REQUIRE_THROWS_AS(parse("dephasing = sometimes\n"), scenarios::ConfigError);
    REQUIRE_NOTHROW(parse("# only a comment\n\n"));
}

TEST_CASE("runs are byte-identical across repeats", "[scenarios]") {
    TempDir a("run_a"), b("run_b");
    const auto s = short_fig1();
    scenarios::run(s, a.path);
    scenarios::run(s, b.path);
    REQUIRE(slurp(a.path / "series.csv") == slurp(b.path / "series.csv"));
    REQUIRE(slurp(a.path / "summary.txt") == slurp(b.path / "summary.txt"));
    REQUIRE(slurp(a.path / "manifest.cfg") == slurp(b.path / "manifest.cfg"));
}

TEST_CASE("a run relaunched from its manifest reproduces the outputs", "[scenarios]") {
    TempDir a("manifest_a"), b("manifest_b");
    scenarios::run(short_fig1(), a.path);
    const auto reloaded = scenarios::load_config(a.path / "manifest.cfg");
    scenarios::run(reloaded, b.path);
    REQUIRE(slurp(a.path / "series.csv") == slurp(b.path / "series.csv"));
    REQUIRE(slurp(a.path / "summary.txt") == slurp(b.path / "summary.txt"));
    REQUIRE(slurp(a.path / "manifest.cfg") == slurp(b.path / "manifest.cfg"));
}

TEST_CASE("snapshots are written with an index", "[scenarios]") {
    TempDir dir("snaps");
    auto s = short_fig1();
    s.snapshot_times = {500.0};
    scenarios::run(s, dir.path);
    const std::string index = slurp(dir.path / "snapshots.csv");
    REQUIRE(index.find("snapshot_0_eigen_re.csv") != std::string::npos);
    REQUIRE(fs::exists(dir.path / "snapshot_0_eigen_re.csv"));
    REQUIRE(fs::exists(dir.path / "snapshot_1_site_im.csv"));
    // initial, requested, final
    REQUIRE(fs::exists(dir.path / "snapshot_2_eigen_re.csv"));
}

TEST_CASE("series CSV carries the advertised header", "[scenarios]") {
    TempDir dir("header");
    scenarios::run(short_fig1(), dir.path);
    const std::string series = slurp(dir.path / "series.csv");
    REQUIRE(series.rfind("t,n_1,", 0) == 0);
    REQUIRE(series.find(",site_1,") != std::string::npos);
    REQUIRE(series.find(",P_g,trace,herm_residual\n") != std::string::npos);
}

TEST_CASE("runs with degenerate fillings are rejected", "[scenarios]") {
    auto s = short_fig1();
    s.chain.n_electrons = 0;
    REQUIRE_THROWS_AS(scenarios::run(s), scenarios::ConfigError);
    s.chain.n_electrons = 12;
    REQUIRE_THROWS_AS(scenarios::run(s), scenarios::ConfigError);
}

TEST_CASE("unblocked short run completes and reports through the summary", "[scenarios]") {
    TempDir dir("unblocked");
    auto s = short_fig1();
    s.blocking = false;
    const auto result = scenarios::run(s, dir.path);
    REQUIRE(result.series.size() > 2);
    const std::string summary = slurp(dir.path / "summary.txt");
    REQUIRE(summary.find("blocking = false") != std::string::npos);
    REQUIRE(summary.find("canonical_residual_max = ") != std::string::npos);
}

TEST_CASE("bath peak site overrides are applied", "[scenarios]") {
    auto s = short_fig1();
    s.site_peak_overrides[2] = {{0.002, 0.001, 0.005}};
    const auto spec = s.bath_spec();
    REQUIRE(spec.peaks_per_site[1].size() == 1);
    REQUIRE(spec.peaks_per_site[0].size() == 4);
    s.site_peak_overrides[99] = {{0.002, 0.001, 0.005}};
    REQUIRE_THROWS_AS(s.bath_spec(), scenarios::ConfigError);
}
