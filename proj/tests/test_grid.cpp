#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "vfloc/errors.hpp"
#include "vfloc/grid.hpp"
#include "vfloc/presets.hpp"

using namespace vfloc;

namespace {

// Independent path oracle: enumerate the tree path from slack by DFS and sum
// edge impedances on the common prefix of the two paths.
std::vector<std::string> dfs_path(const GridConfig& cfg, const std::string& target) {
    std::map<std::string, std::vector<std::pair<std::string, std::complex<double>>>> adj;
    for (const GridEdge& e : cfg.edges) {
        adj[e.from].push_back({e.to, {e.r_mohm, e.x_mohm}});
        adj[e.to].push_back({e.from, {e.r_mohm, e.x_mohm}});
    }
    std::vector<std::string> path{cfg.slack};
    std::set<std::string> seen{cfg.slack};
    std::vector<std::string> stack_path;
    // simple recursive search
    std::function<bool(const std::string&)> go = [&](const std::string& u) -> bool {
        if (u == target) return true;
        for (const auto& [v, z] : adj[u]) {
            (void)z;
            if (seen.count(v)) continue;
            seen.insert(v);
            path.push_back(v);
            if (go(v)) return true;
            path.pop_back();
        }
        return false;
    };
    go(cfg.slack);
    return path;
}

std::complex<double> oracle_shared_impedance(const GridConfig& cfg, const std::string& source,
                                             const std::string& meter) {
    const auto ps = dfs_path(cfg, source);
    const auto pm = dfs_path(cfg, meter);
    std::map<std::pair<std::string, std::string>, std::complex<double>> zmap;
    for (const GridEdge& e : cfg.edges) {
        zmap[{e.from, e.to}] = {e.r_mohm, e.x_mohm};
        zmap[{e.to, e.from}] = {e.r_mohm, e.x_mohm};
    }
    std::complex<double> z{cfg.source_r_mohm, cfg.source_x_mohm};
    for (std::size_t i = 1; i < std::min(ps.size(), pm.size()); ++i) {
        if (ps[i] != pm[i]) break;
        z += zmap.at({ps[i - 1], ps[i]});
    }
    return z;
}

}  // namespace

TEST_CASE("default grid builds and exposes the expected nodes") {
    const GridModel g = grid_table1();
    CHECK(g.nodes().size() == 7);
    CHECK(g.slack() == "P1");
    CHECK(g.u_nominal() == 230.0);
    CHECK(g.depth("P1") == 0);
    CHECK(g.depth("P3") == 2);
    CHECK(g.depth("P6") == 4);
}

TEST_CASE("bad topologies are rejected") {
    GridConfig cfg = grid_table1_config();

    SUBCASE("self loop") {
        cfg.edges.push_back({"P3", "P3", 1.0, 1.0});
        CHECK_THROWS_AS(build_grid(cfg), CycleDetected);
    }
    SUBCASE("missing edge leaves P6 unreachable") {
        cfg.edges.pop_back();  // P7-P6
        CHECK_THROWS_AS(build_grid(cfg), DisconnectedNode);
    }
    SUBCASE("extra edge closes a cycle") {
        cfg.edges.push_back({"P3", "P5", 10.0, 1.0});
        CHECK_THROWS_AS(build_grid(cfg), CycleDetected);
    }
    SUBCASE("negative impedance") {
        cfg.edges[0].r_mohm = -1.0;
        CHECK_THROWS_AS(build_grid(cfg), NegativeImpedance);
    }
}

TEST_CASE("shared path impedance matches the hand-summed rows") {
    const GridModel g = grid_table1();

    const auto z33 = g.shared_path_impedance("P3", "P3");
    CHECK(z33.real() == doctest::Approx(303.8));
    CHECK(z33.imag() == doctest::Approx(74.5));
    CHECK(std::abs(z33) == doctest::Approx(312.8).epsilon(1e-3));

    const auto z34 = g.shared_path_impedance("P3", "P4");
    CHECK(z34.real() == doctest::Approx(153.8));
    CHECK(z34.imag() == doctest::Approx(43.1));
    CHECK(std::abs(z34) == doctest::Approx(159.7).epsilon(1e-3));

    for (const std::string& node : g.nodes()) {
        const auto z = g.shared_path_impedance("P1", node);
        CHECK(z.real() == doctest::Approx(3.8));
        CHECK(z.imag() == doctest::Approx(11.7));
    }

    CHECK_THROWS_AS((void)g.shared_path_impedance("P3", "P9"), UnknownNode);
}

TEST_CASE("shared path impedance agrees with the path oracle and is symmetric") {
    const GridConfig cfg = grid_table1_config();
    const GridModel g = GridModel::build(cfg);
    for (const std::string& a : g.nodes()) {
        for (const std::string& b : g.nodes()) {
            const auto z = g.shared_path_impedance(a, b);
            const auto zo = oracle_shared_impedance(cfg, a, b);
            CHECK(std::abs(z - zo) < 1e-9);
            const auto zr = g.shared_path_impedance(b, a);
            CHECK(std::abs(z - zr) < 1e-12);
        }
    }
}

TEST_CASE("downstream meters see the source's own impedance, upstream less") {
    const GridModel g = grid_table1();
    // P6 is downstream of P3
    CHECK(std::abs(g.shared_path_impedance("P3", "P6")) ==
          doctest::Approx(std::abs(g.shared_path_impedance("P3", "P3"))));
    // moving the meter toward the slack must not increase |Z|
    const double z_p3 = std::abs(g.shared_path_impedance("P3", "P3"));
    const double z_p2 = std::abs(g.shared_path_impedance("P3", "P2"));
    const double z_p1 = std::abs(g.shared_path_impedance("P3", "P1"));
    CHECK(z_p2 <= z_p3);
    CHECK(z_p1 <= z_p2);
}

TEST_CASE("coupling coefficient examples") {
    const GridModel g = grid_table1();
    const double i3kw = 3000.0 / 230.0;  // 13.04 A
    CHECK(coupling_coefficient(g, "P3", "P3", i3kw) == doctest::Approx(4.08).epsilon(2e-3));
    CHECK(coupling_coefficient(g, "P3", "P4", i3kw) == doctest::Approx(2.08).epsilon(2e-3));
    CHECK(coupling_coefficient(g, "P4", "P6", 0.0) == 0.0);
}

TEST_CASE("localize picks the maximum with upstream tie-break") {
    const GridModel g = grid_table1();

    AmplitudeProfile tie;
    tie.entries = {{"P3", 4.08}, {"P4", 2.08}, {"P6", 4.08}};
    CHECK(localize(tie, g) == "P3");

    AmplitudeProfile single;
    single.entries = {{"P4", 5.0}};
    CHECK(localize(single, g) == "P4");

    AmplitudeProfile plain;
    plain.entries = {{"P3", 1.0}, {"P4", 3.0}, {"P6", 1.0}};
    CHECK(localize(plain, g) == "P4");

    AmplitudeProfile empty;
    CHECK_THROWS_AS(localize(empty, g), EmptyProfile);

    AmplitudeProfile unknown;
    unknown.entries = {{"P9", 1.0}};
    CHECK_THROWS_AS(localize(unknown, g), UnknownNode);
}

TEST_CASE("localization is exhaustively correct for coupled single-source profiles") {
    const GridModel g = grid_table1();
    const std::vector<std::string> candidates{"P1", "P3", "P4", "P6"};
    const std::vector<std::string> all = g.nodes();
    const std::size_t m = all.size();

    for (const std::string& source : candidates) {
        for (std::size_t mask = 1; mask < (1u << m); ++mask) {
            AmplitudeProfile prof;
            bool has_source = false;
            for (std::size_t b = 0; b < m; ++b) {
                if (!(mask & (1u << b))) continue;
                prof.entries[all[b]] = coupling_coefficient(g, source, all[b], 13.04);
                has_source = has_source || all[b] == source;
            }
            if (!has_source) continue;
            CHECK(localize(prof, g) == source);
        }
    }
}

TEST_CASE("localize output is invariant to positive scaling") {
    const GridModel g = grid_table1();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> amp(0.1, 5.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    const std::vector<std::string> nodes{"P1", "P3", "P4", "P6"};
    for (int trial = 0; trial < 200; ++trial) {
        AmplitudeProfile prof;
        for (const auto& n : nodes) prof.entries[n] = amp(rng);
        const std::string base = localize(prof, g);
        const double c = scale(rng);
        AmplitudeProfile scaled;
        for (const auto& [n, a] : prof.entries) scaled.entries[n] = a * c;
        CHECK(localize(scaled, g) == base);
    }
}
