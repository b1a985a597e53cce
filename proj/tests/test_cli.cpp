#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "support/cli_harness.hpp"

using cli::run;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string csv_payload(const std::string& text) {
    std::string out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty() && line[0] != '#') out += line + "\n";
    return out;
}

} // namespace

TEST_CASE("cli: usage errors exit 2") {
    CHECK(run("").exit_code == 2);
    CHECK(run("orbit --x 0.5").exit_code == 2); // missing weight
    CHECK(run("orbit --x 0.5 --weight 0.6 --weight 0.6").exit_code == 2);
    CHECK(run("cantor --n 2 --weight 0.5 --weight 0.5 --R 1 --out-dir /tmp").exit_code == 2);
    CHECK(run("bad-check --x 0.5 --weight 1 --mode nonsense").exit_code == 2);
}

TEST_CASE("cli orbit: golden ratio CSV and x = 0 closed form") {
    auto res = run("orbit --x 0.618034 --weight 1 --T 8 --step 0.02");
    REQUIRE(res.exit_code == 0);
    auto lines = csv_payload(res.out);
    std::stringstream ss(lines);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "t,lambda1,certified_floor_so_far");
    double min_lambda = 1e9;
    std::string line;
    int rows = 0;
    while (std::getline(ss, line)) {
        double t, l, f;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &l, &f) == 3);
        min_lambda = std::min(min_lambda, l);
        CHECK(f <= l + 1e-12);
        ++rows;
    }
    CHECK(rows == 401);
    CHECK(min_lambda >= 0.4);

    auto zero = run("orbit --x 0 --weight 1 --T 4 --step 0.1");
    REQUIRE(zero.exit_code == 0);
    std::stringstream zs(csv_payload(zero.out));
    std::getline(zs, header);
    while (std::getline(zs, line)) {
        double t, l, f;
        std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &l, &f);
        CHECK(l == Catch::Approx(std::exp(-t)).epsilon(1e-9));
    }
}

TEST_CASE("cli bad-check: JSON report against schema") {
    auto res = run("bad-check --x 0.618034 --weight 1 --Q 2000 --mode both --c 0.2 --N 10");
    REQUIRE(res.exit_code == 0);
    auto doc = json::parse(res.out);
    cli::require_valid(doc, "bad_check.schema.json");
    // exact decimal-string semantics: the constant is exactly 1 - 0.618034
    CHECK(doc["payload"]["direct"]["constant"].get<double>() ==
          Catch::Approx(0.381966).epsilon(1e-12));
    CHECK(doc["payload"]["dual"]["only_zero_solution"].get<bool>());
    CHECK(doc["payload"]["consistency"]["verdict"].get<std::string>() == "consistent");

    auto rational = run("bad-check --x 0.5 --weight 1 --Q 100 --mode direct");
    auto rdoc = json::parse(rational.out);
    CHECK(rdoc["payload"]["direct"]["constant"].get<double>() == 0.0);
}

TEST_CASE("cli scan: sublattices, minima, dangerous, eq, nondiv, shah") {
    auto subs = run("scan sublattices --lattice identity --dim 3 --k 1 --rho 1");
    REQUIRE(subs.exit_code == 0);
    auto sdoc = json::parse(subs.out);
    cli::require_valid(sdoc, "scan_sublattices.schema.json");
    CHECK(sdoc["payload"]["count"].get<int>() == 13);

    auto k2 = run("scan sublattices --lattice identity --dim 3 --k 2 --rho 1");
    CHECK(json::parse(k2.out)["payload"]["count"].get<int>() == 13);

    auto minima = run("scan minima --basis '3,0,0;0,0.333333333333333315,0;0,0,1'");
    REQUIRE(minima.exit_code == 0);
    auto mdoc = json::parse(minima.out);
    cli::require_valid(mdoc, "scan_minima.schema.json");
    CHECK(mdoc["payload"]["minima"][0].get<double>() == Catch::Approx(1.0 / 3.0));
    CHECK(mdoc["payload"]["minima"][2].get<double>() == Catch::Approx(3.0));

    auto dang = run("scan dangerous --n 2 --weight 0.5 --weight 0.5 --R 4 --m 1 --rho 0.5 "
                    "--q 2 --l 1 --grid 1500");
    REQUIRE(dang.exit_code == 0);
    auto ddoc = json::parse(dang.out);
    cli::require_valid(ddoc, "scan_dangerous.schema.json");
    CHECK(ddoc["payload"]["count"].get<int>() == ddoc["payload"]["records"].size());

    auto eq = run("scan eq --n 2 --weight 0.5 --weight 0.5 --R 4 --m 1 --rho 0.5 --q 3 --s 1.0");
    REQUIRE(eq.exit_code == 0);
    cli::require_valid(json::parse(eq.out), "scan_eq.schema.json");

    auto nd1 = run("scan nondiv --n 2 --weight 0.5 --weight 0.5 --R 16 --m 1 --q 3 "
                   "--eps 0.02 --grid 300");
    auto nd2 = run("scan nondiv --n 2 --weight 0.5 --weight 0.5 --R 16 --m 1 --q 3 "
                   "--eps 0.06 --grid 300");
    REQUIRE(nd1.exit_code == 0);
    REQUIRE(nd2.exit_code == 0);
    auto n1 = json::parse(nd1.out), n2 = json::parse(nd2.out);
    cli::require_valid(n1, "scan_nondiv.schema.json");
    CHECK(n1["payload"]["fraction"].get<double>() <= n2["payload"]["fraction"].get<double>());

    auto shah = run("scan shah --n 2 --weight 0.5 --weight 0.5 --R 16 --m 1 --grade 2 --t 0.5 "
                    "--samples 5 --seed 7");
    REQUIRE(shah.exit_code == 0);
    auto shdoc = json::parse(shah.out);
    cli::require_valid(shdoc, "scan_shah.schema.json");
    CHECK(shdoc["payload"]["empirical_c"].get<double>() > 0.0);
}

TEST_CASE("cli cantor: output files, schemas, determinism across workers") {
    const fs::path dir1 = fs::temp_directory_path() / "badflow_cli_w1";
    const fs::path dir8 = fs::temp_directory_path() / "badflow_cli_w8";
    fs::create_directories(dir1);
    fs::create_directories(dir8);

    const std::string common = "cantor --n 2 --weight 0.5 --weight 0.5 --R 16 --m 1 --depth 3 "
                               "--rho 0.25 --out-dir ";
    REQUIRE(run(common + dir1.string() + " --workers 1").exit_code == 0);
    REQUIRE(run(common + dir8.string() + " --workers 8").exit_code == 0);

    auto t1 = json::parse(cli::slurp((dir1 / "tree.json").string()));
    auto t8 = json::parse(cli::slurp((dir8 / "tree.json").string()));
    cli::require_valid(t1, "cantor_tree.schema.json");
    CHECK(t1["payload"].dump() == t8["payload"].dump());

    auto r1 = json::parse(cli::slurp((dir1 / "richness.json").string()));
    auto r8 = json::parse(cli::slurp((dir8 / "richness.json").string()));
    cli::require_valid(r1, "richness.schema.json");
    CHECK(r1["payload"].dump() == r8["payload"].dump());

    CHECK(csv_payload(cli::slurp((dir1 / "survivors.csv").string())) ==
          csv_payload(cli::slurp((dir8 / "survivors.csv").string())));

    // manifests validate too
    cli::require_valid(t1["manifest"], "manifest.schema.json");

    // survivors exist and the CSV header is frozen
    auto csv = csv_payload(cli::slurp((dir1 / "survivors.csv").string()));
    CHECK(csv.rfind("mid,lambda1_q0,lambda1_q1,lambda1_q2,lambda1_q3\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') > 1);
}
