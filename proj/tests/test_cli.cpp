// End-to-end checks of the fluidps command line tool.  CTest passes the
// binary path as argv[1]; every case shells out to it and inspects exit
// codes and emitted files.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace {

std::string g_cli;  // path to the fluidps binary under test

struct RunResult {
  int exit_code = -1;
  std::string out;  // captured stdout
  std::string err;  // captured stderr
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  const std::string out_path = "cli_stdout.tmp";
  const std::string err_path = "cli_stderr.tmp";
  std::string cmd = "\"" + g_cli + "\" " + args + " >" + out_path + " 2>" + err_path;
  int raw = std::system(cmd.c_str());
  RunResult r;
  if (raw == -1) {
    r.exit_code = -1;
  } else if (WIFEXITED(raw)) {
    r.exit_code = WEXITSTATUS(raw);
  } else {
    r.exit_code = 128;  // killed by signal; any nonzero sentinel will do
  }
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

// Parsed CSV: header fields plus data rows of doubles.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv read_csv(const std::string& path) {
  Csv csv;
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  csv.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& f : split(line, ','))
      row.push_back(std::strtod(f.c_str(), nullptr));
    REQUIRE(row.size() == csv.header.size());
    csv.rows.push_back(row);
  }
  return csv;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  REQUIRE(out.good());
}

}  // namespace

TEST_CASE("renewal subcommand emits the renewal table") {
  auto r = run_cli(
      "renewal --dist exp:rate=1 --h 0.01 --umax 20 --out cli_ren.csv");
  CHECK(r.exit_code == 0);
  Csv csv = read_csv("cli_ren.csv");
  REQUIRE(csv.header.size() == 2);
  CHECK(csv.header[0] == "u");
  CHECK(csv.header[1] == "Ue");
  REQUIRE(csv.rows.size() == 2001);
  // exponential case: affine renewal function, value 11 at u = 10
  bool found = false;
  for (const auto& row : csv.rows) {
    if (std::abs(row[0] - 10.0) < 1e-9) {
      CHECK(std::abs(row[1] - 11.0) <= 0.011);
      found = true;
    }
  }
  CHECK(found);
  CHECK(csv.rows.front()[0] == 0.0);
  CHECK(csv.rows.back()[0] == doctest::Approx(20.0));
  std::remove("cli_ren.csv");
}

TEST_CASE("renewal long-run discrepancy table starts at zero offset") {
  auto r = run_cli(
      "renewal --dist exp:rate=1 --h 0.01 --umax 20 --t 5 "
      "--out cli_ren2.csv --blackwell-out cli_bw.csv");
  CHECK(r.exit_code == 0);
  Csv bw = read_csv("cli_bw.csv");
  REQUIRE(bw.header.size() == 3);
  CHECK(bw.header[0] == "t");
  CHECK(bw.header[1] == "s");
  CHECK(bw.header[2] == "D");
  REQUIRE(!bw.rows.empty());
  CHECK(bw.rows.front()[0] == 5.0);
  CHECK(bw.rows.front()[1] == 0.0);
  CHECK(bw.rows.front()[2] == 0.0);  // zero window, exactly zero discrepancy
  // exponential input: every discrepancy is tiny
  for (const auto& row : bw.rows) CHECK(std::abs(row[2]) <= 1e-2);
  std::remove("cli_ren2.csv");
  std::remove("cli_bw.csv");
}

TEST_CASE("identical invocations produce byte-identical output files") {
  const std::string args =
      "gap --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.01 --umax 12 --r 0,1,2 --out ";
  auto r1 = run_cli(args + "cli_gap_a.csv");
  auto r2 = run_cli(args + "cli_gap_b.csv");
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  std::string a = slurp("cli_gap_a.csv");
  std::string b = slurp("cli_gap_b.csv");
  CHECK(!a.empty());
  CHECK(a == b);
  std::remove("cli_gap_a.csv");
  std::remove("cli_gap_b.csv");
}

TEST_CASE("gap subcommand reproduces the closed-form stationarity gap") {
  auto r = run_cli(
      "gap --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.01 --umax 12 --r 0,2 --out cli_gap.csv");
  CHECK(r.exit_code == 0);
  Csv csv = read_csv("cli_gap.csv");
  REQUIRE(csv.header.size() == 3);
  CHECK(csv.header[0] == "r");
  CHECK(csv.header[1] == "gap");
  CHECK(csv.header[2] == "truncated_at");
  REQUIRE(csv.rows.size() == 2);
  // uniform initial state on (0,2) with unit exponential service:
  // the observable gap at r = 0 is 1/3 and decays to grid noise by r = 2
  CHECK(std::abs(csv.rows[0][1] - 1.0 / 3.0) <= 5e-3);
  CHECK(csv.rows[1][1] <= 5e-3);
  CHECK(csv.rows[0][2] == 12.0);
  std::remove("cli_gap.csv");
}

TEST_CASE("solve subcommand writes the trajectory summary") {
  auto r = run_cli(
      "solve --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.01 --umax 12 --xmax 4 --hx 0.01 --t 0,1,2.3333,3 "
      "--out cli_solve.csv");
  CHECK(r.exit_code == 0);
  Csv csv = read_csv("cli_solve.csv");
  REQUIRE(csv.header.size() == 7);
  CHECK(csv.header[0] == "t");
  CHECK(csv.header[1] == "Sbar");
  CHECK(csv.header[2] == "Zbar");
  CHECK(csv.header[3] == "workload");
  CHECK(csv.header[4] == "snapshot_mass");
  CHECK(csv.header[5] == "rho_limit");
  CHECK(csv.header[6] == "rho_limit_err");
  REQUIRE(csv.rows.size() == 4);
  CHECK(csv.rows[0][0] == 0.0);
  CHECK(std::abs(csv.rows[0][2] - 1.0) <= 1e-9);  // initial mass
  for (const auto& row : csv.rows) {
    CHECK(std::abs(row[3] - 1.0) <= 5e-3);  // workload is conserved
    CHECK(row[5] >= 0.0);
  }
  // total mass peaks then returns to 1 at the collapse time
  CHECK(std::abs(csv.rows[2][2] - 1.0) <= 5e-3);
  // near the collapse time the state is close to its limit
  CHECK(csv.rows[3][5] <= 0.05);
  std::remove("cli_solve.csv");
}

TEST_CASE("solve snapshots-out writes per-time distribution tables") {
  auto r = run_cli(
      "solve --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.02 --umax 6 --xmax 2 --hx 0.5 --t 0,1 "
      "--out cli_solve2.csv --snapshots-out cli_snap.csv");
  CHECK(r.exit_code == 0);
  Csv snap = read_csv("cli_snap.csv");
  REQUIRE(snap.header.size() == 4);
  CHECK(snap.header[0] == "t");
  CHECK(snap.header[1] == "x");
  CHECK(snap.header[2] == "cdf");
  CHECK(snap.header[3] == "tail_mass");
  // two times, five nodes each (0, 0.5, 1, 1.5, 2)
  REQUIRE(snap.rows.size() == 10);
  CHECK(snap.rows[0][0] == 0.0);
  CHECK(snap.rows[5][0] == 1.0);
  // cdf columns are nondecreasing within each block
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(snap.rows[i][2] >= snap.rows[i - 1][2]);
    CHECK(snap.rows[5 + i][2] >= snap.rows[4 + i][2]);
  }
  // initial state: uniform cdf on (0,2) evaluated at 1 is one half
  CHECK(std::abs(snap.rows[2][2] - 0.5) <= 1e-9);
  std::remove("cli_solve2.csv");
  std::remove("cli_snap.csv");
}

TEST_CASE("solve beyond the horizon needs the extrapolate flag") {
  const std::string base =
      "solve --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.02 --umax 6 --xmax 2 --hx 0.1 --t 40 --out cli_far.csv";
  auto refused = run_cli(base);
  CHECK(refused.exit_code == 1);
  CHECK(refused.err.find("beyond_grid") != std::string::npos);
  auto ok = run_cli(base + " --extrapolate");
  CHECK(ok.exit_code == 0);
  Csv csv = read_csv("cli_far.csv");
  REQUIRE(csv.rows.size() == 1);
  // far beyond collapse the state sits on the limit: mass equals kappa
  CHECK(std::abs(csv.rows[0][2] - 1.0) <= 5e-3);
  CHECK(csv.rows[0][5] <= 0.05);
  std::remove("cli_far.csv");
}

TEST_CASE("invariant-check passes at the default threshold") {
  auto r = run_cli(
      "invariant-check --dist exp:rate=1 --h 0.02 --umax 6 --xmax 3 "
      "--hx 0.02 --c 1 --t 0:1:3 --out cli_inv.csv");
  CHECK(r.exit_code == 0);
  Csv csv = read_csv("cli_inv.csv");
  REQUIRE(csv.header.size() == 4);
  CHECK(csv.header[0] == "c");
  CHECK(csv.header[1] == "t");
  CHECK(csv.header[2] == "rho");
  CHECK(csv.header[3] == "rho_err");
  REQUIRE(csv.rows.size() == 4);
  for (const auto& row : csv.rows) {
    CHECK(row[0] == 1.0);
    CHECK(row[2] <= 0.02);
  }
  std::remove("cli_inv.csv");
}

TEST_CASE("invariant-check exits 2 when the threshold is unattainable") {
  auto r = run_cli(
      "invariant-check --dist exp:rate=1 --h 0.02 --umax 6 --xmax 3 "
      "--hx 0.02 --c 1 --t 0:1:3 --rho-threshold 1e-15 --out cli_inv2.csv");
  CHECK(r.exit_code == 2);
  std::remove("cli_inv2.csv");
}

TEST_CASE("cert-threshold breaches exit 2") {
  auto r = run_cli(
      "renewal --dist uniform:a=0,b=2 --h 0.05 --umax 10 "
      "--cert-threshold 1e-15 --out cli_ren3.csv");
  CHECK(r.exit_code == 2);
  std::remove("cli_ren3.csv");
}

TEST_CASE("converge subcommand reports distances to the limit state") {
  auto r = run_cli(
      "converge --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.02 --umax 8 --xmax 3 --hx 0.02 --t 0,1,2,3 "
      "--metric rho --out cli_conv.csv");
  CHECK(r.exit_code == 0);
  Csv csv = read_csv("cli_conv.csv");
  REQUIRE(csv.header.size() == 4);
  CHECK(csv.header[0] == "t");
  CHECK(csv.header[1] == "distance");
  CHECK(csv.header[2] == "distance_err");
  REQUIRE(csv.rows.size() == 4);
  // distance decays along the trajectory and is small past collapse
  CHECK(csv.rows[0][1] > csv.rows[3][1]);
  CHECK(csv.rows[3][1] <= 0.05);
  std::remove("cli_conv.csv");
}

TEST_CASE("rates subcommand emits a JSON fit") {
  auto r = run_cli(
      "rates --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.02 --umax 8 --xmax 3 --hx 0.02 --t 0.25,0.5,0.75,1,1.25,1.5 "
      "--metric rho --window 0.2:1.6 --out cli_rates.json");
  CHECK(r.exit_code == 0);
  std::string body = slurp("cli_rates.json");
  CHECK(body.find("\"metric\"") != std::string::npos);
  CHECK(body.find("\"in_ball\"") != std::string::npos);
  CHECK(body.find("\"slope\"") != std::string::npos);
  CHECK(body.find("\"C\"") != std::string::npos);
  CHECK(body.find("\"window\"") != std::string::npos);
  CHECK(body.find("\"samples\"") != std::string::npos);
  CHECK(body.find("\"in_ball\": true") != std::string::npos);
  std::remove("cli_rates.json");
}

TEST_CASE("simulate subcommand writes one row per replica and time") {
  auto r = run_cli(
      "simulate --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.02 --umax 4 --xmax 2 --hx 0.02 --t 0.5 --r 20 --seed 3 "
      "--replicas 2 --out cli_sim.csv");
  CHECK(r.exit_code == 0);
  Csv csv = read_csv("cli_sim.csv");
  REQUIRE(csv.header.size() == 9);
  CHECK(csv.header[0] == "replica");
  CHECK(csv.header[1] == "t");
  CHECK(csv.header[2] == "count");
  CHECK(csv.header[3] == "mass");
  CHECK(csv.header[4] == "rho");
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[0][0] == 0.0);
  CHECK(csv.rows[1][0] == 1.0);
  for (const auto& row : csv.rows) {
    CHECK(row[1] == 0.5);
    // mass is the job count over the scale parameter
    CHECK(std::abs(row[3] - row[2] / 20.0) <= 1e-12);
    CHECK(row[4] >= 0.0);
  }
  std::remove("cli_sim.csv");
}

TEST_CASE("malformed distribution specs exit 1 with a diagnostic") {
  auto r = run_cli("renewal --dist bogus --h 0.01 --umax 5 --out cli_x.csv");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("malformed_spec") != std::string::npos);
  std::remove("cli_x.csv");
}

TEST_CASE("missing required flags are a usage error") {
  auto r = run_cli("solve --dist exp:rate=1");
  CHECK(r.exit_code != 0);
  CHECK(r.exit_code != 2);
}

TEST_CASE("unknown metric names exit 1") {
  auto r = run_cli(
      "converge --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=1 "
      "--h 0.05 --umax 4 --xmax 2 --hx 0.05 --t 1 --metric bogus "
      "--out cli_y.csv");
  CHECK(r.exit_code == 1);
  std::remove("cli_y.csv");
}

TEST_CASE("config files mirror command line flags") {
  write_file("cli_cfg.ini",
             "[renewal]\n"
             "dist=\"exp:rate=1\"\n"
             "h=0.01\n"
             "umax=20\n");
  auto direct = run_cli(
      "renewal --dist exp:rate=1 --h 0.01 --umax 20 --out cli_cfg_a.csv");
  auto via_cfg =
      run_cli("--config cli_cfg.ini renewal --out cli_cfg_b.csv");
  CHECK(direct.exit_code == 0);
  CHECK(via_cfg.exit_code == 0);
  std::string a = slurp("cli_cfg_a.csv");
  std::string b = slurp("cli_cfg_b.csv");
  CHECK(!a.empty());
  CHECK(a == b);
  // explicit flags override config values
  auto overridden =
      run_cli("--config cli_cfg.ini renewal --umax 25 --out cli_cfg_c.csv");
  CHECK(overridden.exit_code == 0);
  std::string c = slurp("cli_cfg_c.csv");
  CHECK(c != a);
  CHECK(c.size() > a.size());
  std::remove("cli_cfg.ini");
  std::remove("cli_cfg_a.csv");
  std::remove("cli_cfg_b.csv");
  std::remove("cli_cfg_c.csv");
}

TEST_CASE("mixture initial states parse across repeated init flags") {
  auto r = run_cli(
      "solve --dist exp:rate=1 --init uniformdensity:a=0,b=2,mass=0.5 "
      "--init scaledexcess:c=0.5 --h 0.02 --umax 6 --xmax 3 --hx 0.02 "
      "--t 0 --out cli_mix.csv");
  CHECK(r.exit_code == 0);
  Csv csv = read_csv("cli_mix.csv");
  REQUIRE(csv.rows.size() == 1);
  CHECK(std::abs(csv.rows[0][2] - 1.0) <= 1e-6);  // masses add
  std::remove("cli_mix.csv");
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-fluidps> [doctest args]\n");
    return 1;
  }
  g_cli = argv[1];
  doctest::Context ctx;
  // hand doctest everything except the binary path
  std::vector<char*> rest;
  rest.push_back(argv[0]);
  for (int i = 2; i < argc; ++i) rest.push_back(argv[i]);
  ctx.applyCommandLine(static_cast<int>(rest.size()), rest.data());
  return ctx.run();
}
