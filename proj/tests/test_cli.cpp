// End-to-end checks of the command line tool via a real subprocess.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SWE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "swe_cli_test") { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("meshgen then validate: the smallest pipeline") {
  TempDir tmp;
  const fs::path mesh = tmp.path / "m.swem";
  CHECK(run_cli("meshgen --nx 1 --ny 1 --lx 1 --ly 1 -o " + mesh.string()) == 0);
  CHECK(fs::exists(mesh));
  CHECK(run_cli("validate --mesh " + mesh.string()) == 0);
}

TEST_CASE("validate rejects a corrupt mesh file") {
  TempDir tmp;
  const fs::path mesh = tmp.path / "bad.swem";
  std::ofstream(mesh) << "SWEMESH 1\n4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2 0 0\n0 1 2 0 0\n";
  CHECK(run_cli("validate --mesh " + mesh.string()) == 1);
}

TEST_CASE("run propagates config validation failures as exit 1") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "bad.json";
  std::ofstream(cfg) << R"({"case": {"id": "water_drop", "t_end": 1},
                            "mesh": {"generate": {"nx": 4, "ny": 4}},
                            "params": {"cfl": 1.5}})";
  CHECK(run_cli("run --config " + cfg.string()) == 1);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli("run") == 2);             // missing --config
  CHECK(run_cli("frobnicate") == 2);      // unknown subcommand
  CHECK(run_cli("") == 2);                // missing subcommand
}

TEST_CASE("run writes stats, snapshots, and the config echo") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "run.json";
  std::ofstream(cfg) << R"({
    "case": {"id": "water_drop", "lx": 100, "ly": 100, "sigma": 15, "t_end": 1.0},
    "mesh": {"generate": {"nx": 8, "ny": 8}},
    "output": {"stats_csv": ")"
                     << (tmp.path / "stats.csv").string() << R"(",
               "config_echo": ")"
                     << (tmp.path / "echo.json").string() << R"(",
               "snapshot_interval": 0.5,
               "vtk_pattern": ")"
                     << (tmp.path / "snap_%03d.vtk").string() << R"("}
  })";
  CHECK(run_cli("run --config " + cfg.string()) == 0);
  CHECK(fs::exists(tmp.path / "stats.csv"));
  CHECK(fs::exists(tmp.path / "echo.json"));
  CHECK(fs::exists(tmp.path / "snap_000.vtk"));  // initial state
  std::ifstream stats(tmp.path / "stats.csv");
  std::string header;
  std::getline(stats, header);
  CHECK(header == "step,t,dt,mass,mass_drift,max_speed,wall_ms_flux,wall_ms_update");
}

}  // TEST_SUITE
