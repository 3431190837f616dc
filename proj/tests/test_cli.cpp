#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <petc/config.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

// drives the installed binary end to end on the shipped two-reactor config

namespace fs = std::filesystem;
using namespace petc;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "petc_cli_test";

int run(const std::string& args) {
  const std::string cmd =
      std::string(PETC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void copy_models(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  for (int l = 1; l <= 2; ++l) {
    const std::string name = "loop" + std::to_string(l) + ".model.json";
    fs::copy_file(from / name, to / name,
                  fs::copy_options::overwrite_existing);
  }
}

std::string pipeline_args(const std::string& sub, const fs::path& out) {
  return sub + " --config " + PETC_CONFIG_PATH + " --out " + out.string();
}

}  // namespace

TEST_CASE("full pipeline succeeds and is byte-reproducible") {
  fs::remove_all(kRoot);
  const fs::path a = kRoot / "a", b = kRoot / "b";

  const char* subs[] = {"abstract", "synthesize", "simulate", "export-uppaal",
                        "validate"};
  for (const auto* sub : subs) CHECK(run(pipeline_args(sub, a)) == 0);
  for (const auto* sub : subs) CHECK(run(pipeline_args(sub, b)) == 0);

  const char* artifacts[] = {
      "loop1.model.json", "loop2.model.json",   "loop1.relations.csv",
      "loop2.relations.csv", "abstract_report.txt", "strategy.txt",
      "synth_report.txt", "trace.csv",          "events.csv",
      "sim_stats.txt",    "ncs.xml",            "validate_report.txt"};
  for (const auto* f : artifacts) {
    INFO(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }

  // the published run: 28 communications in one second, early fraction in
  // the balanced band
  const std::string stats = slurp(a / "sim_stats.txt");
  CHECK(stats.find("events 28") != std::string::npos);
  CHECK(stats.find("conflicts 0") != std::string::npos);
  CHECK(stats.find("conflict_scan 0") != std::string::npos);
  CHECK(stats.find("violations 0") != std::string::npos);

  const std::string report = slurp(a / "validate_report.txt");
  CHECK(report.find("result pass") != std::string::npos);
  CHECK(report.find("i=6 k=6 oracle") != std::string::npos);  // per-pair sizes

  const std::string synth = slurp(a / "synth_report.txt");
  CHECK(synth.find("result success") != std::string::npos);
  CHECK(synth.find("losing_initial 0") != std::string::npos);
}

TEST_CASE("draining the earliness budget makes synthesis fail with exit 2") {
  const fs::path a = kRoot / "a", c = kRoot / "c";
  REQUIRE(fs::exists(a / "loop1.model.json"));  // pipeline case ran first
  copy_models(a, c);

  ProjectConfig cfg = parse_config_file(PETC_CONFIG_PATH);
  cfg.earliness.E = 0;
  const fs::path cfgp = kRoot / "e0.cfg";
  {
    std::ofstream out(cfgp);
    write_config(out, cfg);
  }
  CHECK(run("synthesize --config " + cfgp.string() + " --out " + c.string()) ==
        2);
  const std::string synth = slurp(c / "synth_report.txt");
  CHECK(synth.find("result failure") != std::string::npos);
  CHECK(synth.find("losing: regions") != std::string::npos);
}

TEST_CASE("deleting a trigger edge from a model file fails validation") {
  const fs::path a = kRoot / "a", d = kRoot / "d";
  REQUIRE(fs::exists(a / "loop1.model.json"));
  copy_models(a, d);

  nlohmann::json m;
  {
    std::ifstream in(d / "loop1.model.json");
    in >> m;
  }
  auto& edges = m["trigger_edges"];
  REQUIRE(edges.size() > 0);
  // drop the lowest-target successor of region 8: that transition carries
  // real probability mass, unlike the relaxation's spurious extras, so both
  // the oracle sweep and the conformance walks must notice the hole
  std::size_t victim = edges.size();
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i]["source"] == 8) {
      victim = i;
      break;
    }
  REQUIRE(victim < edges.size());
  edges.erase(victim);
  {
    std::ofstream out(d / "loop1.model.json");
    out << m.dump(2) << '\n';
  }
  CHECK(run(pipeline_args("validate", d)) == 4);
  CHECK(slurp(d / "validate_report.txt").find("result fail") !=
        std::string::npos);
}

TEST_CASE("a wait-only strategy lets natural triggers collide: exit 3") {
  const fs::path a = kRoot / "a", w = kRoot / "w";
  REQUIRE(fs::exists(a / "loop1.model.json"));
  copy_models(a, w);

  // rebuild the game the binary will compose and hand it a strategy that
  // never intervenes; the reactors' natural traffic then overlaps on the
  // shared channel
  ProjectConfig cfg = parse_config_file(PETC_CONFIG_PATH);
  std::vector<TrafficTGA> tgas;
  for (int l = 1; l <= 2; ++l) {
    std::ifstream in(w / ("loop" + std::to_string(l) + ".model.json"));
    tgas.push_back(build_tga(load_traffic_json(in)));
  }
  const GameGraph g =
      compose(tgas, build_network_tga(cfg.delta), cfg.earliness);
  Strategy st;
  st.winning.assign(g.num_states, 1);
  st.winning_count = g.num_states;
  st.move_allowed.resize(g.move_list.size());
  for (std::size_t mv = 0; mv < g.move_list.size(); ++mv)
    st.move_allowed[mv] = g.move_list[mv].kind == Move::Wait;
  {
    std::ofstream out(w / "strategy.txt");
    write_strategy(out, g, st);
  }
  CHECK(run(pipeline_args("simulate", w)) == 3);
  const std::string stats = slurp(w / "sim_stats.txt");
  CHECK(stats.find("conflicts 0") == std::string::npos);
}

TEST_CASE("scalar stable plant abstracts to a single region") {
  const fs::path s = kRoot / "s";
  fs::create_directories(s);
  const fs::path cfgp = kRoot / "scalar.cfg";
  {
    std::ofstream out(cfgp);
    out << "[loop]\na = [-1]\nb = [1]\nk = [0]\ntrigger_rho = 0.5\n"
           "h = 1/100\nk_bar = 5\nx0 = [1]\n";
  }
  CHECK(run("abstract --config " + cfgp.string() + " --out " + s.string()) ==
        0);
  std::ifstream in(s / "loop1.model.json");
  const TrafficModel m = load_traffic_json(in);
  CHECK(m.k_min == m.k_max);
  CHECK(m.region_count() == 1);
  CHECK(m.trigger_edges.size() == 1);
}

TEST_CASE("flags override the config file") {
  const fs::path a = kRoot / "a", f = kRoot / "f";
  REQUIRE(fs::exists(a / "loop1.model.json"));
  copy_models(a, f);
  CHECK(run(pipeline_args("validate", f) +
            " --seed 7 --samples 200 --trials 5 --events 5") == 0);
  const std::string report = slurp(f / "validate_report.txt");
  CHECK(report.find("samples 200 seed 7") != std::string::npos);
}

TEST_CASE("missing inputs are reported as plain errors") {
  const fs::path empty = kRoot / "empty";
  fs::create_directories(empty);
  CHECK(run(pipeline_args("synthesize", empty)) == 1);
  CHECK(run("abstract --config /nonexistent.cfg --out " + empty.string()) ==
        1);
  CHECK(run("bogus-subcommand") != 0);
}
