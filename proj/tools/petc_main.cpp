// petc: scheduler-synthesis pipeline for periodic event-triggered loops
// sharing one network channel. Subcommands mirror the pipeline stages:
//   abstract      plant configs -> traffic model files + relation CSVs
//   synthesize    model files   -> safety strategy file
//   simulate      strategy file -> continuous closed-loop trace CSVs
//   export-uppaal model files   -> timed-game network in UPPAAL XML
//   validate      model files   -> sampling/conformance soundness report
// exit codes: 0 ok, 1 error, 2 synthesis failure, 3 conflict, 4 validation
// failure. All artifacts are byte-reproducible for a fixed config and seed.
#include <CLI11.hpp>

#include <petc/config.hpp>
#include <petc/uppaal.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace petc;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;      // overrides [output] dir when given
  unsigned seed = 0;
  double tol = 0.0;
  int threads = -1;
  std::string arbiter;
  int samples = 10000;  // validate: oracle draws per (i, k)
  int trials = 200;     // validate: conformance walks
  int events = 50;      // validate: events per walk
  bool have_seed = false, have_tol = false, have_threads = false;
};

ProjectConfig load_config(const Options& opt) {
  ProjectConfig cfg = parse_config_file(opt.config_path);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.have_seed) cfg.seed = opt.seed;
  if (opt.have_tol) cfg.sdp.tol = opt.tol;
  if (opt.have_threads) cfg.sdp.threads = opt.threads;
  if (!opt.arbiter.empty()) cfg.arbiter = arbiter_from_name(opt.arbiter);
  return cfg;
}

fs::path out_file(const ProjectConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::string model_name(int loop_id) {
  return "loop" + std::to_string(loop_id) + ".model.json";
}

Rational config_base_tick(const ProjectConfig& cfg) {
  if (cfg.base_tick) return *cfg.base_tick;
  Rational g = cfg.loops[0].h;
  for (std::size_t l = 1; l < cfg.loops.size(); ++l)
    g = rational_gcd(g, cfg.loops[l].h);
  return g;
}

std::vector<TrafficModel> load_models(const ProjectConfig& cfg) {
  std::vector<TrafficModel> models;
  for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
    const fs::path p = fs::path(cfg.out_dir) / model_name(int(l) + 1);
    std::ifstream in(p);
    if (!in)
      throw std::runtime_error("missing model file " + p.string() +
                               " (run `petc abstract` first)");
    TrafficModel m = load_traffic_json(in);
    if (m.h != cfg.loops[l].h)
      throw std::runtime_error(p.string() + ": period disagrees with config");
    models.push_back(std::move(m));
  }
  return models;
}

GameGraph compose_from(const ProjectConfig& cfg,
                       const std::vector<TrafficModel>& models) {
  std::vector<TrafficTGA> tgas;
  tgas.reserve(models.size());
  for (const auto& m : models) tgas.push_back(build_tga(m));
  return compose(tgas, build_network_tga(cfg.delta), cfg.earliness,
                 config_base_tick(cfg));
}

std::string format_state(const GameGraph& g, std::size_t idx) {
  const GameState s = g.decode(idx);
  std::ostringstream os;
  os << "regions";
  for (int q : s.region) os << ' ' << q;
  os << " clocks";
  for (int c : s.clock) os << ' ' << c;
  os << " net ";
  if (s.net == 0)
    os << "idle";
  else if (s.net == g.bad_net())
    os << "bad";
  else
    os << "inuse:" << s.net - 1;
  os << " e " << s.e;
  return os.str();
}

int cmd_abstract(const Options& opt) {
  const ProjectConfig cfg = load_config(opt);
  auto report = open_out(out_file(cfg, "abstract_report.txt"));

  for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
    const int id = int(l) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    PlantLoop plant;
    try {
      plant = make_plant(cfg.loops[l]);
    } catch (const std::exception& ex) {
      throw std::runtime_error("loop " + std::to_string(id) + ": " +
                               ex.what());
    }
    const TimingTables tables = timing_tables(plant);
    const RegionSpec spec = effective_bounds(tables, cfg.eig_threshold);
    const auto trigger = transition_relation(tables, spec, cfg.sdp);
    const auto early = early_transition_relation(tables, spec, cfg.sdp);
    const TrafficModel model =
        build_quotient(spec, trigger, early, id, plant.h);

    auto mf = open_out(out_file(cfg, model_name(id)));
    dump_traffic_json(mf, model);
    auto cf = open_out(out_file(cfg, "loop" + std::to_string(id) +
                                         ".relations.csv"));
    export_relation_csv(cf, id, model.trigger_edges, model.early_edges);

    auto tally = [](const std::vector<Edge>& es) {
      std::size_t feas = 0;
      for (const auto& e : es)
        if (e.status == FeasStatus::Feasible) ++feas;
      return std::pair<std::size_t, std::size_t>{feas, es.size() - feas};
    };
    const auto [tf, tu] = tally(model.trigger_edges);
    const auto [ef, eu] = tally(model.early_edges);
    report << "loop " << id << '\n'
           << "  h " << format_rational(model.h) << '\n'
           << "  k_bar " << plant.k_bar << '\n'
           << "  k_min " << model.k_min << '\n'
           << "  k_max " << model.k_max << '\n'
           << "  regions " << model.region_count() << '\n'
           << "  trigger_edges " << model.trigger_edges.size() << " (feasible "
           << tf << ", unknown " << tu << ")\n"
           << "  early_edges " << model.early_edges.size() << " (feasible "
           << ef << ", unknown " << eu << ")\n";

    const std::chrono::duration<double> dt =
        std::chrono::steady_clock::now() - t0;
    std::cout << "loop " << id << ": regions [" << model.k_min << ", "
              << model.k_max << "], " << model.trigger_edges.size()
              << " trigger + " << model.early_edges.size()
              << " early edges (" << dt.count() << " s)\n";
  }
  std::cout << "wrote " << cfg.out_dir << "/abstract_report.txt\n";
  return 0;
}

int cmd_synthesize(const Options& opt) {
  const ProjectConfig cfg = load_config(opt);
  const auto models = load_models(cfg);
  const GameGraph g = compose_from(cfg, models);
  const GameStats gs = game_stats(g);

  const auto t0 = std::chrono::steady_clock::now();
  const Strategy st = solve_safety(g);
  const std::chrono::duration<double> dt =
      std::chrono::steady_clock::now() - t0;

  auto report = open_out(out_file(cfg, "synth_report.txt"));
  print_game_stats(report, gs);
  report << "winning " << st.winning_count << '\n'
         << "initial " << initial_states(g).size() << '\n'
         << "losing_initial " << st.losing_initial.size() << '\n'
         << "result " << (st.success() ? "success" : "failure") << '\n';
  for (std::size_t i = 0; i < st.losing_initial.size() && i < 20; ++i)
    report << "losing: " << format_state(g, st.losing_initial[i]) << '\n';

  if (!st.success()) {
    std::cerr << "synthesis failed: " << st.losing_initial.size()
              << " initial state(s) outside the winning set, e.g. "
              << format_state(g, st.losing_initial.front()) << '\n';
    return 2;
  }

  auto sf = open_out(out_file(cfg, "strategy.txt"));
  write_strategy(sf, g, st);
  std::cout << "winning set " << st.winning_count << " of " << gs.states
            << " states (" << dt.count() << " s); wrote " << cfg.out_dir
            << "/strategy.txt\n";
  return 0;
}

int cmd_simulate(const Options& opt) {
  const ProjectConfig cfg = load_config(opt);
  const auto models = load_models(cfg);
  const GameGraph g = compose_from(cfg, models);

  const fs::path sp = fs::path(cfg.out_dir) / "strategy.txt";
  std::ifstream sin(sp);
  if (!sin)
    throw std::runtime_error("missing " + sp.string() +
                             " (run `petc synthesize` first)");
  const Strategy st = read_strategy(sin, g);

  SimConfig sim;
  sim.duration = cfg.duration;
  sim.arbiter = cfg.arbiter;
  sim.seed = cfg.seed;
  sim.prefer_wait = cfg.prefer_wait;
  for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
    if (!cfg.loops[l].x0)
      throw std::runtime_error("loop " + std::to_string(l + 1) +
                               " has no x0; simulation needs one");
    SimLoop loop;
    loop.plant = make_plant(cfg.loops[l]);
    loop.tables = timing_tables(loop.plant);
    // region bounds come from the model files so the indices the strategy
    // was synthesized over stay authoritative
    loop.spec =
        RegionSpec{models[l].k_min, models[l].k_max, cfg.eig_threshold};
    loop.x0 = *cfg.loops[l].x0;
    sim.loops.push_back(std::move(loop));
  }

  const SimTrace trace = simulate(sim, g, st);
  {
    auto tf = open_out(out_file(cfg, "trace.csv"));
    write_trace_csv(tf, trace);
    auto ef = open_out(out_file(cfg, "events.csv"));
    write_events_csv(ef, trace);
  }

  const TraceStats stats = trace_statistics(trace);
  const auto scan = conflict_scan(trace);
  auto sf = open_out(out_file(cfg, "sim_stats.txt"));
  sf.precision(17);
  sf << "ticks " << trace.ticks.size() << '\n'
     << "events " << trace.events.size() << '\n'
     << "early_fraction " << stats.early_fraction << '\n'
     << "conflicts " << trace.conflicts.size() << '\n'
     << "conflict_scan " << scan.size() << '\n'
     << "violations " << trace.violations.size() << '\n'
     << "strategy_queries " << trace.strategy_queries << '\n';
  for (const auto& ls : stats.loops) {
    sf << "loop " << ls.loop + 1 << ": natural " << ls.natural << " early "
       << ls.early << " mean_inter_event " << ls.mean_inter_event << '\n';
    sf << "loop " << ls.loop + 1 << " earliness_hist:";
    for (std::size_t b = 0; b < ls.earliness_hist.size(); ++b)
      sf << ' ' << b << ':' << ls.earliness_hist[b];
    sf << '\n';
  }
  for (const auto& v : trace.violations) sf << "violation: " << v << '\n';

  std::cout << trace.events.size() << " events over " << trace.ticks.size()
            << " ticks, early fraction " << stats.early_fraction << "; wrote "
            << cfg.out_dir << "/trace.csv\n";

  if (!trace.conflicts.empty() || !scan.empty()) {
    std::cerr << "channel conflict detected ("
              << std::max(trace.conflicts.size(), scan.size())
              << " window overlap(s))\n";
    return 3;
  }
  if (!trace.violations.empty()) {
    std::cerr << trace.violations.size() << " conformance violation(s)\n";
    return 4;
  }
  return 0;
}

int cmd_export_uppaal(const Options& opt) {
  const ProjectConfig cfg = load_config(opt);
  const auto models = load_models(cfg);
  auto xf = open_out(out_file(cfg, "ncs.xml"));
  export_uppaal(xf, models, build_network_tga(cfg.delta), cfg.earliness,
                config_base_tick(cfg));
  std::cout << "wrote " << cfg.out_dir << "/ncs.xml\n";
  return 0;
}

int cmd_validate(const Options& opt) {
  const ProjectConfig cfg = load_config(opt);
  const auto models = load_models(cfg);
  auto report = open_out(out_file(cfg, "validate_report.txt"));
  std::size_t failures = 0;

  for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
    const auto& model = models[l];
    const PlantLoop plant = make_plant(cfg.loops[l]);
    const TimingTables tables = timing_tables(plant);
    const RegionSpec spec{model.k_min, model.k_max, cfg.eig_threshold};

    // successor sets as the file states them
    std::map<std::pair<int, int>, std::set<int>> stated;
    for (const auto& e : model.trigger_edges)
      stated[{e.source, e.k}].insert(e.target);
    for (const auto& e : model.early_edges)
      stated[{e.source, e.k}].insert(e.target);

    report << "loop " << model.loop_id << " oracle sweep: samples "
           << opt.samples << " seed " << cfg.seed << '\n';
    const int k_lo = cfg.sdp.allow_sub_miet_early ? 1 : model.k_min;
    for (int i = model.k_min; i <= model.k_max; ++i) {
      for (int k = k_lo; k <= i; ++k) {
        const unsigned seed =
            cfg.seed * 2654435761u + unsigned(l) * 1000003u +
            unsigned(i) * 101u + unsigned(k);
        const std::set<int> seen =
            sampling_oracle(tables, spec, i, k, opt.samples, seed);
        const auto it = stated.find({i, k});
        const std::size_t file_size =
            it == stated.end() ? 0 : it->second.size();
        bool ok = true;
        for (int j : seen)
          if (it == stated.end() || !it->second.count(j)) ok = false;
        report << "  i=" << i << " k=" << k << " oracle " << seen.size()
               << " file " << file_size << (ok ? " ok" : " FAIL") << '\n';
        if (!ok) ++failures;
      }
    }

    // quotient conformance: natural-trigger walks of the concrete map must
    // follow edges the file admits
    std::set<std::pair<int, int>> trig;
    for (const auto& e : model.trigger_edges)
      trig.insert({e.source, e.target});
    std::mt19937 rng(cfg.seed * 2654435761u + unsigned(l) + 17u);
    std::normal_distribution<double> gauss;
    std::size_t walk_failures = 0;
    for (int t = 0; t < opt.trials; ++t) {
      Vec x(plant.n());
      for (int d = 0; d < plant.n(); ++d) x[d] = gauss(rng);
      if (x.norm() == 0.0) x[0] = 1.0;
      x.normalize();
      for (int ev = 0; ev < opt.events; ++ev) {
        const int q = region_of_state(x, tables, spec);
        Vec xn = tables.M[q - 1] * x;
        const int qn = region_of_state(xn, tables, spec);
        if (!trig.count({q, qn})) ++walk_failures;
        x = xn.normalized();
      }
    }
    report << "loop " << model.loop_id << " conformance: trials "
           << opt.trials << " events " << opt.events << " violations "
           << walk_failures << (walk_failures ? " FAIL" : " ok") << '\n';
    failures += walk_failures;
  }

  report << "result " << (failures ? "fail" : "pass") << '\n';
  if (failures) {
    std::cerr << "validation failed: " << failures
              << " check(s) outside the stated relation\n";
    return 4;
  }
  std::cout << "validation passed; wrote " << cfg.out_dir
            << "/validate_report.txt\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-triggered NCS scheduler synthesis pipeline"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "project config file")
        ->required();
    sub->add_option("--out", opt.out_dir, "artifact directory override");
    sub->add_option("--seed", opt.seed, "seed override");
    sub->add_option("--tol", opt.tol, "feasibility tolerance override");
    sub->add_option("--threads", opt.threads, "solver thread override");
    sub->add_option("--arbiter", opt.arbiter,
                    "round_robin | lowest_loop_id | seeded_random");
    return sub;
  };

  auto* sc_abstract =
      add_common(app.add_subcommand("abstract", "compute traffic models"));
  auto* sc_synth = add_common(
      app.add_subcommand("synthesize", "solve the scheduling safety game"));
  auto* sc_sim = add_common(
      app.add_subcommand("simulate", "run the continuous closed loop"));
  auto* sc_export = add_common(app.add_subcommand(
      "export-uppaal", "emit the timed-game network as UPPAAL XML"));
  auto* sc_validate = add_common(
      app.add_subcommand("validate", "check model files against the plant"));
  sc_validate->add_option("--samples", opt.samples,
                          "oracle draws per (region, firing time)");
  sc_validate->add_option("--trials", opt.trials, "conformance walks");
  sc_validate->add_option("--events", opt.events, "events per walk");

  CLI11_PARSE(app, argc, argv);
  opt.have_seed = sc_abstract->count("--seed") || sc_synth->count("--seed") ||
                  sc_sim->count("--seed") || sc_export->count("--seed") ||
                  sc_validate->count("--seed");
  opt.have_tol = sc_abstract->count("--tol") || sc_synth->count("--tol") ||
                 sc_sim->count("--tol") || sc_export->count("--tol") ||
                 sc_validate->count("--tol");
  opt.have_threads =
      sc_abstract->count("--threads") || sc_synth->count("--threads") ||
      sc_sim->count("--threads") || sc_export->count("--threads") ||
      sc_validate->count("--threads");

  try {
    if (sc_abstract->parsed()) return cmd_abstract(opt);
    if (sc_synth->parsed()) return cmd_synthesize(opt);
    if (sc_sim->parsed()) return cmd_simulate(opt);
    if (sc_export->parsed()) return cmd_export_uppaal(opt);
    if (sc_validate->parsed()) return cmd_validate(opt);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}
