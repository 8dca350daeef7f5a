#include "farmsim/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "farmsim/engine.hpp"
#include "farmsim/fluid.hpp"
#include "farmsim/scenario_io.hpp"
#include "farmsim/stats.hpp"
#include "farmsim/trace.hpp"

namespace farmsim::cli {

std::uint64_t Fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::vector<std::string> ParseNameList(const std::string& text) {
  std::vector<std::string> names;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) names.push_back(item);
  }
  return names;
}

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> values;
  for (const std::string& item : ParseNameList(text)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ScenarioError("not an integer: '" + item + "'");
    values.push_back(v);
  }
  return values;
}

namespace {

struct Settings {
  std::string config;
  std::optional<std::uint64_t> generate_seed;
  int groups = 5;
  int types = 3;
  double rho = 0.6;
  std::string mode = "single";
  int buffer = 0;

  std::string h_list = "1";
  std::uint64_t seed = 1;
  int reps = 10;
  int max_reps = 0;
  double target = 0.03;
  double horizon = 1e4;
  double warmup = -1.0;
  std::string out_dir;
  std::string policy = "pas";
  std::string discipline;
  std::string tie;
  std::string dist;
  bool all_rows = false;
};

struct Source {
  Scenario scenario;
  std::string fixture;
};

GeneratorParams GeneratorFrom(const Settings& s) {
  GeneratorParams p;
  p.groups = s.groups;
  p.types = s.types;
  p.rho = s.rho;
  p.buffer = s.buffer;
  if (s.mode == "single") {
    p.mode = GeneratorMode::kSingleType;
  } else if (s.mode == "multi") {
    p.mode = GeneratorMode::kMultiType;
  } else {
    throw ScenarioError("unknown generator mode '" + s.mode + "'");
  }
  return p;
}

Source LoadSource(const Settings& s) {
  Source src;
  if (!s.config.empty()) {
    src.scenario = LoadScenario(s.config);
    src.fixture = std::filesystem::path(s.config).stem().string();
  } else if (s.generate_seed) {
    src.scenario = GenerateScenario(*s.generate_seed, GeneratorFrom(s));
    src.fixture = src.scenario.name;
  } else {
    throw ScenarioError("either --config or --generate-seed is required");
  }
  if (s.buffer > 0) {
    for (ServerGroup& g : src.scenario.groups) g.buffer = s.buffer;
  }
  if (!s.tie.empty()) src.scenario.tie_break = TieBreakFromString(s.tie);
  src.scenario.Validate();
  return src;
}

// "mixed" cycles exponential, Pareto-F and Pareto-INF over the job types.
void ApplyDistribution(Scenario& scenario, const std::string& dist) {
  if (dist.empty()) return;
  for (std::size_t j = 0; j < scenario.job_types.size(); ++j) {
    SizeDistribution& d = scenario.job_types[j].size_dist;
    SizeKind kind;
    if (dist == "mixed") {
      static constexpr SizeKind kCycle[] = {SizeKind::kExponential, SizeKind::kParetoFinite,
                                            SizeKind::kParetoInfinite};
      kind = kCycle[j % 3];
    } else {
      kind = SizeKindFromString(dist);
    }
    switch (kind) {
      case SizeKind::kExponential: d = SizeDistribution::Exponential(); break;
      case SizeKind::kParetoFinite: d = SizeDistribution::ParetoFinite(); break;
      case SizeKind::kParetoInfinite: d = SizeDistribution::ParetoInfinite(); break;
      case SizeKind::kDeterministic: d = SizeDistribution::Deterministic(); break;
    }
  }
}

std::string Hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string Join(const std::vector<double>& values) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ";" : "") << values[i];
  return os.str();
}

class Output {
 public:
  Output(const Settings& s, const std::string& name, std::ostream& fallback) : stream_(&fallback) {
    if (!s.out_dir.empty()) {
      std::filesystem::create_directories(s.out_dir);
      const std::string path = (std::filesystem::path(s.out_dir) / (name + ".csv")).string();
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ScenarioError("cannot write " + path);
      stream_ = file_.get();
    }
    *stream_ << std::setprecision(10);
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::vector<std::string> OrDefault(const std::string& list, const std::string& fallback) {
  std::vector<std::string> v = ParseNameList(list);
  if (v.empty()) v.push_back(fallback);
  return v;
}

std::vector<int> HList(const Settings& s) {
  std::vector<int> hs = ParseIntList(s.h_list);
  if (hs.empty()) throw ScenarioError("--h needs at least one value");
  for (int h : hs) {
    if (h < 1) throw ScenarioError("scaling values must be positive");
  }
  return hs;
}

int Simulate(const Settings& s, std::ostream& out, bool sweep) {
  const Source src = LoadSource(s);
  const std::vector<int> hs = HList(s);
  Output csv(s, sweep ? "sweep_h" : "simulate", out);
  *csv << "fixture,config_hash,seed,policy,discipline,tie,dist,h,row,rep,window,L,L_hw,E,E_hw,EE,EE_hw,"
          "blocking,blocking_hw,ee_opt,deviation,deviation_hw,"
       << (sweep ? "log_deviation," : "") << "certified,converged\n";
  bool partial = false;
  for (const std::string& policy : OrDefault(s.policy, "pas")) {
    for (const std::string& disc : OrDefault(s.discipline, ToString(src.scenario.discipline))) {
      for (const std::string& dist : OrDefault(s.dist, "")) {
        Scenario base = src.scenario;
        base.discipline = DisciplineFromString(disc);
        ApplyDistribution(base, dist);
        const std::string dist_name = dist.empty() ? "scenario" : dist;
        for (int h : hs) {
          const Scenario scaled = Scale(base, h);
          RunOptions options;
          options.policy = PolicyKindFromString(policy);
          options.horizon = s.horizon;
          options.warmup = s.warmup;
          options.seed = s.seed;
          std::ostringstream tag;
          tag << ScenarioToJson(base) << '|' << policy << '|' << h << '|' << s.horizon << '|'
              << s.warmup << '|' << s.reps << '|' << s.max_reps;
          const std::string hash = Hex(Fnv1a(tag.str()));

          Aggregate agg = s.max_reps > s.reps ? RunUntilPrecise(scaled, options, s.reps, s.max_reps, s.target)
                                              : RunReplications(scaled, options, s.reps);
          const BenchmarkResult bench = OptEnergyEfficiency(scaled);
          const bool certified =
              ComputeAvailabilityLoad(base).heavy_traffic || base.job_types.size() == 1;
          if (!certified || !agg.converged) partial = true;
          const double dev = NormalizedDeviation(bench.ee_opt, agg.energy_efficiency.mean);
          const double dev_hw = agg.energy_efficiency.half_width / bench.ee_opt;
          const std::string prefix = src.fixture + "," + hash + "," + std::to_string(s.seed) + "," +
                                     policy + "," + disc + "," + ToString(base.tie_break) + "," +
                                     dist_name + "," + std::to_string(h) + ",";
          if (s.all_rows && !sweep) {
            for (std::size_t r = 0; r < agg.replications.size(); ++r) {
              const Metrics& m = agg.replications[r];
              *csv << prefix << "replication," << r << ',' << m.window << ',' << m.throughput << ",0,"
                   << m.power << ",0," << m.energy_efficiency << ",0," << Join(m.blocking) << ",,"
                   << bench.ee_opt << ',' << NormalizedDeviation(bench.ee_opt, m.energy_efficiency)
                   << ",0," << (certified ? 1 : 0) << ",1\n";
            }
          }
          std::vector<double> block, block_hw;
          for (const Estimate& e : agg.blocking) {
            block.push_back(e.mean);
            block_hw.push_back(e.half_width);
          }
          *csv << prefix << "aggregate," << agg.replications.size() << ','
               << agg.replications.front().window << ',' << agg.throughput.mean << ','
               << agg.throughput.half_width << ',' << agg.power.mean << ',' << agg.power.half_width
               << ',' << agg.energy_efficiency.mean << ',' << agg.energy_efficiency.half_width << ','
               << Join(block) << ',' << Join(block_hw) << ',' << bench.ee_opt << ',' << dev << ','
               << dev_hw << ',';
          if (sweep) {
            if (dev > 0.0) {
              *csv << std::log(dev);
            } else {
              *csv << "nan";
            }
            *csv << ',';
          }
          *csv << (certified ? 1 : 0) << ',' << (agg.converged ? 1 : 0) << '\n';
        }
      }
    }
  }
  return partial ? kExitPartial : kExitOk;
}

int Benchmark(const Settings& s, std::ostream& out) {
  const Source src = LoadSource(s);
  Output csv(s, "benchmark", out);
  *csv << "fixture,config_hash,seed,h,ee_opt,throughput,power,A,heavy_traffic,certified,approximate,"
          "indices,z\n";
  bool partial = false;
  for (int h : HList(s)) {
    Scenario scaled = Scale(src.scenario, h);
    ApplyDistribution(scaled, s.dist);
    const BenchmarkResult b = OptEnergyEfficiency(scaled);
    if (!b.certified) partial = true;
    *csv << src.fixture << ',' << Hex(Fnv1a(ScenarioToJson(scaled))) << ',' << s.seed << ',' << h << ','
         << b.ee_opt << ',' << b.throughput << ',' << b.power << ',' << Join(b.availability.A) << ','
         << (b.availability.heavy_traffic ? 1 : 0) << ',' << (b.certified ? 1 : 0) << ','
         << (b.approximate ? 1 : 0) << ',' << Join(b.indices) << ',' << Join(b.equilibrium.z.z) << '\n';
  }
  return partial ? kExitPartial : kExitOk;
}

int Generate(const Settings& s, std::ostream& out) {
  if (!s.generate_seed) throw ScenarioError("generate needs --generate-seed");
  Scenario scenario = GenerateScenario(*s.generate_seed, GeneratorFrom(s));
  if (!s.tie.empty()) scenario.tie_break = TieBreakFromString(s.tie);
  if (!s.discipline.empty()) scenario.discipline = DisciplineFromString(s.discipline);
  ApplyDistribution(scenario, s.dist);
  const std::string json = ScenarioToJson(scenario);
  if (s.out_dir.empty()) {
    out << json;
  } else {
    std::filesystem::create_directories(s.out_dir);
    const auto path = std::filesystem::path(s.out_dir) / (scenario.name + ".json");
    SaveScenario(scenario, path.string());
    out << path.string() << '\n';
  }
  return kExitOk;
}

struct TraceSettings {
  std::string trace;
  std::string profile;
  std::string buffers;
  std::string synthesize;
  int warmup_cycles = 6;
};

int Trace(const Settings& s, const TraceSettings& t, std::ostream& out, std::ostream& err) {
  if (!t.synthesize.empty()) {
    if (t.profile.empty()) throw ScenarioError("--synthesize needs --profile");
    std::ofstream file(t.synthesize);
    if (!file) throw ScenarioError("cannot write " + t.synthesize);
    WriteTrace(file, SynthesizeTrace(LoadRateProfile(t.profile), s.seed));
    return kExitOk;
  }
  const Source src = LoadSource(s);
  std::vector<int> type_ids;
  for (const JobType& j : src.scenario.job_types) type_ids.push_back(j.id);

  ArrivalFactory factory;
  double period = 0.0;
  std::string input_tag;
  const int cycles = t.warmup_cycles + 1;
  if (!t.trace.empty()) {
    ParsedTrace parsed = LoadTrace(t.trace, type_ids);
    if (parsed.malformed > 0) {
      err << "trace: skipped " << parsed.malformed << " malformed rows\n";
    }
    const RateProfile profile = HourlyRates(parsed.arrivals, type_ids);
    period = profile.period();
    factory = ReplayFactory(std::move(parsed.arrivals), cycles, period);
    input_tag = t.trace;
  } else if (!t.profile.empty()) {
    RateProfile profile = LoadRateProfile(t.profile);
    period = profile.period();
    factory = NhppFactory(std::move(profile), cycles);
    input_tag = t.profile;
  } else {
    throw ScenarioError("trace needs --trace or --profile");
  }
  if (!(period > 0.0)) throw ScenarioError("trace covers no time");

  std::vector<int> buffers = ParseIntList(t.buffers);
  if (buffers.empty()) buffers.push_back(0);

  Output csv(s, "trace", out);
  *csv << "fixture,config_hash,seed,policy,discipline,buffer,hour,L,E,EE,arrivals,blocked,blocking,"
          "completed_work\n";
  for (int buffer : buffers) {
    Scenario scenario = src.scenario;
    if (buffer > 0) {
      for (ServerGroup& g : scenario.groups) g.buffer = buffer;
    }
    ApplyDistribution(scenario, s.dist);
    for (const std::string& policy : OrDefault(s.policy, "pas")) {
      for (const std::string& disc : OrDefault(s.discipline, ToString(scenario.discipline))) {
        scenario.discipline = DisciplineFromString(disc);
        RunOptions options;
        options.policy = PolicyKindFromString(policy);
        options.arrivals = factory;
        options.warmup = period * t.warmup_cycles;
        options.horizon = period * cycles;
        options.bin_width = kHour;
        options.seed = s.seed;
        const Metrics m = Run(scenario, options);
        const std::string hash =
            Hex(Fnv1a(ScenarioToJson(scenario) + "|" + policy + "|" + input_tag + "|" +
                      std::to_string(t.warmup_cycles)));
        const std::string prefix = src.fixture + "," + hash + "," + std::to_string(s.seed) + "," +
                                   policy + "," + disc + "," +
                                   std::to_string(scenario.groups.front().buffer) + ",";
        auto emit = [&](const std::string& hour, double l, double e, double ee,
                        const std::vector<TypeCounts>& counts, double work) {
          long arrivals = 0, blocked = 0;
          for (const TypeCounts& c : counts) {
            arrivals += c.arrivals;
            blocked += c.blocked;
          }
          *csv << prefix << hour << ',' << l << ',' << e << ',' << ee << ',' << arrivals << ','
               << blocked << ',' << (arrivals > 0 ? static_cast<double>(blocked) / arrivals : 0.0)
               << ',' << work << '\n';
        };
        for (std::size_t b = 0; b < m.bins.size(); ++b) {
          const BinMetrics& bin = m.bins[b];
          emit(std::to_string(b), bin.throughput, bin.power, bin.energy_efficiency, bin.types,
               bin.completed_work);
        }
        emit("total", m.throughput, m.power, m.energy_efficiency, m.window_counts, m.completed_work);
      }
    }
  }
  return kExitOk;
}

void AddScenarioOptions(CLI::App* app, Settings& s) {
  app->set_help_flag("--help", "Print this help message and exit");
  app->add_option("--config", s.config, "Scenario JSON file");
  app->add_option("--generate-seed", s.generate_seed, "Generate the scenario from this seed instead");
  app->add_option("--groups", s.groups, "Generator: number of server groups");
  app->add_option("--types", s.types, "Generator: number of job types (multi mode)");
  app->add_option("--rho", s.rho, "Generator: normalized offered traffic");
  app->add_option("--mode", s.mode, "Generator: single or multi");
  app->add_option("--buffer", s.buffer, "Override every group's buffer size");
  app->add_option("--tie", s.tie, "Tie-break rule: lltb or sqtb");
  app->add_option("--dist", s.dist, "Job sizes: exp, pareto-f, pareto-inf, mixed, det (list)");
  app->add_option("--out", s.out_dir, "Output directory (default: stdout)");
  app->add_option("--seed", s.seed, "Base random seed");
}

void AddRunOptions(CLI::App* app, Settings& s) {
  app->add_option("--h", s.h_list, "Comma-separated scaling values");
  app->add_option("--reps", s.reps, "Replications per cell");
  app->add_option("--max-reps", s.max_reps, "Cap for automatic replication doubling");
  app->add_option("--target", s.target, "Relative half-width target for doubling");
  app->add_option("--horizon", s.horizon, "Simulated time per replication");
  app->add_option("--warmup", s.warmup, "Discarded initial time (default 10% of horizon)");
  app->add_option("--policy", s.policy, "pas, jsq (list)");
  app->add_option("--discipline", s.discipline, "ps, srpt (list)");
}

}  // namespace

int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-efficient job assignment in heterogeneous server farms"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  Settings s;
  TraceSettings t;

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate policies and compare with OPT");
  AddScenarioOptions(simulate, s);
  AddRunOptions(simulate, s);
  simulate->add_flag("--all-rows", s.all_rows, "Also emit one row per replication");

  CLI::App* sweep = app.add_subcommand("sweep-h", "Deviation from OPT as a function of h");
  AddScenarioOptions(sweep, s);
  AddRunOptions(sweep, s);

  CLI::App* bench = app.add_subcommand("benchmark", "Fluid equilibrium and OPT energy efficiency");
  AddScenarioOptions(bench, s);
  bench->add_option("--h", s.h_list, "Comma-separated scaling values");

  CLI::App* gen = app.add_subcommand("generate", "Write a random scenario");
  AddScenarioOptions(gen, s);
  gen->add_option("--discipline", s.discipline, "ps or srpt");

  CLI::App* trace = app.add_subcommand("trace", "Hourly case study driven by an arrival trace");
  AddScenarioOptions(trace, s);
  trace->add_option("--policy", s.policy, "pas, jsq (list)");
  trace->add_option("--discipline", s.discipline, "ps, srpt (list)");
  trace->add_option("--trace", t.trace, "CSV with timestamp_s,type_id");
  trace->add_option("--profile", t.profile, "Hourly rate profile CSV (Poisson within each hour)");
  trace->add_option("--buffers", t.buffers, "Comma-separated buffer sizes to compare");
  trace->add_option("--warmup-cycles", t.warmup_cycles, "Trace periods replayed before measuring");
  trace->add_option("--synthesize", t.synthesize, "Write one sample path of --profile and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*simulate) return Simulate(s, out, false);
    if (*sweep) return Simulate(s, out, true);
    if (*bench) return Benchmark(s, out);
    if (*gen) return Generate(s, out);
    if (*trace) return Trace(s, t, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

int Main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("farmsim");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return Main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace farmsim::cli
