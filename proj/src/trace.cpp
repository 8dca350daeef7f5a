#include "farmsim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace farmsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(Trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool ParseDouble(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool ParseInt(const std::string& s, int& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return false;
  out = static_cast<int>(v);
  return true;
}

std::map<int, int> TypeIndex(const Scenario& scenario) {
  std::map<int, int> index;
  for (std::size_t j = 0; j < scenario.job_types.size(); ++j) {
    index[scenario.job_types[j].id] = static_cast<int>(j);
  }
  return index;
}

}  // namespace

ParsedTrace ParseTrace(std::istream& in, const std::vector<int>& known_types) {
  ParsedTrace trace;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string text = Trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::vector<std::string> fields = SplitCsv(text);
    if (row == 1 && !fields.empty() && fields[0] == "timestamp_s") continue;
    TraceArrival a;
    if (fields.size() != 2 || !ParseDouble(fields[0], a.timestamp) || a.timestamp < 0.0 ||
        !ParseInt(fields[1], a.type_id)) {
      ++trace.malformed;
      trace.malformed_rows.push_back(row);
      continue;
    }
    if (!known_types.empty() &&
        std::find(known_types.begin(), known_types.end(), a.type_id) == known_types.end()) {
      throw TraceError("trace row " + std::to_string(row) + ": unknown job type " +
                           std::to_string(a.type_id),
                       row);
    }
    trace.arrivals.push_back(a);
  }
  std::stable_sort(trace.arrivals.begin(), trace.arrivals.end(),
                   [](const TraceArrival& a, const TraceArrival& b) { return a.timestamp < b.timestamp; });
  return trace;
}

ParsedTrace LoadTrace(const std::string& path, const std::vector<int>& known_types) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open trace file " + path);
  return ParseTrace(in, known_types);
}

void WriteTrace(std::ostream& out, const std::vector<TraceArrival>& arrivals) {
  out << "timestamp_s,type_id\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const TraceArrival& a : arrivals) out << a.timestamp << ',' << a.type_id << '\n';
}

double RateProfile::MeanRate(std::size_t type) const {
  const std::vector<double>& r = rates.at(type);
  if (r.empty()) return 0.0;
  double sum = 0.0;
  for (double x : r) sum += x;
  return sum / static_cast<double>(r.size());
}

RateProfile HourlyRates(const std::vector<TraceArrival>& arrivals, const std::vector<int>& type_ids,
                        int hours) {
  if (hours <= 0) {
    hours = 1;
    for (const TraceArrival& a : arrivals) {
      hours = std::max(hours, static_cast<int>(std::floor(a.timestamp / kHour)) + 1);
    }
  }
  RateProfile profile;
  profile.type_ids = type_ids;
  std::vector<std::vector<long>> counts(type_ids.size(), std::vector<long>(static_cast<std::size_t>(hours), 0));
  for (const TraceArrival& a : arrivals) {
    const auto it = std::find(type_ids.begin(), type_ids.end(), a.type_id);
    if (it == type_ids.end()) throw ScenarioError("arrival of unknown type " + std::to_string(a.type_id));
    const int bucket = static_cast<int>(std::floor(a.timestamp / kHour));
    if (bucket >= hours) continue;
    ++counts[static_cast<std::size_t>(it - type_ids.begin())][bucket];
  }
  for (const std::vector<long>& c : counts) {
    std::vector<double>& r = profile.rates.emplace_back();
    for (long n : c) r.push_back(static_cast<double>(n) / kHour);
  }
  return profile;
}

void WriteRateProfile(std::ostream& out, const RateProfile& profile) {
  out << "type_id,hour_index,rate_per_s\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t j = 0; j < profile.type_ids.size(); ++j) {
    for (std::size_t b = 0; b < profile.rates[j].size(); ++b) {
      out << profile.type_ids[j] << ',' << b << ',' << profile.rates[j][b] << '\n';
    }
  }
}

RateProfile ReadRateProfile(std::istream& in) {
  std::map<int, std::map<int, double>> table;
  std::string line;
  long row = 0;
  int hours = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string text = Trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::vector<std::string> f = SplitCsv(text);
    if (row == 1 && !f.empty() && f[0] == "type_id") continue;
    int type = 0, hour = 0;
    double rate = 0.0;
    if (f.size() != 3 || !ParseInt(f[0], type) || !ParseInt(f[1], hour) || !ParseDouble(f[2], rate) ||
        hour < 0 || rate < 0.0) {
      throw TraceError("rate profile row " + std::to_string(row) + " is malformed", row);
    }
    table[type][hour] = rate;
    hours = std::max(hours, hour + 1);
  }
  RateProfile profile;
  for (const auto& [type, by_hour] : table) {
    profile.type_ids.push_back(type);
    if (static_cast<int>(by_hour.size()) != hours) {
      throw ScenarioError("rate profile for type " + std::to_string(type) + " is missing hours");
    }
    std::vector<double> r;
    for (const auto& entry : by_hour) r.push_back(entry.second);
    profile.rates.push_back(std::move(r));
  }
  return profile;
}

RateProfile LoadRateProfile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open rate profile " + path);
  return ReadRateProfile(in);
}

ReplayArrivals::ReplayArrivals(const Scenario& scenario, std::vector<TraceArrival> arrivals,
                               int cycles, double period)
    : cycles_(std::max(cycles, 1)), period_(period) {
  const std::map<int, int> index = TypeIndex(scenario);
  arrivals_.reserve(arrivals.size());
  for (const TraceArrival& a : arrivals) {
    const auto it = index.find(a.type_id);
    if (it == index.end()) throw ScenarioError("trace references unknown job type " + std::to_string(a.type_id));
    arrivals_.push_back({a.timestamp, it->second});
  }
  std::stable_sort(arrivals_.begin(), arrivals_.end(),
                   [](const Arrival& a, const Arrival& b) { return a.time < b.time; });
  if (cycles_ > 1 && !arrivals_.empty() && period_ < arrivals_.back().time) {
    throw ScenarioError("replay period shorter than the trace");
  }
}

std::optional<Arrival> ReplayArrivals::Next() {
  if (next_ >= arrivals_.size()) {
    if (++cycle_ >= cycles_ || arrivals_.empty()) return std::nullopt;
    next_ = 0;
  }
  Arrival a = arrivals_[next_++];
  a.time += cycle_ * period_;
  return a;
}

NhppArrivals::NhppArrivals(const Scenario& scenario, const RateProfile& profile, std::uint64_t seed,
                           int cycles)
    : width_(profile.bucket_width) {
  const std::size_t types = scenario.job_types.size();
  rates_.assign(types, std::vector<double>(static_cast<std::size_t>(profile.buckets()), 0.0));
  for (std::size_t p = 0; p < profile.type_ids.size(); ++p) {
    const int id = profile.type_ids[p];
    bool found = false;
    for (std::size_t j = 0; j < types; ++j) {
      if (scenario.job_types[j].id == id) {
        rates_[j] = profile.rates[p];
        found = true;
      }
    }
    if (!found) throw ScenarioError("rate profile references unknown job type " + std::to_string(id));
  }
  const int buckets = profile.buckets();
  for (std::vector<double>& r : rates_) {
    std::vector<double> cycle = r;
    for (int c = 1; c < cycles; ++c) r.insert(r.end(), cycle.begin(), cycle.end());
  }
  end_ = width_ * buckets * std::max(cycles, 1);
  next_.assign(types, 0.0);
  for (std::size_t j = 0; j < types; ++j) {
    rngs_.push_back(MakeStream(seed, StreamKind::kTrace, j));
    Draw(j);
  }
}

// Memoryless within a bucket: a draw that crosses a boundary restarts there.
void NhppArrivals::Draw(std::size_t j) {
  double t = next_[j];
  for (;;) {
    if (t >= end_) {
      next_[j] = kInf;
      return;
    }
    const std::size_t b = static_cast<std::size_t>(std::floor(t / width_));
    if (b >= rates_[j].size()) {
      next_[j] = kInf;
      return;
    }
    const double bucket_end = (static_cast<double>(b) + 1.0) * width_;
    const double rate = rates_[j][b];
    if (rate > 0.0) {
      const double candidate = t + std::exponential_distribution<double>(rate)(rngs_[j]);
      if (candidate < bucket_end) {
        next_[j] = candidate;
        return;
      }
    }
    t = bucket_end;
  }
}

std::optional<Arrival> NhppArrivals::Next() {
  if (next_.empty()) return std::nullopt;
  const std::size_t j =
      static_cast<std::size_t>(std::min_element(next_.begin(), next_.end()) - next_.begin());
  if (next_[j] == kInf) return std::nullopt;
  const Arrival a{next_[j], static_cast<int>(j)};
  Draw(j);
  return a;
}

ArrivalFactory ReplayFactory(std::vector<TraceArrival> arrivals, int cycles, double period) {
  auto shared = std::make_shared<const std::vector<TraceArrival>>(std::move(arrivals));
  return [shared, cycles, period](const Scenario& scenario, std::uint64_t) {
    return std::make_unique<ReplayArrivals>(scenario, *shared, cycles, period);
  };
}

ArrivalFactory NhppFactory(RateProfile profile, int cycles) {
  auto shared = std::make_shared<const RateProfile>(std::move(profile));
  return [shared, cycles](const Scenario& scenario, std::uint64_t seed) {
    return std::make_unique<NhppArrivals>(scenario, *shared, seed, cycles);
  };
}

std::vector<TraceArrival> SynthesizeTrace(const RateProfile& profile, std::uint64_t seed) {
  Scenario shell;
  for (int id : profile.type_ids) {
    JobType t;
    t.id = id;
    shell.job_types.push_back(t);
  }
  NhppArrivals stream(shell, profile, seed);
  std::vector<TraceArrival> out;
  while (auto a = stream.Next()) out.push_back({a->time, profile.type_ids[a->type]});
  return out;
}

}  // namespace farmsim
