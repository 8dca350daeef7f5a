#ifndef FARMSIM_TRACE_HPP_
#define FARMSIM_TRACE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "farmsim/engine.hpp"
#include "farmsim/model.hpp"

namespace farmsim {

inline constexpr double kHour = 3600.0;

struct TraceArrival {
  double timestamp = 0.0;  // seconds since trace start
  int type_id = 0;

  bool operator==(const TraceArrival&) const = default;
};

class TraceError : public ScenarioError {
 public:
  TraceError(const std::string& what, long row) : ScenarioError(what), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

struct ParsedTrace {
  std::vector<TraceArrival> arrivals;  // sorted by time, stable
  long malformed = 0;
  std::vector<long> malformed_rows;  // 1-based line numbers
};

// CSV with header `timestamp_s,type_id`. Rows that do not parse are
// skipped and counted; a type id outside `known_types` (when nonempty) is
// an error naming the row.
ParsedTrace ParseTrace(std::istream& in, const std::vector<int>& known_types = {});
ParsedTrace LoadTrace(const std::string& path, const std::vector<int>& known_types = {});
void WriteTrace(std::ostream& out, const std::vector<TraceArrival>& arrivals);

// Piecewise-constant arrival rates (jobs per second) per type and bucket.
struct RateProfile {
  double bucket_width = kHour;
  std::vector<int> type_ids;
  std::vector<std::vector<double>> rates;  // [type][bucket]

  int buckets() const { return rates.empty() ? 0 : static_cast<int>(rates[0].size()); }
  double period() const { return bucket_width * buckets(); }
  double MeanRate(std::size_t type) const;
  bool operator==(const RateProfile&) const = default;
};

// Counts per (type, hour) divided by 3600. `hours` = 0 sizes the profile to
// the last arrival (at least one bucket).
RateProfile HourlyRates(const std::vector<TraceArrival>& arrivals, const std::vector<int>& type_ids,
                        int hours = 0);

// CSV rows `type_id,hour_index,rate_per_s`.
void WriteRateProfile(std::ostream& out, const RateProfile& profile);
RateProfile ReadRateProfile(std::istream& in);
RateProfile LoadRateProfile(const std::string& path);

// Replays exact timestamps, repeated `cycles` times with period `period`.
class ReplayArrivals final : public ArrivalStream {
 public:
  ReplayArrivals(const Scenario& scenario, std::vector<TraceArrival> arrivals, int cycles = 1,
                 double period = 0.0);
  std::optional<Arrival> Next() override;

 private:
  std::vector<Arrival> arrivals_;
  int cycles_;
  double period_;
  std::size_t next_ = 0;
  int cycle_ = 0;
};

// Poisson arrivals whose rate is constant within each bucket, repeated
// `cycles` times.
class NhppArrivals final : public ArrivalStream {
 public:
  NhppArrivals(const Scenario& scenario, const RateProfile& profile, std::uint64_t seed,
               int cycles = 1);
  std::optional<Arrival> Next() override;

 private:
  void Draw(std::size_t j);

  std::vector<std::vector<double>> rates_;  // indexed like scenario job types
  double width_;
  double end_;
  std::vector<Rng> rngs_;
  std::vector<double> next_;
};

ArrivalFactory ReplayFactory(std::vector<TraceArrival> arrivals, int cycles = 1, double period = 0.0);
ArrivalFactory NhppFactory(RateProfile profile, int cycles = 1);

// One sample path of the profile as a trace.
std::vector<TraceArrival> SynthesizeTrace(const RateProfile& profile, std::uint64_t seed);

}  // namespace farmsim

#endif  // FARMSIM_TRACE_HPP_
