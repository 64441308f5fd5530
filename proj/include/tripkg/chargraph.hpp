#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tripkg/config.hpp"
#include "tripkg/graph.hpp"

namespace tripkg::cgraph {

/// One hyper-entity of the spatio-temporal pattern graph: all trips that
/// share a (time span, origin, destination) combination, weighted by count.
struct TripPattern {
  std::string span;
  std::string ozone;
  std::string dzone;
  std::int64_t count;
};

struct PatternDistribution {
  std::vector<TripPattern> patterns;  // first-seen order over the trips
  std::int64_t total = 0;

  double probability(std::size_t i) const {
    return double(patterns[i].count) / double(total);
  }
};

/// Aggregates the subgraph's trips into patterns. Throws on an empty
/// subgraph.
PatternDistribution build_pattern_distribution(const kg::TripKG& sub);

/// Bit vector over the configured span order: 1 where the vehicle has at
/// least one trip in that span on that date. Throws on unknown vehicles.
std::vector<std::uint8_t> temporal_vector(const kg::TripKG& sub, std::string_view vehicle, Date d,
                                          const TimeSpanConfig& spans);

/// 1 iff the previous destination equals the next origin.
int continuity_indicator(std::string_view prev_dest, std::string_view next_origin);

/// Ordered OD pairs of one vehicle's day, trip-time order. The last
/// destination is the vehicle's current position.
struct DayChain {
  std::string vehicle;
  Date date;
  std::vector<std::pair<std::string, std::string>> od;

  const std::string& current_position() const { return od.back().second; }
};

/// All (vehicle, date) chains of the subgraph with at least one trip,
/// ordered by vehicle id then date.
std::vector<DayChain> continuity_chains(const kg::TripKG& sub);

struct AssociationMatrix {
  std::vector<std::string> vehicles;
  int depth = 0;
  std::vector<std::vector<std::int64_t>> counts;  // per vehicle, levels 1..depth
  std::vector<std::vector<double>> normalized;    // all-zero rows stay zero

  bool connected(std::size_t row) const;
};

/// Spatio-temporal hyper-edges for one date. Vehicles are caller indices;
/// trips are (span, origin, destination) interned ids. SameTrip requires
/// one trip pair to share the span and an origin or destination; SameDay
/// lets the span and zone coincidences come from different trip pairs of
/// the same day. Returns deduplicated (u < v) pairs, sorted.
std::vector<std::pair<int, int>> daily_hyper_edges(
    const std::vector<std::vector<std::array<int, 3>>>& trips_by_vehicle, AssociationMatch match);

/// Builds the association matrix over the listed vehicles: hyper-edges are
/// evaluated per date and unioned; c_mn counts distinct vehicles at
/// shortest hop distance exactly n. Vehicles outside the list neither
/// count nor mediate paths.
AssociationMatrix build_association(const kg::TripKG& sub, std::span<const std::string> vehicles,
                                    int depth, AssociationMatch match = AssociationMatch::SameTrip);

/// Column mean of the normalized rows, excluding vehicles with no
/// hyper-edge. Throws if every row is zero.
std::vector<double> mean_vector(const AssociationMatrix& m);

void write_pattern_distribution(std::ostream& out, const PatternDistribution& f);
void write_association(std::ostream& out, const AssociationMatrix& m);

}  // namespace tripkg::cgraph
