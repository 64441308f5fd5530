#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tripkg/chargraph.hpp"
#include "tripkg/config.hpp"
#include "tripkg/graph.hpp"
#include "tripkg/records.hpp"

namespace tripkg::gen {

/// One sampled trip: time span, origin, destination. No vehicle yet.
struct TripUnitGraph {
  std::string span;
  std::string ozone;
  std::string dzone;
  bool operator==(const TripUnitGraph&) const = default;
};

struct CandidateUnit {
  TripUnitGraph unit;
  bool from_pool = true;  // false when synthesized from the span-conditioned fallback
};

/// One unit graph per active span of C(v), chronological. The continuity
/// score counts threaded adjacent pairs, including the carry-over from the
/// vehicle's current position into the first origin.
struct CandidateCombination {
  std::vector<CandidateUnit> units;
  int continuity_score = 0;
};

/// Samples n unit graphs i.i.d. from the pattern distribution.
std::vector<TripUnitGraph> generate_unit_graphs(const cgraph::PatternDistribution& f, int n,
                                                std::mt19937_64& rng);

/// Enumerates up to k combinations for the active spans. Maximal-continuity
/// combinations come first (found exactly, by dynamic programming over end
/// positions); remaining slots are filled with seeded-random alternatives.
/// A span with an empty pool group falls back to one unit sampled from the
/// distribution conditioned on that span; an empty conditional distribution
/// is an error.
std::vector<CandidateCombination> candidate_combinations(
    const std::vector<std::uint8_t>& active_spans,
    const std::optional<std::string>& current_position,
    const std::vector<std::vector<TripUnitGraph>>& pool_by_span,
    const cgraph::PatternDistribution& fallback, int k, std::mt19937_64& rng,
    const TimeSpanConfig& spans);

/// Chooses the candidate whose tentative attachment brings the generated
/// association mean vector closest (L2) to the original graph restricted to
/// dates <= date and the already-generated vehicles plus v. Returns the
/// candidate index; exits early once a deviation falls below epsilon; the
/// first minimum wins ties. Both graphs must use the same vehicle ids.
std::size_t select_optimal(const kg::TripKG& original, const kg::TripKG& generated,
                           std::string_view vehicle, Date date,
                           std::span<const CandidateCombination> candidates, double epsilon,
                           const PipelineConfig& cfg);

struct DateReport {
  std::string label;
  Date date;
  int sampled = 0;    // unit graphs drawn (original trip count of the date)
  int consumed = 0;   // pool units used by selected combinations
  int fallback = 0;   // units synthesized from the conditional distribution
  int extras = 0;     // extra same-span trips attached to rebalance counts
  int discarded = 0;  // leftover pool units dropped
  int vehicles = 0;
  int trips = 0;      // generated trips; always equals the original count
  double mean_deviation = 0.0;
};

struct GenerationResult {
  std::vector<ingest::TripRecord> records;  // pseudonymous trips, emission order
  std::vector<DateReport> reports;
  std::vector<std::pair<std::string, std::string>> labels;   // pseudonym -> label
  std::vector<std::pair<std::string, std::string>> mapping;  // original -> pseudonym
};

/// Generates one label subgraph, rolling by date.
GenerationResult generate_label(const kg::TripKG& label_sub, std::string_view label,
                                const PipelineConfig& cfg, std::uint64_t seed,
                                const std::vector<std::string>& reserved_ids = {});

/// Generates every label subgraph and concatenates the results. Labels
/// must be attached and cfg.seed set.
GenerationResult generate_all(const kg::TripKG& g, const PipelineConfig& cfg);

/// Builds the generated TripKG (records plus TripType triples).
kg::TripKG generated_graph(const GenerationResult& r, const PipelineConfig& cfg);

void write_report(std::ostream& out, std::span<const DateReport> reports);  // JSON lines
void write_mapping(std::ostream& out, const GenerationResult& r);

}  // namespace tripkg::gen
