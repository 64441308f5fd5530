#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tripkg/config.hpp"
#include "tripkg/graph.hpp"

namespace tripkg::eval {

/// KL(p||q) with additive smoothing and renormalization on both sides.
/// Inputs are counts or unnormalized masses over the same support order.
double kl_divergence(std::span<const double> p, std::span<const double> q, double eps_smooth);

/// Trip counts per configured time span.
std::vector<double> temporal_histogram(const kg::TripKG& sub, const TimeSpanConfig& spans);

using OdKey = std::pair<std::string, std::string>;
std::map<OdKey, std::int64_t> od_histogram(const kg::TripKG& sub);

/// Aligns two OD histograms over the sorted union of their supports.
std::pair<std::vector<double>, std::vector<double>> align_od(const std::map<OdKey, std::int64_t>& a,
                                                             const std::map<OdKey, std::int64_t>& b);

/// L2 distance between the association mean vectors of the two subgraphs,
/// each built over its own full vehicle roster. Returns nothing when either
/// side has no hyper-edge at all.
std::optional<double> association_bias(const kg::TripKG& original, const kg::TripKG& generated,
                                       int depth, AssociationMatch match);

/// Threaded share of adjacent same-day trip pairs; absent when the
/// subgraph has no such pair.
std::optional<double> continuity_rate(const kg::TripKG& sub);

struct TopOdRow {
  int rank;
  std::string origin;
  std::string destination;
  double original_share;
  double generated_share;
};

/// OD pairs ranked by the original (benchmark) share, descending; ties
/// break on the OD name.
std::vector<TopOdRow> top_od_report(const kg::TripKG& original, const kg::TripKG& generated,
                                    int k);

struct LabelReport {
  std::string label;
  std::int64_t original_trips = 0;
  std::int64_t generated_trips = 0;
  std::int64_t original_vehicles = 0;
  std::int64_t generated_vehicles = 0;
  double kl_temporal = 0.0;
  double kl_spatial = 0.0;
  std::optional<double> association_bias;
  std::optional<double> continuity_generated;
  std::optional<double> continuity_historical;
};

/// Per-label comparison of a generated graph against the original. Labels
/// follow the label system order; labels absent from both sides are
/// skipped. Both graphs must have labels attached.
std::vector<LabelReport> evaluate_all(const kg::TripKG& original, const kg::TripKG& generated,
                                      const PipelineConfig& cfg);

void write_report_json(std::ostream& out, std::span<const LabelReport> reports);
void write_top_od_csv(std::ostream& out, std::string_view label, std::span<const TopOdRow> rows);

/// Plot data: per-label trip share over 15-minute bins (mining-style view)
/// and per-label ranked OD shares.
void write_time_profile_csv(std::ostream& out, const kg::TripKG& original,
                            const kg::TripKG& generated, int bin_seconds = 900);
void write_od_rank_csv(std::ostream& out, const kg::TripKG& original, const kg::TripKG& generated,
                       int k);

}  // namespace tripkg::eval
