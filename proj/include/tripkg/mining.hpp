#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tripkg/config.hpp"
#include "tripkg/graph.hpp"

namespace tripkg::mining {

enum class FrequencyClass { ExtremelyLow, Low, General, High };

/// Codes follow the paper: highly concentrated = 2, concentrated = 1,
/// dispersed = 0, so the three items sum to S_d in 0..6.
enum class ConcentrationLevel : int { Dispersed = 0, Concentrated = 1, HighlyConcentrated = 2 };

enum class MobilityLabel {
  PassingVehicle,
  Commuter,
  VehicleOfStable,
  VehicleOfRandom,
  VehicleOfHighFrequency,
};

inline constexpr std::size_t kLabelCount = 5;

std::string_view to_string(FrequencyClass c);
std::string_view to_string(ConcentrationLevel c);
std::string_view to_string(MobilityLabel l);
std::optional<FrequencyClass> frequency_class_from(std::string_view s);
std::optional<ConcentrationLevel> concentration_from(std::string_view s);
std::optional<MobilityLabel> label_from(std::string_view s);

/// Boundary conventions: <= t1 extremely low, (t1, t2] low, (t2, t3)
/// general, >= t3 high.
FrequencyClass classify_frequency(double trips_per_day, const MiningConfig& cfg);
FrequencyClass trip_frequency(const kg::TripKG& g, std::string_view vehicle, int day_count,
                              const MiningConfig& cfg);

/// Concentration of one count vector (per time span or per zone, for one
/// vehicle). Only categories the vehicle used count toward N; the top
/// round(0.2 N) / round(0.3 N) prefixes are clamped to at least one entry
/// so N = 1 and N = 2 stay classifiable. Comparisons are exact integer
/// arithmetic. Throws if every count is zero.
ConcentrationLevel concentration(std::span<const std::int64_t> counts);

/// Association score in [0, 100]. p[i][j] counts trips combining row
/// category i (time span, or origin zone for the OD item) with zone j.
/// The capped form limits each row term to its row total; the literal
/// form keeps the printed min(1, .) and is available for comparison.
double association_score(const std::vector<std::vector<std::int64_t>>& p, double rho,
                         AssociationFormula formula = AssociationFormula::Capped);

MobilityLabel assign_label(FrequencyClass freq, int s_d, double s_am, const MiningConfig& cfg);

struct MobilityProfile {
  std::string vehicle;
  FrequencyClass freq;
  ConcentrationLevel time_conc;
  ConcentrationLevel origin_conc;
  ConcentrationLevel dest_conc;
  int s_d;
  double score_ot;  // origin-time association
  double score_dt;  // destination-time association
  double score_od;  // origin-destination association
  double s_am;
  MobilityLabel label;
};

/// cfg.window_days when positive, else the inclusive corpus date range.
int resolve_window_days(const kg::TripKG& g, const MiningConfig& cfg);

/// One profile per vehicle, sorted by vehicle id (record order never
/// changes the result).
std::vector<MobilityProfile> mine_all(const kg::TripKG& g, const MiningConfig& cfg,
                                      int day_count = 0);

std::vector<std::pair<std::string, std::string>> label_pairs(
    std::span<const MobilityProfile> profiles);

void write_profiles(std::ostream& out, std::span<const MobilityProfile> profiles);
std::vector<MobilityProfile> read_profiles(std::istream& in);

}  // namespace tripkg::mining
