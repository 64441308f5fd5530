#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tripkg/config.hpp"
#include "tripkg/records.hpp"

namespace tripkg::synth {

/// A synthetic corpus with planted ground-truth labels, standing in for
/// private field data in tests and demos.
struct Corpus {
  std::vector<ingest::TripRecord> records;
  std::vector<std::pair<std::string, std::string>> truth;  // vehicle -> label
};

/// Cohorts (sizes from cfg.synth):
///   commuters    - fixed home/work zones shared in small groups; one
///                  morning commute every workday plus a few evening
///                  returns, so the frequency stays above 0.8 trips/day
///                  while the span and zone profiles stay concentrated
///   passing      - one or two trips through gateway corridors, at most
///                  0.16 trips/day
///   high_freq    - seven chained trips a day, every day
///   randoms      - one to three trips on most days over popularity-
///                  weighted zones
/// Within a day, trips thread (origin = previous destination) with
/// probability cfg.synth.continuity. Throws when a cohort cannot satisfy
/// its frequency constraints for the configured window.
Corpus make_corpus(const PipelineConfig& cfg, std::uint64_t seed);

void write_truth(std::ostream& out, const Corpus& corpus);
std::vector<std::pair<std::string, std::string>> read_truth(std::istream& in);

}  // namespace tripkg::synth
