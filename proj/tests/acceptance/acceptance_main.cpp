// Acceptance suite: runs the full pipeline on the bundled synthetic
// corpus and checks the ten release criteria, printing one line each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tripkg/chargraph.hpp"
#include "tripkg/config.hpp"
#include "tripkg/evaluate.hpp"
#include "tripkg/generator.hpp"
#include "tripkg/graph.hpp"
#include "tripkg/mining.hpp"
#include "tripkg/records.hpp"
#include "tripkg/rng.hpp"
#include "tripkg/synth.hpp"

using namespace tripkg;

namespace {

constexpr std::uint64_t kCorpusSeed = 11;
constexpr std::uint64_t kGenerationSeed = 42;

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- independent oracles ------------------------------------------------

/// Concentration re-implemented straight from the two inequalities, with
/// floating-point rounding and ascending sums.
mining::ConcentrationLevel concentration_oracle(const std::vector<std::int64_t>& counts) {
  std::vector<std::int64_t> used;
  for (const auto c : counts)
    if (c > 0) used.push_back(c);
  std::sort(used.begin(), used.end());  // ascending; prefixes read from the back
  const double n = double(used.size());
  double total = 0;
  for (const auto c : used) total += double(c);
  const auto top_sum = [&](double share) {
    auto take = std::size_t(std::floor(share * n + 0.5));
    if (take < 1) take = 1;
    double sum = 0;
    for (std::size_t i = 0; i < take && i < used.size(); ++i) {
      sum += double(used[used.size() - 1 - i]);
    }
    return sum;
  };
  if (top_sum(0.2) >= 0.8 * total) return mining::ConcentrationLevel::HighlyConcentrated;
  if (top_sum(0.3) >= 0.7 * total) return mining::ConcentrationLevel::Concentrated;
  return mining::ConcentrationLevel::Dispersed;
}

/// Association score evaluated exactly as printed, capped row form.
double association_oracle(const std::vector<std::vector<std::int64_t>>& p, double rho) {
  const auto relu = [](double x) { return x > 0 ? x : 0.0; };
  double numerator = 0, denominator = 0;
  for (const auto& row : p) {
    double row_sum = 0, row_max = 0, zones = 0;
    for (const auto c : row) {
      row_sum += double(c);
      row_max = std::max(row_max, double(c));
      if (c > 0) zones += 1;
    }
    denominator += row_sum;
    if (row_sum == 0) continue;
    const double q = std::max(1.0, rho * row_sum);
    const double term = (1.0 + relu(q - zones) / q) * row_max;
    numerator += std::min(row_sum, term);
  }
  return 100.0 * numerator / denominator;
}

/// Acklam's rational approximation of the standard normal quantile.
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - plow) return -normal_quantile(1 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();

  PipelineConfig cfg;
  cfg.seed = kGenerationSeed;

  // bundled corpus -> records -> graph -> profiles -> generated graph
  const auto corpus = synth::make_corpus(cfg, kCorpusSeed);
  std::ostringstream csv;
  ingest::write_records(csv, corpus.records);
  std::istringstream csv_in(csv.str());
  const auto parsed = ingest::parse_records(csv_in);
  auto original = kg::build_graph(parsed.records, cfg.calendar, cfg.spans);
  const auto profiles = mining::mine_all(original, cfg.mining, cfg.synth.days);
  kg::attach_labels(original, mining::label_pairs(profiles));

  const auto generated_result = gen::generate_all(original, cfg);
  const auto generated = gen::generated_graph(generated_result, cfg);
  const auto reports = eval::evaluate_all(original, generated, cfg);

  // --- criterion 1: schema validity and exact per-date conservation ----
  {
    bool pass = parsed.rejected.empty();
    std::string detail = "corpus ingests cleanly";
    try {
      kg::check_schema(generated);
    } catch (const std::exception& e) {
      pass = false;
      detail = e.what();
    }
    int fallbacks = 0;
    for (const auto d : kg::dates_of(original)) {
      const auto o = kg::date_subgraph(original, d).entity_count(kg::EntityType::Trip);
      const auto g = kg::date_subgraph(generated, d).entity_count(kg::EntityType::Trip);
      if (o != g) {
        pass = false;
        detail = "date " + d.to_string() + ": " + std::to_string(g) + " generated vs " +
                 std::to_string(o) + " original trips";
        break;
      }
    }
    for (const auto& rep : generated_result.reports) {
      fallbacks += rep.fallback;
      if (rep.sampled != rep.consumed + rep.discarded) {
        pass = false;
        detail = "pool conservation violated on " + rep.date.to_string();
      }
    }
    if (pass) {
      detail = "schema valid, per-date counts exact, " + std::to_string(fallbacks) +
               " fallback units reported";
    }
    report(1, pass, detail);
  }

  // --- criterion 2: mining operations against independent oracles ------
  {
    bool pass = mining::classify_frequency(0.16, cfg.mining) ==
                    mining::FrequencyClass::ExtremelyLow &&
                mining::classify_frequency(1.5, cfg.mining) == mining::FrequencyClass::Low &&
                mining::classify_frequency(6.7, cfg.mining) == mining::FrequencyClass::High;
    std::string detail = pass ? "boundary classes exact" : "frequency boundary mismatch";

    std::mt19937_64 rng(271828);
    int conc_fail = 0, assoc_fail = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<std::int64_t> counts(1 + uniform_index(rng, 12));
      bool any = false;
      for (auto& c : counts) {
        c = std::int64_t(uniform_index(rng, 15));
        any |= c > 0;
      }
      if (!any) counts[0] = 1;
      if (mining::concentration(counts) != concentration_oracle(counts)) ++conc_fail;

      const std::size_t rows = 1 + uniform_index(rng, 5);
      const std::size_t cols = 1 + uniform_index(rng, 6);
      std::vector<std::vector<std::int64_t>> matrix(rows, std::vector<std::int64_t>(cols));
      std::int64_t total = 0;
      for (auto& row : matrix) {
        for (auto& c : row) {
          c = std::int64_t(uniform_index(rng, 9));
          total += c;
        }
      }
      if (total == 0) matrix[0][0] = 1;
      const double rho = 0.2 + 0.1 * canonical(rng);
      const double got = mining::association_score(matrix, rho);
      const double want = association_oracle(matrix, rho);
      if (std::abs(got - want) > 1e-9) ++assoc_fail;
    }
    if (conc_fail || assoc_fail) {
      pass = false;
      detail = std::to_string(conc_fail) + " concentration and " + std::to_string(assoc_fail) +
               " association mismatches in 1000 trials";
    } else if (pass) {
      detail += ", 1000/1000 brute-force agreements";
    }
    report(2, pass, detail);
  }

  // --- criterion 3: planted cohort recall -------------------------------
  {
    std::map<std::string, std::string> truth(corpus.truth.begin(), corpus.truth.end());
    std::map<std::string, int> hits, totals;
    for (const auto& p : profiles) {
      const auto& expected = truth.at(p.vehicle);
      if (expected == "VehicleOfRandom") continue;  // not a planted guarantee
      ++totals[expected];
      if (std::string{mining::to_string(p.label)} == expected) ++hits[expected];
    }
    bool pass = true;
    std::vector<std::string> parts;
    for (const auto& [label, total] : totals) {
      const double recall = double(hits[label]) / double(total);
      pass = pass && recall >= 0.95;
      parts.push_back(label + " " + fmt(100 * recall) + "%");
    }
    report(3, pass, "recall " + join(parts));
  }

  // --- criterion 4: temporal fidelity -----------------------------------
  {
    bool pass = true;
    std::vector<std::string> parts;
    for (const auto& rep : reports) {
      pass = pass && rep.kl_temporal <= 0.01;
      parts.push_back(rep.label + " " + fmt(rep.kl_temporal));
    }
    report(4, pass, "temporal KL " + join(parts) + " (<= 0.01)");
  }

  // --- criterion 5: spatial fidelity with bootstrap tolerance -----------
  {
    bool pass = true;
    std::vector<std::string> parts;
    std::mt19937_64 rng(314159);
    for (const auto& rep : reports) {
      const auto sub = kg::label_subgraph(original, rep.label);
      const auto hist = eval::od_histogram(sub);
      std::vector<double> weights;
      weights.reserve(hist.size());
      std::int64_t n = 0;
      for (const auto& [od, c] : hist) {
        weights.push_back(double(c));
        n += c;
      }
      const AliasSampler sampler(weights);
      std::vector<double> kls;
      std::vector<double> resampled(weights.size());
      for (int b = 0; b < 200; ++b) {
        std::fill(resampled.begin(), resampled.end(), 0.0);
        for (std::int64_t i = 0; i < n; ++i) resampled[sampler.sample(rng)] += 1.0;
        kls.push_back(eval::kl_divergence(resampled, weights, cfg.evaluation.kl_smoothing));
      }
      std::sort(kls.begin(), kls.end());
      const double p99 = kls[std::size_t(std::ceil(0.99 * double(kls.size()))) - 1];
      const bool ok = rep.kl_spatial <= 0.15 && rep.kl_spatial <= 2.0 * p99;
      pass = pass && ok;
      parts.push_back(rep.label + " " + fmt(rep.kl_spatial) + " (2*p99 " + fmt(2 * p99) + ")");
    }
    report(5, pass, "spatial KL " + join(parts) + " (<= 0.15)");
  }

  // --- criterion 6: association bias ------------------------------------
  {
    bool pass = true;
    std::vector<std::string> parts;
    for (const auto& rep : reports) {
      if (!rep.association_bias) {
        pass = false;
        parts.push_back(rep.label + " undefined");
        continue;
      }
      pass = pass && *rep.association_bias <= 0.15;
      parts.push_back(rep.label + " " + fmt(*rep.association_bias));
    }
    report(6, pass, "bias " + join(parts) + " (<= 0.15 at N=3)");
  }

  // --- criterion 7: spatial continuity ----------------------------------
  {
    bool pass = true;
    std::vector<std::string> parts;
    for (const auto& rep : reports) {
      if (!rep.continuity_generated && !rep.continuity_historical) {
        parts.push_back(rep.label + " no chains");
        continue;
      }
      if (!rep.continuity_generated || !rep.continuity_historical) {
        pass = false;
        parts.push_back(rep.label + " one side lacks chains");
        continue;
      }
      const bool ok = *rep.continuity_generated >= *rep.continuity_historical &&
                      *rep.continuity_generated >= 0.85;
      pass = pass && ok;
      parts.push_back(rep.label + " " + fmt(*rep.continuity_generated) + " vs " +
                      fmt(*rep.continuity_historical));
    }
    report(7, pass, "continuity " + join(parts) + " (>= historical and >= 0.85)");
  }

  // --- criterion 8: determinism -----------------------------------------
  {
    const auto rerun = gen::generate_all(original, cfg);
    const auto regenerated = gen::generated_graph(rerun, cfg);
    std::ostringstream t1, t2, p1, p2;
    kg::export_triples(generated, t1);
    kg::export_triples(regenerated, t2);
    kg::export_properties(generated, p1);
    kg::export_properties(regenerated, p2);
    const bool pass = t1.str() == t2.str() && p1.str() == p2.str();
    report(8, pass, pass ? "two runs export byte-identical graphs" : "exports differ");
  }

  // --- criterion 9: constant-time entity lookup -------------------------
  {
    const auto build_entities = [](std::size_t n) {
      kg::TripKG g;
      for (std::size_t i = 0; i < n; ++i) {
        g.intern(kg::EntityType::Vehicle, "vehicle-" + std::to_string(i));
      }
      return g;
    };
    const auto median_lookup = [](const kg::TripKG& g, std::size_t n) {
      std::mt19937_64 rng(7);
      std::vector<std::string> keys;
      keys.reserve(4096);
      for (int i = 0; i < 4096; ++i) {
        keys.push_back("vehicle-" + std::to_string(uniform_index(rng, n)));
      }
      volatile std::uint64_t sink = 0;
      std::vector<double> batch_ns;
      for (int batch = 0; batch < 31; ++batch) {
        const auto start = std::chrono::steady_clock::now();
        for (int rep = 0; rep < 8; ++rep) {
          for (const auto& key : keys) {
            sink += g.find(kg::EntityType::Vehicle, key);
          }
        }
        const auto elapsed =
            std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start)
                .count();
        batch_ns.push_back(elapsed / double(8 * keys.size()));
      }
      (void)sink;
      std::sort(batch_ns.begin(), batch_ns.end());
      return batch_ns[batch_ns.size() / 2];
    };
    const auto small = build_entities(10'000);
    const auto large = build_entities(100'000);
    median_lookup(small, 10'000);  // warm up
    const double t_small = median_lookup(small, 10'000);
    const double t_large = median_lookup(large, 100'000);
    const double ratio = t_large / t_small;
    report(9, ratio < 3.0,
           "median lookup " + fmt(t_small) + " ns at 1e4 vs " + fmt(t_large) +
               " ns at 1e5 entities, ratio " + fmt(ratio) + " (< 3)");
  }

  // --- criterion 10: sampler frequencies --------------------------------
  {
    bool pass = true;
    std::vector<std::string> parts;
    std::mt19937_64 rng(161803);
    constexpr int n = 10'000;
    for (const auto& label_id : kg::labels_of(original)) {
      const auto sub = kg::label_subgraph(original, label_id);
      if (sub.entity_count(kg::EntityType::Trip) == 0) continue;
      const auto f = cgraph::build_pattern_distribution(sub);
      const auto units = gen::generate_unit_graphs(f, n, rng);
      std::map<std::tuple<std::string, std::string, std::string>, int> observed;
      for (const auto& u : units) ++observed[{u.span, u.ozone, u.dzone}];
      // family-wise 99% interval: Bonferroni split across the patterns
      const double z = -normal_quantile(0.005 / double(f.patterns.size()));
      int outside = 0;
      for (std::size_t i = 0; i < f.patterns.size(); ++i) {
        const auto& p = f.patterns[i];
        const double prob = f.probability(i);
        const double margin = z * std::sqrt(n * prob * (1 - prob)) + 0.5;
        const auto it = observed.find({p.span, p.ozone, p.dzone});
        const double count = it == observed.end() ? 0.0 : double(it->second);
        if (std::abs(count - n * prob) > margin) ++outside;
      }
      pass = pass && outside == 0;
      parts.push_back(label_id + " " + std::to_string(f.patterns.size()) + " patterns, " +
                      std::to_string(outside) + " outside");
    }
    report(10, pass, "sampler at n=10000: " + join(parts));
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_budget = elapsed < 60.0;
  std::printf("[%s] end-to-end: %.1f s (< 60 s budget)\n", in_budget ? "PASS" : "FAIL", elapsed);
  if (!in_budget) ++g_failures;

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
