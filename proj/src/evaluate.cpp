#include "tripkg/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "tripkg/chargraph.hpp"
#include "tripkg/mining.hpp"

namespace tripkg::eval {

double kl_divergence(std::span<const double> p, std::span<const double> q, double eps_smooth) {
  if (p.empty() || q.empty()) throw std::invalid_argument("kl_divergence: empty histogram");
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: support size mismatch");
  if (eps_smooth <= 0) throw std::invalid_argument("kl_divergence: smoothing must be positive");

  double p_total = 0, q_total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || q[i] < 0) throw std::invalid_argument("kl_divergence: negative mass");
    p_total += p[i];
    q_total += q[i];
  }
  if (p_total <= 0 || q_total <= 0) throw std::invalid_argument("kl_divergence: zero total mass");

  const double n = double(p.size());
  double kl = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = (p[i] / p_total + eps_smooth) / (1.0 + n * eps_smooth);
    const double qi = (q[i] / q_total + eps_smooth) / (1.0 + n * eps_smooth);
    kl += pi * std::log(pi / qi);
  }
  return kl;
}

std::vector<double> temporal_histogram(const kg::TripKG& sub, const TimeSpanConfig& spans) {
  std::vector<double> hist(spans.size(), 0.0);
  for (const auto trip : sub.entities(kg::EntityType::Trip)) {
    const auto& span = sub.key(sub.out_one(trip, kg::Relation::TripTimeSpan));
    const auto idx = spans.index_by_name(span);
    if (!idx) throw std::invalid_argument("temporal_histogram: unknown span '" + span + "'");
    hist[*idx] += 1.0;
  }
  return hist;
}

std::map<OdKey, std::int64_t> od_histogram(const kg::TripKG& sub) {
  std::map<OdKey, std::int64_t> hist;
  for (const auto trip : sub.entities(kg::EntityType::Trip)) {
    ++hist[{sub.key(sub.out_one(trip, kg::Relation::TripOzone)),
            sub.key(sub.out_one(trip, kg::Relation::TripDzone))}];
  }
  return hist;
}

std::pair<std::vector<double>, std::vector<double>> align_od(
    const std::map<OdKey, std::int64_t>& a, const std::map<OdKey, std::int64_t>& b) {
  std::pair<std::vector<double>, std::vector<double>> out;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      out.first.push_back(double(ia->second));
      out.second.push_back(0.0);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      out.first.push_back(0.0);
      out.second.push_back(double(ib->second));
      ++ib;
    } else {
      out.first.push_back(double(ia->second));
      out.second.push_back(double(ib->second));
      ++ia;
      ++ib;
    }
  }
  return out;
}

namespace {

std::vector<std::string> roster(const kg::TripKG& g) {
  std::vector<std::string> out;
  out.reserve(g.entity_count(kg::EntityType::Vehicle));
  for (const auto v : g.entities(kg::EntityType::Vehicle)) out.push_back(g.key(v));
  return out;
}

}  // namespace

std::optional<double> association_bias(const kg::TripKG& original, const kg::TripKG& generated,
                                       int depth, AssociationMatch match) {
  const auto orig_roster = roster(original);
  const auto gen_roster = roster(generated);
  if (orig_roster.empty() || gen_roster.empty()) return std::nullopt;
  const auto a = cgraph::build_association(original, orig_roster, depth, match);
  const auto b = cgraph::build_association(generated, gen_roster, depth, match);
  std::optional<std::vector<double>> mean_a, mean_b;
  try {
    mean_a = cgraph::mean_vector(a);
    mean_b = cgraph::mean_vector(b);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  double sum = 0;
  for (std::size_t i = 0; i < mean_a->size(); ++i) {
    const double d = (*mean_a)[i] - (*mean_b)[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::optional<double> continuity_rate(const kg::TripKG& sub) {
  std::int64_t pairs = 0;
  std::int64_t threaded = 0;
  for (const auto& chain : cgraph::continuity_chains(sub)) {
    for (std::size_t i = 1; i < chain.od.size(); ++i) {
      ++pairs;
      threaded += cgraph::continuity_indicator(chain.od[i - 1].second, chain.od[i].first);
    }
  }
  if (pairs == 0) return std::nullopt;
  return double(threaded) / double(pairs);
}

std::vector<TopOdRow> top_od_report(const kg::TripKG& original, const kg::TripKG& generated,
                                    int k) {
  if (k < 1) throw std::invalid_argument("top_od_report: k must be >= 1");
  const auto orig = od_histogram(original);
  const auto gen = od_histogram(generated);
  double orig_total = 0, gen_total = 0;
  for (const auto& [od, c] : orig) orig_total += double(c);
  for (const auto& [od, c] : gen) gen_total += double(c);

  std::vector<std::pair<OdKey, std::int64_t>> ranked(orig.begin(), orig.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<TopOdRow> rows;
  const auto n = std::min<std::size_t>(std::size_t(k), ranked.size());
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [od, count] = ranked[i];
    const auto git = gen.find(od);
    rows.push_back({int(i) + 1, od.first, od.second,
                    orig_total > 0 ? double(count) / orig_total : 0.0,
                    git != gen.end() && gen_total > 0 ? double(git->second) / gen_total : 0.0});
  }
  return rows;
}

std::vector<LabelReport> evaluate_all(const kg::TripKG& original, const kg::TripKG& generated,
                                      const PipelineConfig& cfg) {
  if (!kg::labels_attached(original) || !kg::labels_attached(generated))
    throw std::logic_error("evaluate_all: both graphs need labels attached");

  std::vector<LabelReport> reports;
  for (std::size_t li = 0; li < mining::kLabelCount; ++li) {
    const auto label = mining::to_string(mining::MobilityLabel(li));
    const auto orig_sub = kg::label_subgraph(original, label);
    const auto gen_sub = kg::label_subgraph(generated, label);
    if (orig_sub.entity_count(kg::EntityType::Trip) == 0 &&
        gen_sub.entity_count(kg::EntityType::Trip) == 0) {
      continue;
    }

    LabelReport rep;
    rep.label = label;
    rep.original_trips = std::int64_t(orig_sub.entity_count(kg::EntityType::Trip));
    rep.generated_trips = std::int64_t(gen_sub.entity_count(kg::EntityType::Trip));
    rep.original_vehicles = std::int64_t(orig_sub.entity_count(kg::EntityType::Vehicle));
    rep.generated_vehicles = std::int64_t(gen_sub.entity_count(kg::EntityType::Vehicle));

    if (rep.original_trips > 0 && rep.generated_trips > 0) {
      const auto t_gen = temporal_histogram(gen_sub, cfg.spans);
      const auto t_orig = temporal_histogram(orig_sub, cfg.spans);
      rep.kl_temporal = kl_divergence(t_gen, t_orig, cfg.evaluation.kl_smoothing);
      const auto [od_orig, od_gen] = align_od(od_histogram(orig_sub), od_histogram(gen_sub));
      rep.kl_spatial = kl_divergence(od_gen, od_orig, cfg.evaluation.kl_smoothing);
      rep.association_bias = association_bias(orig_sub, gen_sub,
                                              cfg.generation.association_depth, cfg.mining.match);
    }
    rep.continuity_generated = continuity_rate(gen_sub);
    rep.continuity_historical = continuity_rate(orig_sub);
    reports.push_back(std::move(rep));
  }
  return reports;
}

void write_report_json(std::ostream& out, std::span<const LabelReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j{{"label", r.label},
                     {"original_trips", r.original_trips},
                     {"generated_trips", r.generated_trips},
                     {"original_vehicles", r.original_vehicles},
                     {"generated_vehicles", r.generated_vehicles},
                     {"kl_temporal", r.kl_temporal},
                     {"kl_spatial", r.kl_spatial}};
    j["association_bias"] =
        r.association_bias ? nlohmann::json(*r.association_bias) : nlohmann::json(nullptr);
    j["continuity_generated"] =
        r.continuity_generated ? nlohmann::json(*r.continuity_generated) : nlohmann::json(nullptr);
    j["continuity_historical"] = r.continuity_historical
                                     ? nlohmann::json(*r.continuity_historical)
                                     : nlohmann::json(nullptr);
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

void write_top_od_csv(std::ostream& out, std::string_view label, std::span<const TopOdRow> rows) {
  out << "label,rank,origin,destination,original_share,generated_share\n";
  for (const auto& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g", r.original_share, r.generated_share);
    out << label << ',' << r.rank << ',' << r.origin << ',' << r.destination << ',' << buf << '\n';
  }
}

namespace {

void accumulate_time_profile(const kg::TripKG& g, std::string_view source, int bin_seconds,
                             std::ostream& out) {
  for (const auto label_id : g.entities(kg::EntityType::Label)) {
    const auto& label = g.key(label_id);
    std::vector<std::int64_t> bins(std::size_t((kSecondsPerDay + bin_seconds - 1) / bin_seconds), 0);
    std::int64_t total = 0;
    for (const auto vehicle : g.in(label_id, kg::Relation::TripType)) {
      for (const auto trip : g.out(vehicle, kg::Relation::HasTrip)) {
        ++bins[std::size_t(g.ftime(trip).seconds / bin_seconds)];
        ++total;
      }
    }
    if (total == 0) continue;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", double(bins[b]) / double(total));
      out << source << ',' << label << ',' << TimeOfDay{std::int32_t(b) * bin_seconds}.to_string()
          << ',' << buf << '\n';
    }
  }
}

}  // namespace

void write_time_profile_csv(std::ostream& out, const kg::TripKG& original,
                            const kg::TripKG& generated, int bin_seconds) {
  out << "source,label,bin_start,share\n";
  accumulate_time_profile(original, "historical", bin_seconds, out);
  accumulate_time_profile(generated, "generated", bin_seconds, out);
}

void write_od_rank_csv(std::ostream& out, const kg::TripKG& original, const kg::TripKG& generated,
                       int k) {
  out << "label,rank,original_share,generated_share\n";
  if (!kg::labels_attached(original) || !kg::labels_attached(generated)) return;
  for (std::size_t li = 0; li < mining::kLabelCount; ++li) {
    const auto label = mining::to_string(mining::MobilityLabel(li));
    const auto orig_sub = kg::label_subgraph(original, label);
    if (orig_sub.entity_count(kg::EntityType::Trip) == 0) continue;
    const auto gen_sub = kg::label_subgraph(generated, label);
    for (const auto& row : top_od_report(orig_sub, gen_sub, k)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g,%.10g", row.original_share, row.generated_share);
      out << label << ',' << row.rank << ',' << buf << '\n';
    }
  }
}

}  // namespace tripkg::eval
