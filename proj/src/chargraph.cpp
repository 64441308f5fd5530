#include "tripkg/chargraph.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace tripkg::cgraph {

PatternDistribution build_pattern_distribution(const kg::TripKG& sub) {
  if (sub.entity_count(kg::EntityType::Trip) == 0)
    throw std::invalid_argument("pattern distribution: empty subgraph");

  PatternDistribution f;
  std::map<std::tuple<std::string_view, std::string_view, std::string_view>, std::size_t> index;
  for (const auto trip : sub.entities(kg::EntityType::Trip)) {
    const auto span = std::string_view{sub.key(sub.out_one(trip, kg::Relation::TripTimeSpan))};
    const auto ozone = std::string_view{sub.key(sub.out_one(trip, kg::Relation::TripOzone))};
    const auto dzone = std::string_view{sub.key(sub.out_one(trip, kg::Relation::TripDzone))};
    const auto key = std::make_tuple(span, ozone, dzone);
    if (auto it = index.find(key); it != index.end()) {
      ++f.patterns[it->second].count;
    } else {
      index.emplace(key, f.patterns.size());
      f.patterns.push_back({std::string{span}, std::string{ozone}, std::string{dzone}, 1});
    }
    ++f.total;
  }
  return f;
}

std::vector<std::uint8_t> temporal_vector(const kg::TripKG& sub, std::string_view vehicle, Date d,
                                          const TimeSpanConfig& spans) {
  const auto v = sub.find(kg::EntityType::Vehicle, vehicle);
  if (v == kg::kNoEntity)
    throw std::out_of_range("temporal_vector: unknown vehicle '" + std::string{vehicle} + "'");
  std::vector<std::uint8_t> bits(spans.size(), 0);
  const auto date_id = sub.find(kg::EntityType::Date, d.to_string());
  if (date_id == kg::kNoEntity) return bits;
  for (const auto trip : sub.out(v, kg::Relation::HasTrip)) {
    if (sub.out_one(trip, kg::Relation::TripDate) != date_id) continue;
    const auto& span = sub.key(sub.out_one(trip, kg::Relation::TripTimeSpan));
    const auto idx = spans.index_by_name(span);
    if (!idx)
      throw std::logic_error("temporal_vector: span '" + span + "' is not in the configuration");
    bits[*idx] = 1;
  }
  return bits;
}

int continuity_indicator(std::string_view prev_dest, std::string_view next_origin) {
  return prev_dest == next_origin ? 1 : 0;
}

std::vector<DayChain> continuity_chains(const kg::TripKG& sub) {
  // order by ftime; entity creation order (= record input order) breaks
  // ties between trips that share a start time
  std::map<std::pair<std::string_view, Date>,
           std::vector<std::tuple<std::int32_t, kg::EntityId,
                                  std::pair<std::string_view, std::string_view>>>>
      grouped;
  for (const auto trip : sub.entities(kg::EntityType::Trip)) {
    const auto view = kg::trip_view(sub, trip);
    const auto vehicle = std::string_view{sub.key(view.vehicle)};
    const auto date = *Date::parse(sub.key(view.date));
    grouped[{vehicle, date}].push_back(
        {view.ftime.seconds, trip,
         {std::string_view{sub.key(view.ozone)}, std::string_view{sub.key(view.dzone)}}});
  }
  std::vector<DayChain> chains;
  chains.reserve(grouped.size());
  for (auto& [key, trips] : grouped) {
    std::sort(trips.begin(), trips.end());
    DayChain chain;
    chain.vehicle = std::string{key.first};
    chain.date = key.second;
    for (const auto& [ftime, trip_id, od] : trips) {
      chain.od.emplace_back(std::string{od.first}, std::string{od.second});
    }
    chains.push_back(std::move(chain));
  }
  return chains;
}

bool AssociationMatrix::connected(std::size_t row) const {
  for (const auto c : counts[row])
    if (c > 0) return true;
  return false;
}

std::vector<std::pair<int, int>> daily_hyper_edges(
    const std::vector<std::vector<std::array<int, 3>>>& trips_by_vehicle, AssociationMatch match) {
  std::set<std::pair<int, int>> edges;
  const int n = int(trips_by_vehicle.size());

  if (match == AssociationMatch::SameTrip) {
    // bucket by (span, zone, role): two vehicles in one bucket have a trip
    // pair sharing the span and that zone in that role
    std::map<std::tuple<int, int, int>, std::vector<int>> buckets;
    for (int v = 0; v < n; ++v) {
      std::set<std::tuple<int, int, int>> seen;
      for (const auto& [span, ozone, dzone] : trips_by_vehicle[v]) {
        if (seen.insert({span, ozone, 0}).second) buckets[{span, ozone, 0}].push_back(v);
        if (seen.insert({span, dzone, 1}).second) buckets[{span, dzone, 1}].push_back(v);
      }
    }
    for (const auto& [key, members] : buckets) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          edges.emplace(members[i], members[j]);
        }
      }
    }
  } else {
    std::vector<std::set<int>> spans(n), zones_o(n), zones_d(n);
    std::map<int, std::vector<int>> span_members;
    for (int v = 0; v < n; ++v) {
      for (const auto& [span, ozone, dzone] : trips_by_vehicle[v]) {
        if (spans[v].insert(span).second) span_members[span].push_back(v);
        zones_o[v].insert(ozone);
        zones_d[v].insert(dzone);
      }
    }
    const auto intersects = [](const std::set<int>& a, const std::set<int>& b) {
      auto ia = a.begin();
      auto ib = b.begin();
      while (ia != a.end() && ib != b.end()) {
        if (*ia == *ib) return true;
        if (*ia < *ib) ++ia;
        else ++ib;
      }
      return false;
    };
    for (const auto& [span, members] : span_members) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          const auto u = members[i];
          const auto v = members[j];
          if (edges.contains({u, v})) continue;
          if (intersects(zones_o[u], zones_o[v]) || intersects(zones_d[u], zones_d[v])) {
            edges.emplace(u, v);
          }
        }
      }
    }
  }
  return {edges.begin(), edges.end()};
}

namespace {

/// Counts vehicles at shortest hop distance 1..depth from src, restricted
/// to the given adjacency.
void level_counts(const std::vector<std::vector<int>>& adj, int src, int depth,
                  std::vector<std::int64_t>& out, std::vector<int>& dist_buf) {
  std::fill(dist_buf.begin(), dist_buf.end(), -1);
  std::fill(out.begin(), out.end(), 0);
  std::queue<int> frontier;
  dist_buf[std::size_t(src)] = 0;
  frontier.push(src);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    const int du = dist_buf[std::size_t(u)];
    if (du >= depth) continue;
    for (const int w : adj[std::size_t(u)]) {
      if (dist_buf[std::size_t(w)] != -1) continue;
      dist_buf[std::size_t(w)] = du + 1;
      ++out[std::size_t(du)];
      frontier.push(w);
    }
  }
}

}  // namespace

AssociationMatrix build_association(const kg::TripKG& sub, std::span<const std::string> vehicles,
                                    int depth, AssociationMatch match) {
  if (depth < 1) throw std::invalid_argument("build_association: depth must be >= 1");

  AssociationMatrix m;
  m.depth = depth;
  m.vehicles.assign(vehicles.begin(), vehicles.end());
  std::unordered_map<std::string_view, int> row_of;
  for (std::size_t i = 0; i < m.vehicles.size(); ++i) {
    if (sub.find(kg::EntityType::Vehicle, m.vehicles[i]) == kg::kNoEntity)
      throw std::out_of_range("build_association: vehicle '" + m.vehicles[i] +
                              "' is not in the subgraph");
    if (!row_of.emplace(m.vehicles[i], int(i)).second)
      throw std::invalid_argument("build_association: duplicate vehicle '" + m.vehicles[i] + "'");
  }

  // group the listed vehicles' trips by date, interning spans and zones
  std::unordered_map<std::string_view, int> span_ids, zone_ids;
  const auto intern = [](auto& map, std::string_view key) {
    return map.emplace(key, int(map.size())).first->second;
  };
  std::map<std::string_view, std::vector<std::vector<std::array<int, 3>>>> by_date;
  for (const auto trip : sub.entities(kg::EntityType::Trip)) {
    const auto view = kg::trip_view(sub, trip);
    const auto row = row_of.find(sub.key(view.vehicle));
    if (row == row_of.end()) continue;
    auto& day = by_date[sub.key(view.date)];
    if (day.empty()) day.resize(m.vehicles.size());
    day[std::size_t(row->second)].push_back({intern(span_ids, sub.key(view.span)),
                                             intern(zone_ids, sub.key(view.ozone)),
                                             intern(zone_ids, sub.key(view.dzone))});
  }

  std::vector<std::set<int>> adj_sets(m.vehicles.size());
  for (const auto& [date, day_trips] : by_date) {
    for (const auto& [u, v] : daily_hyper_edges(day_trips, match)) {
      adj_sets[std::size_t(u)].insert(v);
      adj_sets[std::size_t(v)].insert(u);
    }
  }
  std::vector<std::vector<int>> adj(m.vehicles.size());
  for (std::size_t i = 0; i < adj_sets.size(); ++i) adj[i].assign(adj_sets[i].begin(), adj_sets[i].end());

  m.counts.assign(m.vehicles.size(), std::vector<std::int64_t>(std::size_t(depth), 0));
  m.normalized.assign(m.vehicles.size(), std::vector<double>(std::size_t(depth), 0.0));
  std::vector<int> dist_buf(m.vehicles.size(), -1);
  for (std::size_t i = 0; i < m.vehicles.size(); ++i) {
    level_counts(adj, int(i), depth, m.counts[i], dist_buf);
    std::int64_t total = 0;
    for (const auto c : m.counts[i]) total += c;
    if (total > 0) {
      for (int l = 0; l < depth; ++l) {
        m.normalized[i][std::size_t(l)] = double(m.counts[i][std::size_t(l)]) / double(total);
      }
    }
  }
  return m;
}

std::vector<double> mean_vector(const AssociationMatrix& m) {
  std::vector<double> mean(std::size_t(m.depth), 0.0);
  std::size_t connected_rows = 0;
  for (std::size_t i = 0; i < m.vehicles.size(); ++i) {
    if (!m.connected(i)) continue;
    ++connected_rows;
    for (int l = 0; l < m.depth; ++l) mean[std::size_t(l)] += m.normalized[i][std::size_t(l)];
  }
  if (connected_rows == 0)
    throw std::invalid_argument("mean_vector: every vehicle is isolated");
  for (auto& v : mean) v /= double(connected_rows);
  return mean;
}

void write_pattern_distribution(std::ostream& out, const PatternDistribution& f) {
  out << "timespan,origin,destination,count\n";
  for (const auto& p : f.patterns) {
    out << p.span << ',' << p.ozone << ',' << p.dzone << ',' << p.count << '\n';
  }
}

void write_association(std::ostream& out, const AssociationMatrix& m) {
  out << "vehicle";
  for (int l = 1; l <= m.depth; ++l) out << ",c" << l;
  for (int l = 1; l <= m.depth; ++l) out << ",r" << l;
  out << '\n';
  for (std::size_t i = 0; i < m.vehicles.size(); ++i) {
    out << m.vehicles[i];
    for (const auto c : m.counts[i]) out << ',' << c;
    for (const auto r : m.normalized[i]) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", r);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace tripkg::cgraph
