#include "tripkg/graph.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace tripkg::kg {

namespace {

constexpr std::array<std::string_view, kEntityTypeCount> kEntityNames = {
    "Vehicle", "Trip", "Week", "TimeSpan", "Date", "Zone", "Label"};
constexpr std::array<std::string_view, kRelationCount> kRelationNames = {
    "hastrip", "tripWeek", "tripTimeSpan", "tripDate", "tripOzone", "tripDzone", "TripType"};

constexpr std::array<RelationSignature, kRelationCount> kSignatures = {{
    {EntityType::Vehicle, EntityType::Trip},
    {EntityType::Trip, EntityType::Week},
    {EntityType::Trip, EntityType::TimeSpan},
    {EntityType::Trip, EntityType::Date},
    {EntityType::Trip, EntityType::Zone},
    {EntityType::Trip, EntityType::Zone},
    {EntityType::Vehicle, EntityType::Label},
}};

const std::vector<EntityId> kEmpty;

}  // namespace

std::string_view to_string(EntityType t) { return kEntityNames[std::size_t(t)]; }
std::string_view to_string(Relation r) { return kRelationNames[std::size_t(r)]; }

std::optional<EntityType> entity_type_from(std::string_view s) {
  for (std::size_t i = 0; i < kEntityNames.size(); ++i) {
    if (kEntityNames[i] == s) return EntityType(i);
  }
  return std::nullopt;
}

std::optional<Relation> relation_from(std::string_view s) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (kRelationNames[i] == s) return Relation(i);
  }
  return std::nullopt;
}

RelationSignature signature(Relation r) { return kSignatures[std::size_t(r)]; }

EntityId TripKG::intern(EntityType t, std::string_view key) {
  auto& idx = index_[std::size_t(t)];
  if (auto it = idx.find(key); it != idx.end()) return it->second;
  const auto id = EntityId(entities_.size());
  entities_.push_back({t, std::string{key}});
  idx.emplace(std::string{key}, id);
  by_type_[std::size_t(t)].push_back(id);
  return id;
}

EntityId TripKG::find(EntityType t, std::string_view key) const {
  const auto& idx = index_[std::size_t(t)];
  auto it = idx.find(key);
  return it == idx.end() ? kNoEntity : it->second;
}

void TripKG::add_triple(EntityId head, Relation r, EntityId tail) {
  const auto sig = signature(r);
  if (etype(head) != sig.head || etype(tail) != sig.tail) {
    std::ostringstream os;
    os << "triple (" << to_string(etype(head)) << ")-[" << to_string(r) << "]-("
       << to_string(etype(tail)) << ") violates the schema";
    throw std::logic_error(os.str());
  }
  auto& a = adj_[std::size_t(r)];
  a.fwd[head].push_back(tail);
  a.rev[tail].push_back(head);
  triples_.push_back({head, r, tail});
  ++rel_count_[std::size_t(r)];
}

void TripKG::replace_triple(EntityId head, Relation r, EntityId tail) {
  auto& a = adj_[std::size_t(r)];
  if (auto it = a.fwd.find(head); it != a.fwd.end() && !it->second.empty()) {
    for (EntityId old : it->second) {
      auto& rev = a.rev[old];
      rev.erase(std::remove(rev.begin(), rev.end(), head), rev.end());
    }
    rel_count_[std::size_t(r)] -= it->second.size();
    std::erase_if(triples_, [&](const Triple& t) { return t.rel == r && t.head == head; });
    it->second.clear();
  }
  add_triple(head, r, tail);
}

std::span<const EntityId> TripKG::out(EntityId e, Relation r) const {
  const auto& fwd = adj_[std::size_t(r)].fwd;
  auto it = fwd.find(e);
  return it == fwd.end() ? std::span<const EntityId>{kEmpty} : std::span<const EntityId>{it->second};
}

std::span<const EntityId> TripKG::in(EntityId e, Relation r) const {
  const auto& rev = adj_[std::size_t(r)].rev;
  auto it = rev.find(e);
  return it == rev.end() ? std::span<const EntityId>{kEmpty} : std::span<const EntityId>{it->second};
}

EntityId TripKG::out_one(EntityId e, Relation r) const {
  const auto targets = out(e, r);
  return targets.empty() ? kNoEntity : targets.front();
}

void TripKG::set_ftime(EntityId trip, TimeOfDay t) { ftime_[trip] = t.seconds; }

TimeOfDay TripKG::ftime(EntityId trip) const {
  auto it = ftime_.find(trip);
  if (it == ftime_.end()) throw std::out_of_range("trip has no ftime property");
  return TimeOfDay{it->second};
}

bool TripKG::has_ftime(EntityId trip) const { return ftime_.contains(trip); }

std::optional<EntityRef> get_entity(const TripKG& g, EntityType t, std::string_view key) {
  const auto id = g.find(t, key);
  if (id == kNoEntity) return std::nullopt;
  return EntityRef{t, std::string{key}};
}

std::vector<EntityRef> neighbors(const TripKG& g, const EntityRef& e, Relation r, Direction dir) {
  const auto id = g.find(e.etype, e.key);
  if (id == kNoEntity) {
    throw std::out_of_range("neighbors: entity (" + std::string{to_string(e.etype)} + ", " +
                            e.key + ") is not in the graph");
  }
  const auto ids = dir == Direction::Forward ? g.out(id, r) : g.in(id, r);
  std::vector<EntityRef> refs;
  refs.reserve(ids.size());
  for (EntityId n : ids) refs.push_back({g.etype(n), g.key(n)});
  return refs;
}

TripView trip_view(const TripKG& g, EntityId trip) {
  TripView v;
  v.trip = trip;
  v.vehicle = g.in(trip, Relation::HasTrip).front();
  v.week = g.out_one(trip, Relation::TripWeek);
  v.span = g.out_one(trip, Relation::TripTimeSpan);
  v.date = g.out_one(trip, Relation::TripDate);
  v.ozone = g.out_one(trip, Relation::TripOzone);
  v.dzone = g.out_one(trip, Relation::TripDzone);
  v.ftime = g.ftime(trip);
  return v;
}

std::vector<TripView> all_trips(const TripKG& g) {
  std::vector<TripView> out;
  const auto trips = g.entities(EntityType::Trip);
  out.reserve(trips.size());
  for (EntityId t : trips) out.push_back(trip_view(g, t));
  return out;
}

TripKG build_graph(std::span<const ingest::TripRecord> records, const CalendarConfig& cal,
                   const TimeSpanConfig& spans) {
  spans.validate();
  TripKG g;

  // Surrogate trip keys are <vehicle>#<date>#<seq> with seq following the
  // ftime order within one (vehicle, date), ties broken by input order.
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = records[a];
    const auto& rb = records[b];
    if (ra.vehicle != rb.vehicle) return ra.vehicle < rb.vehicle;
    if (ra.date != rb.date) return ra.date < rb.date;
    return ra.ftime < rb.ftime;
  });
  std::vector<std::size_t> seq(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto idx = order[i];
    if (i > 0 && records[order[i - 1]].vehicle == records[idx].vehicle &&
        records[order[i - 1]].date == records[idx].date) {
      seq[idx] = seq[order[i - 1]] + 1;
    } else {
      seq[idx] = 0;
    }
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto vehicle = g.intern(EntityType::Vehicle, r.vehicle);
    const auto week = g.intern(EntityType::Week, to_string(map_week(r.date, cal)));
    const auto span = g.intern(EntityType::TimeSpan, map_timespan(r.ftime, spans));
    const auto date = g.intern(EntityType::Date, r.date.to_string());
    const auto ozone = g.intern(EntityType::Zone, r.fzone);
    const auto dzone = g.intern(EntityType::Zone, r.tzone);

    const std::string trip_key =
        r.vehicle + "#" + r.date.to_string() + "#" + std::to_string(seq[i]);
    if (g.find(EntityType::Trip, trip_key) != kNoEntity)
      throw std::logic_error("duplicate trip surrogate key: " + trip_key);
    const auto trip = g.intern(EntityType::Trip, trip_key);

    g.add_triple(vehicle, Relation::HasTrip, trip);
    g.add_triple(trip, Relation::TripWeek, week);
    g.add_triple(trip, Relation::TripTimeSpan, span);
    g.add_triple(trip, Relation::TripDate, date);
    g.add_triple(trip, Relation::TripOzone, ozone);
    g.add_triple(trip, Relation::TripDzone, dzone);
    g.set_ftime(trip, r.ftime);
  }
  return g;
}

void attach_labels(TripKG& g, const std::vector<std::pair<std::string, std::string>>& labels) {
  for (const auto& [vehicle, label] : labels) {
    if (g.find(EntityType::Vehicle, vehicle) == kNoEntity)
      throw std::out_of_range("attach_labels: unknown vehicle '" + vehicle + "'");
  }
  for (const auto& [vehicle, label] : labels) {
    const auto v = g.find(EntityType::Vehicle, vehicle);
    const auto l = g.intern(EntityType::Label, label);
    g.replace_triple(v, Relation::TripType, l);
  }
}

bool labels_attached(const TripKG& g) { return g.triple_count(Relation::TripType) > 0; }

namespace {

/// Rebuilds a graph from a trip subset (creation order preserved). Keys,
/// ftime, and the owning vehicles' TripType triples carry over.
TripKG copy_trips(const TripKG& g, const std::vector<EntityId>& trips) {
  TripKG sub;
  std::unordered_set<EntityId> vehicles_seen;
  std::vector<EntityId> vehicles;  // first-trip order
  for (EntityId t : trips) {
    const auto v = trip_view(g, t);
    const auto vehicle = sub.intern(EntityType::Vehicle, g.key(v.vehicle));
    const auto week = sub.intern(EntityType::Week, g.key(v.week));
    const auto span = sub.intern(EntityType::TimeSpan, g.key(v.span));
    const auto date = sub.intern(EntityType::Date, g.key(v.date));
    const auto ozone = sub.intern(EntityType::Zone, g.key(v.ozone));
    const auto dzone = sub.intern(EntityType::Zone, g.key(v.dzone));
    const auto trip = sub.intern(EntityType::Trip, g.key(t));
    sub.add_triple(vehicle, Relation::HasTrip, trip);
    sub.add_triple(trip, Relation::TripWeek, week);
    sub.add_triple(trip, Relation::TripTimeSpan, span);
    sub.add_triple(trip, Relation::TripDate, date);
    sub.add_triple(trip, Relation::TripOzone, ozone);
    sub.add_triple(trip, Relation::TripDzone, dzone);
    sub.set_ftime(trip, v.ftime);
    if (vehicles_seen.insert(v.vehicle).second) vehicles.push_back(v.vehicle);
  }
  for (EntityId v : vehicles) {
    const auto label = g.out_one(v, Relation::TripType);
    if (label != kNoEntity) {
      const auto lv = sub.find(EntityType::Vehicle, g.key(v));
      const auto ll = sub.intern(EntityType::Label, g.key(label));
      sub.add_triple(lv, Relation::TripType, ll);
    }
  }
  return sub;
}

}  // namespace

TripKG label_subgraph(const TripKG& g, std::string_view label) {
  if (!labels_attached(g)) throw std::logic_error("label_subgraph: labels are not attached");
  const auto label_id = g.find(EntityType::Label, label);
  std::vector<EntityId> trips;
  if (label_id != kNoEntity) {
    for (EntityId t : g.entities(EntityType::Trip)) {
      const auto vehicle = g.in(t, Relation::HasTrip).front();
      if (g.out_one(vehicle, Relation::TripType) == label_id) trips.push_back(t);
    }
  }
  return copy_trips(g, trips);
}

TripKG date_subgraph(const TripKG& g, Date d) {
  const auto date_id = g.find(EntityType::Date, d.to_string());
  std::vector<EntityId> trips;
  if (date_id != kNoEntity) {
    for (EntityId t : g.entities(EntityType::Trip)) {
      if (g.out_one(t, Relation::TripDate) == date_id) trips.push_back(t);
    }
  }
  return copy_trips(g, trips);
}

std::vector<Date> dates_of(const TripKG& g) {
  std::vector<Date> dates;
  for (EntityId d : g.entities(EntityType::Date)) {
    dates.push_back(*Date::parse(g.key(d)));
  }
  std::sort(dates.begin(), dates.end());
  return dates;
}

std::vector<std::string> labels_of(const TripKG& g) {
  std::vector<std::string> out;
  for (EntityId l : g.entities(EntityType::Label)) out.push_back(g.key(l));
  return out;
}

std::vector<Date> vehicle_dates(const TripKG& g, EntityId vehicle) {
  std::set<Date> dates;
  for (EntityId t : g.out(vehicle, Relation::HasTrip)) {
    dates.insert(*Date::parse(g.key(g.out_one(t, Relation::TripDate))));
  }
  return {dates.begin(), dates.end()};
}

void export_triples(const TripKG& g, std::ostream& out) {
  for (const auto& t : g.triples()) {
    out << to_string(g.etype(t.head)) << '\t' << g.key(t.head) << '\t' << to_string(t.rel) << '\t'
        << to_string(g.etype(t.tail)) << '\t' << g.key(t.tail) << '\n';
  }
}

void export_properties(const TripKG& g, std::ostream& out) {
  for (EntityId t : g.entities(EntityType::Trip)) {
    if (g.has_ftime(t)) {
      out << "Trip\t" << g.key(t) << "\tftime\t" << g.ftime(t).to_string() << '\n';
    }
  }
}

TripKG import_graph(std::istream& triples, std::istream* properties) {
  TripKG g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(triples, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 5> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      auto tab = line.find('\t', start);
      if (i < 4 && tab == std::string::npos)
        throw std::runtime_error("triple TSV line " + std::to_string(lineno) + ": expected 5 fields");
      f[i] = line.substr(start, tab == std::string::npos ? std::string::npos : tab - start);
      start = tab + 1;
    }
    const auto ht = entity_type_from(f[0]);
    const auto rel = relation_from(f[2]);
    const auto tt = entity_type_from(f[3]);
    if (!ht || !rel || !tt)
      throw std::runtime_error("triple TSV line " + std::to_string(lineno) + ": unknown type");
    const auto head = g.intern(*ht, f[1]);
    const auto tail = g.intern(*tt, f[4]);
    g.add_triple(head, *rel, tail);
  }
  if (properties) {
    lineno = 0;
    while (std::getline(*properties, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::array<std::string, 4> f;
      std::size_t start = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        auto tab = line.find('\t', start);
        f[i] = line.substr(start, tab == std::string::npos ? std::string::npos : tab - start);
        start = tab + 1;
      }
      const auto et = entity_type_from(f[0]);
      if (!et || f[2] != "ftime")
        throw std::runtime_error("property TSV line " + std::to_string(lineno) +
                                 ": only Trip ftime properties are defined");
      const auto id = g.find(*et, f[1]);
      if (id == kNoEntity)
        throw std::runtime_error("property TSV line " + std::to_string(lineno) +
                                 ": unknown entity '" + f[1] + "'");
      const auto t = TimeOfDay::parse(f[3]);
      if (!t)
        throw std::runtime_error("property TSV line " + std::to_string(lineno) + ": bad time");
      g.set_ftime(id, *t);
    }
  }
  return g;
}

void check_schema(const TripKG& g) {
  const auto fail = [](const std::string& msg) { throw std::logic_error("schema: " + msg); };
  for (const auto& t : g.triples()) {
    const auto sig = signature(t.rel);
    if (g.etype(t.head) != sig.head || g.etype(t.tail) != sig.tail)
      fail("triple signature violated for relation " + std::string{to_string(t.rel)});
  }
  for (EntityId trip : g.entities(EntityType::Trip)) {
    for (Relation r : {Relation::TripWeek, Relation::TripTimeSpan, Relation::TripDate,
                       Relation::TripOzone, Relation::TripDzone}) {
      if (g.out(trip, r).size() != 1)
        fail("trip " + g.key(trip) + " must have exactly one " + std::string{to_string(r)});
    }
    if (g.in(trip, Relation::HasTrip).size() != 1)
      fail("trip " + g.key(trip) + " must have exactly one incoming hastrip");
    if (!g.has_ftime(trip)) fail("trip " + g.key(trip) + " is missing its ftime property");
  }
  for (EntityId v : g.entities(EntityType::Vehicle)) {
    if (g.out(v, Relation::TripType).size() > 1)
      fail("vehicle " + g.key(v) + " has more than one TripType label");
  }
}

}  // namespace tripkg::kg
