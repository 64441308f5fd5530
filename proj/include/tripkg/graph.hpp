#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tripkg/config.hpp"
#include "tripkg/datetime.hpp"
#include "tripkg/records.hpp"

namespace tripkg::kg {

enum class EntityType : std::uint8_t { Vehicle, Trip, Week, TimeSpan, Date, Zone, Label };
enum class Relation : std::uint8_t {
  HasTrip,       // Vehicle -> Trip
  TripWeek,      // Trip -> Week
  TripTimeSpan,  // Trip -> TimeSpan
  TripDate,      // Trip -> Date
  TripOzone,     // Trip -> Zone
  TripDzone,     // Trip -> Zone
  TripType,      // Vehicle -> Label
};

inline constexpr std::size_t kEntityTypeCount = 7;
inline constexpr std::size_t kRelationCount = 7;

std::string_view to_string(EntityType t);
std::string_view to_string(Relation r);
std::optional<EntityType> entity_type_from(std::string_view s);
std::optional<Relation> relation_from(std::string_view s);

struct RelationSignature {
  EntityType head;
  EntityType tail;
};
RelationSignature signature(Relation r);

using EntityId = std::uint32_t;
inline constexpr EntityId kNoEntity = ~EntityId{0};

struct EntityRef {
  EntityType etype;
  std::string key;
  bool operator==(const EntityRef&) const = default;
};

enum class Direction { Forward, Reverse };

struct Triple {
  EntityId head;
  Relation rel;
  EntityId tail;
};

/// In-memory triple store over the trip schema. Entities are interned to
/// dense ids; (etype, key) lookup and single-hop adjacency are hash-backed,
/// so both stay average-case O(1) in graph size. Triples are also kept in
/// an insertion-order log so exports are reproducible byte for byte.
class TripKG {
 public:
  EntityId intern(EntityType t, std::string_view key);
  EntityId find(EntityType t, std::string_view key) const;  // kNoEntity if absent

  /// Validates the relation signature; throws on mismatch.
  void add_triple(EntityId head, Relation r, EntityId tail);
  /// Drops any existing (head, r, *) triples first. Used for TripType,
  /// which has cardinality one per vehicle.
  void replace_triple(EntityId head, Relation r, EntityId tail);

  std::span<const EntityId> out(EntityId e, Relation r) const;
  std::span<const EntityId> in(EntityId e, Relation r) const;
  EntityId out_one(EntityId e, Relation r) const;  // first target or kNoEntity

  EntityType etype(EntityId e) const { return entities_[e].etype; }
  const std::string& key(EntityId e) const { return entities_[e].key; }

  void set_ftime(EntityId trip, TimeOfDay t);
  TimeOfDay ftime(EntityId trip) const;
  bool has_ftime(EntityId trip) const;

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t entity_count(EntityType t) const { return by_type_[std::size_t(t)].size(); }
  std::size_t triple_count() const { return triples_.size(); }
  std::size_t triple_count(Relation r) const { return rel_count_[std::size_t(r)]; }

  /// Entities of one type in creation order.
  std::span<const EntityId> entities(EntityType t) const { return by_type_[std::size_t(t)]; }
  /// The triple log in insertion order.
  std::span<const Triple> triples() const { return triples_; }

 private:
  struct Entity {
    EntityType etype;
    std::string key;
  };
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  using KeyIndex = std::unordered_map<std::string, EntityId, StringHash, std::equal_to<>>;

  std::vector<Entity> entities_;
  std::array<KeyIndex, kEntityTypeCount> index_;
  std::array<std::vector<EntityId>, kEntityTypeCount> by_type_;
  struct Adjacency {
    std::unordered_map<EntityId, std::vector<EntityId>> fwd, rev;
  };
  std::array<Adjacency, kRelationCount> adj_;
  std::array<std::size_t, kRelationCount> rel_count_{};
  std::vector<Triple> triples_;
  std::unordered_map<EntityId, std::int32_t> ftime_;
};

/// Spec-level lookups over (etype, key) pairs.
std::optional<EntityRef> get_entity(const TripKG& g, EntityType t, std::string_view key);
/// Throws std::out_of_range if the entity is absent.
std::vector<EntityRef> neighbors(const TripKG& g, const EntityRef& e, Relation r, Direction dir);

/// One trip and its six endpoints, for convenient iteration.
struct TripView {
  EntityId trip, vehicle, week, span, date, ozone, dzone;
  TimeOfDay ftime;
};
std::vector<TripView> all_trips(const TripKG& g);  // trip creation order
TripView trip_view(const TripKG& g, EntityId trip);

TripKG build_graph(std::span<const ingest::TripRecord> records, const CalendarConfig& cal,
                   const TimeSpanConfig& spans);

/// One TripType triple per vehicle; relabeling replaces. Throws on a
/// vehicle that is not in the graph.
void attach_labels(TripKG& g, const std::vector<std::pair<std::string, std::string>>& labels);
bool labels_attached(const TripKG& g);

/// Induced subgraphs; materialized copies with identical keys.
TripKG label_subgraph(const TripKG& g, std::string_view label);  // throws if labels not attached
TripKG date_subgraph(const TripKG& g, Date d);

std::vector<Date> dates_of(const TripKG& g);               // sorted, distinct
std::vector<std::string> labels_of(const TripKG& g);       // label keys, creation order
std::vector<Date> vehicle_dates(const TripKG& g, EntityId vehicle);  // sorted, distinct

void export_triples(const TripKG& g, std::ostream& out);
void export_properties(const TripKG& g, std::ostream& out);
TripKG import_graph(std::istream& triples, std::istream* properties);

/// Full scan over every schema invariant (signatures, trip completeness,
/// TripType cardinality). Throws std::logic_error with a description.
void check_schema(const TripKG& g);

}  // namespace tripkg::kg
