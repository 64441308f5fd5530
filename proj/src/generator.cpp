#include "tripkg/generator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "tripkg/mining.hpp"
#include "tripkg/rng.hpp"

namespace tripkg::gen {

namespace {

struct Interner {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;

  int get(std::string_view key) {
    auto it = ids.find(std::string{key});
    if (it != ids.end()) return it->second;
    const int id = int(names.size());
    names.emplace_back(key);
    ids.emplace(names.back(), id);
    return id;
  }
};

using UnitIdx = std::array<int, 3>;  // span, ozone, dzone

/// Interned per-date pattern distribution with span-conditioned samplers.
struct PatternModel {
  std::vector<UnitIdx> patterns;
  std::vector<double> weights;
  std::optional<AliasSampler> sampler;
  std::map<int, std::vector<std::size_t>> by_span;
  std::map<int, AliasSampler> span_samplers;

  void finalize() {
    if (!patterns.empty()) sampler.emplace(weights);
    for (std::size_t i = 0; i < patterns.size(); ++i) by_span[patterns[i][0]].push_back(i);
    for (const auto& [span, idxs] : by_span) {
      std::vector<double> w;
      w.reserve(idxs.size());
      for (const auto i : idxs) w.push_back(weights[i]);
      span_samplers.emplace(span, AliasSampler{w});
    }
  }
  UnitIdx sample(std::mt19937_64& rng) const { return patterns[sampler->sample(rng)]; }
  std::optional<UnitIdx> sample_span(int span, std::mt19937_64& rng) const {
    auto it = span_samplers.find(span);
    if (it == span_samplers.end()) return std::nullopt;
    return patterns[by_span.at(span)[it->second.sample(rng)]];
  }
};

/// Sampled units of one date grouped by span, with multiset consumption.
struct UnitPool {
  struct Entry {
    int ozone, dzone;
    bool used = false;
  };
  std::map<int, std::vector<Entry>> groups;
  int live_total = 0;

  void add(const UnitIdx& u) {
    groups[u[0]].push_back({u[1], u[2], false});
    ++live_total;
  }
  bool consume_first(int span, int ozone, int dzone) {
    auto it = groups.find(span);
    if (it == groups.end()) return false;
    for (auto& e : it->second) {
      if (!e.used && e.ozone == ozone && e.dzone == dzone) {
        e.used = true;
        --live_total;
        return true;
      }
    }
    return false;
  }
};

struct Option {
  int ozone, dzone;
  bool from_pool;
  int copies;  // live pool multiplicity; synthesized options are unbounded
};
struct SpanChoices {
  int span;
  std::vector<Option> options;
};

int step_score(int pos, const Option& o) { return (pos >= 0 && o.ozone == pos) ? 1 : 0; }

/// Exact maximal-continuity enumeration over chronological trip slots.
/// The best continuation depends only on the running position, so a
/// suffix table over (slot, position) reaches optima a fixed-width beam
/// can miss. Consecutive slots may share a span (duplicate trips); an
/// option with c pool copies may appear at most c times in one
/// combination. The suffix table ignores multiplicity, so the search may
/// settle slightly below the unconstrained bound when copies bind; the
/// walk then relaxes the requirement rather than returning nothing.
/// Emits option indices per slot for up to k combinations, tie order
/// seeded.
void enumerate_optimal(const std::vector<SpanChoices>& spans, int start_pos, std::size_t k,
                       std::mt19937_64& rng, std::vector<std::vector<std::size_t>>& out,
                       int& max_score) {
  const std::size_t depth = spans.size();
  std::vector<std::vector<int>> positions(depth);
  positions[0] = {start_pos};
  for (std::size_t i = 1; i < depth; ++i) {
    std::set<int> dests;
    for (const auto& o : spans[i - 1].options) dests.insert(o.dzone);
    positions[i].assign(dests.begin(), dests.end());
  }
  std::vector<std::map<int, int>> suffix(depth + 1);
  for (std::size_t i = depth; i-- > 0;) {
    for (const auto p : positions[i]) {
      int best = 0;
      for (const auto& o : spans[i].options) {
        const int tail = i + 1 < depth ? suffix[i + 1][o.dzone] : 0;
        best = std::max(best, step_score(p, o) + tail);
      }
      suffix[i][p] = best;
    }
  }

  std::vector<std::vector<std::size_t>> order(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    order[i].resize(spans[i].options.size());
    std::iota(order[i].begin(), order[i].end(), std::size_t{0});
    for (std::size_t j = order[i].size(); j > 1; --j) {
      std::swap(order[i][j - 1], order[i][uniform_index(rng, j)]);
    }
  }

  // remaining copies per (span, option); slots of one span share the row
  std::map<std::pair<int, std::size_t>, int> remaining;
  for (std::size_t i = 0; i < depth; ++i) {
    for (std::size_t oi = 0; oi < spans[i].options.size(); ++oi) {
      remaining[{spans[i].span, oi}] = spans[i].options[oi].copies;
    }
  }

  std::vector<std::size_t> prefix(depth);
  int need = 0;
  const std::function<bool(std::size_t, int, int)> dfs = [&](std::size_t i, int pos,
                                                             int got) -> bool {
    if (i == depth) {
      if (got < need) return false;
      out.push_back(prefix);
      return out.size() >= k;
    }
    for (const auto oi : order[i]) {
      const auto& o = spans[i].options[oi];
      auto& left = remaining[{spans[i].span, oi}];
      if (left <= 0) continue;
      const int step = step_score(pos, o);
      const int tail = i + 1 < depth ? suffix[i + 1][o.dzone] : 0;
      if (got + step + tail < need) continue;  // cannot reach the target
      prefix[i] = oi;
      --left;
      const bool full = dfs(i + 1, o.dzone, got + step);
      ++left;
      if (full) return true;
    }
    return false;
  };

  // multiplicity can make the unconstrained bound unreachable; relax the
  // target until some combination exists
  for (need = suffix[0][start_pos]; need >= 0; --need) {
    dfs(0, start_pos, 0);
    if (!out.empty()) {
      max_score = need;
      return;
    }
  }
  max_score = 0;
}

int combo_score(const std::vector<SpanChoices>& spans, const std::vector<std::size_t>& pick,
                int start_pos) {
  int score = 0;
  int pos = start_pos;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& o = spans[i].options[pick[i]];
    score += step_score(pos, o);
    pos = o.dzone;
  }
  return score;
}

struct Candidate {
  std::vector<UnitIdx> units;
  std::vector<bool> from_pool;
  int score = 0;
};

std::vector<Candidate> enumerate_candidates(const std::vector<SpanChoices>& spans, int start_pos,
                                            std::size_t k, std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> optimal;
  int max_score = 0;
  enumerate_optimal(spans, start_pos, k, rng, optimal, max_score);

  std::vector<Candidate> out;
  std::set<std::vector<std::size_t>> seen;
  const auto push = [&](std::vector<std::size_t> picks) {
    if (!seen.insert(picks).second) return;
    Candidate c;
    c.score = combo_score(spans, picks, start_pos);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const auto& o = spans[i].options[picks[i]];
      c.units.push_back({spans[i].span, o.ozone, o.dzone});
      c.from_pool.push_back(o.from_pool);
    }
    out.push_back(std::move(c));
  };
  for (auto& picks : optimal) push(std::move(picks));

  std::size_t attempts = 0;
  while (out.size() < k && attempts < 4 * k + 8) {
    ++attempts;
    std::vector<std::size_t> picks(spans.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
      picks[i] = uniform_index(rng, spans[i].options.size());
    }
    push(std::move(picks));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return out;
}

/// Committed hyper-edge graph with BFS mean vectors. A tentative vertex's
/// extra edges are passed as an overlay so candidate evaluation never
/// mutates the committed state.
struct AssocGraph {
  std::vector<std::vector<int>> adj;  // sorted unique neighbor lists
  std::vector<char> included;

  void ensure(std::size_t n) {
    if (adj.size() < n) {
      adj.resize(n);
      included.resize(n, 0);
    }
  }
  void add_edge(int u, int v) {
    const auto ins = [](std::vector<int>& list, int x) {
      auto it = std::lower_bound(list.begin(), list.end(), x);
      if (it == list.end() || *it != x) list.insert(it, x);
    };
    ins(adj[std::size_t(u)], v);
    ins(adj[std::size_t(v)], u);
  }

  std::optional<std::vector<double>> mean_vector(const std::vector<int>& universe, int depth,
                                                 int overlay_node,
                                                 const std::vector<int>& overlay_targets) const {
    std::vector<double> mean(std::size_t(depth), 0.0);
    std::size_t connected = 0;
    std::vector<int> dist(adj.size(), -1);
    std::vector<int> touched;
    std::vector<std::int64_t> counts(std::size_t(depth), 0);
    std::vector<char> is_overlay_target(adj.size(), 0);
    for (const auto t : overlay_targets) is_overlay_target[std::size_t(t)] = 1;

    for (const auto src : universe) {
      std::fill(counts.begin(), counts.end(), 0);
      for (const auto t : touched) dist[std::size_t(t)] = -1;
      touched.clear();

      std::queue<int> q;
      dist[std::size_t(src)] = 0;
      touched.push_back(src);
      q.push(src);
      while (!q.empty()) {
        const int u = q.front();
        q.pop();
        const int du = dist[std::size_t(u)];
        if (du >= depth) continue;
        const auto visit = [&](int w) {
          if (!included[std::size_t(w)] || dist[std::size_t(w)] != -1) return;
          dist[std::size_t(w)] = du + 1;
          touched.push_back(w);
          ++counts[std::size_t(du)];
          q.push(w);
        };
        for (const int w : adj[std::size_t(u)]) visit(w);
        if (u == overlay_node) {
          for (const int w : overlay_targets) visit(w);
        } else if (is_overlay_target[std::size_t(u)]) {
          visit(overlay_node);
        }
      }
      const auto total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
      if (total == 0) continue;
      ++connected;
      for (int l = 0; l < depth; ++l) {
        mean[std::size_t(l)] += double(counts[std::size_t(l)]) / double(total);
      }
    }
    if (connected == 0) return std::nullopt;
    for (auto& v : mean) v /= double(connected);
    return mean;
  }
};

double deviation(const std::optional<std::vector<double>>& a,
                 const std::optional<std::vector<double>>& b) {
  // an empty association matrix leaves the vehicle unconstrained
  if (!a || !b) return 0.0;
  double sum = 0;
  for (std::size_t i = 0; i < a->size(); ++i) {
    const double d = (*a)[i] - (*b)[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// Per-date postings of generated trips; yields the hyper-edge delta a
/// tentative combination would add.
struct DatePostings {
  AssociationMatch match;
  std::map<std::tuple<int, int, int>, std::vector<int>> buckets;  // span, zone, role
  std::map<int, std::vector<int>> span_rows;
  std::unordered_map<int, std::set<int>> row_spans, row_os, row_ds;

  explicit DatePostings(AssociationMatch m) : match(m) {}

  void add(int row, const std::vector<UnitIdx>& trips) {
    for (const auto& [span, o, d] : trips) {
      if (match == AssociationMatch::SameTrip) {
        auto& bo = buckets[{span, o, 0}];
        if (std::find(bo.begin(), bo.end(), row) == bo.end()) bo.push_back(row);
        auto& bd = buckets[{span, d, 1}];
        if (std::find(bd.begin(), bd.end(), row) == bd.end()) bd.push_back(row);
      } else {
        if (row_spans[row].insert(span).second) span_rows[span].push_back(row);
        row_os[row].insert(o);
        row_ds[row].insert(d);
      }
    }
  }

  std::vector<int> neighbors(int row, const std::vector<UnitIdx>& trips) const {
    std::set<int> found;
    if (match == AssociationMatch::SameTrip) {
      for (const auto& [span, o, d] : trips) {
        for (const int role : {0, 1}) {
          const int zone = role == 0 ? o : d;
          auto it = buckets.find({span, zone, role});
          if (it == buckets.end()) continue;
          for (const int r : it->second) {
            if (r != row) found.insert(r);
          }
        }
      }
    } else {
      std::set<int> spans, os, ds;
      for (const auto& [span, o, d] : trips) {
        spans.insert(span);
        os.insert(o);
        ds.insert(d);
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
      for (const auto s : spans) {
        auto it = span_rows.find(s);
        if (it == span_rows.end()) continue;
        for (const int r : it->second) {
          if (r == row || found.contains(r)) continue;
          const auto other_os = row_os.find(r);
          const auto other_ds = row_ds.find(r);
          if ((other_os != row_os.end() && intersects(os, other_os->second)) ||
              (other_ds != row_ds.end() && intersects(ds, other_ds->second))) {
            found.insert(r);
          }
        }
      }
    }
    return {found.begin(), found.end()};
  }
};

/// Rolling state for one label subgraph.
struct LabelState {
  const PipelineConfig& cfg;
  std::string label;
  std::mt19937_64 rng;

  Interner zones;
  std::vector<std::string> vehicle_ids;  // row -> original id
  std::vector<Date> dates;
  std::vector<std::map<int, std::vector<UnitIdx>>> day_trips;  // per date: row -> chronological trips

  AssocGraph original;   // cumulative original hyper-edges, dates <= current
  AssocGraph generated;  // committed generated hyper-edges
  std::vector<std::vector<std::pair<int, int>>> original_daily_edges;

  std::vector<char> placed;
  std::vector<int> placed_rows;        // placement order
  std::vector<std::string> pseudonym;  // per row, assigned at first placement
  std::vector<int> position;           // per row, zone id or -1 (unknown)

  LabelState(const kg::TripKG& sub, std::string_view label_name, const PipelineConfig& config,
             std::uint64_t seed)
      : cfg(config), label(label_name), rng(seed) {
    std::unordered_map<std::string_view, int> row_of;
    for (const auto v : sub.entities(kg::EntityType::Vehicle)) {
      vehicle_ids.emplace_back(sub.key(v));
    }
    for (std::size_t i = 0; i < vehicle_ids.size(); ++i) row_of.emplace(vehicle_ids[i], int(i));

    dates = kg::dates_of(sub);
    day_trips.resize(dates.size());
    std::map<Date, std::size_t> date_index;
    for (std::size_t i = 0; i < dates.size(); ++i) date_index[dates[i]] = i;

    struct RawTrip {
      std::int32_t ftime;
      kg::EntityId id;
      UnitIdx unit;
    };
    std::vector<std::map<int, std::vector<RawTrip>>> raw(dates.size());
    for (const auto trip : sub.entities(kg::EntityType::Trip)) {
      const auto view = kg::trip_view(sub, trip);
      const auto span = cfg.spans.index_by_name(sub.key(view.span));
      if (!span) {
        throw std::invalid_argument("generation: span '" + sub.key(view.span) +
                                    "' is not in the configured span list");
      }
      const int row = row_of.at(sub.key(view.vehicle));
      const auto di = date_index.at(*Date::parse(sub.key(view.date)));
      raw[di][row].push_back({view.ftime.seconds, trip,
                              {int(*span), zones.get(sub.key(view.ozone)),
                               zones.get(sub.key(view.dzone))}});
    }
    for (std::size_t di = 0; di < dates.size(); ++di) {
      for (auto& [row, trips] : raw[di]) {
        std::sort(trips.begin(), trips.end(), [](const RawTrip& a, const RawTrip& b) {
          return std::tie(a.ftime, a.id) < std::tie(b.ftime, b.id);
        });
        auto& out = day_trips[di][row];
        out.reserve(trips.size());
        for (const auto& t : trips) out.push_back(t.unit);
      }
    }

    original.ensure(vehicle_ids.size());
    generated.ensure(vehicle_ids.size());
    original_daily_edges.resize(dates.size());
    for (std::size_t di = 0; di < dates.size(); ++di) {
      std::vector<std::vector<UnitIdx>> by_vehicle(vehicle_ids.size());
      for (const auto& [row, trips] : day_trips[di]) by_vehicle[std::size_t(row)] = trips;
      original_daily_edges[di] = cgraph::daily_hyper_edges(by_vehicle, cfg.mining.match);
    }

    placed.assign(vehicle_ids.size(), 0);
    pseudonym.resize(vehicle_ids.size());
    position.assign(vehicle_ids.size(), -1);
  }

  PatternModel pattern_model(std::size_t di) const {
    std::map<UnitIdx, std::size_t> index;
    PatternModel model;
    for (const auto& [row, trips] : day_trips[di]) {
      for (const auto& u : trips) {
        if (auto it = index.find(u); it != index.end()) {
          model.weights[it->second] += 1.0;
        } else {
          index.emplace(u, model.patterns.size());
          model.patterns.push_back(u);
          model.weights.push_back(1.0);
        }
      }
    }
    model.finalize();
    return model;
  }
};

struct DayChainState {
  int row;
  std::vector<UnitIdx> chain;  // chronological, span-major
};

struct DateOutcome {
  DateReport report;
  std::vector<DayChainState> chains;  // processing order
};

DateOutcome generate_one_date(LabelState& st, std::size_t di) {
  const auto& day = st.day_trips[di];
  DateOutcome out;
  out.report.label = st.label;
  out.report.date = st.dates[di];

  // original hyper-edges become visible as the rolling date advances
  for (const auto& [u, v] : st.original_daily_edges[di]) st.original.add_edge(u, v);

  const auto model = st.pattern_model(di);
  int original_trips = 0;
  for (const auto& [row, trips] : day) original_trips += int(trips.size());
  out.report.sampled = original_trips;

  UnitPool pool;
  for (int i = 0; i < original_trips; ++i) pool.add(model.sample(st.rng));

  // vehicles with more trips face the tighter pool first
  std::vector<int> order;
  order.reserve(day.size());
  for (const auto& [row, trips] : day) order.push_back(row);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto ta = day.at(a).size();
    const auto tb = day.at(b).size();
    if (ta != tb) return ta > tb;
    return st.vehicle_ids[std::size_t(a)] < st.vehicle_ids[std::size_t(b)];
  });

  DatePostings postings(st.cfg.mining.match);
  const int depth = st.cfg.generation.association_depth;
  const auto beam = std::size_t(std::max(1, st.cfg.generation.beam_width));
  double deviation_sum = 0;

  for (const int row : order) {
    const auto& trips = day.at(row);
    std::map<int, int> slot_counts;  // span -> original trips in it
    for (const auto& u : trips) ++slot_counts[u[0]];

    // one chronological slot per original trip; slots of a repeated span
    // share the same option set, bounded by the pool multiplicity
    std::vector<SpanChoices> choices;
    for (const auto& [s, count] : slot_counts) {
      SpanChoices sc;
      sc.span = s;
      std::map<std::pair<int, int>, std::size_t> seen;
      if (auto it = pool.groups.find(s); it != pool.groups.end()) {
        for (const auto& e : it->second) {
          if (e.used) continue;
          const auto key = std::make_pair(e.ozone, e.dzone);
          if (auto found = seen.find(key); found != seen.end()) {
            ++sc.options[found->second].copies;
          } else {
            seen.emplace(key, sc.options.size());
            sc.options.push_back({e.ozone, e.dzone, true, 1});
          }
        }
      }
      const int live = std::accumulate(sc.options.begin(), sc.options.end(), 0,
                                       [](int acc, const Option& o) { return acc + o.copies; });
      if (live < count) {
        // conditional draws top up scarce groups; they are not pool-backed
        for (int draw = 0; draw < count - live + 2; ++draw) {
          const auto u = model.sample_span(s, st.rng);
          if (!u) {
            throw std::runtime_error("generation: span group and fallback are both empty for '" +
                                     st.cfg.spans.spans[std::size_t(s)].name + "'");
          }
          const auto key = std::make_pair((*u)[1], (*u)[2]);
          if (auto found = seen.find(key); found != seen.end()) {
            sc.options[found->second].copies += count;  // synthesis lifts the bound
          } else {
            seen.emplace(key, sc.options.size());
            sc.options.push_back({(*u)[1], (*u)[2], false, count});
          }
        }
      }
      for (int slot = 0; slot < count; ++slot) choices.push_back(sc);
    }

    auto candidates = enumerate_candidates(choices, st.position[std::size_t(row)], beam, st.rng);
    // continuity is a hard priority: only maximal-score candidates reach
    // the association objective
    const int top = candidates.front().score;
    std::size_t eligible = 0;
    while (eligible < candidates.size() && candidates[eligible].score == top) ++eligible;

    st.generated.included[std::size_t(row)] = 1;
    st.original.included[std::size_t(row)] = 1;
    std::vector<int> universe = st.placed_rows;
    if (!st.placed[std::size_t(row)]) universe.push_back(row);

    const auto a_orig = st.original.mean_vector(universe, depth, -1, {});

    std::size_t chosen = 0;
    double chosen_dev = 0;
    double best = std::numeric_limits<double>::infinity();
    std::map<std::vector<int>, double> memo;
    for (std::size_t ci = 0; ci < eligible; ++ci) {
      const auto delta = postings.neighbors(row, candidates[ci].units);
      double dev;
      if (const auto it = memo.find(delta); it != memo.end()) {
        dev = it->second;
      } else {
        const auto a_gen = st.generated.mean_vector(universe, depth, row, delta);
        dev = deviation(a_orig, a_gen);
        memo.emplace(delta, dev);
      }
      if (dev < best) {
        best = dev;
        chosen = ci;
        chosen_dev = dev;
      }
      if (dev < st.cfg.generation.early_exit_epsilon) {
        chosen = ci;
        chosen_dev = dev;
        break;
      }
    }
    deviation_sum += chosen_dev;

    // commit: consume pool units (falling back to synthesis when a value
    // ran out), post trips, add edges, roll the position
    const auto& cand = candidates[chosen];
    for (std::size_t i = 0; i < cand.units.size(); ++i) {
      if (pool.consume_first(cand.units[i][0], cand.units[i][1], cand.units[i][2])) {
        ++out.report.consumed;
      } else {
        ++out.report.fallback;
      }
    }
    out.report.extras += int(cand.units.size()) - int(slot_counts.size());
    const auto delta = postings.neighbors(row, cand.units);
    postings.add(row, cand.units);
    for (const int u : delta) st.generated.add_edge(row, u);
    if (!st.placed[std::size_t(row)]) {
      st.placed[std::size_t(row)] = 1;
      st.placed_rows.push_back(row);
    }
    st.position[std::size_t(row)] = cand.units.back()[2];
    out.chains.push_back({row, cand.units});
    ++out.report.vehicles;
  }

  out.report.discarded = pool.live_total;
  for (auto& e : pool.groups) {
    for (auto& entry : e.second) entry.used = true;
  }
  pool.live_total = 0;
  for (const auto& chain : out.chains) out.report.trips += int(chain.chain.size());
  out.report.mean_deviation =
      out.report.vehicles > 0 ? deviation_sum / double(out.report.vehicles) : 0.0;
  return out;
}

std::string make_pseudonym(std::size_t label_index, std::size_t seq,
                           const std::unordered_set<std::string_view>& reserved) {
  std::string id = "g" + std::to_string(label_index) + "-" + std::to_string(seq);
  while (reserved.contains(id)) id.insert(id.begin(), 'g');
  return id;
}

}  // namespace

std::vector<TripUnitGraph> generate_unit_graphs(const cgraph::PatternDistribution& f, int n,
                                                std::mt19937_64& rng) {
  if (n < 0) throw std::invalid_argument("generate_unit_graphs: n must be >= 0");
  std::vector<TripUnitGraph> out;
  if (n == 0) return out;
  if (f.patterns.empty())
    throw std::invalid_argument("generate_unit_graphs: empty distribution");
  std::vector<double> weights;
  weights.reserve(f.patterns.size());
  for (const auto& p : f.patterns) weights.push_back(double(p.count));
  const AliasSampler sampler(weights);
  out.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    const auto& p = f.patterns[sampler.sample(rng)];
    out.push_back({p.span, p.ozone, p.dzone});
  }
  return out;
}

std::vector<CandidateCombination> candidate_combinations(
    const std::vector<std::uint8_t>& active_spans,
    const std::optional<std::string>& current_position,
    const std::vector<std::vector<TripUnitGraph>>& pool_by_span,
    const cgraph::PatternDistribution& fallback, int k, std::mt19937_64& rng,
    const TimeSpanConfig& spans) {
  if (k < 1) throw std::invalid_argument("candidate_combinations: k must be >= 1");
  if (active_spans.size() != spans.size() || pool_by_span.size() != spans.size())
    throw std::invalid_argument("candidate_combinations: span dimension mismatch");

  Interner zones;
  const int start_pos = current_position ? zones.get(*current_position) : -1;

  std::vector<SpanChoices> choices;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (!active_spans[s]) continue;
    SpanChoices sc;
    sc.span = int(s);
    std::map<std::pair<int, int>, std::size_t> seen;
    for (const auto& u : pool_by_span[s]) {
      const auto key = std::make_pair(zones.get(u.ozone), zones.get(u.dzone));
      if (auto it = seen.find(key); it != seen.end()) {
        ++sc.options[it->second].copies;
      } else {
        seen.emplace(key, sc.options.size());
        sc.options.push_back({key.first, key.second, true, 1});
      }
    }
    if (sc.options.empty()) {
      std::vector<const cgraph::TripPattern*> conditional;
      std::vector<double> w;
      for (const auto& p : fallback.patterns) {
        if (spans.index_by_name(p.span) == s) {
          conditional.push_back(&p);
          w.push_back(double(p.count));
        }
      }
      if (conditional.empty()) {
        throw std::runtime_error("candidate_combinations: span '" + spans.spans[s].name +
                                 "' has an empty pool group and no fallback pattern");
      }
      const AliasSampler sampler(w);
      const auto* p = conditional[sampler.sample(rng)];
      sc.options.push_back({zones.get(p->ozone), zones.get(p->dzone), false, 1});
    }
    choices.push_back(std::move(sc));
  }
  if (choices.empty()) return {};

  std::vector<CandidateCombination> out;
  for (const auto& c : enumerate_candidates(choices, start_pos, std::size_t(k), rng)) {
    CandidateCombination cc;
    cc.continuity_score = c.score;
    for (std::size_t i = 0; i < c.units.size(); ++i) {
      cc.units.push_back({{spans.spans[std::size_t(c.units[i][0])].name,
                           zones.names[std::size_t(c.units[i][1])],
                           zones.names[std::size_t(c.units[i][2])]},
                          c.from_pool[i]});
    }
    out.push_back(std::move(cc));
  }
  return out;
}

namespace {

/// Groups a graph's trips by date and caller-defined vehicle rows.
std::map<Date, std::map<int, std::vector<UnitIdx>>> group_graph_trips(
    const kg::TripKG& g, const std::unordered_map<std::string_view, int>& row_of,
    const TimeSpanConfig& spans, Interner& zones) {
  struct RawTrip {
    std::int32_t ftime;
    kg::EntityId id;
    UnitIdx unit;
  };
  std::map<Date, std::map<int, std::vector<RawTrip>>> raw;
  for (const auto trip : g.entities(kg::EntityType::Trip)) {
    const auto view = kg::trip_view(g, trip);
    const auto row = row_of.find(g.key(view.vehicle));
    if (row == row_of.end()) continue;
    const auto span = spans.index_by_name(g.key(view.span));
    if (!span) throw std::invalid_argument("unknown span '" + g.key(view.span) + "'");
    raw[*Date::parse(g.key(view.date))][row->second].push_back(
        {view.ftime.seconds, trip,
         {int(*span), zones.get(g.key(view.ozone)), zones.get(g.key(view.dzone))}});
  }
  std::map<Date, std::map<int, std::vector<UnitIdx>>> out;
  for (auto& [date, rows] : raw) {
    for (auto& [row, trips] : rows) {
      std::sort(trips.begin(), trips.end(), [](const RawTrip& a, const RawTrip& b) {
        return std::tie(a.ftime, a.id) < std::tie(b.ftime, b.id);
      });
      auto& dst = out[date][row];
      for (const auto& t : trips) dst.push_back(t.unit);
    }
  }
  return out;
}

}  // namespace

std::size_t select_optimal(const kg::TripKG& original, const kg::TripKG& generated,
                           std::string_view vehicle, Date date,
                           std::span<const CandidateCombination> candidates, double epsilon,
                           const PipelineConfig& cfg) {
  if (candidates.empty()) throw std::invalid_argument("select_optimal: no candidates");

  std::vector<std::string> ids;
  for (const auto v : generated.entities(kg::EntityType::Vehicle)) {
    ids.emplace_back(generated.key(v));
  }
  if (std::find(ids.begin(), ids.end(), vehicle) == ids.end()) ids.emplace_back(vehicle);
  std::unordered_map<std::string_view, int> row_of;
  for (std::size_t i = 0; i < ids.size(); ++i) row_of.emplace(ids[i], int(i));
  const int vrow = row_of.at(vehicle);
  const int depth = cfg.generation.association_depth;

  Interner zones;
  AssocGraph orig_graph;
  orig_graph.ensure(ids.size());
  for (const auto& [d, rows] : group_graph_trips(original, row_of, cfg.spans, zones)) {
    if (date < d) continue;  // only dates up to the one being generated
    std::vector<std::vector<UnitIdx>> by_vehicle(ids.size());
    for (const auto& [row, trips] : rows) by_vehicle[std::size_t(row)] = trips;
    for (const auto& [u, v] : cgraph::daily_hyper_edges(by_vehicle, cfg.mining.match)) {
      orig_graph.add_edge(u, v);
    }
  }

  AssocGraph gen_graph;
  gen_graph.ensure(ids.size());
  DatePostings postings(cfg.mining.match);
  for (const auto& [d, rows] : group_graph_trips(generated, row_of, cfg.spans, zones)) {
    std::vector<std::vector<UnitIdx>> by_vehicle(ids.size());
    for (const auto& [row, trips] : rows) by_vehicle[std::size_t(row)] = trips;
    for (const auto& [u, v] : cgraph::daily_hyper_edges(by_vehicle, cfg.mining.match)) {
      gen_graph.add_edge(u, v);
    }
    if (d == date) {
      for (const auto& [row, trips] : rows) postings.add(row, trips);
    }
  }

  std::vector<int> universe(ids.size());
  std::iota(universe.begin(), universe.end(), 0);
  std::fill(orig_graph.included.begin(), orig_graph.included.end(), 1);
  std::fill(gen_graph.included.begin(), gen_graph.included.end(), 1);

  const auto a_orig = orig_graph.mean_vector(universe, depth, -1, {});

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    std::vector<UnitIdx> units;
    for (const auto& cu : candidates[ci].units) {
      const auto span = cfg.spans.index_by_name(cu.unit.span);
      if (!span) throw std::invalid_argument("unknown span '" + cu.unit.span + "'");
      units.push_back({int(*span), zones.get(cu.unit.ozone), zones.get(cu.unit.dzone)});
    }
    const auto delta = postings.neighbors(vrow, units);
    const auto a_gen = gen_graph.mean_vector(universe, depth, vrow, delta);
    const double dev = deviation(a_orig, a_gen);
    if (dev < epsilon) return ci;
    if (dev < best) {
      best = dev;
      best_idx = ci;
    }
  }
  return best_idx;
}

GenerationResult generate_label(const kg::TripKG& label_sub, std::string_view label,
                                const PipelineConfig& cfg, std::uint64_t seed,
                                const std::vector<std::string>& reserved_ids) {
  LabelState st(label_sub, label, cfg, seed);
  GenerationResult result;
  if (st.dates.empty()) return result;

  std::unordered_set<std::string_view> reserved;
  for (const auto& id : reserved_ids) reserved.insert(id);
  for (const auto& id : st.vehicle_ids) reserved.insert(id);

  const auto parsed = mining::label_from(label);
  const auto label_index = parsed ? std::size_t(*parsed) : std::size_t(9);

  for (std::size_t di = 0; di < st.dates.size(); ++di) {
    auto outcome = generate_one_date(st, di);
    for (const auto& chain : outcome.chains) {
      auto& pseudo = st.pseudonym[std::size_t(chain.row)];
      if (pseudo.empty()) {
        pseudo = make_pseudonym(label_index, result.mapping.size(), reserved);
        result.mapping.emplace_back(st.vehicle_ids[std::size_t(chain.row)], pseudo);
        result.labels.emplace_back(pseudo, std::string{label});
      }
      for (const auto& unit : chain.chain) {
        ingest::TripRecord rec;
        rec.vehicle = pseudo;
        rec.date = st.dates[di];
        // span start stands in for the generated ftime; emission order
        // breaks the ties, which build_graph keeps
        rec.ftime = TimeOfDay{cfg.spans.spans[std::size_t(unit[0])].begin};
        rec.fzone = st.zones.names[std::size_t(unit[1])];
        rec.tzone = st.zones.names[std::size_t(unit[2])];
        result.records.push_back(std::move(rec));
      }
    }
    result.reports.push_back(std::move(outcome.report));
  }
  return result;
}

GenerationResult generate_all(const kg::TripKG& g, const PipelineConfig& cfg) {
  if (!kg::labels_attached(g)) throw std::logic_error("generate_all: labels are not attached");
  if (!cfg.seed) throw std::invalid_argument("generate_all: a seed is required");

  std::vector<std::string> reserved;
  reserved.reserve(g.entity_count(kg::EntityType::Vehicle));
  for (const auto v : g.entities(kg::EntityType::Vehicle)) reserved.push_back(g.key(v));

  GenerationResult result;
  for (std::size_t li = 0; li < mining::kLabelCount; ++li) {
    const auto label = mining::to_string(mining::MobilityLabel(li));
    const auto sub = kg::label_subgraph(g, label);
    if (sub.entity_count(kg::EntityType::Trip) == 0) continue;
    auto part = generate_label(sub, label, cfg, stream_seed(*cfg.seed, li), reserved);
    std::move(part.records.begin(), part.records.end(), std::back_inserter(result.records));
    std::move(part.reports.begin(), part.reports.end(), std::back_inserter(result.reports));
    std::move(part.labels.begin(), part.labels.end(), std::back_inserter(result.labels));
    std::move(part.mapping.begin(), part.mapping.end(), std::back_inserter(result.mapping));
  }
  return result;
}

kg::TripKG generated_graph(const GenerationResult& r, const PipelineConfig& cfg) {
  auto g = kg::build_graph(r.records, cfg.calendar, cfg.spans);
  if (!r.labels.empty()) kg::attach_labels(g, r.labels);
  return g;
}

void write_report(std::ostream& out, std::span<const DateReport> reports) {
  for (const auto& rep : reports) {
    const nlohmann::json j{{"label", rep.label},
                           {"date", rep.date.to_string()},
                           {"sampled", rep.sampled},
                           {"consumed", rep.consumed},
                           {"fallback", rep.fallback},
                           {"extras", rep.extras},
                           {"discarded", rep.discarded},
                           {"vehicles", rep.vehicles},
                           {"trips", rep.trips},
                           {"mean_deviation", rep.mean_deviation}};
    out << j.dump() << '\n';
  }
}

void write_mapping(std::ostream& out, const GenerationResult& r) {
  out << "original,pseudonym\n";
  for (const auto& [orig, pseudo] : r.mapping) out << orig << ',' << pseudo << '\n';
}

}  // namespace tripkg::gen
