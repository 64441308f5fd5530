#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tripkg/chargraph.hpp"
#include "tripkg/config.hpp"
#include "tripkg/evaluate.hpp"
#include "tripkg/generator.hpp"
#include "tripkg/graph.hpp"
#include "tripkg/mining.hpp"
#include "tripkg/records.hpp"
#include "tripkg/synth.hpp"

namespace py = pybind11;
using namespace tripkg;

namespace {

using RecordTuple = std::tuple<std::string, std::string, std::string, std::string, std::string>;

std::vector<ingest::TripRecord> records_from_tuples(const std::vector<RecordTuple>& rows) {
  std::vector<ingest::TripRecord> records;
  records.reserve(rows.size());
  for (const auto& [vehicle, date, ftime, fzone, tzone] : rows) {
    const auto d = Date::parse(date);
    const auto t = TimeOfDay::parse(ftime);
    if (!d || !t) throw py::value_error("bad date or time in record for vehicle " + vehicle);
    records.push_back({vehicle, *d, *t, fzone, tzone});
  }
  return records;
}

std::vector<RecordTuple> tuples_from_records(const std::vector<ingest::TripRecord>& records) {
  std::vector<RecordTuple> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.emplace_back(r.vehicle, r.date.to_string(), r.ftime.to_string(), r.fzone, r.tzone);
  }
  return rows;
}

py::dict profile_dict(const mining::MobilityProfile& p) {
  py::dict d;
  d["vehicle"] = p.vehicle;
  d["freq_class"] = std::string{to_string(p.freq)};
  d["time_conc"] = int(p.time_conc);
  d["origin_conc"] = int(p.origin_conc);
  d["dest_conc"] = int(p.dest_conc);
  d["S_d"] = p.s_d;
  d["score_ot"] = p.score_ot;
  d["score_dt"] = p.score_dt;
  d["score_od"] = p.score_od;
  d["S_am"] = p.s_am;
  d["label"] = std::string{to_string(p.label)};
  return d;
}

}  // namespace

PYBIND11_MODULE(_tripkg, m) {
  m.doc() = "Trip knowledge graph toolkit: build a typed graph from individual trip "
            "records, mine mobility labels, generate privacy-preserving synthetic "
            "trips, and evaluate the result.";

  py::class_<MiningConfig>(m, "MiningConfig")
      .def_readwrite("freq_t1", &MiningConfig::freq_t1)
      .def_readwrite("freq_t2", &MiningConfig::freq_t2)
      .def_readwrite("freq_t3", &MiningConfig::freq_t3)
      .def_readwrite("theta_am", &MiningConfig::theta_am)
      .def_readwrite("theta_d", &MiningConfig::theta_d)
      .def_readwrite("rho", &MiningConfig::rho)
      .def_readwrite("window_days", &MiningConfig::window_days);

  py::class_<GenerationConfig>(m, "GenerationConfig")
      .def_readwrite("beam_width", &GenerationConfig::beam_width)
      .def_readwrite("early_exit_epsilon", &GenerationConfig::early_exit_epsilon)
      .def_readwrite("association_depth", &GenerationConfig::association_depth)
      .def_readwrite("keep_mapping", &GenerationConfig::keep_mapping);

  py::class_<EvalConfig>(m, "EvalConfig")
      .def_readwrite("kl_smoothing", &EvalConfig::kl_smoothing)
      .def_readwrite("top_k", &EvalConfig::top_k);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def_readwrite("commuters", &SynthConfig::commuters)
      .def_readwrite("passing", &SynthConfig::passing)
      .def_readwrite("high_freq", &SynthConfig::high_freq)
      .def_readwrite("randoms", &SynthConfig::randoms)
      .def_readwrite("days", &SynthConfig::days)
      .def_readwrite("zones", &SynthConfig::zones)
      .def_readwrite("continuity", &SynthConfig::continuity);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_static("load", [](const std::string& path) { return PipelineConfig::load(path); })
      .def_readwrite("seed", &PipelineConfig::seed)
      .def_property(
          "mining", [](PipelineConfig& c) -> MiningConfig& { return c.mining; },
          [](PipelineConfig& c, const MiningConfig& v) { c.mining = v; },
          py::return_value_policy::reference_internal)
      .def_property(
          "generation", [](PipelineConfig& c) -> GenerationConfig& { return c.generation; },
          [](PipelineConfig& c, const GenerationConfig& v) { c.generation = v; },
          py::return_value_policy::reference_internal)
      .def_property(
          "evaluation", [](PipelineConfig& c) -> EvalConfig& { return c.evaluation; },
          [](PipelineConfig& c, const EvalConfig& v) { c.evaluation = v; },
          py::return_value_policy::reference_internal)
      .def_property(
          "synth", [](PipelineConfig& c) -> SynthConfig& { return c.synth; },
          [](PipelineConfig& c, const SynthConfig& v) { c.synth = v; },
          py::return_value_policy::reference_internal)
      .def("span_names",
           [](const PipelineConfig& c) {
             std::vector<std::string> names;
             for (const auto& s : c.spans.spans) names.push_back(s.name);
             return names;
           })
      .def("dump", [](const PipelineConfig& c) {
        std::ostringstream out;
        c.dump(out);
        return out.str();
      });

  py::class_<kg::TripKG>(m, "TripKG")
      .def("entity_count",
           [](const kg::TripKG& g, const std::string& etype) {
             const auto t = kg::entity_type_from(etype);
             if (!t) throw py::value_error("unknown entity type: " + etype);
             return g.entity_count(*t);
           })
      .def("total_entities", [](const kg::TripKG& g) { return g.entity_count(); })
      .def("triple_count", [](const kg::TripKG& g) { return g.triple_count(); })
      .def("vehicles",
           [](const kg::TripKG& g) {
             std::vector<std::string> out;
             for (const auto v : g.entities(kg::EntityType::Vehicle)) out.push_back(g.key(v));
             return out;
           })
      .def("labels", [](const kg::TripKG& g) { return kg::labels_of(g); })
      .def("dates",
           [](const kg::TripKG& g) {
             std::vector<std::string> out;
             for (const auto d : kg::dates_of(g)) out.push_back(d.to_string());
             return out;
           })
      .def("contains",
           [](const kg::TripKG& g, const std::string& etype, const std::string& key) {
             const auto t = kg::entity_type_from(etype);
             if (!t) throw py::value_error("unknown entity type: " + etype);
             return g.find(*t, key) != kg::kNoEntity;
           })
      .def("export_triples",
           [](const kg::TripKG& g) {
             std::ostringstream out;
             kg::export_triples(g, out);
             return out.str();
           })
      .def("export_properties", [](const kg::TripKG& g) {
        std::ostringstream out;
        kg::export_properties(g, out);
        return out.str();
      });

  m.def("synth_corpus",
        [](const PipelineConfig& cfg, std::uint64_t seed) {
          const auto corpus = synth::make_corpus(cfg, seed);
          return py::make_tuple(tuples_from_records(corpus.records), corpus.truth);
        },
        py::arg("config"), py::arg("seed"));

  m.def("parse_records_csv",
        [](const std::string& text) {
          std::istringstream in(text);
          const auto result = ingest::parse_records(in);
          std::vector<std::pair<std::size_t, std::string>> rejects;
          for (const auto& r : result.rejected) rejects.emplace_back(r.row, r.reason);
          return py::make_tuple(tuples_from_records(result.records), rejects);
        },
        py::arg("csv_text"));

  m.def("build_graph",
        [](const std::vector<RecordTuple>& rows, const PipelineConfig& cfg) {
          return kg::build_graph(records_from_tuples(rows), cfg.calendar, cfg.spans);
        },
        py::arg("records"), py::arg("config"));

  m.def("import_graph",
        [](const std::string& triples, const std::string& properties) {
          std::istringstream t(triples), p(properties);
          return kg::import_graph(t, &p);
        },
        py::arg("triples_tsv"), py::arg("properties_tsv"));

  m.def("check_schema", [](const kg::TripKG& g) { kg::check_schema(g); });

  m.def("mine",
        [](const kg::TripKG& g, const PipelineConfig& cfg) {
          py::list out;
          for (const auto& p : mining::mine_all(g, cfg.mining)) out.append(profile_dict(p));
          return out;
        },
        py::arg("graph"), py::arg("config"));

  m.def("attach_labels",
        [](kg::TripKG& g, const std::vector<std::pair<std::string, std::string>>& labels) {
          kg::attach_labels(g, labels);
        },
        py::arg("graph"), py::arg("labels"));

  m.def("label_subgraph",
        [](const kg::TripKG& g, const std::string& label) { return kg::label_subgraph(g, label); },
        py::arg("graph"), py::arg("label"));

  m.def("generate",
        [](const kg::TripKG& g, const PipelineConfig& cfg) {
          const auto result = gen::generate_all(g, cfg);
          auto graph = gen::generated_graph(result, cfg);
          py::list reports;
          for (const auto& rep : result.reports) {
            py::dict d;
            d["label"] = rep.label;
            d["date"] = rep.date.to_string();
            d["sampled"] = rep.sampled;
            d["consumed"] = rep.consumed;
            d["fallback"] = rep.fallback;
            d["extras"] = rep.extras;
            d["discarded"] = rep.discarded;
            d["trips"] = rep.trips;
            d["vehicles"] = rep.vehicles;
            d["mean_deviation"] = rep.mean_deviation;
            reports.append(std::move(d));
          }
          return py::make_tuple(std::move(graph), tuples_from_records(result.records), reports,
                                result.mapping);
        },
        py::arg("graph"), py::arg("config"));

  m.def("evaluate",
        [](const kg::TripKG& original, const kg::TripKG& generated, const PipelineConfig& cfg) {
          py::list out;
          for (const auto& rep : eval::evaluate_all(original, generated, cfg)) {
            py::dict d;
            d["label"] = rep.label;
            d["original_trips"] = rep.original_trips;
            d["generated_trips"] = rep.generated_trips;
            d["kl_temporal"] = rep.kl_temporal;
            d["kl_spatial"] = rep.kl_spatial;
            d["association_bias"] =
                rep.association_bias ? py::object(py::float_(*rep.association_bias)) : py::none();
            d["continuity_generated"] = rep.continuity_generated
                                            ? py::object(py::float_(*rep.continuity_generated))
                                            : py::none();
            d["continuity_historical"] = rep.continuity_historical
                                             ? py::object(py::float_(*rep.continuity_historical))
                                             : py::none();
            out.append(std::move(d));
          }
          return out;
        },
        py::arg("original"), py::arg("generated"), py::arg("config"));

  // low-level operations
  m.def("map_timespan",
        [](const std::string& hms, const PipelineConfig& cfg) {
          const auto t = TimeOfDay::parse(hms);
          if (!t) throw py::value_error("bad time: " + hms);
          return map_timespan(*t, cfg.spans);
        },
        py::arg("time"), py::arg("config"));

  m.def("map_week",
        [](const std::string& iso, const PipelineConfig& cfg) {
          const auto d = Date::parse(iso);
          if (!d) throw py::value_error("bad date: " + iso);
          return std::string{to_string(map_week(*d, cfg.calendar))};
        },
        py::arg("date"), py::arg("config"));

  m.def("concentration",
        [](const std::vector<std::int64_t>& counts) { return int(mining::concentration(counts)); },
        py::arg("counts"));

  m.def("association_score",
        [](const std::vector<std::vector<std::int64_t>>& matrix, double rho) {
          return mining::association_score(matrix, rho);
        },
        py::arg("matrix"), py::arg("rho") = 0.25);

  m.def("kl_divergence",
        [](const std::vector<double>& p, const std::vector<double>& q, double eps) {
          return eval::kl_divergence(p, q, eps);
        },
        py::arg("p"), py::arg("q"), py::arg("eps_smooth") = 1e-9);

  m.def("continuity_indicator", [](const std::string& prev_dest, const std::string& next_origin) {
    return cgraph::continuity_indicator(prev_dest, next_origin);
  });

  m.attr("__version__") = "0.1.0";
}
