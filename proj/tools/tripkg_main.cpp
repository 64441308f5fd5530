#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "tripkg/chargraph.hpp"
#include "tripkg/config.hpp"
#include "tripkg/evaluate.hpp"
#include "tripkg/generator.hpp"
#include "tripkg/graph.hpp"
#include "tripkg/mining.hpp"
#include "tripkg/records.hpp"
#include "tripkg/synth.hpp"

namespace fs = std::filesystem;
using namespace tripkg;

namespace {

constexpr const char* kVersion = "tripkg 0.1.0";

// exit codes: 0 ok, 1 partial (rejected rows / fallbacks), 2 fatal
constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kFatal = 2;

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    writer(out);
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

kg::TripKG load_graph(const fs::path& triples, const fs::path& props) {
  std::ifstream tin(triples);
  if (!tin) throw std::runtime_error("cannot open " + triples.string());
  std::ifstream pin(props);
  if (!pin) throw std::runtime_error("cannot open " + props.string());
  return kg::import_graph(tin, &pin);
}

std::vector<mining::MobilityProfile> load_profiles(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return mining::read_profiles(in);
}

void print_label_summary(const kg::TripKG& g) {
  struct Share {
    std::size_t vehicles = 0;
    std::size_t trips = 0;
  };
  std::map<std::string, Share> shares;
  std::size_t total_vehicles = 0, total_trips = 0;
  for (const auto v : g.entities(kg::EntityType::Vehicle)) {
    const auto label = g.out_one(v, kg::Relation::TripType);
    if (label == kg::kNoEntity) continue;
    auto& s = shares[g.key(label)];
    ++s.vehicles;
    s.trips += g.out(v, kg::Relation::HasTrip).size();
    ++total_vehicles;
    total_trips += g.out(v, kg::Relation::HasTrip).size();
  }
  std::printf("%-26s %9s %9s %9s %9s\n", "label", "vehicles", "veh%", "trips", "trip%");
  for (std::size_t li = 0; li < mining::kLabelCount; ++li) {
    const auto name = std::string{mining::to_string(mining::MobilityLabel(li))};
    const auto it = shares.find(name);
    if (it == shares.end()) continue;
    std::printf("%-26s %9zu %8.2f%% %9zu %8.2f%%\n", name.c_str(), it->second.vehicles,
                100.0 * double(it->second.vehicles) / double(total_vehicles), it->second.trips,
                100.0 * double(it->second.trips) / double(total_trips));
  }
  std::printf("%-26s %9zu %8.2f%% %9zu %8.2f%%\n", "total", total_vehicles, 100.0, total_trips,
              100.0);
}

struct GlobalOpts {
  std::optional<fs::path> config_file;
  bool config_dump = false;
  std::optional<std::uint64_t> seed;

  PipelineConfig resolve() const {
    auto cfg = config_file ? PipelineConfig::load(*config_file) : PipelineConfig::defaults();
    if (seed) cfg.seed = seed;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trip knowledge graph toolkit: organize individual trip records as a typed "
               "graph, mine per-vehicle mobility labels, synthesize privacy-preserving trips, "
               "and evaluate the result."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);
  app.fallthrough();  // global options may follow the subcommand

  GlobalOpts global;
  app.add_option("--config", global.config_file, "INI-style configuration file")
      ->check(CLI::ExistingFile);
  app.add_flag("--config-dump", global.config_dump,
               "print the resolved configuration and exit");
  app.add_option("--seed", global.seed, "RNG seed (overrides the config file)");

  // --- ingest ---------------------------------------------------------
  auto* cmd_ingest = app.add_subcommand("ingest", "validate a raw trip CSV");
  fs::path ingest_input, ingest_records = "records.csv", ingest_rejects = "rejects.csv";
  cmd_ingest->add_option("--input", ingest_input, "raw CSV file")->required();
  cmd_ingest->add_option("--records", ingest_records, "canonical records output");
  cmd_ingest->add_option("--rejects", ingest_rejects, "rejection report output");

  // --- build ----------------------------------------------------------
  auto* cmd_build = app.add_subcommand("build", "build the trip knowledge graph");
  fs::path build_records, build_triples = "graph.tsv", build_props = "graph-props.tsv";
  cmd_build->add_option("--records", build_records, "canonical records CSV")->required();
  cmd_build->add_option("--triples", build_triples, "triple TSV output");
  cmd_build->add_option("--props", build_props, "entity property TSV output");

  // --- mine -----------------------------------------------------------
  auto* cmd_mine = app.add_subcommand("mine", "mine per-vehicle mobility labels");
  fs::path mine_triples, mine_props, mine_profiles = "profiles.csv";
  cmd_mine->add_option("--triples", mine_triples, "graph triple TSV")->required();
  cmd_mine->add_option("--props", mine_props, "graph property TSV")->required();
  cmd_mine->add_option("--profiles", mine_profiles, "profile CSV output");

  // --- generate ---------------------------------------------------------
  auto* cmd_generate = app.add_subcommand("generate", "generate a synthetic trip graph");
  fs::path gen_triples, gen_props, gen_profiles;
  fs::path gen_out_triples = "generated.tsv", gen_out_props = "generated-props.tsv";
  fs::path gen_out_trips = "generated-trips.csv", gen_report = "generation-report.jsonl";
  std::optional<fs::path> gen_mapping;
  cmd_generate->add_option("--triples", gen_triples, "original graph triple TSV")->required();
  cmd_generate->add_option("--props", gen_props, "original graph property TSV")->required();
  cmd_generate->add_option("--profiles", gen_profiles, "mined profiles CSV")->required();
  cmd_generate->add_option("--out-triples", gen_out_triples, "generated triple TSV");
  cmd_generate->add_option("--out-props", gen_out_props, "generated property TSV");
  cmd_generate->add_option("--out-trips", gen_out_trips, "generated trips CSV");
  cmd_generate->add_option("--report", gen_report, "per-date generation report (JSON lines)");
  cmd_generate->add_option("--mapping", gen_mapping,
                           "write the original-to-pseudonym mapping (needs keep_mapping)");

  // --- evaluate ---------------------------------------------------------
  auto* cmd_evaluate = app.add_subcommand("evaluate", "compare generated data with the original");
  fs::path eval_orig_triples, eval_orig_props, eval_profiles, eval_gen_triples, eval_gen_props;
  fs::path eval_report = "evaluation.json", eval_top_od = "top-od.csv";
  std::optional<fs::path> eval_plot_dir;
  std::optional<int> eval_top_k;
  cmd_evaluate->add_option("--orig-triples", eval_orig_triples, "original triple TSV")->required();
  cmd_evaluate->add_option("--orig-props", eval_orig_props, "original property TSV")->required();
  cmd_evaluate->add_option("--profiles", eval_profiles, "mined profiles CSV")->required();
  cmd_evaluate->add_option("--gen-triples", eval_gen_triples, "generated triple TSV")->required();
  cmd_evaluate->add_option("--gen-props", eval_gen_props, "generated property TSV")->required();
  cmd_evaluate->add_option("--report", eval_report, "evaluation report JSON");
  cmd_evaluate->add_option("--top-od", eval_top_od, "top OD flow CSV");
  cmd_evaluate->add_option("--top-k", eval_top_k, "rows in the top OD table");
  cmd_evaluate->add_option("--plot-data", eval_plot_dir,
                           "directory for time-profile and OD-rank plot CSVs");

  // --- synth-corpus ----------------------------------------------------
  auto* cmd_synth = app.add_subcommand("synth-corpus",
                                       "emit a synthetic corpus with planted ground truth");
  fs::path synth_out = "corpus.csv", synth_truth = "truth.csv";
  std::optional<int> synth_commuters, synth_passing, synth_high, synth_randoms, synth_days,
      synth_zones;
  std::optional<double> synth_continuity;
  std::optional<std::string> synth_start;
  cmd_synth->add_option("--out", synth_out, "corpus CSV output");
  cmd_synth->add_option("--truth", synth_truth, "ground-truth label CSV output");
  cmd_synth->add_option("--commuters", synth_commuters, "commuter cohort size");
  cmd_synth->add_option("--passing", synth_passing, "passing cohort size");
  cmd_synth->add_option("--high-freq", synth_high, "high-frequency cohort size");
  cmd_synth->add_option("--randoms", synth_randoms, "random cohort size");
  cmd_synth->add_option("--days", synth_days, "window length in days");
  cmd_synth->add_option("--zones", synth_zones, "number of traffic zones");
  cmd_synth->add_option("--continuity", synth_continuity, "chain threading probability");
  cmd_synth->add_option("--start", synth_start, "first date (YYYY-MM-DD)");

  // --- report -----------------------------------------------------------
  auto* cmd_report = app.add_subcommand("report", "print the label summary for a mined graph");
  fs::path rep_triples, rep_props;
  std::optional<fs::path> rep_gen_triples, rep_gen_props, rep_plot_dir, rep_char_dir;
  cmd_report->add_option("--triples", rep_triples, "graph triple TSV")->required();
  cmd_report->add_option("--props", rep_props, "graph property TSV")->required();
  cmd_report->add_option("--gen-triples", rep_gen_triples, "generated triple TSV");
  cmd_report->add_option("--gen-props", rep_gen_props, "generated property TSV");
  cmd_report->add_option("--plot-data", rep_plot_dir, "directory for plot CSVs");
  cmd_report->add_option("--characteristics", rep_char_dir,
                         "directory for per-label pattern and association CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = global.resolve();
    if (global.config_dump) {
      cfg.dump(std::cout);
      return kOk;
    }

    if (*cmd_ingest) {
      const auto result = ingest::parse_records_file(ingest_input, cfg.zone_whitelist);
      write_atomic(ingest_records,
                   [&](std::ostream& out) { ingest::write_records(out, result.records); });
      write_atomic(ingest_rejects,
                   [&](std::ostream& out) { ingest::write_rejects(out, result.rejected); });
      std::fprintf(stderr, "accepted %zu, rejected %zu\n", result.records.size(),
                   result.rejected.size());
      return result.rejected.empty() ? kOk : kPartial;
    }

    if (*cmd_build) {
      const auto parsed = ingest::parse_records_file(build_records, cfg.zone_whitelist);
      if (!parsed.rejected.empty())
        throw std::runtime_error("records file has invalid rows; run ingest first");
      const auto g = kg::build_graph(parsed.records, cfg.calendar, cfg.spans);
      kg::check_schema(g);
      write_atomic(build_triples, [&](std::ostream& out) { kg::export_triples(g, out); });
      write_atomic(build_props, [&](std::ostream& out) { kg::export_properties(g, out); });
      std::fprintf(stderr, "graph: %zu entities, %zu triples\n", g.entity_count(),
                   g.triple_count());
      return kOk;
    }

    if (*cmd_mine) {
      auto g = load_graph(mine_triples, mine_props);
      const auto profiles = mining::mine_all(g, cfg.mining);
      write_atomic(mine_profiles,
                   [&](std::ostream& out) { mining::write_profiles(out, profiles); });
      kg::attach_labels(g, mining::label_pairs(profiles));
      print_label_summary(g);
      return kOk;
    }

    if (*cmd_generate) {
      if (!cfg.seed) throw std::runtime_error("generate requires a seed (--seed or config)");
      auto g = load_graph(gen_triples, gen_props);
      const auto profiles = load_profiles(gen_profiles);
      kg::attach_labels(g, mining::label_pairs(profiles));
      const auto result = gen::generate_all(g, cfg);
      const auto out_graph = gen::generated_graph(result, cfg);
      kg::check_schema(out_graph);
      write_atomic(gen_out_triples, [&](std::ostream& out) { kg::export_triples(out_graph, out); });
      write_atomic(gen_out_props,
                   [&](std::ostream& out) { kg::export_properties(out_graph, out); });
      write_atomic(gen_out_trips,
                   [&](std::ostream& out) { ingest::write_records(out, result.records); });
      write_atomic(gen_report, [&](std::ostream& out) { gen::write_report(out, result.reports); });
      if (gen_mapping) {
        if (!cfg.generation.keep_mapping)
          throw std::runtime_error("--mapping requires keep_mapping = true in the config");
        write_atomic(*gen_mapping, [&](std::ostream& out) { gen::write_mapping(out, result); });
      }
      int fallbacks = 0;
      for (const auto& rep : result.reports) fallbacks += rep.fallback;
      std::fprintf(stderr, "generated %zu trips for %zu vehicles, %d fallback units\n",
                   result.records.size(), result.mapping.size(), fallbacks);
      return fallbacks == 0 ? kOk : kPartial;
    }

    if (*cmd_evaluate) {
      auto original = load_graph(eval_orig_triples, eval_orig_props);
      const auto profiles = load_profiles(eval_profiles);
      kg::attach_labels(original, mining::label_pairs(profiles));
      const auto generated = load_graph(eval_gen_triples, eval_gen_props);
      auto eval_cfg = cfg;
      if (eval_top_k) eval_cfg.evaluation.top_k = *eval_top_k;

      const auto reports = eval::evaluate_all(original, generated, eval_cfg);
      write_atomic(eval_report,
                   [&](std::ostream& out) { eval::write_report_json(out, reports); });
      write_atomic(eval_top_od, [&](std::ostream& out) {
        const auto rows = eval::top_od_report(original, generated, eval_cfg.evaluation.top_k);
        eval::write_top_od_csv(out, "all", rows);
      });
      if (eval_plot_dir) {
        write_atomic(*eval_plot_dir / "time-profile.csv", [&](std::ostream& out) {
          eval::write_time_profile_csv(out, original, generated);
        });
        write_atomic(*eval_plot_dir / "od-rank.csv", [&](std::ostream& out) {
          eval::write_od_rank_csv(out, original, generated, 500);
        });
      }
      for (const auto& rep : reports) {
        std::fprintf(stderr,
                     "%s: kl_temporal=%.6f kl_spatial=%.6f bias=%s cont_gen=%s cont_hist=%s\n",
                     rep.label.c_str(), rep.kl_temporal, rep.kl_spatial,
                     rep.association_bias ? std::to_string(*rep.association_bias).c_str() : "n/a",
                     rep.continuity_generated ? std::to_string(*rep.continuity_generated).c_str()
                                              : "n/a",
                     rep.continuity_historical
                         ? std::to_string(*rep.continuity_historical).c_str()
                         : "n/a");
      }
      return kOk;
    }

    if (*cmd_synth) {
      auto synth_cfg = cfg;
      if (synth_commuters) synth_cfg.synth.commuters = *synth_commuters;
      if (synth_passing) synth_cfg.synth.passing = *synth_passing;
      if (synth_high) synth_cfg.synth.high_freq = *synth_high;
      if (synth_randoms) synth_cfg.synth.randoms = *synth_randoms;
      if (synth_days) synth_cfg.synth.days = *synth_days;
      if (synth_zones) synth_cfg.synth.zones = *synth_zones;
      if (synth_continuity) synth_cfg.synth.continuity = *synth_continuity;
      if (synth_start) {
        const auto d = Date::parse(*synth_start);
        if (!d) throw std::runtime_error("bad --start date");
        synth_cfg.synth.start = *d;
      }
      synth_cfg.validate();
      const auto corpus = synth::make_corpus(synth_cfg, synth_cfg.seed.value_or(20190801));
      write_atomic(synth_out,
                   [&](std::ostream& out) { ingest::write_records(out, corpus.records); });
      write_atomic(synth_truth, [&](std::ostream& out) { synth::write_truth(out, corpus); });
      std::fprintf(stderr, "corpus: %zu trips for %zu vehicles\n", corpus.records.size(),
                   corpus.truth.size());
      return kOk;
    }

    if (*cmd_report) {
      const auto g = load_graph(rep_triples, rep_props);
      if (!kg::labels_attached(g))
        throw std::runtime_error("graph has no labels; run mine and generate first");
      print_label_summary(g);
      if (rep_char_dir) {
        for (const auto& label : kg::labels_of(g)) {
          const auto sub = kg::label_subgraph(g, label);
          if (sub.entity_count(kg::EntityType::Trip) == 0) continue;
          write_atomic(*rep_char_dir / (label + "-patterns.csv"), [&](std::ostream& out) {
            cgraph::write_pattern_distribution(out, cgraph::build_pattern_distribution(sub));
          });
          std::vector<std::string> roster;
          for (const auto v : sub.entities(kg::EntityType::Vehicle)) roster.push_back(sub.key(v));
          write_atomic(*rep_char_dir / (label + "-association.csv"), [&](std::ostream& out) {
            cgraph::write_association(
                out, cgraph::build_association(sub, roster, cfg.generation.association_depth,
                                               cfg.mining.match));
          });
        }
      }
      if (rep_plot_dir) {
        if (!rep_gen_triples || !rep_gen_props)
          throw std::runtime_error("--plot-data needs --gen-triples and --gen-props");
        const auto generated = load_graph(*rep_gen_triples, *rep_gen_props);
        write_atomic(*rep_plot_dir / "time-profile.csv", [&](std::ostream& out) {
          eval::write_time_profile_csv(out, g, generated);
        });
        write_atomic(*rep_plot_dir / "od-rank.csv", [&](std::ostream& out) {
          eval::write_od_rank_csv(out, g, generated, 500);
        });
      }
      return kOk;
    }

    std::cout << app.help() << std::endl;
    return kOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFatal;
  }
}
