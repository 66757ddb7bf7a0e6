// graphprior command-line front end.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "graphprior/benchmark.hpp"
#include "graphprior/cumulants.hpp"
#include "graphprior/density.hpp"
#include "graphprior/edge_only.hpp"
#include "graphprior/error.hpp"
#include "graphprior/http_api.hpp"
#include "graphprior/json_io.hpp"
#include "graphprior/mcmcp.hpp"
#include "graphprior/pipeline.hpp"
#include "graphprior/service.hpp"

#ifndef GRAPHPRIOR_VERSION
#define GRAPHPRIOR_VERSION "0.0.0"
#endif

using namespace graphprior;

namespace {

struct Common {
  std::uint64_t seed = 1;
  int jobs = 0;
  std::string out;
};

struct Run {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

int default_jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

std::ifstream open_in(const std::string& path, Run& run) {
  if (path.empty()) throw ArgumentError("--in is required");
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  run.inputs.push_back(path);
  return in;
}

// Writes `text` to --out (recording it) or stdout.
void emit(const Common& c, Run& run, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw DataError("cannot write " + c.out);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  run.outputs.push_back(c.out);
}

void write_manifest(const CLI::App& sub, const Common& c, const Run& run, double wall) {
  if (run.outputs.empty()) return;
  Json config = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    const auto& res = opt->results();
    if (res.empty()) {
      if (opt->get_default_str().empty()) continue;
      config[opt->get_name()] = opt->get_default_str();
    } else if (res.size() == 1) {
      config[opt->get_name()] = res.front();
    } else {
      config[opt->get_name()] = res;
    }
  }
  const Json manifest{{"command", run.command},   {"config", config},   {"seed", c.seed},
                      {"inputs", run.inputs},     {"outputs", run.outputs},
                      {"tool_version", GRAPHPRIOR_VERSION}, {"wall_seconds", wall}};
  for (const auto& path : run.outputs) {
    std::ofstream f(path + ".manifest.json");
    f << manifest.dump(2) << '\n';
  }
}

int resolve_obscured(int n, double b, int shown) {
  const int m = relation_count(n);
  if (shown >= 0) {
    if (shown > m) throw ArgumentError("--shown exceeds C(n,2)");
    return m - shown;
  }
  if (b < 0.0 || b > 1.0) throw ArgumentError("--b must be in [0, 1]");
  return static_cast<int>(std::lround(b * m));
}

// er:<rho> | uniform | peak:<distance> | ergm:<fit.json>
PriorTable parse_prior(const std::string& spec, int n) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](const char* what) {
    try {
      std::size_t used = 0;
      const double v = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return v;
    } catch (const std::exception&) {
      throw ArgumentError(std::string("prior ") + what + " needs a number, got '" + arg + "'");
    }
  };
  if (kind == "er") return PriorTable::erdos_renyi(n, number("er"));
  if (kind == "uniform") return PriorTable::uniform_labeled(n);
  if (kind == "peak") return make_peak_prior(n, static_cast<int>(number("peak"))).table;
  if (kind == "ergm") {
    std::ifstream in(arg);
    if (!in) throw DataError("cannot read " + arg);
    const ErgmModel model = model_from_json(Json::parse(in));
    if (model.n != n) throw ArgumentError("ERGM prior has a different node count");
    return prior_table(model);
  }
  throw ArgumentError("unknown prior '" + spec + "' (er:<rho>, uniform, peak:<d>, ergm:<file>)");
}

std::string edges_text(const Graph& g) {
  std::string s;
  for (const auto& [i, j] : g.edges()) {
    if (!s.empty()) s += ' ';
    s += std::to_string(i) + "-" + std::to_string(j);
  }
  return s;
}

volatile std::sig_atomic_t g_stop = 0;
HttpApi* g_api = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Priors over small graphs: enumeration, ERGM fitting, MCMCP simulation and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GRAPHPRIOR_VERSION);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Master seed")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "Worker threads (default: available cores)");
    sub->add_option("--out", common.out, "Output file (default: stdout)");
  };

  int nodes = 5, order = 2, records = 2048, chains = 12, rounds = 16, reps = 64, shown = -1, port = 8080;
  double b = 0.5;
  std::string in, story, prior_spec = "uniform", log_path = "events.jsonl", host = "127.0.0.1", init = "spread";
  std::string pattern, host_graph, orders_text = "1,2,3", report_path;
  bool er = false;
  int subsample = 0;
  std::vector<int> chain_lengths;

  auto* enumerate = app.add_subcommand("enumerate", "Count non-isomorphic graphs; --out writes the class list");
  enumerate->add_option("--nodes", nodes)->required()->check(CLI::Range(1, 8));
  add_common(enumerate);

  auto* basis = app.add_subcommand("basis", "List the subgraph basis of order r");
  basis->add_option("--order", order)->required()->check(CLI::Range(1, 15));
  basis->add_option("--nodes", nodes, "Largest host graph")->capture_default_str();
  add_common(basis);

  auto* density = app.add_subcommand("density", "Injective homomorphism density of a pattern in a host");
  density->add_option("--pattern", pattern, "Pattern graph JSON")->required();
  density->add_option("--host", host_graph, "Host graph JSON")->required();
  add_common(density);

  auto* fit = app.add_subcommand("fit", "Fit an ERGM prior to response data");
  fit->add_option("--in", in, "Dataset or response-record JSON lines")->required();
  fit->add_option("--order", order)->capture_default_str();
  fit->add_option("--nodes", nodes, "Keep records with this node count (default: first record)");
  fit->add_option("--story", story, "Keep records of this cover story");
  fit->add_option("--subsample", subsample, "Importance-sample K completions per record");
  add_common(fit);

  auto* simulate = app.add_subcommand("simulate", "Simulate ideal-agent MCMCP chains");
  simulate->add_option("--nodes", nodes)->capture_default_str();
  simulate->add_option("--b", b, "Obscured fraction")->capture_default_str();
  simulate->add_option("--shown", shown, "Shown relations (overrides --b)");
  simulate->add_option("--chains", chains)->capture_default_str();
  simulate->add_option("--rounds", rounds)->capture_default_str();
  simulate->add_option("--prior", prior_spec, "er:<rho> | uniform | peak:<d> | ergm:<fit.json>")->capture_default_str();
  simulate->add_option("--init", init, "spread | prior")->capture_default_str();
  add_common(simulate);

  auto* mixing = app.add_subcommand("mixing", "Spectral mixing time of the MCMCP transition matrix");
  mixing->add_flag("--er", er, "Closed form for Erdos-Renyi priors");
  mixing->add_option("--nodes", nodes)->capture_default_str();
  mixing->add_option("--b", b)->capture_default_str();
  mixing->add_option("--shown", shown);
  mixing->add_option("--prior", prior_spec)->capture_default_str();
  add_common(mixing);

  auto* cumulants = app.add_subcommand("cumulants", "Moments and (scaled) graph cumulants of a prior");
  cumulants->add_option("--nodes", nodes)->capture_default_str();
  cumulants->add_option("--order", order)->capture_default_str();
  cumulants->add_option("--prior", prior_spec)->capture_default_str();
  add_common(cumulants);

  auto* crossval = app.add_subcommand("crossval", "Held-out log-likelihood across model orders");
  crossval->add_option("--in", in)->required();
  crossval->add_option("--orders", orders_text, "Comma-separated orders")->capture_default_str();
  crossval->add_option("--reps", reps, "Random splits")->capture_default_str();
  crossval->add_option("--nodes", nodes);
  crossval->add_option("--story", story);
  add_common(crossval);

  auto* genmatrix = app.add_subcommand("genmatrix", "Cross-story generalization matrix");
  genmatrix->add_option("--in", in, "Response records of all four stories")->required();
  genmatrix->add_option("--nodes", nodes)->capture_default_str();
  genmatrix->add_option("--order", order)->capture_default_str();
  genmatrix->add_option("--reps", reps)->capture_default_str();
  add_common(genmatrix);

  auto* edgeonly = app.add_subcommand("edgeonly", "Edge-count maximum-entropy prior");
  edgeonly->add_option("--in", in)->required();
  edgeonly->add_option("--order", order, "Moment order")->capture_default_str();
  edgeonly->add_option("--nodes", nodes);
  edgeonly->add_option("--story", story);
  add_common(edgeonly);

  auto* exclusions = app.add_subcommand("exclusions", "Apply exclusion rules to response records");
  exclusions->add_option("--in", in)->required();
  exclusions->add_option("--report", report_path, "Write the exclusion report JSON here");
  add_common(exclusions);

  auto* bench = app.add_subcommand("bench-fit-vs-sample", "Fitted ERGM vs. response frequencies against a known prior");
  bench->add_option("--nodes", nodes)->capture_default_str();
  bench->add_option("--b", b)->capture_default_str();
  bench->add_option("--shown", shown);
  bench->add_option("--records", records, "Records for the fixed-size sweep")->capture_default_str();
  bench->add_option("--rounds", chain_lengths, "Chain lengths for the fixed-size sweep");
  bench->add_option("--reps", reps)->capture_default_str();
  bench->add_option("--order", order, "Order of the fitted model")->capture_default_str();
  bench->add_option("--prior", prior_spec, "ergm:<fit.json> truth (default: built-in bimodal prior)");
  add_common(bench);

  auto* serve = app.add_subcommand("serve", "Run the chain service over HTTP");
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--log-path", log_path)->capture_default_str();
  add_common(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run;
  run.command = sub->get_name();
  const int jobs = common.jobs > 0 ? common.jobs : default_jobs();
  const auto t0 = std::chrono::steady_clock::now();
  const CLI::Option* prior_opt = sub->get_option_no_throw("--prior");
  const bool prior_given = prior_opt != nullptr && prior_opt->count() > 0;

  try {
    if (sub == enumerate) {
      const auto index = ClassIndex::get(nodes);
      std::cout << index->size() << '\n';
      if (!common.out.empty()) {
        std::ostringstream csv;
        csv << "class,edges,orbit_size,edge_list\n";
        for (std::size_t i = 0; i < index->size(); ++i) {
          const auto& c = (*index)[i];
          csv << i << ',' << c.graph.edge_count() << ',' << c.orbit_size << ',' << edges_text(c.graph) << '\n';
        }
        emit(common, run, csv.str());
      }
    } else if (sub == basis) {
      const SubgraphBasis bs = enumerate_basis(order, nodes);
      std::ostringstream csv;
      csv << "index,name,nodes,edges,orbit_size,edge_list\n";
      for (std::size_t i = 0; i < bs.size(); ++i)
        csv << i << ',' << bs.name(i) << ',' << bs.nodes(i) << ',' << bs.edges(i) << ','
            << bs.elements[i].orbit_size << ',' << edges_text(bs.graph(i)) << '\n';
      emit(common, run, csv.str());
    } else if (sub == density) {
      const Graph g = graph_from_json(Json::parse(pattern));
      const Graph h = graph_from_json(Json::parse(host_graph));
      const DensityRatio d = injective_count(g, h);
      emit(common, run,
           Json{{"count", d.count}, {"maps", d.maps}, {"density", d.value()}}.dump(2));
    } else if (sub == fit) {
      auto f = open_in(in, run);
      const ResponseDataset data = read_dataset_jsonl(f, sub->count("--nodes") ? nodes : 0, story);
      if (data.empty()) throw DataError("no records selected from " + in);
      data.validate();
      FitConfig fc;
      fc.jobs = jobs;
      FitResult res;
      if (subsample > 0) {
        SubsampleConfig sc;
        sc.samples = subsample;
        sc.seed = common.seed;
        res = fit_subsampled(data, order, sc, fc);
      } else {
        res = fit_newton(data, order, fc);
      }
      Json j = to_json(res);
      j["records"] = data.size();
      emit(common, run, j.dump(2));
      if (!res.converged) std::cerr << "warning: " << (res.message.empty() ? "fit did not converge" : res.message) << '\n';
    } else if (sub == simulate) {
      const PriorTable prior = parse_prior(prior_spec, nodes);
      ChainConfig cc;
      cc.n = nodes;
      cc.n_obs = resolve_obscured(nodes, b, shown);
      cc.chains = chains;
      cc.rounds = rounds;
      cc.seed = common.seed;
      cc.jobs = jobs;
      ChainInit ci;
      if (init == "spread") {
        ci.policy = InitPolicy::SpreadDensity;
      } else if (init == "prior") {
        ci.policy = InitPolicy::SampleFromPrior;
      } else {
        throw ArgumentError("--init must be 'spread' or 'prior'");
      }
      const ResponseDataset data = simulate_chains(prior, cc, ci);
      std::ostringstream out;
      write_dataset_jsonl(out, data);
      emit(common, run, out.str());
    } else if (sub == mixing) {
      double tau = 0.0;
      if (er) {
        const double frac = shown >= 0 ? static_cast<double>(resolve_obscured(nodes, b, shown)) / relation_count(nodes) : b;
        tau = er_mixing_time(frac);
      } else {
        const PriorTable prior = parse_prior(prior_spec, nodes);
        tau = mixing_time(build_transition_matrix(prior, resolve_obscured(nodes, b, shown)));
      }
      std::ostringstream s;
      s << std::fixed << std::setprecision(6) << tau;
      emit(common, run, s.str());
    } else if (sub == cumulants) {
      const PriorTable prior = parse_prior(prior_spec, nodes);
      const auto c = scaled_cumulants(cumulants_from_moments(moments_of_prior(prior, enumerate_basis(order, nodes))));
      emit(common, run, cumulants_csv(c));
    } else if (sub == crossval) {
      auto f = open_in(in, run);
      const ResponseDataset data = read_dataset_jsonl(f, sub->count("--nodes") ? nodes : 0, story);
      std::vector<int> orders;
      std::stringstream ss(orders_text);
      for (std::string tok; std::getline(ss, tok, ',');) {
        try {
          orders.push_back(std::stoi(tok));
        } catch (const std::exception&) {
          throw ArgumentError("--orders must be comma-separated integers");
        }
      }
      CrossValConfig cfg;
      cfg.splits = reps;
      cfg.seed = common.seed;
      cfg.jobs = jobs;
      const CrossValResult res = cross_validate(data, orders, cfg);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
      emit(common, run, to_json(res).dump(2));
    } else if (sub == genmatrix) {
      auto f = open_in(in, run);
      const auto all = read_records_jsonl(f);
      std::vector<ResponseDataset> per_story;
      std::vector<std::string> names;
      for (const char* s : kCoverStories) {
        per_story.push_back(aggregate(all, s, nodes));
        names.emplace_back(s);
        if (per_story.back().empty()) throw DataError(std::string("no records for story '") + s + "'");
      }
      GeneralizationConfig cfg;
      cfg.reps = reps;
      cfg.seed = common.seed;
      cfg.jobs = jobs;
      emit(common, run, to_json(generalization_matrix(per_story, names, order, cfg)).dump(2));
    } else if (sub == edgeonly) {
      auto f = open_in(in, run);
      const ResponseDataset data = read_dataset_jsonl(f, sub->count("--nodes") ? nodes : 0, story);
      if (data.empty()) throw DataError("no records selected from " + in);
      EdgeOnlyFitConfig cfg;
      cfg.moment_order = order;
      cfg.jobs = jobs;
      emit(common, run, to_json(fit_edge_only(data, cfg)).dump(2));
    } else if (sub == exclusions) {
      auto f = open_in(in, run);
      const ExclusionResult res = apply_exclusions(read_records_jsonl(f));
      const std::string report = to_json(res.report).dump(2);
      if (!report_path.empty()) {
        std::ofstream r(report_path);
        if (!r) throw DataError("cannot write " + report_path);
        r << report << '\n';
        run.outputs.push_back(report_path);
      }
      if (common.out.empty()) {
        std::cout << report << '\n';
      } else {
        std::ostringstream out;
        write_records_jsonl(out, res.valid);
        emit(common, run, out.str());
      }
    } else if (sub == bench) {
      BenchConfig cfg;
      if (prior_given) {
        const std::string spec = prior_spec;
        if (spec.rfind("ergm:", 0) != 0) throw ArgumentError("bench truth must be ergm:<fit.json>");
        std::ifstream pf(spec.substr(5));
        if (!pf) throw DataError("cannot read " + spec.substr(5));
        cfg.truth = model_from_json(Json::parse(pf));
        run.inputs.push_back(spec.substr(5));
      } else {
        cfg.truth = default_bench_truth();
      }
      if (cfg.truth.n != nodes) {
        throw ArgumentError("--nodes " + std::to_string(nodes) + " does not match the truth prior (n = " +
                            std::to_string(cfg.truth.n) + ")");
      }
      cfg.n_obs = resolve_obscured(nodes, b, shown);
      cfg.fit_order = order;
      cfg.reps = reps;
      cfg.seed = common.seed;
      cfg.jobs = jobs;
      auto scenarios = default_bench_scenarios();
      if (!chain_lengths.empty()) scenarios[0].points.clear();
      for (int len : chain_lengths) scenarios[0].points.push_back({len, records});
      for (auto& p : scenarios[0].points) p.records = records;
      const auto rows = run_fit_vs_sample(cfg, scenarios);
      std::ostringstream csv;
      write_bench_csv(csv, rows);
      emit(common, run, csv.str());
    } else if (sub == serve) {
      ServiceConfig sc;
      sc.log_path = log_path;
      sc.seed = common.seed;
      ChainService service(sc);
      HttpApi api(service);
      const int bound = api.bind(host, port);
      g_api = &api;
      std::signal(SIGINT, [](int) {
        g_stop = 1;
        if (g_api) g_api->stop();
      });
      std::signal(SIGTERM, [](int) {
        g_stop = 1;
        if (g_api) g_api->stop();
      });
      std::cerr << "serving on http://" << host << ':' << bound << " (log: " << log_path << ", "
                << service.event_count() << " events replayed)\n";
      api.listen();
      g_api = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << Json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << Json{{"error", {{"kind", "data"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(*sub, common, run, wall);
  return 0;
}
