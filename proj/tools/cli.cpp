#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "incdsi/bootstrap.hpp"
#include "incdsi/errors.hpp"
#include "incdsi/io.hpp"
#include "incdsi/serialize.hpp"
#include "incdsi/service.hpp"
#include "incdsi/stream.hpp"
#include "incdsi/synthetic.hpp"
#include "incdsi/tuner.hpp"

namespace incdsi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised for flag combinations CLI11 cannot express (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string snapshot;
  std::uint64_t seed = 0;
  std::string hyperparams;
  std::string optimizer;
};

struct Loaded {
  IndexState state{1};
  Hyperparams stored_hp;
};

Loaded load_required_snapshot(const Globals& g) {
  if (g.snapshot.empty()) throw UsageError("--snapshot is required for this command");
  auto [state, hp] = io::load_snapshot(g.snapshot);
  return {std::move(state), hp};
}

/// --hyperparams wins over the hyperparameters stored in a snapshot.
Hyperparams effective_hp(const Globals& g, const Hyperparams& fallback) {
  return g.hyperparams.empty() ? fallback : hyperparams_from_json(read_json_file(g.hyperparams));
}

AddOptions add_options(const Globals& g, const Hyperparams& fallback) {
  AddOptions o;
  o.hp = effective_hp(g, fallback);
  if (!g.optimizer.empty()) o.optimizer = optimizer_config_from_json(read_json_file(g.optimizer));
  o.seed = g.seed;
  return o;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  return f;
}

std::vector<std::size_t> parse_checkpoints(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size()) throw UsageError("bad checkpoint '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

/// Validation queries of original and newly added documents.
QuerySet stream_val_queries(const SyntheticCorpus& corpus) {
  QuerySet val = corpus.initial.query_set(io::QuerySplit::val);
  const QuerySet added = corpus.added.query_set(io::QuerySplit::val);
  for (std::size_t i = 0; i < added.size(); ++i) {
    val.embeddings.push_row(added.embeddings.row(i));
    val.golds.push_back(added.golds[i]);
  }
  return val;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incremental document index: build, grow, query and benchmark", "incdsi"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--snapshot", g.snapshot, "Index snapshot file");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--hyperparams", g.hyperparams, "Hyperparameter JSON file");
  app.add_option("--optimizer", g.optimizer, "Optimizer JSON file");

  // gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic clustered corpus");
  SyntheticCorpusSpec spec;
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--n-docs", spec.n_docs);
  gen->add_option("--dim", spec.dim);
  gen->add_option("--queries-per-doc", spec.queries_per_doc);
  gen->add_option("--queries-per-doc-max", spec.queries_per_doc_max);
  gen->add_option("--val-per-doc", spec.val_per_doc);
  gen->add_option("--test-per-doc", spec.test_per_doc);
  gen->add_option("--cluster-std", spec.cluster_std);
  gen->add_option("--initial-fraction", spec.initial_fraction);
  gen->add_option("--new-fraction", spec.new_fraction);
  gen->add_option("--tune-fraction", spec.tune_fraction);

  // init
  auto* init = app.add_subcommand("init", "Build the initial index and write --snapshot");
  std::string init_emb, init_manifest, init_mode = "class_mean";
  init->add_option("--embeddings", init_emb, "Query embedding file")->required();
  init->add_option("--manifest", init_manifest, "Query manifest (TSV)")->required();
  init->add_option("--mode", init_mode)->check(CLI::IsMember({"class_mean", "linear_head"}));

  // add
  auto* add = app.add_subcommand("add", "Add one document to --snapshot");
  std::string add_id, add_queries;
  add->add_option("--doc-id", add_id)->required();
  add->add_option("--queries", add_queries, "Embedding file, one query per row")->required();

  // search
  auto* search = app.add_subcommand("search", "Rank documents for each query");
  std::string search_queries;
  std::size_t search_k = 10;
  search->add_option("--queries", search_queries, "Embedding file")->required();
  search->add_option("--k", search_k);

  // eval
  auto* eval = app.add_subcommand("eval", "Hits@k and MRR@10 for a query split");
  std::string eval_emb, eval_manifest, eval_split = "val";
  eval->add_option("--embeddings", eval_emb)->required();
  eval->add_option("--manifest", eval_manifest)->required();
  eval->add_option("--split", eval_split)->check(CLI::IsMember({"train", "val", "test"}));

  // tune
  auto* tune_cmd = app.add_subcommand("tune", "Random search over insertion hyperparameters");
  std::string tune_corpus, tune_csv, tune_best, tune_variant = "squared_hinge";
  TuneOptions topts;
  tune_cmd->add_option("--corpus", tune_corpus, "Corpus directory from `gen`")->required();
  tune_cmd->add_option("--trials", topts.trials);
  tune_cmd->add_option("--beta", topts.beta);
  tune_cmd->add_option("--loss-variant", tune_variant)
      ->check(CLI::IsMember({"squared_hinge", "hinge"}));
  tune_cmd->add_option("--trials-csv", tune_csv)->required();
  tune_cmd->add_option("--best-out", tune_best, "Best hyperparameters as JSON")->required();

  // stream
  auto* stream = app.add_subcommand("stream", "Add the corpus' new documents and record checkpoints");
  std::string stream_corpus, stream_cps, stream_csv, stream_save;
  stream->add_option("--corpus", stream_corpus)->required();
  stream->add_option("--checkpoints", stream_cps, "Comma-separated document counts")->required();
  stream->add_option("--csv", stream_csv)->required();
  stream->add_option("--save", stream_save, "Write the final index here");

  // snapshot save|load
  auto* snap = app.add_subcommand("snapshot", "Copy or inspect a snapshot");
  snap->require_subcommand(1);
  auto* snap_save = snap->add_subcommand("save", "Re-encode --snapshot into --out");
  std::string snap_out;
  snap_save->add_option("--out", snap_out)->required();
  auto* snap_load = snap->add_subcommand("load", "Validate --snapshot and print its stats");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve --snapshot over HTTP");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      spec.seed = g.seed;
      write_corpus(generate_synthetic(spec), gen_out);
      out << json{{"ok", true}, {"out", gen_out}}.dump() << '\n';
    } else if (init->parsed()) {
      if (g.snapshot.empty()) throw UsageError("--snapshot is required for init");
      const DocSet docs = read_doc_set(init_emb, init_manifest);
      LinearHeadConfig lh;
      lh.seed = g.seed;
      BootstrapStats stats;
      const IndexState state =
          bootstrap_initial_index(docs, parse_bootstrap_mode(init_mode), lh, &stats);
      io::save_snapshot(state, effective_hp(g, Hyperparams{}), g.snapshot);
      out << json{{"num_docs", state.size()}, {"dim", state.dim()},
                  {"train_top1", stats.train_top1}, {"epochs_run", stats.epochs_run}}
                 .dump()
          << '\n';
    } else if (add->parsed()) {
      Loaded l = load_required_snapshot(g);
      const AddOptions o = add_options(g, l.stored_hp);
      const Matrix queries = io::read_embedding_matrix(add_queries);
      const AddReport r = add_document(l.state, add_id, queries, o);
      io::save_snapshot(l.state, o.hp, g.snapshot);
      out << to_json(r).dump() << '\n';
    } else if (search->parsed()) {
      const Loaded l = load_required_snapshot(g);
      const Matrix queries = io::read_embedding_matrix(search_queries);
      if (search_k < 1 || search_k > l.state.size()) {
        throw InvalidArgument("k=" + std::to_string(search_k) + " outside [1, " +
                              std::to_string(l.state.size()) + "]");
      }
      const IndexView view = l.state.view();
      for (std::size_t i = 0; i < queries.rows(); ++i) {
        json results = json::array();
        for (const auto& h : top_k(view, queries.row(i), search_k).entries) {
          results.push_back({{"doc_id", h.doc_id}, {"score", h.score}});
        }
        out << json{{"query", i}, {"results", results}}.dump() << '\n';
      }
    } else if (eval->parsed()) {
      const Loaded l = load_required_snapshot(g);
      const DocSet docs = read_doc_set(eval_emb, eval_manifest);
      const io::QuerySplit split = eval_split == "train" ? io::QuerySplit::train
                                   : eval_split == "val" ? io::QuerySplit::val
                                                         : io::QuerySplit::test;
      out << to_json(evaluate_split(l.state, docs.query_set(split))).dump() << '\n';
    } else if (tune_cmd->parsed()) {
      const Loaded l = load_required_snapshot(g);
      const SyntheticCorpus corpus = read_corpus(tune_corpus);
      topts.seed = g.seed;
      topts.loss_variant = parse_loss_variant(tune_variant);
      if (!g.optimizer.empty()) topts.optimizer = optimizer_config_from_json(read_json_file(g.optimizer));
      const auto docs = corpus.tuning.train_documents();
      const TuneResult r = tune(l.state, docs, corpus.initial.query_set(io::QuerySplit::val),
                                corpus.tuning.query_set(io::QuerySplit::val), topts);
      auto csv = open_out(tune_csv);
      write_trials_csv(csv, r.trials);
      auto best = open_out(tune_best);
      best << to_json(r.best).dump(2) << '\n';
      out << json{{"best_trial", r.best_trial},
                  {"y_target", r.trials[static_cast<std::size_t>(r.best_trial)].y_target},
                  {"hyperparams", to_json(r.best)}}
                 .dump()
          << '\n';
    } else if (stream->parsed()) {
      Loaded l = load_required_snapshot(g);
      const AddOptions o = add_options(g, l.stored_hp);
      const SyntheticCorpus corpus = read_corpus(stream_corpus);
      const auto docs = corpus.added.train_documents();
      const auto cps = parse_checkpoints(stream_cps);
      const StreamResult r = run_stream(l.state, docs, cps, o, stream_val_queries(corpus));
      auto csv = open_out(stream_csv);
      write_stream_csv(csv, r.rows);
      if (!stream_save.empty()) io::save_snapshot(l.state, o.hp, stream_save);
      std::size_t feasible = 0;
      for (const auto& rep : r.reports) feasible += rep.feasible;
      out << json{{"docs_added", r.reports.size()}, {"feasible", feasible}, {"rows", r.rows.size()}}
                 .dump()
          << '\n';
    } else if (snap_save->parsed()) {
      const Loaded l = load_required_snapshot(g);
      io::save_snapshot(l.state, effective_hp(g, l.stored_hp), snap_out);
      out << json{{"ok", true}, {"out", snap_out}}.dump() << '\n';
    } else if (snap_load->parsed()) {
      const Loaded l = load_required_snapshot(g);
      out << json{{"num_docs", l.state.size()}, {"n0", l.state.n0()}, {"dim", l.state.dim()},
                  {"hyperparams", to_json(l.stored_hp)}}
                 .dump()
          << '\n';
    } else if (serve->parsed()) {
      Loaded l = load_required_snapshot(g);
      Service svc(std::move(l.state), add_options(g, l.stored_hp));
      const int bound = svc.bind(host, port);
      if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
      err << "listening on " << host << ":" << bound << std::endl;
      svc.serve_forever();
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace incdsi::cli
