// Copyright 2026 The d4curate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "d4/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <unordered_set>

#include "d4/cluster.hpp"
#include "d4/corpus.hpp"
#include "d4/diagnostics.hpp"
#include "d4/embed.hpp"
#include "d4/error.hpp"
#include "d4/minhash.hpp"
#include "d4/parallel.hpp"
#include "d4/random.hpp"
#include "d4/schedule_cost.hpp"
#include "d4/select.hpp"
#include "json.hpp"

namespace d4::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kBatch = 4096;

struct Global {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool verbose = false;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot create " + path.string());
  return f;
}

void write_json(const fs::path& path, const json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) throw IoError("error writing " + path.string());
}

std::string num(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  return json(v).dump();
}

fs::path prepare_out(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
  return dir;
}

/// Every option of the subcommand with its resolved value.
json resolved_config(const CLI::App& sub, const Global& g) {
  json opts = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, false);
    if (name.empty() || name == "--help" || name == "-h") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_expected_min() == 0) {
        opts[name] = true;
      } else if (res.size() == 1 && opt->get_expected_max() <= 1) {
        opts[name] = res.front();
      } else {
        opts[name] = res;
      }
    } else if (!opt->get_default_str().empty()) {
      opts[name] = opt->get_default_str();
    } else if (opt->get_expected_min() == 0) {
      opts[name] = false;
    }
  }
  return json{{"command", sub.get_name()}, {"seed", g.seed}, {"options", opts}};
}

void log(const Global& g, std::ostream& err, const std::string& msg) {
  if (g.verbose) err << msg << '\n';
}

std::map<std::string, double> read_scores(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      out[rec.at("id").get<std::string>()] = rec.at("score").get<double>();
    } catch (const json::exception& e) {
      throw ParseError(lineno, path.string() + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::string> read_groups(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      out[rec.at("id").get<std::string>()] = rec.at("group").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(lineno, path.string() + ": " + e.what());
    }
  }
  return out;
}

/// Copies the records of the given ids from a corpus file, in corpus order.
void write_corpus_subset(const fs::path& corpus, const std::unordered_set<std::string>& keep,
                         const fs::path& dest) {
  CorpusReader reader(corpus, TokenCounter::whitespace());
  auto f = open_out(dest);
  while (auto doc = reader.next()) {
    if (!keep.contains(doc->id)) continue;
    json rec = {{"id", doc->id}, {"text", doc->text}};
    if (!doc->meta.empty()) rec["meta"] = doc->meta;
    f << rec.dump() << '\n';
  }
  if (!f) throw IoError("error writing " + dest.string());
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out;
  SynthSpec spec;
};

void cmd_synth(const SynthArgs& a, const Global& g, const CLI::App& sub, std::ostream& out) {
  SynthSpec spec = a.spec;
  spec.seed = stage_seed(g.seed, "synth");
  const DocumentSet docs = synthesize_corpus(spec);
  const fs::path dir = prepare_out(a.out);
  write_corpus(docs, dir / "corpus.jsonl");
  write_json(dir / "config.json", resolved_config(sub, g));
  out << "synthesized " << docs.size() << " documents, " << docs.total_tokens() << " tokens\n";
}

// -------------------------------------------------------------- minhash

struct MinhashArgs {
  std::string corpus;
  std::string out;
  LshConfig cfg;
};

void cmd_minhash(const MinhashArgs& a, const Global& g, const CLI::App& sub, std::ostream& out,
                 std::ostream& err) {
  LshConfig cfg = a.cfg;
  cfg.seed = stage_seed(g.seed, "minhash");
  cfg.validate();

  std::vector<std::string> ids;
  std::vector<MinHashSignature> sigs;
  CorpusReader reader(a.corpus, TokenCounter::whitespace());
  std::vector<std::string> texts;
  const auto flush = [&] {
    const std::size_t base = sigs.size();
    sigs.resize(base + texts.size());
    parallel_for(texts.size(), [&](std::size_t i) { sigs[base + i] = text_signature(texts[i], cfg); });
    texts.clear();
  };
  while (auto doc = reader.next()) {
    ids.push_back(doc->id);
    texts.push_back(std::move(doc->text));
    if (texts.size() == kBatch) flush();
  }
  flush();
  log(g, err, "signed " + std::to_string(ids.size()) + " documents");

  const DedupResult res = lsh_dedup(ids, sigs, cfg);
  const fs::path dir = prepare_out(a.out);
  write_corpus_subset(a.corpus, {res.kept_ids.begin(), res.kept_ids.end()}, dir / "corpus.jsonl");
  {
    auto f = open_out(dir / "groups.jsonl");
    for (const auto& grp : res.groups) {
      f << json{{"group_id", grp.group_id}, {"member_ids", grp.member_ids}, {"kept_id", grp.kept_id}}.dump()
        << '\n';
    }
  }
  const json summary = {{"n_source", ids.size()},
                        {"n_kept", res.kept_ids.size()},
                        {"n_groups", res.groups.size()},
                        {"num_hashes", cfg.num_hashes},
                        {"bands", cfg.bands},
                        {"rows_per_band", cfg.rows_per_band},
                        {"shingle_width", cfg.shingle_width}};
  write_json(dir / "summary.json", summary);
  write_json(dir / "config.json", resolved_config(sub, g));
  out << summary.dump() << '\n';
}

// ---------------------------------------------------------------- embed

struct EmbedArgs {
  std::string corpus;
  std::string out;
  std::string embedder = "hash";
  std::size_t dim = 256;
  std::optional<std::size_t> chunk_size;
  std::string embeddings;
};

void cmd_embed(const EmbedArgs& a, const Global& g, const CLI::App& sub, std::ostream& out,
               std::ostream& err) {
  EmbedderSpec spec;
  spec.kind = a.embedder == "external" ? EmbedderSpec::Kind::external : EmbedderSpec::Kind::feature_hash;
  spec.dimension = a.dim;
  spec.seed = stage_seed(g.seed, "embed");
  spec.chunk_size = a.chunk_size;
  spec.external_path = a.embeddings;
  spec.validate();

  std::vector<std::string> ids;
  CorpusReader reader(a.corpus, TokenCounter::whitespace());
  EmbeddingMatrix result;
  if (spec.kind == EmbedderSpec::Kind::external) {
    while (auto doc = reader.next()) ids.push_back(std::move(doc->id));
    result = lookup_embeddings(ids, read_embeddings(spec.external_path), a.embeddings);
  } else {
    const auto embedder = make_embedder(spec);
    std::vector<float> data;
    std::vector<std::string> batch_ids;
    std::vector<std::string> batch_texts;
    const auto flush = [&] {
      std::vector<std::string_view> views(batch_texts.begin(), batch_texts.end());
      const EmbeddingMatrix part = embed_texts(batch_ids, views, *embedder);
      data.insert(data.end(), part.data().begin(), part.data().end());
      ids.insert(ids.end(), std::make_move_iterator(batch_ids.begin()),
                 std::make_move_iterator(batch_ids.end()));
      batch_ids.clear();
      batch_texts.clear();
    };
    while (auto doc = reader.next()) {
      batch_ids.push_back(std::move(doc->id));
      batch_texts.push_back(std::move(doc->text));
      if (batch_ids.size() == kBatch) flush();
    }
    flush();
    result = EmbeddingMatrix(embedder->dim(), std::move(ids), std::move(data), true);
  }
  log(g, err, "embedded " + std::to_string(result.n()) + " documents");

  const fs::path dir = prepare_out(a.out);
  write_embeddings(result, dir / "embeddings.d4em");
  write_json(dir / "config.json", resolved_config(sub, g));
  out << "embedded " << result.n() << " documents, dim " << result.dim() << '\n';
}

// -------------------------------------------------------------- cluster

struct ClusterArgs {
  std::string embeddings;
  std::string out;
  std::optional<std::size_t> k;
  std::size_t iters = 20;
};

void cmd_cluster(const ClusterArgs& a, const Global& g, const CLI::App& sub, std::ostream& out) {
  const EmbeddingMatrix emb = read_embeddings(a.embeddings);
  KmeansConfig kc;
  kc.k = a.k.value_or(default_k(emb.n()));
  kc.iters = a.iters;
  kc.seed = stage_seed(g.seed, "kmeans");
  const Clustering c = kmeans_spherical(emb, kc);

  const fs::path dir = prepare_out(a.out);
  write_clustering(c, dir / "clustering.d4km");
  json summary = {{"n", emb.n()},
                  {"dim", emb.dim()},
                  {"k", c.k},
                  {"iters_run", c.iters_run},
                  {"objective", objective(emb, c)},
                  {"objective_history", c.objective_history}};
  const auto sizes = c.cluster_sizes();
  if (std::count_if(sizes.begin(), sizes.end(), [](auto s) { return s > 0; }) >= 2) {
    summary["cluster_balance"] = cluster_balance(sizes);
  }
  write_json(dir / "summary.json", summary);
  write_json(dir / "config.json", resolved_config(sub, g));
  out << "k " << c.k << " iters_run " << c.iters_run << " objective " << num(objective(emb, c)) << '\n';
}

// --------------------------------------------------------------- select

struct SelectArgs {
  std::string embeddings;
  std::string clustering;
  std::string corpus;
  std::string out;
  std::string method = "d4";
  std::optional<double> r;
  double r_dedup = 0.75;
  std::optional<double> r_proto;
  bool no_recluster = false;
  std::optional<std::size_t> k;
  std::optional<std::size_t> recluster_k;
  std::size_t iters = 20;
  bool keep_closest = false;
};

void cmd_select(const SelectArgs& a, const Global& g, const CLI::App& sub, std::ostream& out) {
  const Method method = parse_method(a.method);
  const EmbeddingMatrix emb = read_embeddings(a.embeddings);
  const fs::path dir = prepare_out(a.out);

  const auto kmeans_seed = stage_seed(g.seed, "kmeans");
  std::optional<Clustering> clustering;
  if (method != Method::random) {
    if (!a.clustering.empty()) {
      clustering = read_clustering(a.clustering);
      clustering->validate(emb);
    } else {
      KmeansConfig kc;
      kc.k = a.k.value_or(default_k(emb.n()));
      kc.iters = a.iters;
      kc.seed = kmeans_seed;
      clustering = kmeans_spherical(emb, kc);
      write_clustering(*clustering, dir / "clustering.d4km");
    }
  }
  SemDedupOptions sd;
  sd.keep_rule = a.keep_closest ? KeepRule::closest_to_centroid : KeepRule::farthest_from_centroid;

  SelectionResult result;
  std::string stage;
  switch (method) {
    case Method::random:
      if (!a.r) throw ValidationError("--method random needs --r");
      result = select_random(emb.ids(), *a.r, stage_seed(g.seed, "random"));
      break;
    case Method::semdedup:
      result = semdedup(emb, *clustering, a.r.value_or(a.r_dedup), sd);
      break;
    case Method::prototypes:
      if (!a.r && !a.r_proto) throw ValidationError("--method prototypes needs --r or --r-proto");
      result = ssl_prototypes(emb, *clustering, a.r ? *a.r : *a.r_proto);
      break;
    case Method::d4: {
      D4Config cfg;
      cfg.r_dedup = a.r_dedup;
      if (a.r_proto) {
        cfg.r_proto = *a.r_proto;
      } else if (a.r) {
        cfg.r_proto = *a.r / a.r_dedup;
      } else {
        throw ValidationError("--method d4 needs --r-proto or an overall --r");
      }
      cfg.recluster = !a.no_recluster;
      cfg.kmeans.iters = a.iters;
      cfg.kmeans.seed = kmeans_seed;
      cfg.recluster_k = a.recluster_k;
      cfg.semdedup = sd;
      D4Result d = d4(emb, *clustering, cfg);
      {
        auto f = open_out(dir / "stage_semdedup.jsonl");
        write_selection_records(d.selection.stages.front(), f, "semdedup");
      }
      write_clustering(d.stage2_clustering, dir / "stage2_clustering.d4km");
      write_embeddings(emb.subset(d.dedup_rows), dir / "survivors.d4em");
      result = std::move(d.selection);
      stage = "prototypes";
      break;
    }
  }

  {
    auto f = open_out(dir / "selection.jsonl");
    write_selection_records(result, f, stage);
  }
  const std::string summary = selection_summary(result);
  write_json(dir / "summary.json", json::parse(summary));
  if (!a.corpus.empty()) {
    write_corpus_subset(a.corpus, {result.kept_ids.begin(), result.kept_ids.end()},
                        dir / "selected_corpus.jsonl");
  }
  write_json(dir / "config.json", resolved_config(sub, g));
  out << summary << '\n';
  if (result.warning) out << "warning: " << *result.warning << '\n';
}

// ------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string embeddings;
  std::string clustering;
  std::string out;
  double std_threshold = kDuplicateStdThreshold;
};

void cmd_diagnose(const DiagnoseArgs& a, const Global& g, const CLI::App& sub, std::ostream& out) {
  const EmbeddingMatrix emb = read_embeddings(a.embeddings);
  const Clustering c = read_clustering(a.clustering);
  c.validate(emb);
  const DiagnosticsReport report = diagnose(emb, c, a.std_threshold);

  const fs::path dir = prepare_out(a.out);
  {
    auto f = open_out(dir / "report.jsonl");
    f << json{{"record", "summary"},
              {"k", c.k},
              {"n", c.n()},
              {"cluster_balance", report.cluster_balance},
              {"std_threshold", a.std_threshold},
              {"n_duplicate_driven", report.duplicate_driven_clusters.size()},
              {"duplicate_driven_fraction", duplicate_driven_fraction(emb, c, a.std_threshold)}}
             .dump()
      << '\n';
    for (const auto& fc : report.duplicate_driven_clusters) {
      f << json{{"record", "duplicate_driven"},
                {"cluster", fc.cluster},
                {"size", fc.size},
                {"mean_distance", fc.mean_distance},
                {"std_distance", fc.std_distance}}
               .dump()
        << '\n';
    }
    for (const auto& p : report.ecdf) {
      f << json{{"record", "ecdf"}, {"value", p.value}, {"cumulative", p.cumulative}}.dump() << '\n';
    }
    for (const auto& n : report.notes) f << json{{"record", "note"}, {"text", n}}.dump() << '\n';
  }
  {
    auto f = open_out(dir / "ecdf.tsv");
    f << "mean_distance\tcumulative\n";
    for (const auto& p : report.ecdf) f << num(p.value) << '\t' << num(p.cumulative) << '\n';
  }
  write_json(dir / "config.json", resolved_config(sub, g));
  print_report(report, out);
}

// -------------------------------------------------------------- overlap

struct OverlapArgs {
  std::vector<std::string> selections;
  std::vector<std::string> labels;
  std::string out;
};

void cmd_overlap(const OverlapArgs& a, const Global& g, const CLI::App& sub, std::ostream& out) {
  std::vector<SelectionResult> results;
  std::vector<std::string> labels = a.labels;
  for (const auto& s : a.selections) {
    const fs::path dir(s);
    results.push_back(read_selection(dir / "selection.jsonl", dir / "summary.json"));
    if (a.labels.empty()) labels.push_back(dir.filename().string());
  }
  const OverlapMatrix m = selection_overlap(results, labels);
  if (!a.out.empty()) {
    const fs::path dir = prepare_out(a.out);
    auto f = open_out(dir / "overlap.jsonl");
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      for (std::size_t j = 0; j < m.labels.size(); ++j) {
        f << json{{"row", m.labels[i]}, {"col", m.labels[j]}, {"percent", m.cells[i][j]}}.dump() << '\n';
      }
    }
    write_json(dir / "config.json", resolved_config(sub, g));
  }
  print_overlap(m, out);
}

// ------------------------------------------------------------------- nn

struct NnArgs {
  std::string embeddings;
  std::string train_embeddings;
  std::string scores_before;
  std::string scores_after;
  std::string groups;
  std::size_t bins = 20;
  std::string out;
};

void cmd_nn(const NnArgs& a, const Global& g, const CLI::App& sub, std::ostream& out) {
  const EmbeddingMatrix valid = read_embeddings(a.embeddings);
  const EmbeddingMatrix train = read_embeddings(a.train_embeddings);
  const auto groups = a.groups.empty() ? std::map<std::string, std::string>{} : read_groups(a.groups);
  const NnReport report = nn_to_train(valid, train, groups);

  const fs::path dir = prepare_out(a.out);
  {
    auto f = open_out(dir / "nn.jsonl");
    for (const auto& m : report.matches) {
      f << json{{"valid_id", m.valid_id}, {"train_id", m.train_id}, {"distance", m.distance}}.dump() << '\n';
    }
  }
  {
    auto f = open_out(dir / "nn_summary.jsonl");
    for (const auto& s : report.summary) {
      f << json{{"group", s.group}, {"count", s.count}, {"mean", s.mean}, {"median", s.median}}.dump()
        << '\n';
      out << s.group << ": n=" << s.count << " mean=" << num(s.mean) << " median=" << num(s.median) << '\n';
    }
  }
  if (!a.scores_before.empty() || !a.scores_after.empty()) {
    if (a.scores_before.empty() || a.scores_after.empty()) {
      throw ValidationError("--scores-before and --scores-after go together");
    }
    const auto bins = binned_score_analysis(report, read_scores(a.scores_before),
                                            read_scores(a.scores_after), a.bins);
    auto jf = open_out(dir / "bins.jsonl");
    auto tf = open_out(dir / "bins.tsv");
    tf << "lower\tupper\tcount\tmean_distance\tmean_before\tmean_delta\n";
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    const auto cell = [](const std::optional<double>& v) { return v ? num(*v) : std::string("NA"); };
    for (const auto& b : bins) {
      jf << json{{"lower", b.lower},
                 {"upper", b.upper},
                 {"count", b.count},
                 {"mean_distance", opt(b.mean_distance)},
                 {"mean_before", opt(b.mean_before)},
                 {"mean_delta", opt(b.mean_delta)}}
                .dump()
         << '\n';
      tf << num(b.lower) << '\t' << num(b.upper) << '\t' << b.count << '\t' << cell(b.mean_distance)
         << '\t' << cell(b.mean_before) << '\t' << cell(b.mean_delta) << '\n';
    }
  }
  write_json(dir / "config.json", resolved_config(sub, g));
}

// ------------------------------------------------------------- schedule

struct ScheduleArgs {
  std::string corpus;
  std::string source_corpus;
  std::uint64_t budget = 0;
  bool reshuffle = false;
  std::string out;
};

void cmd_schedule(const ScheduleArgs& a, const Global& g, const CLI::App& sub, std::ostream& out) {
  const DocumentSet selected = load_corpus(a.corpus);
  const EpochPlan plan = plan_epochs(selected, a.budget, stage_seed(g.seed, "schedule"), a.reshuffle);

  json summary = {{"T_total", plan.t_total},
                  {"T_selected", plan.t_selected},
                  {"epochs", plan.epochs},
                  {"n_selected_docs", selected.size()},
                  {"order_length", plan.order.size()},
                  {"order_tokens", plan.order_tokens},
                  {"reshuffle", plan.reshuffle}};
  if (!a.source_corpus.empty()) {
    const DocumentSet source = load_corpus(a.source_corpus);
    if (!source.empty() && source.total_tokens() > 0) {
      summary["document_ratio"] = static_cast<double>(selected.size()) / static_cast<double>(source.size());
      summary["token_ratio"] =
          static_cast<double>(selected.total_tokens()) / static_cast<double>(source.total_tokens());
    }
  }
  const fs::path dir = prepare_out(a.out);
  {
    auto f = open_out(dir / "order.txt");
    for (const auto& id : plan.order) f << id << '\n';
  }
  write_json(dir / "summary.json", summary);
  write_json(dir / "config.json", resolved_config(sub, g));
  out << summary.dump() << '\n';
}

// ----------------------------------------------------------------- cost

struct CostArgs {
  CostModel model;
  std::optional<double> tokens_to_embed;
  std::optional<double> tokens_per_gpu_hour;
  std::string out;
};

void cmd_cost(const CostArgs& a, const Global& g, const CLI::App& sub, std::ostream& out) {
  CostModel model = a.model;
  if (a.tokens_to_embed || a.tokens_per_gpu_hour) {
    if (!a.tokens_to_embed || !a.tokens_per_gpu_hour) {
      throw ValidationError("--tokens-to-embed and --tokens-per-gpu-hour go together");
    }
    model.embed_gpu_hours = embed_cost(*a.tokens_to_embed, *a.tokens_per_gpu_hour);
  }
  const double naive = naive_gain(model);
  const double overall = overall_gain(model);
  out << "naive_gain_gpu_hours " << num(naive) << '\n'
      << "embed_gpu_hours " << num(model.embed_gpu_hours) << '\n'
      << "overall_gain_gpu_hours " << num(overall) << '\n';
  if (!a.out.empty()) {
    const fs::path dir = prepare_out(a.out);
    write_json(dir / "summary.json", {{"naive_gain_gpu_hours", naive},
                                      {"embed_gpu_hours", model.embed_gpu_hours},
                                      {"cpu_stage_gpu_hours", model.cpu_stage_gpu_hour_equivalent},
                                      {"overall_gain_gpu_hours", overall}});
    write_json(dir / "config.json", resolved_config(sub, g));
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Embedding-space data curation: semantic dedup, prototypicality pruning, D4", "d4"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Global g;
  app.add_option("--seed", g.seed, "Seed for every random stage");
  app.add_option("--threads", g.threads, "Worker threads (outputs do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted template groups");
  s_synth->add_option("--out", synth.out, "Output directory")->required();
  s_synth->add_option("--topics", synth.spec.n_topics, "Number of topics");
  s_synth->add_option("--docs-per-topic", synth.spec.docs_per_topic, "Documents per topic");
  s_synth->add_option("--groups", synth.spec.n_template_groups, "Number of template groups");
  s_synth->add_option("--dupes", synth.spec.dupes_per_group, "Copies per template group");
  s_synth->add_option("--mutation", synth.spec.template_mutation_rate, "Per-token mutation probability");
  s_synth->add_option("--vocab", synth.spec.vocab_size, "Vocabulary size");
  s_synth->add_option("--min-len", synth.spec.min_length, "Minimum document length (tokens)");
  s_synth->add_option("--max-len", synth.spec.max_length, "Maximum document length (tokens)");

  MinhashArgs mh;
  auto* s_mh = app.add_subcommand("minhash", "Document-level MinHash-LSH deduplication");
  s_mh->add_option("--corpus", mh.corpus, "Input corpus (JSONL)")->required();
  s_mh->add_option("--out", mh.out, "Output directory")->required();
  s_mh->add_option("--num-hashes", mh.cfg.num_hashes, "Hashes per signature");
  s_mh->add_option("--bands", mh.cfg.bands, "LSH bands");
  s_mh->add_option("--rows-per-band", mh.cfg.rows_per_band, "Rows per band");
  s_mh->add_option("--shingle-width", mh.cfg.shingle_width, "Words per shingle");

  EmbedArgs em;
  auto* s_em = app.add_subcommand("embed", "Embed a corpus into unit-norm vectors");
  s_em->add_option("--corpus", em.corpus, "Input corpus (JSONL)")->required();
  s_em->add_option("--out", em.out, "Output directory")->required();
  s_em->add_option("--embedder", em.embedder, "hash | external")
      ->check(CLI::IsMember({"hash", "external"}));
  s_em->add_option("--dim", em.dim, "Embedding dimension (hash embedder)");
  s_em->add_option("--chunk-size", em.chunk_size, "Average embeddings over chunks of this many tokens");
  s_em->add_option("--embeddings", em.embeddings, "Precomputed embedding file (external embedder)");

  ClusterArgs cl;
  auto* s_cl = app.add_subcommand("cluster", "Spherical k-means");
  s_cl->add_option("--embeddings", cl.embeddings, "Embedding file")->required();
  s_cl->add_option("--out", cl.out, "Output directory")->required();
  s_cl->add_option("--k", cl.k, "Cluster count (default round(sqrt(n)))");
  s_cl->add_option("--iters", cl.iters, "Lloyd iterations");

  SelectArgs sel;
  auto* s_sel = app.add_subcommand("select", "Select a subset: random | semdedup | prototypes | d4");
  s_sel->add_option("--embeddings", sel.embeddings, "Embedding file")->required();
  s_sel->add_option("--clustering", sel.clustering, "Clustering file (fitted when absent)");
  s_sel->add_option("--corpus", sel.corpus, "Corpus to copy the selected documents from");
  s_sel->add_option("--out", sel.out, "Output directory")->required();
  s_sel->add_option("--method", sel.method, "random | semdedup | prototypes | d4")
      ->check(CLI::IsMember({"random", "semdedup", "prototypes", "d4"}));
  s_sel->add_option("--r", sel.r, "Selection ratio (overall ratio for d4)");
  s_sel->add_option("--r-dedup", sel.r_dedup, "SemDeDup ratio");
  s_sel->add_option("--r-proto", sel.r_proto, "Prototypes ratio");
  s_sel->add_flag("--no-recluster", sel.no_recluster, "d4: reuse the original clustering");
  s_sel->add_option("--k", sel.k, "Cluster count when fitting the clustering");
  s_sel->add_option("--recluster-k", sel.recluster_k, "d4: cluster count after dedup");
  s_sel->add_option("--iters", sel.iters, "Lloyd iterations");
  s_sel->add_flag("--keep-closest", sel.keep_closest, "SemDeDup keeps the member closest to the centroid");

  DiagnoseArgs dg;
  auto* s_dg = app.add_subcommand("diagnose", "Cluster balance, duplicate-driven clusters, ECDF");
  s_dg->add_option("--embeddings", dg.embeddings, "Embedding file")->required();
  s_dg->add_option("--clustering", dg.clustering, "Clustering file")->required();
  s_dg->add_option("--out", dg.out, "Output directory")->required();
  s_dg->add_option("--std-threshold", dg.std_threshold, "Std-dev threshold for duplicate-driven clusters");

  OverlapArgs ov;
  auto* s_ov = app.add_subcommand("overlap", "Pairwise overlap of selections");
  s_ov->add_option("selections", ov.selections, "Selection output directories")->required();
  s_ov->add_option("--labels", ov.labels, "Labels, one per selection");
  s_ov->add_option("--out", ov.out, "Output directory");

  NnArgs nn;
  auto* s_nn = app.add_subcommand("nn", "Nearest training neighbour of every validation point");
  s_nn->add_option("--embeddings", nn.embeddings, "Validation embedding file")->required();
  s_nn->add_option("--train-embeddings", nn.train_embeddings, "Training embedding file")->required();
  s_nn->add_option("--scores-before", nn.scores_before, "JSONL {id, score} before selection");
  s_nn->add_option("--scores-after", nn.scores_after, "JSONL {id, score} after selection");
  s_nn->add_option("--groups", nn.groups, "JSONL {id, group} validation set labels");
  s_nn->add_option("--bins", nn.bins, "Distance bins")->check(CLI::PositiveNumber);
  s_nn->add_option("--out", nn.out, "Output directory")->required();

  ScheduleArgs sc;
  auto* s_sc = app.add_subcommand("schedule", "Epoch plan for a token budget");
  s_sc->add_option("--corpus", sc.corpus, "Selected corpus (JSONL)")->required();
  s_sc->add_option("--source-corpus", sc.source_corpus, "Source corpus, to report ratios");
  s_sc->add_option("--budget-tokens", sc.budget, "Token budget")->required();
  s_sc->add_flag("--reshuffle", sc.reshuffle, "Reshuffle between epochs");
  s_sc->add_option("--out", sc.out, "Output directory")->required();

  CostArgs co;
  auto* s_co = app.add_subcommand("cost", "Naive and overall efficiency gain in GPU hours");
  s_co->add_option("--baseline-gpu-hours", co.model.baseline_train_gpu_hours, "Baseline training cost")
      ->required();
  s_co->add_option("--fraction-saved", co.model.fraction_updates_saved, "Fraction of updates saved")
      ->required();
  s_co->add_option("--embed-gpu-hours", co.model.embed_gpu_hours, "Embedding cost");
  s_co->add_option("--cpu-gpu-hours", co.model.cpu_stage_gpu_hour_equivalent,
                   "CPU preprocessing in GPU-hour equivalents");
  s_co->add_option("--tokens-to-embed", co.tokens_to_embed, "Tokens to embed");
  s_co->add_option("--tokens-per-gpu-hour", co.tokens_per_gpu_hour, "Embedding throughput");
  s_co->add_option("--out", co.out, "Output directory");

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
    return kExitValidation;
  }

  const std::size_t saved_threads = num_threads();
  set_num_threads(g.threads);
  int code = kExitOk;
  try {
    if (s_synth->parsed()) cmd_synth(synth, g, *s_synth, out);
    else if (s_mh->parsed()) cmd_minhash(mh, g, *s_mh, out, err);
    else if (s_em->parsed()) cmd_embed(em, g, *s_em, out, err);
    else if (s_cl->parsed()) cmd_cluster(cl, g, *s_cl, out);
    else if (s_sel->parsed()) cmd_select(sel, g, *s_sel, out);
    else if (s_dg->parsed()) cmd_diagnose(dg, g, *s_dg, out);
    else if (s_ov->parsed()) cmd_overlap(ov, g, *s_ov, out);
    else if (s_nn->parsed()) cmd_nn(nn, g, *s_nn, out);
    else if (s_sc->parsed()) cmd_schedule(sc, g, *s_sc, out);
    else if (s_co->parsed()) cmd_cost(co, g, *s_co, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    code = kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    code = kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    code = kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    code = kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kExitValidation;
  }
  set_num_threads(saved_threads);
  return code;
}

}  // namespace d4::cli
