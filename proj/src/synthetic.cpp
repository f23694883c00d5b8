#include "incdsi/synthetic.hpp"

#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include "incdsi/errors.hpp"

namespace incdsi {

namespace {

std::string make_doc_id(std::size_t i, std::size_t n) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  return "doc-" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

std::vector<double> unit_gaussian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

void append_query(DocSet& set, std::span<const float> q, const std::string& doc_id,
                  io::QuerySplit split) {
  io::QueryRecord rec;
  rec.row_index = set.queries.rows();
  rec.doc_id = doc_id;
  rec.kind = split == io::QuerySplit::train ? io::QueryKind::generated : io::QueryKind::natural;
  rec.split = split;
  set.queries.push_row(q);
  set.manifest.push_back(std::move(rec));
}

}  // namespace

void SyntheticCorpusSpec::validate() const {
  if (n_docs == 0) throw InvalidArgument("n_docs must be positive");
  if (dim == 0) throw InvalidArgument("dim must be positive");
  if (queries_per_doc < 1) throw InvalidArgument("queries_per_doc must be >= 1");
  if (!(cluster_std >= 0.0) || !std::isfinite(cluster_std)) {
    throw InvalidArgument("cluster_std must be finite and >= 0");
  }
  if (initial_fraction < 0.0 || new_fraction < 0.0 || tune_fraction < 0.0 ||
      std::abs(initial_fraction + new_fraction + tune_fraction - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must be non-negative and sum to 1");
  }
}

std::vector<PendingDocument> DocSet::train_documents() const {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<PendingDocument> docs;
  docs.reserve(doc_ids.size());
  for (const auto& id : doc_ids) {
    slot.emplace(id, docs.size());
    docs.push_back(PendingDocument{id, Matrix{}});
  }
  for (const auto& rec : manifest) {
    if (rec.split != io::QuerySplit::train) continue;
    docs[slot.at(rec.doc_id)].queries.push_row(queries.row(rec.row_index));
  }
  return docs;
}

QuerySet DocSet::query_set(io::QuerySplit split) const {
  QuerySet out;
  for (const auto& rec : manifest) {
    if (rec.split != split) continue;
    out.embeddings.push_row(queries.row(rec.row_index));
    out.golds.push_back(rec.doc_id);
  }
  if (out.embeddings.cols() == 0) out.embeddings = Matrix(0, queries.cols());
  return out;
}

SyntheticCorpus generate_synthetic(const SyntheticCorpusSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_docs;
  const auto n_initial = static_cast<std::size_t>(std::llround(spec.initial_fraction * n));
  const auto n_tune = std::min(static_cast<std::size_t>(std::llround(spec.tune_fraction * n)),
                               n - std::min(n, n_initial));
  const std::size_t n_new = n - std::min(n, n_initial) - n_tune;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.cluster_std > 0.0 ? spec.cluster_std : 1.0);
  const std::size_t k_max = std::max(spec.queries_per_doc, spec.queries_per_doc_max);

  SyntheticCorpus corpus;
  for (DocSet* set : {&corpus.initial, &corpus.added, &corpus.tuning}) {
    set->queries = Matrix(0, spec.dim);
    set->centers = Matrix(0, spec.dim);
  }
  std::vector<float> q(spec.dim);
  for (std::size_t i = 0; i < n; ++i) {
    DocSet& set = i < n_initial ? corpus.initial : i < n_initial + n_new ? corpus.added : corpus.tuning;
    const std::string id = make_doc_id(i, n);
    set.doc_ids.push_back(id);

    const std::vector<double> center = unit_gaussian(rng, spec.dim);
    std::vector<float> center_f(center.begin(), center.end());
    set.centers.push_row(center_f);

    std::size_t k = spec.queries_per_doc;
    if (k_max > k) k = std::uniform_int_distribution<std::size_t>(k, k_max)(rng);

    auto emit = [&](io::QuerySplit split) {
      if (spec.cluster_std == 0.0) {
        append_query(set, center_f, id, split);
        return;
      }
      std::vector<double> x = center;
      double norm = 0.0;
      for (double& v : x) {
        v += noise(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (std::size_t d = 0; d < spec.dim; ++d) q[d] = static_cast<float>(x[d] / norm);
      append_query(set, q, id, split);
    };
    for (std::size_t j = 0; j < k; ++j) emit(io::QuerySplit::train);
    for (std::size_t j = 0; j < spec.val_per_doc; ++j) emit(io::QuerySplit::val);
    for (std::size_t j = 0; j < spec.test_per_doc; ++j) emit(io::QuerySplit::test);
  }
  return corpus;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::pair<const DocSet*, const char*> parts[] = {
      {&corpus.initial, "initial"}, {&corpus.added, "new"}, {&corpus.tuning, "tune"}};
  for (const auto& [set, name] : parts) {
    io::write_embedding_matrix(set->queries, dir / (std::string(name) + ".idsi"));
    io::write_query_manifest(set->manifest, dir / (std::string(name) + ".tsv"));
  }
}

DocSet read_doc_set(const std::filesystem::path& embeddings,
                    const std::filesystem::path& manifest) {
  DocSet set;
  set.queries = io::read_embedding_matrix(embeddings);
  set.manifest = io::read_query_manifest(manifest, set.queries.rows());
  std::unordered_map<std::string, bool> seen;
  for (const auto& rec : set.manifest) {
    if (seen.emplace(rec.doc_id, true).second) set.doc_ids.push_back(rec.doc_id);
  }
  set.centers = Matrix(0, set.queries.cols());
  return set;
}

SyntheticCorpus read_corpus(const std::filesystem::path& dir) {
  SyntheticCorpus corpus;
  corpus.initial = read_doc_set(dir / "initial.idsi", dir / "initial.tsv");
  corpus.added = read_doc_set(dir / "new.idsi", dir / "new.tsv");
  corpus.tuning = read_doc_set(dir / "tune.idsi", dir / "tune.tsv");
  return corpus;
}

}  // namespace incdsi
