#include "citerec/lexindex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "citerec/error.hpp"
#include "citerec/text.hpp"

namespace citerec {

void Bm25Params::validate() const {
  if (!(k1 >= 0.0) || !std::isfinite(k1)) {
    throw Error(ErrorCode::kInvalidArgument, "k1 must be a finite value >= 0");
  }
  if (!(b >= 0.0 && b <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "b must lie in [0, 1]");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidArgument, "delta must be a finite value >= 0");
  }
}

std::vector<DocId> RankedList::doc_ids() const {
  std::vector<DocId> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.doc_id);
  return ids;
}

Bm25Index Bm25Index::from_documents(std::vector<TokenizedDoc> docs,
                                    const Bm25Params& params) {
  params.validate();
  if (docs.empty()) {
    throw Error(ErrorCode::kEmptyCandidatePool, "no candidate documents to index");
  }
  std::sort(docs.begin(), docs.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].id == docs[i - 1].id) {
      throw Error(ErrorCode::kDuplicateId, "duplicate document id " + docs[i].id);
    }
  }

  Bm25Index index;
  index.params_ = params;
  // Terms are interned in first-seen order, then renumbered alphabetically.
  std::unordered_map<std::string_view, std::uint32_t> interned;
  std::vector<std::string_view> seen;
  std::vector<std::vector<Posting>> lists;
  std::vector<std::uint32_t> ids;
  for (std::uint32_t d = 0; d < docs.size(); ++d) {
    index.doc_ids_.push_back(docs[d].id);
    index.doc_len_.push_back(static_cast<std::uint32_t>(docs[d].tokens.size()));
    ids.clear();
    for (const auto& t : docs[d].tokens) {
      const auto [it, inserted] = interned.try_emplace(t, static_cast<std::uint32_t>(seen.size()));
      if (inserted) {
        seen.push_back(t);
        lists.emplace_back();
      }
      ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size();) {
      std::size_t j = i;
      while (j < ids.size() && ids[j] == ids[i]) ++j;
      lists[ids[i]].push_back({d, static_cast<std::uint32_t>(j - i)});
      i = j;
    }
  }
  std::vector<std::uint32_t> order(seen.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return seen[a] < seen[b]; });
  index.terms_.reserve(order.size());
  index.offsets_.reserve(order.size() + 1);
  index.offsets_.push_back(0);
  for (const std::uint32_t t : order) {
    index.terms_.emplace_back(seen[t]);
    index.postings_.insert(index.postings_.end(), lists[t].begin(), lists[t].end());
    index.offsets_.push_back(index.postings_.size());
  }
  index.finalize();
  return index;
}

void Bm25Index::finalize() {
  const double total = std::accumulate(doc_len_.begin(), doc_len_.end(), 0.0);
  if (total <= 0.0) {
    throw Error(ErrorCode::kEmptyCandidatePool,
                "candidate abstracts contain no indexable tokens");
  }
  const double n = static_cast<double>(doc_ids_.size());
  avgdl_ = total / n;

  idf_.resize(terms_.size());
  term_lookup_.clear();
  term_lookup_.reserve(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const double df = static_cast<double>(offsets_[t + 1] - offsets_[t]);
    idf_[t] = std::log((n + 1.0) / df);
    term_lookup_.emplace(terms_[t], static_cast<std::uint32_t>(t));
  }
  length_norm_.resize(doc_len_.size());
  doc_lookup_.clear();
  doc_lookup_.reserve(doc_ids_.size());
  for (std::size_t d = 0; d < doc_len_.size(); ++d) {
    length_norm_[d] = params_.k1 * (1.0 - params_.b +
                                    params_.b * static_cast<double>(doc_len_[d]) / avgdl_);
    doc_lookup_.emplace(doc_ids_[d], static_cast<std::uint32_t>(d));
  }
}

std::int64_t Bm25Index::term_id(const std::string& term) const {
  const auto it = term_lookup_.find(term);
  return it == term_lookup_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::uint32_t Bm25Index::doc_number(std::string_view doc_id) const {
  const auto it = doc_lookup_.find(std::string(doc_id));
  if (it == doc_lookup_.end()) {
    throw Error(ErrorCode::kUnknownDocument,
                "document " + std::string(doc_id) + " is not indexed");
  }
  return it->second;
}

std::uint32_t Bm25Index::doc_length(std::string_view doc_id) const {
  return doc_len_[doc_number(doc_id)];
}

bool Bm25Index::has_term(const std::string& term) const { return term_id(term) >= 0; }

std::size_t Bm25Index::document_frequency(const std::string& term) const {
  return postings(term).size();
}

double Bm25Index::idf(const std::string& term) const {
  const auto t = term_id(term);
  return t < 0 ? 0.0 : idf_[static_cast<std::size_t>(t)];
}

std::span<const Bm25Index::Posting> Bm25Index::postings(const std::string& term) const {
  const auto t = term_id(term);
  if (t < 0) return {};
  const auto i = static_cast<std::size_t>(t);
  return std::span<const Posting>(postings_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::uint32_t Bm25Index::term_frequency(const std::string& term,
                                        std::string_view doc_id) const {
  const std::uint32_t d = doc_number(doc_id);
  const auto list = postings(term);
  const auto it = std::lower_bound(list.begin(), list.end(), d,
                                   [](const Posting& p, std::uint32_t doc) { return p.doc < doc; });
  return (it != list.end() && it->doc == d) ? it->tf : 0;
}

double Bm25Index::lower_bound_total(std::span<const std::string> query_tokens) const {
  double total = 0.0;
  for (const auto& q : query_tokens) {
    const auto t = term_id(q);
    if (t >= 0) total += params_.delta * idf_[static_cast<std::size_t>(t)];
  }
  return total;
}

double Bm25Index::score(std::span<const std::string> query_tokens,
                        std::string_view doc_id) const {
  const std::uint32_t d = doc_number(doc_id);
  double acc = 0.0;
  for (const auto& q : query_tokens) {
    const auto t = term_id(q);
    if (t < 0) continue;
    const auto i = static_cast<std::size_t>(t);
    const auto first = postings_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto last = postings_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, d, [](const Posting& p, std::uint32_t doc) {
      return p.doc < doc;
    });
    if (it != last && it->doc == d) acc += idf_[i] * tf_component(d, it->tf);
  }
  return lower_bound_total(query_tokens) + acc;
}

std::vector<double> Bm25Index::score_all(std::span<const std::string> query_tokens) const {
  std::vector<double> acc(doc_ids_.size(), 0.0);
  for (const auto& q : query_tokens) {
    const auto t = term_id(q);
    if (t < 0) continue;
    const auto i = static_cast<std::size_t>(t);
    const double w = idf_[i];
    for (std::uint64_t p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      const Posting& posting = postings_[p];
      acc[posting.doc] += w * tf_component(posting.doc, posting.tf);
    }
  }
  const double base = lower_bound_total(query_tokens);
  for (auto& s : acc) s = base + s;
  return acc;
}

RankedList Bm25Index::top_k(std::span<const std::string> query_tokens,
                            std::size_t k) const {
  if (query_tokens.empty()) {
    throw Error(ErrorCode::kEmptyQuery, "query has no tokens");
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const std::vector<double> scores = score_all(query_tokens);
  std::vector<std::uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0U);
  const std::size_t keep = std::min(k, order.size());
  // Doc numbers follow id order, so comparing numbers breaks ties by id.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                    order.end(), [&](std::uint32_t a, std::uint32_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  RankedList out;
  out.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.entries.push_back({doc_ids_[order[i]], scores[order[i]]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr char kMagic[8] = {'C', 'R', 'B', 'M', '2', '5', 'I', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void raw(const char* data, std::size_t n) {
    out_.write(data, static_cast<std::streamsize>(n));
  }

 private:
  void put_le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void read(char* data, std::size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(ErrorCode::kSchemaError, "index file is truncated");
    }
  }

 private:
  std::uint64_t get_le(int bytes) {
    unsigned char buf[8];
    read(reinterpret_cast<char*>(buf), static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }
  std::istream& in_;
};

void corrupt(const std::string& what) {
  throw Error(ErrorCode::kSchemaError, "index file is corrupt: " + what);
}

}  // namespace

void Bm25Index::save(std::ostream& out) const {
  Writer w(out);
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kFormatVersion);
  w.f64(params_.k1);
  w.f64(params_.b);
  w.f64(params_.delta);
  w.u64(doc_ids_.size());
  w.f64(avgdl_);
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    w.str(doc_ids_[d]);
    w.u32(doc_len_[d]);
  }
  w.u64(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    w.str(terms_[t]);
    w.u64(offsets_[t + 1] - offsets_[t]);
    for (std::uint64_t p = offsets_[t]; p < offsets_[t + 1]; ++p) {
      w.u32(postings_[p].doc);
      w.u32(postings_[p].tf);
    }
  }
  if (!out) throw Error(ErrorCode::kIoError, "failed writing index");
}

Bm25Index Bm25Index::load(std::istream& in) {
  Reader r(in);
  char magic[sizeof(kMagic)];
  r.read(magic, sizeof(magic));
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw Error(ErrorCode::kSchemaError, "not a citerec BM25 index (bad magic)");
  }
  if (const auto version = r.u32(); version != kFormatVersion) {
    throw Error(ErrorCode::kSchemaError,
                "unsupported index format version " + std::to_string(version));
  }
  Bm25Index index;
  index.params_.k1 = r.f64();
  index.params_.b = r.f64();
  index.params_.delta = r.f64();
  try {
    index.params_.validate();
  } catch (const Error& e) {
    corrupt(e.what());
  }
  const std::uint64_t n_docs = r.u64();
  if (n_docs == 0 || n_docs > UINT32_MAX) corrupt("document count");
  const double stored_avgdl = r.f64();
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    index.doc_ids_.push_back(r.str());
    index.doc_len_.push_back(r.u32());
    if (d > 0 && !(index.doc_ids_[d - 1] < index.doc_ids_[d])) corrupt("document order");
  }
  const std::uint64_t n_terms = r.u64();
  std::vector<std::uint64_t> tf_sum(n_docs, 0);
  index.offsets_.push_back(0);
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    index.terms_.push_back(r.str());
    if (t > 0 && !(index.terms_[t - 1] < index.terms_[t])) corrupt("term order");
    const std::uint64_t df = r.u64();
    if (df == 0 || df > n_docs) corrupt("document frequency");
    for (std::uint64_t p = 0; p < df; ++p) {
      Posting posting{r.u32(), r.u32()};
      if (posting.doc >= n_docs || posting.tf == 0) corrupt("posting");
      if (p > 0 && index.postings_.back().doc >= posting.doc) corrupt("posting order");
      tf_sum[posting.doc] += posting.tf;
      index.postings_.push_back(posting);
    }
    index.offsets_.push_back(index.postings_.size());
  }
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    if (tf_sum[d] != index.doc_len_[d]) corrupt("document length");
  }
  index.finalize();
  if (std::bit_cast<std::uint64_t>(index.avgdl_) != std::bit_cast<std::uint64_t>(stored_avgdl)) {
    corrupt("avgdl");
  }
  return index;
}

Bm25Index build_index(const Corpus& corpus, const Bm25Params& params) {
  std::vector<TokenizedDoc> docs;
  docs.reserve(corpus.candidate_count());
  for (const auto& [id, doc] : corpus.documents()) {
    if (doc.role == Role::kCandidate) docs.push_back({id, tokenize(doc.abstract)});
  }
  if (docs.empty()) {
    throw Error(ErrorCode::kEmptyCandidatePool, "corpus has no candidate documents");
  }
  return Bm25Index::from_documents(std::move(docs), params);
}

double bm25_score(const Bm25Index& index, std::span<const std::string> query_tokens,
                  std::string_view doc_id) {
  return index.score(query_tokens, doc_id);
}

RankedList prefetch_topk(const Bm25Index& index,
                         std::span<const std::string> query_tokens, std::size_t k) {
  return index.top_k(query_tokens, k);
}

}  // namespace citerec
