#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "forge/citation.hpp"
#include "forge/config.hpp"
#include "forge/corpus.hpp"
#include "forge/index.hpp"
#include "forge/jsonl.hpp"
#include "forge/metrics.hpp"
#include "forge/parallel.hpp"
#include "forge/topic.hpp"

namespace forge {

inline uint64_t derive_seed(uint64_t root, const std::string& key) {
    uint64_t h = fnv1a64_bytes(&root, sizeof(root));
    return fnv1a64(key, h);
}

// ---------------------------------------------------------------------------
// Input loading

inline std::vector<ReferenceDoc> load_reference_docs(const std::string& path) {
    std::vector<ReferenceDoc> docs;
    std::unordered_set<std::string> seen;
    read_jsonl(path, [&](const Json& j, size_t line_no) {
        std::string where = path + ":" + std::to_string(line_no);
        ReferenceDoc d;
        d.id = require_string(j, "id", where);
        d.url = j.value("url", "");
        d.raw_text = require_string(j, "text", where);
        if (!seen.insert(d.id).second) {
            throw Error(ErrorCode::SchemaError, where + ": duplicate reference id " + d.id);
        }
        docs.push_back(std::move(d));
    });
    return docs;
}

struct LoadedWiki {
    std::vector<WikiRecord> records;
    std::map<std::string, size_t> skipped;  // reason -> count
};

inline LoadedWiki load_wiki_records(const std::string& path) {
    LoadedWiki out;
    read_jsonl(path, [&](const Json& j, size_t line_no) {
        std::string where = path + ":" + std::to_string(line_no);
        WikiRecord r;
        r.id = require_string(j, "id", where);
        r.title = require_string(j, "title", where);
        r.first_section = require_string(j, "first_section", where);
        if (j.contains("citations")) {
            for (const auto& c : j.at("citations")) r.citations.push_back(c.get<std::string>());
        }
        if (r.title.empty()) {
            out.skipped["EmptyTitle"] += 1;
            return;
        }
        try {
            r.sentences = parse_marks(clean_wiki(r.first_section),
                                      static_cast<int>(r.citations.size()));
        } catch (const Error& e) {
            out.skipped[error_code_name(e.code())] += 1;
            return;
        }
        out.records.push_back(std::move(r));
    });
    return out;
}

// ---------------------------------------------------------------------------
// forge datasets

struct DatasetBuildReport {
    size_t wiki_rows_in = 0;
    size_t records_processed = 0;
    std::map<std::string, size_t> records_skipped;

    size_t refs_in = 0;
    size_t refs_cleaned = 0;
    std::map<std::string, size_t> refs_rejected;

    size_t citations_total = 0;
    size_t citations_kept = 0;
    size_t citations_missing_ref = 0;
    size_t citations_ref_rejected = 0;
    size_t citations_no_valid_passage = 0;
    size_t citations_low_pst = 0;

    size_t corpus_docs = 0;
    size_t corpus_collisions = 0;

    size_t g_rows = 0;
    size_t r_rows = 0;
    size_t r_insufficient = 0;
    size_t warmup_rows = 0;

    Json to_json() const {
        return Json{{"wiki_rows_in", wiki_rows_in},
                    {"records_processed", records_processed},
                    {"records_skipped", records_skipped},
                    {"refs_in", refs_in},
                    {"refs_cleaned", refs_cleaned},
                    {"refs_rejected", refs_rejected},
                    {"citations_total", citations_total},
                    {"citations_kept", citations_kept},
                    {"citations_missing_ref", citations_missing_ref},
                    {"citations_ref_rejected", citations_ref_rejected},
                    {"citations_no_valid_passage", citations_no_valid_passage},
                    {"citations_low_pst", citations_low_pst},
                    {"corpus_docs", corpus_docs},
                    {"corpus_collisions", corpus_collisions},
                    {"g_rows", g_rows},
                    {"r_rows", r_rows},
                    {"r_insufficient", r_insufficient},
                    {"warmup_rows", warmup_rows}};
    }
};

struct DatasetPaths {
    std::string webbrain_g;
    std::string webbrain_r;
    std::string warmup;
    std::string report;

    static DatasetPaths in_dir(const std::string& dir) {
        return DatasetPaths{dir + "/webbrain-g.jsonl", dir + "/webbrain-r.jsonl",
                            dir + "/warmup.jsonl", dir + "/build-report.json"};
    }
};

namespace detail {

struct RecordWork {
    bool ok = false;
    std::string skip_reason;
    std::vector<std::optional<PassageCandidate>> per_citation;
    GenerationExample example;
    std::vector<WarmupPair> warmup;
    size_t missing_ref = 0;
    size_t ref_rejected = 0;
    size_t no_valid_passage = 0;
    size_t low_pst = 0;
};

struct NegativeWork {
    // One entry per kept citation, aligned with the record's positives.
    std::vector<std::optional<RetrievalExample>> examples;
    size_t insufficient = 0;
};

inline SparseVector term_count_vector(const TokenSeq& tokens, Vocabulary& vocab) {
    std::map<uint32_t, double> counts;
    for (const auto& t : tokens) counts[vocab.add(t)] += 1.0;
    SparseVector v;
    for (const auto& [id, c] : counts) v.push_back_sorted(id, c);
    return v;
}

}  // namespace detail

// Full dataset generation: clean both sides, select supporting passages,
// assign marks, emit WebBrain-G / WebBrain-R / warm-up files plus a count
// report. Deterministic for a fixed (inputs, config): parallel workers write
// into per-record slots and all sampling runs on per-record substreams.
inline DatasetBuildReport cmd_build_datasets(const PipelineConfig& cfg, const StopwordSet& stop,
                                             const std::string& wiki_path,
                                             const std::string& refs_path,
                                             const DatasetPaths& paths) {
    cfg.validate();
    DatasetBuildReport report;
    const std::string hash = config_hash(cfg);

    // Reference cleaning.
    std::vector<ReferenceDoc> refs = load_reference_docs(refs_path);
    report.refs_in = refs.size();
    parallel_for(refs.size(), [&](size_t i) { refs[i] = clean_doc(std::move(refs[i])); });
    std::unordered_map<std::string, const ReferenceDoc*> ref_by_id;
    for (const auto& d : refs) {
        ref_by_id.emplace(d.id, &d);
        if (d.cleaned_text) {
            report.refs_cleaned += 1;
        } else {
            report.refs_rejected[reject_reason_name(*d.rejection)] += 1;
        }
    }

    // Wiki records and per-record passage selection.
    LoadedWiki wiki = load_wiki_records(wiki_path);
    report.wiki_rows_in = wiki.records.size();
    for (const auto& [reason, count] : wiki.skipped) {
        report.records_skipped[reason] += count;
        report.wiki_rows_in += count;
    }

    std::vector<detail::RecordWork> work(wiki.records.size());
    parallel_for(wiki.records.size(), [&](size_t i) {
        const WikiRecord& rec = wiki.records[i];
        detail::RecordWork& w = work[i];
        try {
            TokenSeq query_tokens = tokenize(rec.title);
            w.per_citation.resize(rec.citations.size());
            for (size_t c = 0; c < rec.citations.size(); ++c) {
                auto it = ref_by_id.find(rec.citations[c]);
                if (it == ref_by_id.end()) {
                    w.missing_ref += 1;
                    continue;
                }
                const ReferenceDoc& doc = *it->second;
                if (!doc.cleaned_text) {
                    w.ref_rejected += 1;
                    continue;
                }
                std::vector<TokenSeq> citing;
                for (const auto& s : rec.sentences) {
                    if (s.mark == static_cast<int>(c) + 1) citing.push_back(s.tokens);
                }
                if (citing.empty()) {
                    // Citation never marked inline: score against the whole target.
                    for (const auto& s : rec.sentences) citing.push_back(s.tokens);
                }
                try {
                    PassageCandidate p = select_supporting_passage(
                        query_tokens, citing, doc, stop,
                        static_cast<size_t>(cfg.max_passage_tokens));
                    if (p.pst > cfg.rho) {
                        w.per_citation[c] = std::move(p);
                    } else {
                        w.low_pst += 1;
                    }
                } catch (const Error&) {
                    w.no_valid_passage += 1;
                }
            }
            w.example = build_generation_example(rec, w.per_citation, stop, cfg.rho,
                                                 static_cast<size_t>(cfg.max_refs));
            w.warmup = build_warmup_pairs(w.example);
            w.ok = true;
        } catch (const std::exception& e) {
            w.ok = false;
            w.skip_reason = e.what();
        }
    });

    // Selected-passage corpus for negative mining; first selection of a
    // reference doc wins on collision.
    Vocabulary corpus_vocab;
    std::vector<std::pair<uint32_t, SparseVector>> corpus_docs;
    std::vector<std::string> corpus_ids;
    std::unordered_map<std::string, uint32_t> corpus_id_map;
    for (size_t i = 0; i < wiki.records.size(); ++i) {
        if (!work[i].ok) continue;
        for (const auto& maybe : work[i].per_citation) {
            if (!maybe) continue;
            auto [it, inserted] =
                corpus_id_map.emplace(maybe->doc_id, static_cast<uint32_t>(corpus_ids.size()));
            if (!inserted) {
                report.corpus_collisions += 1;
                continue;
            }
            corpus_ids.push_back(maybe->doc_id);
            corpus_docs.emplace_back(it->second,
                                     detail::term_count_vector(maybe->tokens, corpus_vocab));
        }
    }
    corpus_vocab.freeze();
    report.corpus_docs = corpus_ids.size();
    InvertedIndex bm25_index = build_index(corpus_docs, IndexMode::TermFrequency,
                                           std::move(corpus_vocab), corpus_ids);

    // Negative mining per (record, positive).
    BM25Params bm25{cfg.bm25_k1, cfg.bm25_b};
    const size_t fetch_k = static_cast<size_t>(cfg.negative_rank_high) + 1;
    std::vector<detail::NegativeWork> negatives(wiki.records.size());
    parallel_for(wiki.records.size(), [&](size_t i) {
        if (!work[i].ok) return;
        const WikiRecord& rec = wiki.records[i];
        TokenSeq query_tokens = tokenize(rec.title);
        auto hits = search_bm25(bm25_index, query_tokens, fetch_k, bm25);
        std::vector<std::string> ranking;
        ranking.reserve(hits.size());
        for (const auto& h : hits) ranking.push_back(bm25_index.external_id(h.doc_id));
        for (const auto& maybe : work[i].per_citation) {
            if (!maybe) continue;
            const std::string& positive = maybe->doc_id;
            try {
                negatives[i].examples.push_back(build_retrieval_example(
                    rec.title, positive, ranking, derive_seed(cfg.seed, rec.id + "|" + positive),
                    cfg.negative_rank_low, cfg.negative_rank_high,
                    static_cast<size_t>(cfg.num_negatives)));
            } catch (const Error&) {
                negatives[i].examples.push_back(std::nullopt);
                negatives[i].insufficient += 1;
            }
        }
    });

    // Emit everything in input order.
    JsonlWriter g_out(paths.webbrain_g);
    JsonlWriter r_out(paths.webbrain_r);
    JsonlWriter warm_out(paths.warmup);
    g_out.row(artifact_header("webbrain-g", hash, stop.version));
    r_out.row(artifact_header("webbrain-r", hash, stop.version));
    warm_out.row(artifact_header("warmup", hash, stop.version));

    for (size_t i = 0; i < wiki.records.size(); ++i) {
        const detail::RecordWork& w = work[i];
        if (!w.ok) {
            report.records_skipped["RecordError"] += 1;
            continue;
        }
        report.records_processed += 1;
        report.citations_total += w.per_citation.size();
        report.citations_missing_ref += w.missing_ref;
        report.citations_ref_rejected += w.ref_rejected;
        report.citations_no_valid_passage += w.no_valid_passage;
        report.citations_low_pst += w.low_pst;
        for (const auto& maybe : w.per_citation) report.citations_kept += maybe ? 1 : 0;

        Json refs_json = Json::array();
        for (const auto& r : w.example.refs) {
            refs_json.push_back(Json{{"id", r.doc_id}, {"text", r.text}});
        }
        g_out.row(Json{{"id", wiki.records[i].id},
                       {"query", w.example.query},
                       {"refs", refs_json},
                       {"target", serialize_marked(w.example.target)},
                       {"fid_inputs", w.example.fid_inputs}});
        report.g_rows += 1;

        for (const auto& maybe : negatives[i].examples) {
            if (!maybe) continue;
            r_out.row(Json{{"query_id", wiki.records[i].id},
                           {"query", maybe->query},
                           {"positive_id", maybe->positive_id},
                           {"negative_ids", maybe->negative_ids},
                           {"negative_ranks", maybe->negative_ranks}});
            report.r_rows += 1;
        }
        report.r_insufficient += negatives[i].insufficient;

        for (const auto& p : w.warmup) {
            warm_out.row(Json{{"query", p.query},
                              {"ref_id", p.ref_id},
                              {"ref", p.ref_text},
                              {"sentence", p.sentence}});
            report.warmup_rows += 1;
        }
    }
    g_out.close();
    r_out.close();
    warm_out.close();

    Json report_json = report.to_json();
    report_json["config_hash"] = hash;
    report_json["stopword_version"] = stop.version;
    std::ofstream rep(paths.report, std::ios::trunc);
    if (!rep) throw Error(ErrorCode::IoError, "cannot write " + paths.report);
    rep << report_json.dump(2) << '\n';
    return report;
}

// ---------------------------------------------------------------------------
// forge retrieve / rerank

struct QueryRow {
    std::string id;
    std::string text;
};

inline std::vector<QueryRow> load_queries(const std::string& path) {
    std::vector<QueryRow> out;
    read_jsonl(path, [&](const Json& j, size_t line_no) {
        std::string where = path + ":" + std::to_string(line_no);
        out.push_back(QueryRow{require_string(j, "query_id", where),
                               require_string(j, "text", where)});
    });
    return out;
}

// Forward vectors for a set of documents in one pass over the postings.
inline std::unordered_map<uint32_t, SparseVector> doc_vectors_for(
    const InvertedIndex& index, const std::unordered_set<uint32_t>& docs) {
    std::unordered_map<uint32_t, std::vector<SparseVector::Entry>> entries;
    entries.reserve(docs.size());
    for (uint32_t t = 0; t < index.term_count(); ++t) {
        for (const auto& p : index.postings(t)) {
            if (docs.count(p.doc_id)) entries[p.doc_id].emplace_back(t, p.weight);
        }
    }
    std::unordered_map<uint32_t, SparseVector> out;
    out.reserve(entries.size());
    for (auto& [doc, e] : entries) {
        SparseVector v;
        for (const auto& [id, w] : e) v.push_back_sorted(id, w);
        out.emplace(doc, std::move(v));
    }
    return out;
}

inline Json sparse_to_json(const SparseVector& v) {
    Json arr = Json::array();
    for (const auto& [id, w] : v.entries()) arr.push_back(Json::array({id, w}));
    return arr;
}

inline SparseVector sparse_from_json(const Json& arr, const std::string& where) {
    if (!arr.is_array()) throw Error(ErrorCode::SchemaError, where + ": vector must be an array");
    std::vector<SparseVector::Entry> entries;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2) {
            throw Error(ErrorCode::SchemaError, where + ": vector entry must be [id, weight]");
        }
        entries.emplace_back(e[0].get<uint32_t>(), e[1].get<double>());
    }
    return SparseVector::from_entries(std::move(entries));
}

struct RerankedHits {
    std::vector<size_t> kept;
    std::vector<std::pair<size_t, DropReason>> dropped;
    double mu = 0.0;
};

inline RerankedHits rerank_hits(const std::vector<SparseVector>& hit_vectors,
                                const PipelineConfig& cfg) {
    RerankedHits out;
    if (hit_vectors.empty()) return out;
    out.mu = cfg.mu > 0.0 ? cfg.mu : default_mu(hit_vectors, cfg.mu_fraction);
    std::vector<BinarySignature> sigs;
    sigs.reserve(hit_vectors.size());
    for (const auto& v : hit_vectors) sigs.push_back(binarize(v, out.mu));
    FilterResult fr = consistency_filter(sigs, FilterConfig{out.mu, cfg.upper, cfg.lower});
    out.kept = std::move(fr.kept);
    out.dropped = std::move(fr.dropped);
    return out;
}

struct RetrieveOptions {
    size_t k = 10;
    bool rerank = false;
    bool emit_vectors = true;
    std::string query_importance;  // optional row-per-query importance JSONL
    std::string runs_out;          // optional {query_id, ranked_ids} mirror
};

inline void cmd_retrieve(const PipelineConfig& cfg, const std::string& index_path,
                         const std::string& queries_path, const std::string& out_path,
                         const RetrieveOptions& opts) {
    cfg.validate();
    InvertedIndex index = load_index(index_path);
    std::vector<QueryRow> queries = load_queries(queries_path);

    std::optional<ImportanceMatrix> imported;
    if (!opts.query_importance.empty()) {
        if (index.mode() != IndexMode::PooledWeights) {
            throw Error(ErrorCode::WrongIndexMode,
                        "--query-importance needs a pooled-weight index");
        }
        imported = import_importance(opts.query_importance, index.vocab().size());
        if (imported->row_count() != queries.size()) {
            throw Error(ErrorCode::SchemaError,
                        "query importance rows (" + std::to_string(imported->row_count()) +
                            ") != query count (" + std::to_string(queries.size()) + ")");
        }
    }

    CorpusStats stats;
    if (index.mode() == IndexMode::PooledWeights && !imported) {
        stats = stats_from_index(index);
    }
    BM25Params bm25{cfg.bm25_k1, cfg.bm25_b};

    std::vector<std::vector<SearchHit>> all_hits(queries.size());
    // The vocabulary is frozen for lookups only; const_cast is confined here.
    auto& vocab = const_cast<Vocabulary&>(index.vocab());
    parallel_for(queries.size(), [&](size_t qi) {
        if (index.mode() == IndexMode::TermFrequency) {
            all_hits[qi] = search_bm25(index, tokenize(queries[qi].text), opts.k, bm25);
            return;
        }
        SparseVector qv;
        if (imported) {
            ImportanceMatrix one;
            one.vocab_size = imported->vocab_size;
            one.rows.push_back(imported->rows[qi]);
            if (!one.rows[0].empty()) qv = pool_sparse(one);
        } else {
            ImportanceMatrix m =
                encode_surrogate(tokenize(queries[qi].text), stats, vocab, OnUnknown::Skip);
            if (m.row_count() > 0) qv = pool_sparse(m);
        }
        all_hits[qi] = search(index, qv, opts.k);
    });

    std::unordered_set<uint32_t> needed;
    for (const auto& hits : all_hits) {
        for (const auto& h : hits) needed.insert(h.doc_id);
    }
    auto vectors = doc_vectors_for(index, needed);

    auto external = [&](uint32_t doc) {
        return index.has_external_ids() ? index.external_id(doc) : std::to_string(doc);
    };

    JsonlWriter out(out_path);
    out.row(artifact_header("hits", config_hash(cfg), cfg.stopword_version));
    std::optional<JsonlWriter> runs;
    if (!opts.runs_out.empty()) {
        runs.emplace(opts.runs_out);
        runs->row(artifact_header("runs", config_hash(cfg), cfg.stopword_version));
    }

    for (size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& hits = all_hits[qi];
        Json row{{"query_id", queries[qi].id}};
        Json hits_json = Json::array();

        std::vector<size_t> emit_order(hits.size());
        for (size_t i = 0; i < hits.size(); ++i) emit_order[i] = i;
        Json dropped_json = Json::array();
        if (opts.rerank && !hits.empty()) {
            std::vector<SparseVector> hv;
            hv.reserve(hits.size());
            for (const auto& h : hits) hv.push_back(vectors.at(h.doc_id));
            RerankedHits rr = rerank_hits(hv, cfg);
            emit_order = rr.kept;
            for (const auto& [idx, reason] : rr.dropped) {
                dropped_json.push_back(Json{{"doc_id", external(hits[idx].doc_id)},
                                            {"reason", drop_reason_name(reason)}});
            }
            row["mu"] = rr.mu;
        }

        std::vector<std::string> ranked_ids;
        for (size_t pos = 0; pos < emit_order.size(); ++pos) {
            const auto& h = hits[emit_order[pos]];
            Json hj{{"doc_id", external(h.doc_id)},
                    {"score", h.score},
                    {"rank", static_cast<int>(pos) + 1}};
            if (opts.emit_vectors) hj["vector"] = sparse_to_json(vectors.at(h.doc_id));
            hits_json.push_back(std::move(hj));
            ranked_ids.push_back(external(h.doc_id));
        }
        row["hits"] = std::move(hits_json);
        row["dropped"] = std::move(dropped_json);
        out.row(row);
        if (runs) runs->row(Json{{"query_id", queries[qi].id}, {"ranked_ids", ranked_ids}});
    }
}

// Standalone pass over an emitted hit stream; requires the rows to carry
// vectors.
inline void cmd_rerank(const PipelineConfig& cfg, const std::string& in_path,
                       const std::string& out_path, bool force) {
    cfg.validate();
    JsonlWriter out(out_path);
    out.row(artifact_header("hits", config_hash(cfg), cfg.stopword_version));
    bool checked = false;
    read_jsonl(in_path, [&](const Json& j, size_t line_no) {
        std::string where = in_path + ":" + std::to_string(line_no);
        if (!checked) {
            check_header(j, config_hash(cfg), where, force);
            checked = true;
            return;
        }
        if (!j.contains("hits")) {
            throw Error(ErrorCode::SchemaError, where + ": row has no hits");
        }
        std::vector<SparseVector> hv;
        for (const auto& h : j.at("hits")) {
            if (!h.contains("vector")) {
                throw Error(ErrorCode::SchemaError,
                            where + ": hit carries no vector; emit with forge retrieve");
            }
            hv.push_back(sparse_from_json(h.at("vector"), where));
        }
        RerankedHits rr = rerank_hits(hv, cfg);
        Json row{{"query_id", j.value("query_id", "")}};
        Json hits_json = Json::array();
        for (size_t pos = 0; pos < rr.kept.size(); ++pos) {
            Json h = j.at("hits")[rr.kept[pos]];
            h["rank"] = static_cast<int>(pos) + 1;
            hits_json.push_back(std::move(h));
        }
        Json dropped_json = j.value("dropped", Json::array());
        for (const auto& [idx, reason] : rr.dropped) {
            dropped_json.push_back(
                Json{{"doc_id", j.at("hits")[idx].value("doc_id", "")},
                     {"reason", drop_reason_name(reason)}});
        }
        if (!hv.empty()) row["mu"] = rr.mu;
        row["hits"] = std::move(hits_json);
        row["dropped"] = std::move(dropped_json);
        out.row(row);
    });
}

// ---------------------------------------------------------------------------
// forge align

struct AlignReport {
    size_t items = 0;
    size_t scored_before = 0;
    size_t scored_after = 0;
    double mean_before = 0.0;
    double mean_after = 0.0;
};

inline AlignReport cmd_align(const PipelineConfig& cfg, const StopwordSet& stop,
                             const std::string& in_path, const std::string& refs_path,
                             const std::string& emit_path, const std::string& report_path) {
    std::unordered_map<std::string, std::vector<std::string>> refs_by_id;
    read_jsonl(refs_path, [&](const Json& j, size_t line_no) {
        if (is_header_row(j)) return;
        std::string where = refs_path + ":" + std::to_string(line_no);
        std::string id = require_string(j, "id", where);
        if (!j.contains("refs") || !j.at("refs").is_array()) {
            throw Error(ErrorCode::SchemaError, where + ": missing refs array");
        }
        refs_by_id[id] = j.at("refs").get<std::vector<std::string>>();
    });

    AlignReport report;
    double sum_before = 0.0, sum_after = 0.0;
    JsonlWriter out(emit_path);
    out.row(artifact_header("relabeled", config_hash(cfg), stop.version));
    Json per_item = Json::array();
    read_jsonl(in_path, [&](const Json& j, size_t line_no) {
        if (is_header_row(j)) return;
        std::string where = in_path + ":" + std::to_string(line_no);
        std::string id = require_string(j, "id", where);
        std::string text = require_string(j, "text", where);
        auto it = refs_by_id.find(id);
        if (it == refs_by_id.end()) {
            throw Error(ErrorCode::SchemaError, where + ": no references for id " + id);
        }
        CitedText cited;
        cited.sentences = parse_marks(text, static_cast<int>(it->second.size()));
        for (const auto& r : it->second) cited.refs.push_back(tokenize(r));

        ReferScoreReport before = refer_score(cited, stop);
        CitedText relabeled = cited.refs.empty() ? cited : red_relabel(cited, stop);
        ReferScoreReport after = refer_score(relabeled, stop);

        report.items += 1;
        Json item{{"id", id}, {"n", before.n}};
        if (before.mean) {
            report.scored_before += 1;
            sum_before += *before.mean;
            item["refer_score_before"] = *before.mean;
        }
        if (after.mean) {
            report.scored_after += 1;
            sum_after += *after.mean;
            item["refer_score_after"] = *after.mean;
        }
        per_item.push_back(std::move(item));
        out.row(Json{{"id", id}, {"text", serialize_marked(relabeled.sentences)}});
    });
    if (report.scored_before > 0) {
        report.mean_before = sum_before / static_cast<double>(report.scored_before);
    }
    if (report.scored_after > 0) {
        report.mean_after = sum_after / static_cast<double>(report.scored_after);
    }

    Json rj{{"config_hash", config_hash(cfg)},
            {"stopword_version", stop.version},
            {"items", report.items},
            {"scored_items", report.scored_before},
            {"mean_refer_score_before", report.mean_before},
            {"mean_refer_score_after", report.mean_after},
            {"per_item", per_item}};
    std::ofstream rep(report_path, std::ios::trunc);
    if (!rep) throw Error(ErrorCode::IoError, "cannot write " + report_path);
    rep << rj.dump(2) << '\n';
    return report;
}

// ---------------------------------------------------------------------------
// forge eval

inline Json cmd_eval_retrieval(const std::string& runs_path, const std::string& qrels_path) {
    std::map<std::string, std::vector<std::string>> runs;
    read_jsonl(runs_path, [&](const Json& j, size_t line_no) {
        if (is_header_row(j)) return;
        std::string where = runs_path + ":" + std::to_string(line_no);
        std::string qid = require_string(j, "query_id", where);
        if (!j.contains("ranked_ids") || !j.at("ranked_ids").is_array()) {
            throw Error(ErrorCode::SchemaError, where + ": missing ranked_ids array");
        }
        runs[qid] = j.at("ranked_ids").get<std::vector<std::string>>();
    });
    QrelSet qrels;
    read_jsonl(qrels_path, [&](const Json& j, size_t line_no) {
        if (is_header_row(j)) return;
        std::string where = qrels_path + ":" + std::to_string(line_no);
        std::string qid = require_string(j, "query_id", where);
        if (!j.contains("relevant_ids") || !j.at("relevant_ids").is_array()) {
            throw Error(ErrorCode::SchemaError, where + ": missing relevant_ids array");
        }
        for (const auto& r : j.at("relevant_ids")) {
            qrels.relevant[qid].insert(r.get<std::string>());
        }
    });
    MetricReport mr = retrieval_metrics(runs, qrels);
    Json out{{"query_count", mr.query_count}};
    for (const auto& [name, value] : mr.values) out[name] = value;
    return out;
}

inline Json cmd_eval_generation(const std::string& candidates_path,
                                const std::string& targets_path) {
    auto load_texts = [](const std::string& path) {
        std::map<std::string, std::string> out;
        read_jsonl(path, [&](const Json& j, size_t line_no) {
            if (is_header_row(j)) return;
            std::string where = path + ":" + std::to_string(line_no);
            out[require_string(j, "id", where)] = require_string(j, "text", where);
        });
        return out;
    };
    auto candidates = load_texts(candidates_path);
    auto targets = load_texts(targets_path);

    // Marks are annotation, not content: strip them before scoring.
    auto strip_marks = [](const std::string& text) {
        TokenSeq toks;
        for (const auto& s : parse_marks(text, 1'000'000)) {
            toks.insert(toks.end(), s.tokens.begin(), s.tokens.end());
        }
        return toks;
    };

    double bleu1_sum = 0.0, bleu4_sum = 0.0, p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
    size_t scored = 0, empty_candidates = 0, missing_targets = 0;
    for (const auto& [id, cand_text] : candidates) {
        auto it = targets.find(id);
        if (it == targets.end()) {
            missing_targets += 1;
            continue;
        }
        TokenSeq cand = strip_marks(cand_text);
        TokenSeq target = strip_marks(it->second);
        scored += 1;
        if (cand.empty()) {
            empty_candidates += 1;  // contributes zero to every metric
        } else {
            bleu1_sum += bleu(cand, {target}, 1);
            bleu4_sum += bleu(cand, {target}, 4);
        }
        RougeL rl = rouge_l(cand, target);
        p_sum += rl.precision;
        r_sum += rl.recall;
        f_sum += rl.f1;
    }
    if (scored == 0) {
        throw Error(ErrorCode::EmptyInput, "no candidate/target pairs share an id");
    }
    double n = static_cast<double>(scored);
    return Json{{"pairs", scored},
                {"empty_candidates", empty_candidates},
                {"missing_targets", missing_targets},
                {"bleu_1", bleu1_sum / n},
                {"bleu_4", bleu4_sum / n},
                {"rouge_l_precision", p_sum / n},
                {"rouge_l_recall", r_sum / n},
                {"rouge_l_f1", f_sum / n}};
}

}  // namespace forge
