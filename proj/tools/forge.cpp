// forge: dataset construction, sparse retrieval, topic filtering, citation
// alignment, and evaluation over JSONL artifacts.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "forge/config.hpp"
#include "forge/gradcheck.hpp"
#include "forge/index.hpp"
#include "forge/jsonl.hpp"
#include "forge/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> overrides;
    std::string stopword_file;
};

forge::PipelineConfig make_config(const CommonOpts& common) {
    forge::PipelineConfig cfg;
    if (!common.config_file.empty()) forge::load_config_file(cfg, common.config_file);
    for (const auto& o : common.overrides) forge::apply_config_override(cfg, o);
    return cfg;
}

forge::StopwordSet make_stopwords(const CommonOpts& common, forge::PipelineConfig& cfg) {
    forge::StopwordSet stop = common.stopword_file.empty()
                                  ? forge::stopwords_v1()
                                  : forge::load_stopwords(common.stopword_file);
    cfg.stopword_version = stop.version;
    return stop;
}

struct CorpusRow {
    std::string id;
    std::string text;
};

std::vector<CorpusRow> load_corpus(const std::string& path) {
    std::vector<CorpusRow> rows;
    forge::read_jsonl(path, [&](const forge::Json& j, size_t line_no) {
        if (forge::is_header_row(j)) return;
        std::string where = path + ":" + std::to_string(line_no);
        rows.push_back(CorpusRow{forge::require_string(j, "id", where),
                                 forge::require_string(j, "text", where)});
    });
    return rows;
}

// Parallel map that surfaces the first worker error instead of terminating.
template <typename Fn>
void parallel_checked(size_t n, Fn&& fn) {
    std::vector<std::optional<forge::Error>> errors(n);
    forge::parallel_for(n, [&](size_t i) {
        try {
            fn(i);
        } catch (const forge::Error& e) {
            errors[i] = e;
        }
    });
    for (const auto& e : errors) {
        if (e) throw *e;
    }
}

int run_index_build(const CommonOpts& common, const std::string& in_path,
                    const std::string& out_path, const std::string& mode,
                    const std::string& vocab_path, const std::string& importance_path) {
    forge::PipelineConfig cfg = make_config(common);
    cfg.validate();
    auto rows = load_corpus(in_path);

    forge::Vocabulary vocab;
    bool frozen_vocab = !vocab_path.empty();
    if (frozen_vocab) vocab = forge::Vocabulary::load(vocab_path);

    std::vector<std::pair<uint32_t, forge::SparseVector>> docs(rows.size());
    std::vector<std::string> ids(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) ids[i] = rows[i].id;

    if (!importance_path.empty()) {
        if (mode != "sparse") {
            throw forge::Error(forge::ErrorCode::SchemaError,
                               "--importance requires --mode sparse");
        }
        if (!frozen_vocab) {
            throw forge::Error(forge::ErrorCode::SchemaError,
                               "--importance requires --vocab (frozen |D|)");
        }
        // Row r of the file is document r's token-importance bag.
        auto imported = forge::import_importance(importance_path, vocab.size());
        if (imported.row_count() != rows.size()) {
            throw forge::Error(forge::ErrorCode::SchemaError,
                               "importance rows != corpus rows");
        }
        for (size_t i = 0; i < rows.size(); ++i) {
            forge::ImportanceMatrix one;
            one.vocab_size = imported.vocab_size;
            one.rows.push_back(imported.rows[i]);
            docs[i] = {static_cast<uint32_t>(i),
                       one.rows[0].empty() ? forge::SparseVector{} : forge::pool_sparse(one)};
        }
        auto index = forge::build_index(docs, forge::IndexMode::PooledWeights, std::move(vocab),
                                        std::move(ids));
        forge::save_index(index, out_path);
        std::cout << "indexed " << index.doc_count() << " docs (imported importance)\n";
        return 0;
    }

    std::vector<forge::TokenSeq> tokens(rows.size());
    forge::parallel_for(rows.size(), [&](size_t i) { tokens[i] = forge::tokenize(rows[i].text); });

    if (mode == "tf") {
        if (!frozen_vocab) {
            for (const auto& t : tokens) {
                for (const auto& tok : t) vocab.add(tok);
            }
            vocab.freeze();
        }
        parallel_checked(rows.size(), [&](size_t i) {
            std::map<uint32_t, double> counts;
            for (const auto& tok : tokens[i]) {
                auto id = vocab.lookup(tok);
                if (!id) {
                    throw forge::Error(forge::ErrorCode::UnknownToken,
                                       "'" + tok + "' not in frozen vocabulary (doc " +
                                           rows[i].id + ")");
                }
                counts[*id] += 1.0;
            }
            forge::SparseVector v;
            for (const auto& [id, c] : counts) v.push_back_sorted(id, c);
            docs[i] = {static_cast<uint32_t>(i), std::move(v)};
        });
        auto index = forge::build_index(docs, forge::IndexMode::TermFrequency, std::move(vocab),
                                        std::move(ids));
        forge::save_index(index, out_path);
        std::cout << "indexed " << index.doc_count() << " docs (term frequency)\n";
        return 0;
    }

    if (mode != "sparse") {
        throw forge::Error(forge::ErrorCode::SchemaError, "--mode must be tf or sparse");
    }

    forge::CorpusStats stats;
    stats.doc_count = rows.size();
    uint64_t total_len = 0;
    for (const auto& t : tokens) {
        total_len += t.size();
        std::set<std::string> seen(t.begin(), t.end());
        for (const auto& tok : seen) stats.df[tok] += 1;
    }
    stats.avg_len = rows.empty() ? 0.0
                                 : static_cast<double>(total_len) /
                                       static_cast<double>(rows.size());
    if (!frozen_vocab) {
        for (const auto& t : tokens) {
            for (const auto& tok : t) vocab.add(tok);
        }
        vocab.freeze();
    }
    parallel_checked(rows.size(), [&](size_t i) {
        auto m = forge::encode_surrogate(tokens[i], stats, vocab,
                                         frozen_vocab ? forge::OnUnknown::Error
                                                      : forge::OnUnknown::Skip);
        docs[i] = {static_cast<uint32_t>(i),
                   m.row_count() == 0 ? forge::SparseVector{} : forge::pool_sparse(m)};
    });
    auto index = forge::build_index(docs, forge::IndexMode::PooledWeights, std::move(vocab),
                                    std::move(ids));
    forge::save_index(index, out_path);
    std::cout << "indexed " << index.doc_count() << " docs (surrogate sparse)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse retrieval and dataset pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOpts common;
    app.add_option("--config", common.config_file, "flat key=value config file");
    app.add_option("--set", common.overrides, "config override key=value (repeatable)");
    app.add_option("--stopwords", common.stopword_file, "stopword file, one token per line");

    // datasets
    auto* cmd_data = app.add_subcommand("datasets", "build WebBrain-G/R and warm-up files");
    std::string wiki_path, refs_path, out_dir;
    cmd_data->add_option("--wiki", wiki_path, "wiki records JSONL")->required();
    cmd_data->add_option("--refs", refs_path, "reference docs JSONL")->required();
    cmd_data->add_option("--out-dir", out_dir, "output directory")->required();

    // index
    auto* cmd_index = app.add_subcommand("index", "inverted index operations");
    cmd_index->require_subcommand(1);
    auto* idx_build = cmd_index->add_subcommand("build", "build an index from a corpus");
    std::string idx_in, idx_out, idx_mode = "tf", idx_vocab, idx_importance;
    idx_build->add_option("--in", idx_in, "corpus JSONL {id, text}")->required();
    idx_build->add_option("--out", idx_out, "index output path")->required();
    idx_build->add_option("--mode", idx_mode, "tf | sparse");
    idx_build->add_option("--vocab", idx_vocab, "frozen vocabulary file");
    idx_build->add_option("--importance", idx_importance,
                          "row-per-document importance JSONL (sparse mode)");

    auto* idx_search = cmd_index->add_subcommand("search", "top-k search");
    std::string s_index, s_queries, s_out;
    size_t s_k = 10;
    idx_search->add_option("--index", s_index)->required();
    idx_search->add_option("--queries", s_queries, "queries JSONL {query_id, text}")->required();
    idx_search->add_option("--out", s_out, "hits JSONL output")->required();
    idx_search->add_option("--k", s_k, "results per query");

    auto* idx_stats = cmd_index->add_subcommand("stats", "print index statistics");
    std::string st_index;
    idx_stats->add_option("--index", st_index)->required();

    // retrieve
    auto* cmd_ret = app.add_subcommand("retrieve", "search with optional topic filtering");
    std::string r_index, r_queries, r_out, r_runs, r_qimp;
    size_t r_k = 10;
    bool r_rerank = false;
    cmd_ret->add_option("--index", r_index)->required();
    cmd_ret->add_option("--queries", r_queries)->required();
    cmd_ret->add_option("--out", r_out, "hits JSONL output")->required();
    cmd_ret->add_option("--k", r_k, "results per query");
    cmd_ret->add_flag("--rerank", r_rerank, "apply the consistency/diversity filter");
    cmd_ret->add_option("--runs-out", r_runs, "also write {query_id, ranked_ids} runs");
    cmd_ret->add_option("--query-importance", r_qimp, "row-per-query importance JSONL");

    // rerank
    auto* cmd_rr = app.add_subcommand("rerank", "filter an emitted hit stream");
    std::string rr_in, rr_out;
    bool rr_force = false;
    double rr_mu = -1.0, rr_upper = -1.0, rr_lower = -1.0;
    cmd_rr->add_option("--in", rr_in)->required();
    cmd_rr->add_option("--out", rr_out)->required();
    cmd_rr->add_option("--mu", rr_mu, "absolute signature threshold");
    cmd_rr->add_option("--upper", rr_upper, "irrelevance bound on d_T to the top hit");
    cmd_rr->add_option("--lower", rr_lower, "redundancy bound on d_T to kept hits");
    cmd_rr->add_flag("--force", rr_force, "ignore artifact config hash mismatch");

    // align
    auto* cmd_al = app.add_subcommand("align", "refer scores and mark relabeling");
    std::string al_in, al_refs, al_emit, al_report;
    cmd_al->add_option("--in", al_in, "generated text JSONL {id, text}")->required();
    cmd_al->add_option("--refs", al_refs, "references JSONL {id, refs[]}")->required();
    cmd_al->add_option("--emit", al_emit, "relabeled output JSONL")->required();
    cmd_al->add_option("--report", al_report, "refer score report JSON")->required();

    // eval
    auto* cmd_ev = app.add_subcommand("eval", "retrieval and generation metrics");
    cmd_ev->require_subcommand(1);
    auto* ev_ret = cmd_ev->add_subcommand("retrieval", "R@k, P@1, MRR, MAP");
    std::string er_runs, er_qrels, er_out;
    ev_ret->add_option("--runs", er_runs, "runs JSONL {query_id, ranked_ids[]}")->required();
    ev_ret->add_option("--qrels", er_qrels, "qrels JSONL {query_id, relevant_ids[]}")->required();
    ev_ret->add_option("--out", er_out, "report JSON path (default stdout)");
    auto* ev_gen = cmd_ev->add_subcommand("generation", "BLEU-1/4 and ROUGE-L");
    std::string eg_cand, eg_tgt, eg_out;
    ev_gen->add_option("--candidates", eg_cand, "JSONL {id, text}")->required();
    ev_gen->add_option("--targets", eg_tgt, "JSONL {id, text}")->required();
    ev_gen->add_option("--out", eg_out, "report JSON path (default stdout)");

    // loss-check
    auto* cmd_lc = app.add_subcommand("loss-check", "finite-difference gradient verification");
    size_t lc_instances = 50;
    uint64_t lc_seed = 2024;
    cmd_lc->add_option("--instances", lc_instances, "random instances to run");
    cmd_lc->add_option("--seed", lc_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_data) {
            forge::PipelineConfig cfg = make_config(common);
            forge::StopwordSet stop = make_stopwords(common, cfg);
            std::filesystem::create_directories(out_dir);
            auto paths = forge::DatasetPaths::in_dir(out_dir);
            auto report = forge::cmd_build_datasets(cfg, stop, wiki_path, refs_path, paths);
            std::cout << report.to_json().dump(2) << '\n';
            return 0;
        }
        if (*idx_build) {
            return run_index_build(common, idx_in, idx_out, idx_mode, idx_vocab, idx_importance);
        }
        if (*idx_search) {
            forge::PipelineConfig cfg = make_config(common);
            forge::RetrieveOptions opts;
            opts.k = s_k;
            opts.rerank = false;
            opts.emit_vectors = false;
            forge::cmd_retrieve(cfg, s_index, s_queries, s_out, opts);
            return 0;
        }
        if (*idx_stats) {
            auto index = forge::load_index(st_index);
            forge::Json j{{"mode", index.mode() == forge::IndexMode::TermFrequency
                                       ? "tf"
                                       : "sparse"},
                          {"docs", index.doc_count()},
                          {"terms", index.term_count()},
                          {"postings", index.posting_entry_count()},
                          {"avg_doc_len", index.avg_doc_len()},
                          {"vocab_hash", forge::to_hex(index.vocab().content_hash())}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (*cmd_ret) {
            forge::PipelineConfig cfg = make_config(common);
            forge::RetrieveOptions opts;
            opts.k = r_k;
            opts.rerank = r_rerank;
            opts.runs_out = r_runs;
            opts.query_importance = r_qimp;
            forge::cmd_retrieve(cfg, r_index, r_queries, r_out, opts);
            return 0;
        }
        if (*cmd_rr) {
            forge::PipelineConfig cfg = make_config(common);
            if (rr_mu >= 0.0) cfg.mu = rr_mu;
            if (rr_upper >= 0.0) cfg.upper = rr_upper;
            if (rr_lower >= 0.0) cfg.lower = rr_lower;
            forge::cmd_rerank(cfg, rr_in, rr_out, rr_force);
            return 0;
        }
        if (*cmd_al) {
            forge::PipelineConfig cfg = make_config(common);
            forge::StopwordSet stop = make_stopwords(common, cfg);
            auto report = forge::cmd_align(cfg, stop, al_in, al_refs, al_emit, al_report);
            std::cout << "items=" << report.items
                      << " refer_score_before=" << report.mean_before
                      << " refer_score_after=" << report.mean_after << '\n';
            return 0;
        }
        if (*ev_ret) {
            forge::Json j = forge::cmd_eval_retrieval(er_runs, er_qrels);
            if (er_out.empty()) {
                std::cout << j.dump(2) << '\n';
            } else {
                std::ofstream out(er_out, std::ios::trunc);
                out << j.dump(2) << '\n';
            }
            return 0;
        }
        if (*ev_gen) {
            forge::Json j = forge::cmd_eval_generation(eg_cand, eg_tgt);
            if (eg_out.empty()) {
                std::cout << j.dump(2) << '\n';
            } else {
                std::ofstream out(eg_out, std::ios::trunc);
                out << j.dump(2) << '\n';
            }
            return 0;
        }
        if (*cmd_lc) {
            forge::GradcheckConfig gc;
            gc.instances = lc_instances;
            gc.seed = lc_seed;
            auto report = forge::run_gradcheck(gc);
            std::cout << "instances=" << report.instances_run
                      << " checked=" << report.coords_checked
                      << " skipped=" << report.coords_skipped
                      << " max_rel_err=" << report.max_rel_err
                      << " => " << (report.passed ? "PASS" : "FAIL") << '\n';
            return report.passed ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
