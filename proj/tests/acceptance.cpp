// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria 9 shells out to the forge binary over the
// bundled fixture; everything else drives the library directly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "forge/citation.hpp"
#include "forge/corpus.hpp"
#include "forge/encoder.hpp"
#include "forge/gradcheck.hpp"
#include "forge/index.hpp"
#include "forge/jsonl.hpp"
#include "forge/metrics.hpp"
#include "forge/pipeline.hpp"
#include "forge/rng.hpp"
#include "forge/topic.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

struct Args {
    std::string forge_bin;
    std::string fixture_dir;
    std::string work_dir = "acceptance_work";
};

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            detail << msg;
        }
    }
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// --------------------------------------------------------------- criterion 1

double pst_oracle(const std::set<std::string>& q, const std::set<std::string>& t,
                  const std::set<std::string>& v, const std::set<std::string>& s) {
    std::set<std::string> q_union_t, inter, numer, denom;
    std::set_union(q.begin(), q.end(), t.begin(), t.end(),
                   std::inserter(q_union_t, q_union_t.end()));
    std::set_intersection(q_union_t.begin(), q_union_t.end(), v.begin(), v.end(),
                          std::inserter(inter, inter.end()));
    std::set_difference(inter.begin(), inter.end(), s.begin(), s.end(),
                        std::inserter(numer, numer.end()));
    std::set_difference(t.begin(), t.end(), s.begin(), s.end(),
                        std::inserter(denom, denom.end()));
    return static_cast<double>(numer.size()) / static_cast<double>(denom.size());
}

Outcome criterion_pst(const Args&) {
    Outcome out;
    double start = now_seconds();

    StopwordSet s1;
    s1.version = "t";
    s1.words = {"was", "a"};
    out.require(compute_pst({"alan", "turing"},
                            {"alan", "turing", "was", "a", "mathematician"},
                            {"mathematician", "alan", "turing", "born"}, s1) == 1.0,
                "worked example 1 != 1.0");
    StopwordSet none;
    none.version = "t";
    out.require(compute_pst({"q"}, {"t1"}, {"zz"}, none) == 0.0, "worked example 2 != 0.0");
    out.require(compute_pst({"x"}, {"y"}, {"x", "y"}, none) == 2.0, "worked example 3 != 2.0");

    std::vector<std::string> pool;
    for (char a = 'a'; a <= 'z'; ++a) {
        pool.push_back(std::string(1, a));
        pool.push_back(std::string(1, a) + "x");
    }
    SplitMix64 rng(4242);
    size_t done = 0;
    while (done < 500) {
        auto draw = [&](size_t max_terms) {
            std::set<std::string> set;
            size_t n = rng.next_below(max_terms + 1);
            for (size_t i = 0; i < n; ++i) set.insert(pool[rng.next_below(pool.size())]);
            return set;
        };
        auto q = draw(20), t = draw(20), v = draw(20), s = draw(6);
        std::set<std::string> denom;
        std::set_difference(t.begin(), t.end(), s.begin(), s.end(),
                            std::inserter(denom, denom.end()));
        if (denom.empty()) continue;
        StopwordSet stop;
        stop.version = "t";
        stop.words.insert(s.begin(), s.end());
        double got = compute_pst(q, t, v, stop);
        double want = pst_oracle(q, t, v, s);
        if (got != want) {
            out.require(false, "mismatch vs oracle at instance " + std::to_string(done));
            break;
        }
        ++done;
    }
    double elapsed = now_seconds() - start;
    out.require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + "s >= 1s");
    out.detail << " (500 instances, " << elapsed << "s)";
    return out;
}

// --------------------------------------------------------------- criterion 2

Outcome criterion_pool(const Args&) {
    Outcome out;
    SplitMix64 rng(515);
    for (int trial = 0; trial < 1000 && out.ok; ++trial) {
        size_t vocab = 1 + rng.next_below(12);
        size_t rows = 1 + rng.next_below(5);
        ImportanceMatrix m;
        m.vocab_size = vocab;
        std::vector<std::vector<double>> dense(rows, std::vector<double>(vocab, 0.0));
        bool any_positive = false;
        for (size_t i = 0; i < rows; ++i) {
            std::vector<std::pair<uint32_t, double>> row;
            for (size_t j = 0; j < vocab; ++j) {
                if (rng.next_below(3) == 0) continue;  // implicit zero
                double w = rng.next_gaussian();
                dense[i][j] = w;
                row.emplace_back(static_cast<uint32_t>(j), w);
                any_positive = any_positive || w > 0.0;
            }
            m.rows.push_back(std::move(row));
        }
        SparseVector pooled = pool_sparse(m);
        if (!any_positive) {
            out.require(pooled.empty(), "pooled vector not empty with all entries <= 0");
            continue;
        }
        // Direct formula evaluation.
        for (size_t j = 0; j < vocab; ++j) {
            double expect = 0.0;
            for (size_t i = 0; i < rows; ++i) {
                expect = std::max(expect, std::log1p(std::max(0.0, dense[i][j])));
            }
            double got = 0.0;
            for (const auto& [id, w] : pooled.entries()) {
                if (id == j) got = w;
            }
            if (std::fabs(got - expect) > 1e-12) {
                out.require(false, "coordinate mismatch at trial " + std::to_string(trial));
                break;
            }
        }
    }
    out.detail << " (1000 matrices)";
    return out;
}

// --------------------------------------------------------------- criterion 3

Outcome criterion_loss(const Args&) {
    Outcome out;
    double p = rank_probability(1.0, {0.0});
    out.require(std::fabs(p - 0.731059) <= 1e-6,
                "rank_probability(1,[0]) = " + std::to_string(p));
    double f = flops_reg({SparseVector::from_entries({{0, 1.0}}),
                          SparseVector::from_entries({{1, 1.0}})});
    out.require(f == 0.5, "flops example != 0.5 exactly");

    LossItem item;
    item.query = SparseVector::from_entries({{0, 1.2}, {3, 0.4}});
    item.positive = SparseVector::from_entries({{0, 0.9}});
    item.negatives = {SparseVector::from_entries({{3, 0.7}}),
                      SparseVector::from_entries({{5, 1.0}})};
    auto lb = loss_breakdown({item});
    out.require(lb.lambda_q == 5e-4 && lb.lambda_d == 5e-3, "default lambdas wrong");
    double manual = lb.rank + 5e-4 * lb.l1_query + 5e-3 * lb.flops_doc;
    out.require(std::fabs(lb.total - manual) <= 1e-15, "total != rank + lq*L1 + ld*FLOPS");
    return out;
}

// --------------------------------------------------------------- criterion 4

Outcome criterion_grad(const Args&) {
    Outcome out;
    double start = now_seconds();
    GradcheckConfig cfg;  // 50 instances, dim 4, |D| 8, batch 2
    auto report = run_gradcheck(cfg);
    double elapsed = now_seconds() - start;
    out.require(report.instances_run == 50, "expected 50 instances");
    out.require(report.coords_checked > 0, "no coordinates checked");
    out.require(report.max_rel_err < 1e-4,
                "max rel err " + std::to_string(report.max_rel_err));
    out.require(elapsed < 30.0, "runtime " + std::to_string(elapsed) + "s >= 30s");
    out.detail << " (max_rel_err " << report.max_rel_err << ", checked "
               << report.coords_checked << ", skipped " << report.coords_skipped << ", "
               << elapsed << "s)";
    return out;
}

// --------------------------------------------------------------- criterion 5

Outcome criterion_index(const Args&) {
    Outcome out;
    double start = now_seconds();
    const size_t n_docs = 10000;
    const size_t vocab = 2000;

    SplitMix64 rng(88);
    std::vector<SparseVector> vectors(n_docs);
    std::vector<std::pair<uint32_t, SparseVector>> docs(n_docs);
    for (size_t d = 0; d < n_docs; ++d) {
        std::set<uint32_t> ids;
        size_t terms = 3 + rng.next_below(28);
        for (size_t t = 0; t < terms; ++t) {
            ids.insert(static_cast<uint32_t>(rng.next_below(vocab)));
        }
        std::vector<SparseVector::Entry> entries;
        for (uint32_t id : ids) {
            entries.emplace_back(id, static_cast<double>(1 + rng.next_below(4)));
        }
        vectors[d] = SparseVector::from_entries(std::move(entries));
        docs[d] = {static_cast<uint32_t>(d), vectors[d]};
    }
    Vocabulary vv;
    for (size_t t = 0; t < vocab; ++t) vv.add("t" + std::to_string(t));
    vv.freeze();

    auto index1 = build_index(docs, IndexMode::PooledWeights, vv, {}, 1);
    auto index4 = build_index(docs, IndexMode::PooledWeights, vv, {}, 4);

    for (int qi = 0; qi < 100 && out.ok; ++qi) {
        std::set<uint32_t> qids;
        size_t qterms = 1 + rng.next_below(5);
        for (size_t t = 0; t < qterms; ++t) {
            qids.insert(static_cast<uint32_t>(rng.next_below(vocab)));
        }
        std::vector<SparseVector::Entry> qe;
        for (uint32_t id : qids) qe.emplace_back(id, static_cast<double>(1 + rng.next_below(3)));
        SparseVector q = SparseVector::from_entries(std::move(qe));

        auto got = search(index1, q, 20);
        std::vector<SearchHit> want;
        for (size_t d = 0; d < n_docs; ++d) {
            double s = dot_score(q, vectors[d]);
            if (s != 0.0) want.push_back(SearchHit{static_cast<uint32_t>(d), s, 0});
        }
        std::sort(want.begin(), want.end(), [](const SearchHit& a, const SearchHit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id < b.doc_id;
        });
        if (want.size() > 20) want.resize(20);
        if (got.size() != want.size()) {
            out.require(false, "hit count mismatch on query " + std::to_string(qi));
            break;
        }
        for (size_t i = 0; i < got.size(); ++i) {
            if (got[i].doc_id != want[i].doc_id || got[i].score != want[i].score) {
                out.require(false, "ordering mismatch on query " + std::to_string(qi));
                break;
            }
        }
    }

    fs::create_directories("acceptance_idx");
    save_index(index1, "acceptance_idx/one.bin");
    save_index(index4, "acceptance_idx/four.bin");
    out.require(read_file("acceptance_idx/one.bin") == read_file("acceptance_idx/four.bin"),
                "1-thread and 4-thread builds serialize differently");
    fs::remove_all("acceptance_idx");

    double elapsed = now_seconds() - start;
    out.require(elapsed < 60.0, "runtime " + std::to_string(elapsed) + "s >= 60s");
    out.detail << " (10000 docs, 100 queries, " << elapsed << "s)";
    return out;
}

// --------------------------------------------------------------- criterion 6

Outcome criterion_bm25(const Args&) {
    Outcome out;
    Vocabulary vocab;
    std::vector<TokenSeq> texts = {
        {"the", "cat", "sat", "on", "the", "mat"},
        {"the", "dog", "ran"},
        {"cat", "cat", "cat", "and", "dog"},
    };
    std::vector<std::pair<uint32_t, SparseVector>> docs;
    for (size_t d = 0; d < texts.size(); ++d) {
        std::map<uint32_t, double> counts;
        for (const auto& t : texts[d]) counts[vocab.add(t)] += 1.0;
        SparseVector v;
        for (const auto& [id, c] : counts) v.push_back_sorted(id, c);
        docs.emplace_back(static_cast<uint32_t>(d), std::move(v));
    }
    vocab.freeze();
    auto index = build_index(docs, IndexMode::TermFrequency, std::move(vocab));

    struct Expect {
        TokenSeq query;
        std::vector<std::pair<uint32_t, double>> hits;  // (doc, score) in rank order
    };
    // Frozen from an independent evaluation of the k1=0.9, b=0.4 formula.
    std::vector<Expect> cases = {
        {{"cat"}, {{2, 0.35917307911792024}, {0, 0.2346665766562161}}},
        {{"dog"}, {{1, 0.2653246294129153}, {2, 0.2440671665222663}}},
        {{"cat", "dog"},
         {{2, 0.6032402456401865}, {1, 0.2653246294129153}, {0, 0.2346665766562161}}},
        {{"the"}, {{0, 0.31303762176214556}, {1, 0.2653246294129153}}},
        {{"mat", "ran"}, {{1, 0.553693933151781}, {0, 0.48971503360071933}}},
    };
    for (const auto& c : cases) {
        auto hits = search_bm25(index, c.query, 3);
        if (hits.size() != c.hits.size()) {
            out.require(false, "hit count mismatch for a hand query");
            break;
        }
        for (size_t i = 0; i < hits.size(); ++i) {
            out.require(hits[i].doc_id == c.hits[i].first, "doc order mismatch");
            out.require(std::fabs(hits[i].score - c.hits[i].second) <= 1e-9,
                        "score off by more than 1e-9");
        }
    }
    out.detail << " (5 hand queries)";
    return out;
}

// --------------------------------------------------------------- criterion 7

std::vector<size_t> brute_filter(const std::vector<BinarySignature>& hits,
                                 const FilterConfig& cfg) {
    if (hits.empty()) return {};
    std::vector<size_t> pass1 = {0};
    for (size_t i = 1; i < hits.size(); ++i) {
        if (!(topic_distance(hits[0], hits[i]) > cfg.upper)) pass1.push_back(i);
    }
    std::vector<size_t> kept;
    for (size_t i : pass1) {
        bool drop = false;
        for (size_t j : kept) {
            if (topic_distance(hits[i], hits[j]) < cfg.lower) drop = true;
        }
        if (i == 0 || !drop) kept.push_back(i);
    }
    return kept;
}

Outcome criterion_topic(const Args&) {
    Outcome out;
    auto sig = [](std::set<uint32_t> ids) {
        BinarySignature s;
        s.active = std::move(ids);
        s.mu = 0.5;
        return s;
    };
    out.require(topic_distance(sig({1, 2}), sig({1, 2})) == 0.0, "identical != 0");
    out.require(topic_distance(sig({0}), sig({1, 2})) == 1.0, "disjoint != 1");
    out.require(topic_distance(sig({0, 1}), sig({1, 2})) == 0.5, "half overlap != 0.5");

    SplitMix64 rng(9090);
    FilterConfig cfg;
    for (int trial = 0; trial < 1000 && out.ok; ++trial) {
        std::vector<BinarySignature> hits;
        size_t n = 1 + rng.next_below(12);
        for (size_t i = 0; i < n; ++i) {
            std::set<uint32_t> active;
            for (uint32_t id = 0; id < 10; ++id) {
                if (rng.next_below(3) == 0) active.insert(id);
            }
            hits.push_back(sig(std::move(active)));
        }
        auto got = consistency_filter(hits, cfg);
        auto want = brute_filter(hits, cfg);
        if (got.kept != want) {
            out.require(false, "filter mismatch at trial " + std::to_string(trial));
            break;
        }
        out.require(!got.kept.empty() && got.kept[0] == 0, "top hit not kept");
        for (size_t a = 1; a < got.kept.size() && out.ok; ++a) {
            out.require(topic_distance(hits[0], hits[got.kept[a]]) <= cfg.upper,
                        "kept doc violates the upper bound");
            for (size_t b = 0; b < a; ++b) {
                out.require(topic_distance(hits[got.kept[a]], hits[got.kept[b]]) >= cfg.lower,
                            "kept pair violates the lower bound");
            }
        }
    }
    out.detail << " (1000 ranked lists)";
    return out;
}

// --------------------------------------------------------------- criterion 8

Outcome criterion_red(const Args&) {
    Outcome out;
    auto stop = stopwords_v1();
    static const std::vector<std::string> words = {"amber",  "fox",   "canal", "bridge",
                                                   "tower",  "river", "stone", "mill",
                                                   "market", "cliff"};
    SplitMix64 rng(2468);
    size_t compared = 0;
    for (int trial = 0; trial < 1000 && out.ok; ++trial) {
        CitedText text;
        size_t n_refs = 1 + rng.next_below(5);
        for (size_t r = 0; r < n_refs; ++r) {
            TokenSeq ref;
            size_t len = 1 + rng.next_below(6);
            for (size_t i = 0; i < len; ++i) ref.push_back(words[rng.next_below(words.size())]);
            text.refs.push_back(std::move(ref));
        }
        size_t n_sent = 1 + rng.next_below(6);
        for (size_t s = 0; s < n_sent; ++s) {
            std::string sentence;
            size_t len = 1 + rng.next_below(6);
            for (size_t i = 0; i < len; ++i) {
                if (i) sentence += " ";
                sentence += words[rng.next_below(words.size())];
            }
            sentence += ".";
            text.sentences.push_back(
                make_marked(sentence, static_cast<int>(rng.next_below(n_refs + 1))));
        }

        CitedText once = red_relabel(text, stop);
        CitedText twice = red_relabel(once, stop);
        for (size_t i = 0; i < once.sentences.size(); ++i) {
            out.require(once.sentences[i].mark == twice.sentences[i].mark,
                        "relabel not idempotent at trial " + std::to_string(trial));
        }
        auto before = refer_score(text, stop);
        auto after = refer_score(once, stop);
        if (before.mean && after.mean) {
            out.require(*after.mean >= *before.mean,
                        "refer score dropped at trial " + std::to_string(trial));
            ++compared;
        }
    }
    out.require(compared >= 500, "too few scored instances: " + std::to_string(compared));
    out.detail << " (1000 instances, " << compared << " scored)";
    return out;
}

// --------------------------------------------------------------- criterion 9

Outcome criterion_datasets(const Args& args) {
    Outcome out;
    fs::path work(args.work_dir);
    fs::remove_all(work);
    fs::create_directories(work / "run1");
    fs::create_directories(work / "run2");

    std::string wiki = args.fixture_dir + "/wiki.jsonl";
    std::string refs = args.fixture_dir + "/refs.jsonl";
    out.require(fs::exists(wiki) && fs::exists(refs), "fixture files missing");
    if (!out.ok) return out;

    auto run = [&](const std::string& dir) {
        std::string cmd = args.forge_bin + " datasets --wiki " + wiki + " --refs " + refs +
                          " --out-dir " + dir + " > " + dir + "/stdout.json";
        return std::system(cmd.c_str());
    };
    out.require(run((work / "run1").string()) == 0, "first forge run failed");
    out.require(run((work / "run2").string()) == 0, "second forge run failed");
    if (!out.ok) return out;

    for (const char* name : {"webbrain-g.jsonl", "webbrain-r.jsonl", "warmup.jsonl",
                             "build-report.json"}) {
        out.require(read_file((work / "run1" / name).string()) ==
                        read_file((work / "run2" / name).string()),
                    std::string("outputs differ: ") + name);
    }

    // Schema checks on the first run's outputs.
    size_t g_rows = 0, r_rows = 0, band_rows = 0, fallback_rows = 0;
    try {
        read_jsonl((work / "run1" / "webbrain-g.jsonl").string(), [&](const Json& j, size_t) {
            if (is_header_row(j)) {
                out.require(j.contains("config_hash") && j.contains("stopword_version"),
                            "G header missing config hash or stopword version");
                return;
            }
            ++g_rows;
            size_t n_refs = j.at("refs").size();
            out.require(n_refs <= 5, "G row with more than 5 refs");
            auto sentences = parse_marks(j.at("target").get<std::string>(), 5);
            out.require(!sentences.empty(), "G row with empty target");
            for (const auto& s : sentences) {
                out.require(s.mark >= 0 && s.mark <= static_cast<int>(n_refs),
                            "target mark outside [0, refs]");
            }
            out.require(j.at("fid_inputs").size() == n_refs, "fid input count != refs");
            for (size_t i = 0; i < n_refs; ++i) {
                auto parsed = parse_fid_input(j.at("fid_inputs")[i].get<std::string>());
                std::string rebuilt = "[query] " + parsed.query + " [ref_" +
                                      std::to_string(parsed.ref_index) + "] " + parsed.ref_text;
                out.require(rebuilt == j.at("fid_inputs")[i].get<std::string>(),
                            "fid input does not round-trip");
                out.require(parsed.ref_index == static_cast<int>(i) + 1,
                            "fid input index out of order");
                out.require(parsed.ref_text == j.at("refs")[i].at("text").get<std::string>(),
                            "fid text != ref text");
            }
        });
        read_jsonl((work / "run1" / "webbrain-r.jsonl").string(), [&](const Json& j, size_t) {
            if (is_header_row(j)) return;
            ++r_rows;
            auto negs = j.at("negative_ids").get<std::vector<std::string>>();
            auto ranks = j.at("negative_ranks").get<std::vector<int>>();
            out.require(negs.size() == 4, "R row without exactly 4 negatives");
            std::set<std::string> distinct(negs.begin(), negs.end());
            out.require(distinct.size() == 4, "R row with duplicate negatives");
            std::string positive = j.at("positive_id").get<std::string>();
            bool in_band = true;
            for (int r : ranks) {
                if (r < 30 || r > 50) in_band = false;
                out.require(r >= 1, "rank below 1");
            }
            for (const auto& n : negs) out.require(n != positive, "positive among negatives");
            if (in_band) {
                ++band_rows;
            } else {
                ++fallback_rows;
            }
        });
    } catch (const std::exception& e) {
        out.require(false, std::string("schema pass failed: ") + e.what());
    }

    out.require(g_rows > 0, "no G rows");
    out.require(r_rows > 0, "no R rows");
    out.require(band_rows > 0, "no rows sampled from the 30-50 band");
    out.detail << " (" << g_rows << " G rows, " << r_rows << " R rows, " << band_rows
               << " in-band, " << fallback_rows << " fallback)";
    return out;
}

// -------------------------------------------------------------- criterion 10

bool is_subsequence(const TokenSeq& needle, const TokenSeq& hay) {
    size_t i = 0;
    for (const auto& t : hay) {
        if (i < needle.size() && needle[i] == t) ++i;
    }
    return i == needle.size();
}

size_t lcs_brute(const TokenSeq& a, const TokenSeq& b) {
    const TokenSeq& s = a.size() <= b.size() ? a : b;
    const TokenSeq& t = a.size() <= b.size() ? b : a;
    size_t best = 0;
    for (uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
        TokenSeq sub;
        for (size_t i = 0; i < s.size(); ++i) {
            if (mask & (1u << i)) sub.push_back(s[i]);
        }
        if (sub.size() > best && is_subsequence(sub, t)) best = sub.size();
    }
    return best;
}

Outcome criterion_metrics(const Args&) {
    Outcome out;

    QrelSet qr;
    qr.relevant["q"] = {"d1"};
    auto r3 = retrieval_metrics({{"q", {"x", "y", "d1", "z"}}}, qr);
    out.require(r3.values.at("MRR") == 1.0 / 3.0, "MRR example != 1/3");
    out.require(r3.values.at("R@1") == 0.0 && r3.values.at("R@5") == 1.0, "R@k example wrong");

    QrelSet qr2;
    qr2.relevant["q"] = {"d1", "d2"};
    auto map_case = retrieval_metrics({{"q", {"d1", "x", "y", "d2"}}}, qr2);
    out.require(map_case.values.at("MAP") == 0.75, "MAP example != 0.75");

    auto top = retrieval_metrics({{"q", {"d1"}}}, qr);
    out.require(top.values.at("R@1") == 1.0 && top.values.at("MRR") == 1.0 &&
                    top.values.at("MAP") == 1.0,
                "rank-1 example wrong");

    // ROUGE-L vs brute force: exhaustive over length <= 4 pairs, random to 10.
    const std::vector<std::string> alphabet = {"a", "b", "c"};
    auto nth_seq = [&](size_t len, size_t code) {
        TokenSeq s(len);
        for (size_t i = 0; i < len; ++i) {
            s[i] = alphabet[code % 3];
            code /= 3;
        }
        return s;
    };
    for (size_t la = 0; la <= 4 && out.ok; ++la) {
        size_t ca_max = 1;
        for (size_t i = 0; i < la; ++i) ca_max *= 3;
        for (size_t ca = 0; ca < ca_max && out.ok; ++ca) {
            for (size_t lb = 0; lb <= 4 && out.ok; ++lb) {
                size_t cb_max = 1;
                for (size_t i = 0; i < lb; ++i) cb_max *= 3;
                for (size_t cb = 0; cb < cb_max; ++cb) {
                    TokenSeq a = nth_seq(la, ca), b = nth_seq(lb, cb);
                    if (lcs_length(a, b) != lcs_brute(a, b)) {
                        out.require(false, "LCS mismatch on exhaustive pair");
                        break;
                    }
                }
            }
        }
    }
    SplitMix64 rng(303030);
    for (int trial = 0; trial < 2000 && out.ok; ++trial) {
        TokenSeq a(rng.next_below(11)), b(rng.next_below(11));
        for (auto& t : a) t = alphabet[rng.next_below(3)];
        for (auto& t : b) t = alphabet[rng.next_below(3)];
        if (lcs_length(a, b) != lcs_brute(a, b)) {
            out.require(false, "LCS mismatch on random pair");
        }
    }

    TokenSeq same = {"x", "y", "z", "w"};
    out.require(bleu(same, {same}, 1) == 1.0, "BLEU-1 identical != 1.0");
    out.require(bleu(same, {same}, 4) == 1.0, "BLEU-4 identical != 1.0");
    auto rl = rouge_l(same, same);
    out.require(rl.precision == 1.0 && rl.recall == 1.0 && rl.f1 == 1.0,
                "ROUGE-L identical != 1.0");
    out.detail << " (exhaustive <=4 plus 2000 random pairs)";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    Args args;
    for (int i = 1; i + 1 < argc; i += 2) {
        std::string flag = argv[i];
        if (flag == "--forge") args.forge_bin = argv[i + 1];
        if (flag == "--fixture") args.fixture_dir = argv[i + 1];
        if (flag == "--work") args.work_dir = argv[i + 1];
    }

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome(const Args&)> fn;
    };
    std::vector<Criterion> criteria = {
        {1, "P_ST oracle equivalence", criterion_pst},
        {2, "sparse pooling formula", criterion_pool},
        {3, "loss suite constants", criterion_loss},
        {4, "encoder gradient vs finite differences", criterion_grad},
        {5, "index exactness and build determinism", criterion_index},
        {6, "BM25 hand oracle", criterion_bm25},
        {7, "topic filter equivalence", criterion_topic},
        {8, "RED monotonicity and idempotence", criterion_red},
        {9, "dataset build reproducibility and schema", criterion_datasets},
        {10, "metrics oracles", criterion_metrics},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome out;
        try {
            out = c.fn(args);
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail << "exception: " << e.what();
        }
        std::cout << (out.ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name
                  << out.detail.str() << "\n";
        if (!out.ok) ++failures;
    }
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << "\n";
    return failures == 0 ? 0 : 1;
}
