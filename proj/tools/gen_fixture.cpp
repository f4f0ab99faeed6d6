// Generates the bundled sample corpus (data/fixture): 500 synthetic wiki
// records plus their reference documents, with deliberate dirty cases
// (templates, boilerplate, markup, short and non-English references) so the
// whole cleaning pipeline gets exercised. Fully deterministic for a seed.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "forge/rng.hpp"

using forge::SplitMix64;
using Json = nlohmann::json;

namespace {

const std::vector<std::string> kNouns = {
    "harbor",      "lantern",   "orchard",  "canal",     "bridge",     "castle",
    "museum",      "library",   "garden",   "tower",     "valley",     "river",
    "mountain",    "forest",    "village",  "market",    "temple",     "station",
    "railway",     "abbey",     "chapel",   "quarry",    "mill",       "foundry",
    "granary",     "lighthouse", "pier",    "jetty",     "estuary",    "delta",
    "glacier",     "plateau",   "meadow",   "prairie",   "grove",      "thicket",
    "marsh",       "lagoon",    "reef",     "atoll",     "dune",       "cliff",
    "cavern",      "grotto",    "spring",   "geyser",    "basin",      "summit",
    "ridge",       "trail",     "road",     "highway",   "avenue",     "plaza",
    "fountain",    "statue",    "monument", "archive",   "gallery",    "theater",
    "opera",       "stadium",   "arena",    "campus",    "academy",    "institute",
    "college",     "hospital",  "clinic",   "pharmacy",  "bakery",     "brewery",
    "winery",      "vineyard",  "farm",     "ranch",     "stable",     "barn",
    "silo",        "windmill",  "turbine",  "reactor",   "refinery",   "factory",
    "workshop",    "studio",    "press",    "mint",      "treasury",   "vault",
    "fortress",    "citadel",   "rampart",  "moat",      "drawbridge", "palace",
    "mansion",     "villa",     "cottage",  "cabin",     "lodge",      "inn",
    "tavern",      "hostel",    "hotel",    "resort",    "carnival",   "festival",
    "parade",      "regatta",   "derby",    "tournament", "league",    "guild",
    "union",       "society",   "council",  "senate",    "parliament", "embassy",
    "consulate",   "ministry",  "bureau",   "agency",    "commission", "tribunal",
    "courthouse",  "barracks",  "armory",   "arsenal",   "shipyard",   "dockyard",
    "wharf",       "warehouse", "depot",    "terminal",  "airport",    "observatory",
    "planetarium", "aquarium",  "sanctuary", "preserve", "pavilion",   "rotunda",
    "colonnade",   "cloister",  "crypt",    "belfry",    "spire",      "portico",
};

const std::vector<std::string> kAdjectives = {
    "old",      "new",     "ancient",  "northern", "southern", "eastern",
    "western",  "coastal", "rural",    "urban",    "historic", "modern",
    "famous",   "quiet",   "busy",     "stone",    "wooden",   "brick",
    "granite",  "marble",  "red",      "white",    "slate",    "copper",
    "restored", "ruined",  "fortified", "royal",   "civic",    "maritime",
};

const std::vector<std::string> kVerbs = {
    "built",    "opened",   "closed",   "served",    "moved",     "started",
    "founded",  "held",     "created",  "formed",    "joined",    "reached",
    "crossed",  "covered",  "carried",  "raised",    "placed",    "named",
    "visited",  "studied",  "designed", "produced",  "launched",  "earned",
    "hosted",   "housed",   "featured", "displayed", "restored",  "expanded",
    "replaced", "managed",  "operated", "rebuilt",   "dedicated", "chartered",
};

const std::vector<std::string> kGlue = {
    "history",  "region",   "century", "district",  "capital",  "culture",
    "economy",  "heritage", "climate", "industry",  "tradition", "community",
};

struct WordPicker {
    SplitMix64& rng;

    const std::string& from(const std::vector<std::string>& bank) {
        return bank[rng.next_below(bank.size())];
    }
    std::string year() { return std::to_string(1820 + rng.next_below(180)); }
};

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 0x20);
    return s;
}

// A sentence whose content terms are returned so the matching reference can
// quote them.
struct Claim {
    std::string sentence;
    std::vector<std::string> content;
};

Claim make_claim(WordPicker& w, const std::string& entity) {
    Claim c;
    std::string adj = w.from(kAdjectives);
    std::string noun = w.rng.next_below(2) ? entity : w.from(kNouns);
    std::string verb = w.from(kVerbs);
    std::string tail = w.from(kNouns);
    std::string yr = w.year();
    switch (w.rng.next_below(3)) {
        case 0:
            c.sentence = "The " + adj + " " + noun + " was " + verb + " in " + yr + ".";
            c.content = {adj, noun, verb, yr};
            break;
        case 1:
            c.sentence = "The " + noun + " " + verb + " the " + adj + " " + tail + " in " + yr + ".";
            c.content = {noun, verb, adj, tail, yr};
            break;
        default:
            c.sentence = "Its " + w.from(kGlue) + " centers on the " + adj + " " + noun +
                         " and the " + tail + ".";
            c.content = {adj, noun, tail, "centers"};
            break;
    }
    return c;
}

std::string filler_sentence(WordPicker& w) {
    return "The " + w.from(kAdjectives) + " " + w.from(kNouns) + " near the " +
           w.from(kNouns) + " " + w.from(kVerbs) + " the " + w.from(kGlue) + " of the " +
           w.from(kNouns) + ".";
}

// Reference text supporting a claim: one quoting sentence plus topical
// noise. References for an entity tend to repeat its name, so strong ones
// always mention it and weak ones sometimes do.
std::string make_reference_text(WordPicker& w, const Claim& claim, bool strong,
                                const std::string& entity_name) {
    std::vector<std::string> sentences;
    size_t extra = 3 + w.rng.next_below(4);
    for (size_t i = 0; i < extra; ++i) sentences.push_back(filler_sentence(w));

    bool mention = strong || w.rng.next_below(3) == 0;
    if (mention) {
        sentences.insert(sentences.begin(),
                         "Commentary on the " + entity_name + " appears in several chronicles.");
    }

    std::string quote;
    if (strong) {
        quote = "Records confirm that the";
        for (const auto& t : claim.content) quote += " " + t;
        quote += " remains well documented in the " + w.from(kGlue) + ".";
    } else {
        // Weak support: quotes a single content term.
        quote = "A survey mentions the " + claim.content[w.rng.next_below(claim.content.size())] +
                " among other sites in the " + w.from(kGlue) + ".";
    }
    size_t pos = 1 + w.rng.next_below(sentences.size());
    sentences.insert(sentences.begin() + static_cast<long>(pos), quote);

    std::string out;
    for (size_t i = 0; i < sentences.size(); ++i) {
        if (i) out += " ";
        out += sentences[i];
    }
    return out;
}

std::string non_english_text(WordPicker& w) {
    static const std::vector<std::string> words = {
        "гавань", "маяк",  "мост",   "замок", "музей", "сад",
        "башня",  "долина", "река",  "гора",  "лес",   "рынок",
    };
    std::string out = "Обзор местности:";
    for (size_t i = 0; i < 24; ++i) out += " " + words[w.rng.next_below(words.size())];
    out += ". The " + w.from(kNouns) + " appears briefly.";
    return out;
}

std::string markup_heavy_text(WordPicker& w, const Claim& claim) {
    std::string out = "<div>\n<span></span>\n";
    out += "name | value | unit | source\n";
    out += "a | b | c | d\n";
    out += "Records confirm that the";
    for (const auto& t : claim.content) out += " " + t;
    out += " remains well documented. See https://example.org/archive?id=" +
           std::to_string(w.rng.next()) + " for scans.\n";
    for (int i = 0; i < 4; ++i) out += filler_sentence(w) + " ";
    out += "\n</div>";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::string out_dir = argc > 1 ? argv[1] : "data/fixture";
    const uint64_t seed = 20240901;
    const size_t record_count = 500;

    std::ofstream wiki(out_dir + "/wiki.jsonl", std::ios::trunc);
    std::ofstream refs(out_dir + "/refs.jsonl", std::ios::trunc);
    if (!wiki || !refs) {
        std::cerr << "cannot write to " << out_dir << "\n";
        return 1;
    }

    size_t ref_counter = 0;
    for (size_t rec = 0; rec < record_count; ++rec) {
        SplitMix64 rng = forge::substream(seed, "record-" + std::to_string(rec));
        WordPicker w{rng};

        std::string entity = w.from(kNouns);
        std::string adjective = w.from(kAdjectives);
        std::string title_noun = capitalize(entity);
        std::string entity_name = adjective + " " + entity;
        std::string title = capitalize(adjective) + " " + title_noun;
        if (rng.next_below(100) < 40) title += " " + w.from(kGlue);

        // Citation count: mostly 1-4, a tail up to 7 to exercise truncation.
        static const int cit_weights[] = {5, 20, 25, 25, 12, 6, 4, 3};
        int n_cit = 0;
        {
            int total = 0;
            for (int v : cit_weights) total += v;
            int roll = static_cast<int>(rng.next_below(static_cast<uint64_t>(total)));
            for (int c = 0; c < 8; ++c) {
                roll -= cit_weights[c];
                if (roll < 0) {
                    n_cit = c;
                    break;
                }
            }
        }

        std::vector<Claim> claims;
        for (int c = 0; c < n_cit; ++c) claims.push_back(make_claim(w, entity));

        // Target text: lead sentence, cited claims, filler; ~30% of fillers
        // carry an explicit [0].
        std::vector<std::string> parts;
        parts.push_back("The " + title + " is a " + w.from(kAdjectives) + " " +
                        w.from(kNouns) + " in the " + w.from(kGlue) + ".");
        for (int c = 0; c < n_cit; ++c) {
            parts.push_back(claims[static_cast<size_t>(c)].sentence + "[" + std::to_string(c + 1) +
                            "]");
            if (rng.next_below(100) < 35) parts.push_back(filler_sentence(w));
        }
        if (rng.next_below(100) < 30) parts.push_back(filler_sentence(w) + "[0]");

        std::string first_section;
        for (size_t i = 0; i < parts.size(); ++i) {
            if (i) first_section += " ";
            first_section += parts[i];
        }
        // Dirty-input cases for the wiki cleaner.
        if (rng.next_below(100) < 20) {
            first_section = "{{infobox " + w.from(kNouns) + " |year=" + w.year() + "}} " +
                            first_section;
        }
        if (rng.next_below(100) < 10) {
            first_section += " This article is a stub. You can help Wikipedia by expanding it.";
        }
        if (rng.next_below(100) < 10) {
            first_section += " [[File:" + title_noun + ".jpg|thumb|The " + w.from(kNouns) + "]]";
        }

        std::vector<std::string> citation_ids;
        for (int c = 0; c < n_cit; ++c) {
            std::string rid = "r" + std::to_string(++ref_counter);
            citation_ids.push_back(rid);

            std::string text;
            uint64_t kind = rng.next_below(100);
            if (kind < 4) {
                text = "Short note about the " + w.from(kNouns) + ".";  // TooShort
            } else if (kind < 8) {
                text = non_english_text(w);
            } else if (kind < 20) {
                text = markup_heavy_text(w, claims[static_cast<size_t>(c)]);
            } else if (kind < 30) {
                text = make_reference_text(w, claims[static_cast<size_t>(c)], false,
                                           entity_name);  // weak
            } else {
                text = make_reference_text(w, claims[static_cast<size_t>(c)], true, entity_name);
            }
            refs << Json{{"id", rid},
                         {"url", "https://example.org/" + rid},
                         {"text", text}}
                        .dump()
                 << "\n";
        }

        wiki << Json{{"id", "w" + std::to_string(rec)},
                     {"title", title},
                     {"first_section", first_section},
                     {"citations", citation_ids}}
                    .dump()
             << "\n";
    }

    std::cout << "wrote " << record_count << " records, " << ref_counter << " references to "
              << out_dir << "\n";
    return 0;
}
