#pragma once

#include <array>
#include <string_view>

namespace forge::detail {

// Embedded English stopword list, version "v1". Term-recall scores are only
// comparable when computed under the same version, so this list is frozen;
// additions require a new version string.
inline constexpr std::array<std::string_view, 301> kStopwordsV1 = {
    "a", "able", "about", "above", "across", "after", "again", "against", "ain",
    "all", "almost", "along", "already", "also", "although", "always", "am",
    "among", "an", "and", "another", "any", "anyone", "anything", "anywhere",
    "are", "aren", "around", "as", "at", "back", "be", "became", "because",
    "become", "becomes", "becoming", "been", "before", "behind", "being",
    "below", "beside", "besides", "between", "beyond", "both", "but", "by",
    "came", "can", "cannot", "could", "couldn", "d", "did", "didn", "do",
    "does", "doesn", "doing", "don", "done", "down", "during", "each",
    "either", "else", "elsewhere", "enough", "even", "ever", "every",
    "everyone", "everything", "everywhere", "except", "far", "few", "for",
    "former", "from", "further", "get", "gets", "give", "go", "goes", "got",
    "had", "hadn", "has", "hasn", "have", "haven", "having", "he", "hence",
    "her", "here", "hers", "herself", "him", "himself", "his", "how",
    "however", "i", "if", "in", "indeed", "instead", "into", "is", "isn",
    "it", "its", "itself", "just", "keep", "last", "latter", "least", "less",
    "let", "like", "likely", "ll", "m", "ma", "made", "make", "makes", "many",
    "may", "maybe", "me", "meanwhile", "might", "mightn", "mine", "more",
    "moreover", "most", "mostly", "much", "must", "mustn", "my", "myself",
    "namely", "near", "needn", "neither", "never", "nevertheless", "next",
    "no", "nobody", "none", "nor", "not", "nothing", "now", "nowhere", "o",
    "of", "off", "often", "on", "once", "one", "only", "onto", "or", "other",
    "others", "otherwise", "our", "ours", "ourselves", "out", "over", "own",
    "per", "perhaps", "put", "quite", "rather", "re", "s", "said", "same",
    "say", "says", "see", "seem", "seemed", "seeming", "seems", "several",
    "shall", "shan", "she", "should", "shouldn", "since", "so", "some",
    "somehow", "someone", "something", "sometime", "sometimes", "somewhere",
    "still", "such", "t", "take", "than", "that", "the", "their", "theirs",
    "them", "themselves", "then", "thence", "there", "thereafter", "thereby",
    "therefore", "therein", "these", "they", "this", "those", "though",
    "through", "throughout", "thus", "till", "to", "together", "too",
    "toward", "towards", "twice", "under", "unless", "unlike", "until", "up",
    "upon", "us", "used", "using", "ve", "very", "via", "was", "wasn", "we",
    "well", "were", "weren", "what", "whatever", "when", "whenever", "where",
    "whereas", "wherever", "whether", "which", "while", "who", "whoever",
    "whole", "whom", "whose", "why", "will", "with", "within", "without",
    "won", "would", "wouldn", "y", "yet", "you", "your", "yours", "yourself",
    "yourselves",
};

}  // namespace forge::detail
