#include "weakcat/corpus.hpp"

namespace weakcat {

namespace {

const std::vector<std::string> kEnglish = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
    "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
    "between", "both", "but", "by", "can", "cannot", "could", "did", "do", "does",
    "doing", "down", "during", "each", "few", "for", "from", "further", "had",
    "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself",
    "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "same", "she", "should", "so", "some", "such", "than", "that",
    "the", "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
};

const std::vector<std::string> kFrench = {
    "au", "aux", "avec", "ce", "ces", "cet", "cette", "dans", "de", "des", "du",
    "elle", "elles", "en", "et", "eux", "il", "ils", "je", "la", "le", "les",
    "leur", "leurs", "lui", "ma", "mais", "me", "mes", "moi", "mon", "ne", "nos",
    "notre", "nous", "on", "ou", "par", "pas", "pour", "qu", "que", "qui", "sa",
    "se", "ses", "son", "sur", "ta", "te", "tes", "toi", "ton", "tu", "un", "une",
    "vos", "votre", "vous", "y", "cela", "ceci", "celui", "celle", "sans", "sous",
    "plus", "moins", "tout", "toute", "tous", "toutes", "autre", "autres",
    "avoir", "est", "sont", "sera", "fait", "faire", "comme", "aussi", "donc",
    "alors", "si", "entre", "vers", "chez", "apres", "avant", "encore", "deja",
};

const std::vector<std::string> kBlacklist = {
    "buy", "collection", "shop", "sale", "shipping", "free", "www", "com",
    "http", "https", "click", "order", "price", "offer", "online", "store",
};

} // namespace

const std::vector<std::string>& builtin_stopwords(const std::string& language) {
    if (language == "en") return kEnglish;
    if (language == "fr") return kFrench;
    throw Error("no built-in stopword list for language: " + language);
}

const std::vector<std::string>& builtin_blacklist() { return kBlacklist; }

} // namespace weakcat
