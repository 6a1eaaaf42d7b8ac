#include "mbd/ngram.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "mbd/error.hpp"

namespace mbd {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (c < 0x80 && std::isspace(c)) {
            flush();
        } else if (c < 0x80 && std::ispunct(c)) {
            flush();
            tokens.push_back(std::string(1, static_cast<char>(c)));
        } else {
            // ASCII letters lowercased; multi-byte UTF-8 kept verbatim
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                                       : static_cast<char>(c));
        }
    }
    flush();
    return tokens;
}

namespace {

// N-grams in stream order; tokens joined by a single space.
template <typename Fn>
void for_each_ngram(const std::vector<std::string>& tokens, int n_max, Fn&& fn) {
    for (std::size_t start = 0; start < tokens.size(); ++start) {
        std::string gram;
        for (int n = 1; n <= n_max && start + n <= tokens.size(); ++n) {
            if (n > 1) gram += ' ';
            gram += tokens[start + n - 1];
            fn(gram);
        }
    }
}

} // namespace

NgramVocab build_vocab(const std::vector<std::string>& train_texts, int n_max, int min_count) {
    if (train_texts.empty()) throw ValidationError("build_vocab: no training texts");
    if (n_max < 1) throw ValidationError("build_vocab: n_max must be >= 1");

    std::unordered_map<std::string, int> counts;
    for (const std::string& text : train_texts) {
        const std::vector<std::string> tokens = tokenize(text);
        for_each_ngram(tokens, n_max, [&](const std::string& gram) { ++counts[gram]; });
    }

    NgramVocab vocab;
    vocab.n_max = n_max;
    vocab.min_count = min_count;
    int next_id = 0;
    for (const std::string& text : train_texts) {
        const std::vector<std::string> tokens = tokenize(text);
        for_each_ngram(tokens, n_max, [&](const std::string& gram) {
            if (counts[gram] >= min_count && !vocab.ids.count(gram)) vocab.ids[gram] = next_id++;
        });
    }
    return vocab;
}

FeatureVector featurize(const NgramVocab& vocab, const std::string& text, bool binary) {
    const std::vector<std::string> tokens = tokenize(text);
    std::map<int, double> counts;
    for_each_ngram(tokens, vocab.n_max, [&](const std::string& gram) {
        auto it = vocab.ids.find(gram);
        if (it != vocab.ids.end()) counts[it->second] += 1.0;
    });
    FeatureVector out;
    out.reserve(counts.size());
    for (const auto& [id, count] : counts) out.push_back({id, binary ? 1.0 : count});
    return out;
}

} // namespace mbd
