#ifndef MBD_NGRAM_HPP
#define MBD_NGRAM_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "mbd/corpus.hpp"
#include "mbd/linear.hpp"

namespace mbd {

// Lowercased tokens; punctuation characters become their own tokens.
std::vector<std::string> tokenize(const std::string& text);

// Word n-grams (n = 1..n_max) with ids assigned densely in first-occurrence
// order. Built from training texts only.
struct NgramVocab {
    std::unordered_map<std::string, int> ids;
    int n_max = 3;
    int min_count = 2;

    int size() const { return static_cast<int>(ids.size()); }
};

NgramVocab build_vocab(const std::vector<std::string>& train_texts, int n_max = 3,
                       int min_count = 2);

// Raw counts of in-vocabulary n-grams; unknown n-grams are ignored.
// With binary = true, presence instead of counts.
FeatureVector featurize(const NgramVocab& vocab, const std::string& text, bool binary = false);

// The all-bias majority baseline.
struct MajorityBaseline {
    Label predict() const { return Label::Bias; }
};

} // namespace mbd

#endif
