#pragma once

// Small TF-IDF toolkit shared by shot ranking and reason clustering.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cfgval {

/// Lowercased maximal runs of ASCII letters and digits.
std::vector<std::string> tokenize(std::string_view text);

using SparseVector = std::map<std::string, double>;

/// Raw term counts weighted by smoothed idf, ln((1+n)/(1+df)) + 1, where n
/// is the number of documents in the corpus.
std::vector<SparseVector> tfidf_vectors(const std::vector<std::vector<std::string>>& docs);

/// Cosine similarity; 0 when either vector is all zeros.
double cosine(const SparseVector& a, const SparseVector& b);

}  // namespace cfgval
