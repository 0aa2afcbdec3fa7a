#include "cfgval/tfidf.hpp"

#include <cctype>
#include <cmath>
#include <set>

namespace cfgval {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (u < 128 && std::isalnum(u)) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<SparseVector> tfidf_vectors(const std::vector<std::vector<std::string>>& docs) {
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    for (const auto& t : std::set<std::string>(d.begin(), d.end())) ++df[t];
  }
  const double n = static_cast<double>(docs.size());
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    SparseVector v;
    for (const auto& t : d) v[t] += 1.0;
    for (auto& [t, w] : v) w *= std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, w] : a) {
    na += w * w;
    if (auto it = b.find(t); it != b.end()) dot += w * it->second;
  }
  for (const auto& [t, w] : b) nb += w * w;
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace cfgval
