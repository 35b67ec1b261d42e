// Copyright 2026 The ADON Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADON_AGENT_RETRIEVAL_HPP_
#define ADON_AGENT_RETRIEVAL_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "adon/core/error.hpp"

namespace adon::agent {

class EmptyStore : public Error {
 public:
  using Error::Error;
};

struct Document {
  std::string id;
  std::string title;
  std::string body;
};

struct RetrievedChunk {
  std::string doc_id;
  std::size_t begin = 0;  // byte range in the document body
  std::size_t end = 0;
  double score = 0.0;
  std::string text;
};

inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) && u < 128) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// TF-IDF index over whole documents: raw counts, smoothed idf
// ln((1 + N) / (1 + df)) + 1, cosine similarity.
class DocumentStore {
 public:
  void add(Document doc) {
    docs_.push_back(std::move(doc));
    reindex();
  }

  // Every *.txt file; id is the file stem, title the first line.
  static DocumentStore load_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ValidationError("document directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    DocumentStore store;
    for (const auto& f : files) {
      std::ifstream in(f);
      std::stringstream ss;
      ss << in.rdbuf();
      std::string text = ss.str();
      const auto nl = text.find('\n');
      store.docs_.push_back({f.stem().string(), text.substr(0, nl), std::move(text)});
    }
    store.reindex();
    return store;
  }

  std::size_t size() const { return docs_.size(); }
  const std::vector<Document>& documents() const { return docs_; }

  std::vector<RetrievedChunk> retrieve(const std::string& query, std::size_t k = 3) const {
    if (docs_.empty()) throw EmptyStore("document store is empty");
    std::map<std::string, double> q;
    for (const auto& t : tokenize(query)) q[t] += 1.0;
    double qn = 0.0;
    for (auto& [t, w] : q) {
      w *= idf(t);
      qn += w * w;
    }
    qn = std::sqrt(qn);
    std::vector<RetrievedChunk> hits;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      double dot = 0.0;
      for (const auto& [t, w] : q) {
        const auto it = weights_[d].find(t);
        if (it != weights_[d].end()) dot += w * it->second;
      }
      if (dot <= 0.0) continue;
      hits.push_back({docs_[d].id, 0, docs_[d].body.size(), dot / (qn * norms_[d]), docs_[d].body});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievedChunk& a, const RetrievedChunk& b) {
      return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
  }

 private:
  double idf(const std::string& term) const {
    const auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(docs_.size())) / (1.0 + df)) + 1.0;
  }

  void reindex() {
    std::vector<std::map<std::string, double>> counts(docs_.size());
    df_.clear();
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      for (const auto& t : tokenize(docs_[d].body)) counts[d][t] += 1.0;
      for (const auto& [t, c] : counts[d]) ++df_[t];
    }
    weights_.assign(docs_.size(), {});
    norms_.assign(docs_.size(), 0.0);
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      double n = 0.0;
      for (const auto& [t, c] : counts[d]) {
        const double w = c * idf(t);
        weights_[d][t] = w;
        n += w * w;
      }
      norms_[d] = std::sqrt(n);
    }
  }

  std::vector<Document> docs_;
  std::map<std::string, std::size_t> df_;
  std::vector<std::map<std::string, double>> weights_;
  std::vector<double> norms_;
};

}  // namespace adon::agent

#endif  // ADON_AGENT_RETRIEVAL_HPP_
