#include "refbias/corpus.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace refbias {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::size_t ParallelCorpus::n_cor() const {
  std::size_t count = 0;
  for (const ReferenceSet& e : entries) {
    const std::string key = normalized_key(e.source, policy);
    for (const TokenSequence& ref : e.references) {
      if (normalized_key(ref, policy) == key) {
        ++count;
        break;
      }
    }
  }
  return count;
}

std::vector<TokenSequence> load_sentences(const std::string& path) {
  std::vector<TokenSequence> out;
  for (const std::string& line : read_lines(path)) out.push_back(tokenize(line));
  return out;
}

ParallelCorpus load_corpus(const std::string& source_path,
                           const std::vector<std::string>& reference_paths,
                           const NormalizationPolicy& policy) {
  const std::vector<std::string> sources = read_lines(source_path);
  ParallelCorpus corpus;
  corpus.policy = policy;
  corpus.entries.resize(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i)
    corpus.entries[i].source = tokenize(sources[i]);
  for (const std::string& ref_path : reference_paths) {
    const std::vector<std::string> refs = read_lines(ref_path);
    if (refs.size() != sources.size()) {
      std::ostringstream msg;
      msg << "line count mismatch: " << ref_path << " has " << refs.size()
          << " lines, " << source_path << " has " << sources.size();
      throw CorpusError(msg.str());
    }
    for (std::size_t i = 0; i < refs.size(); ++i)
      corpus.entries[i].references.push_back(tokenize(refs[i]));
  }
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    if (corpus.entries[i].references.empty())
      throw CorpusError("no references supplied for line " + std::to_string(i + 1));
  }
  return corpus;
}

ParallelCorpus load_multi_reference(const std::string& path,
                                    const NormalizationPolicy& policy) {
  ParallelCorpus corpus;
  corpus.policy = policy;
  std::size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    ReferenceSet entry;
    entry.source = tokenize(rec.at("source").get<std::string>());
    for (const auto& r : rec.at("references"))
      entry.references.push_back(tokenize(r.get<std::string>()));
    if (entry.references.empty())
      throw CorpusError(path + ":" + std::to_string(lineno) + ": empty reference list");
    corpus.entries.push_back(std::move(entry));
  }
  return corpus;
}

void save_multi_reference(const ParallelCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write file: " + path);
  for (const ReferenceSet& e : corpus.entries) {
    nlohmann::json rec;
    rec["source"] = e.source.joined();
    auto refs = nlohmann::json::array();
    for (const TokenSequence& r : e.references) refs.push_back(r.joined());
    rec["references"] = std::move(refs);
    out << rec.dump() << '\n';
  }
}

std::vector<KBestList> load_kbest(const std::string& path) {
  std::vector<KBestList> lists;
  std::size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    KBestList kb;
    kb.source = tokenize(rec.at("source").get<std::string>());
    for (const auto& c : rec.at("candidates"))
      kb.candidates.push_back(tokenize(c.get<std::string>()));
    if (kb.candidates.empty())
      throw CorpusError(path + ":" + std::to_string(lineno) + ": empty candidate list");
    lists.push_back(std::move(kb));
  }
  return lists;
}

std::uint64_t file_content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open file: " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace refbias
