#include "citemetrics/semantics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "citemetrics/csv.hpp"
#include "citemetrics/disruption.hpp"
#include "citemetrics/error.hpp"

namespace citemetrics {

namespace {

std::uint32_t read_u32_le(std::istream& in, bool& ok) {
  unsigned char b[4];
  ok = static_cast<bool>(in.read(reinterpret_cast<char*>(b), 4));
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dim_(dimension) {
  if (dim_ == 0) throw DataError("embedding dimension must be positive");
}

void EmbeddingStore::add(std::string key, std::span<const double> values) {
  if (values.size() != dim_) {
    throw DataError("embedding '" + key + "' has " + std::to_string(values.size()) + " values, expected " +
                    std::to_string(dim_));
  }
  const double n = std::sqrt(dot(values, values));
  if (!(n > 0.0) || !std::isfinite(n)) throw DataError("embedding '" + key + "' is zero or non-finite");
  if (index_.contains(key)) throw DataError("duplicate embedding key '" + key + "'");
  index_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  data_.insert(data_.end(), values.begin(), values.end());
  norms_.push_back(n);
}

bool EmbeddingStore::contains(std::string_view key) const { return index_.contains(std::string(key)); }

std::span<const double> EmbeddingStore::vector(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dim_, dim_};
}

double EmbeddingStore::norm(std::string_view key) const {
  auto it = index_.find(std::string(key));
  return it == index_.end() ? 0.0 : norms_[it->second];
}

EmbeddingStore EmbeddingStore::read_csv(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<EmbeddingStore> store;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(line_no) + ": ";
    if (!store) {
      if (line.rfind("dim=", 0) != 0) throw DataError(where + "expected 'dim=<D>' header");
      try {
        const long d = std::stol(line.substr(4));
        if (d <= 0) throw DataError(where + "dimension must be positive");
        store.emplace(static_cast<std::size_t>(d));
      } catch (const std::logic_error&) {
        throw DataError(where + "bad dimension");
      }
      continue;
    }
    auto cells = split_csv_line(line);
    if (cells.size() != store->dimension() + 1) {
      throw DataError(where + "expected key plus " + std::to_string(store->dimension()) + " values");
    }
    values.clear();
    for (std::size_t i = 1; i < cells.size(); ++i) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cells[i], &used));
        if (used != cells[i].size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw DataError(where + "bad number '" + cells[i] + "'");
      }
    }
    try {
      store->add(cells[0], values);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  if (!store) throw DataError(name + ": empty embedding file");
  return std::move(*store);
}

EmbeddingStore EmbeddingStore::read_binary(std::istream& in, const std::string& name) {
  bool ok = false;
  const std::uint32_t dim = read_u32_le(in, ok);
  if (!ok || dim == 0) throw DataError(name + ": bad binary embedding header");
  EmbeddingStore store(dim);
  std::vector<double> values(dim);
  std::vector<unsigned char> raw(static_cast<std::size_t>(dim) * 4);
  for (std::size_t row = 0;; ++row) {
    const std::uint32_t len = read_u32_le(in, ok);
    if (!ok) {
      if (in.gcount() == 0) break;
      throw DataError(name + ": truncated row header at row " + std::to_string(row));
    }
    std::string key(len, '\0');
    if (!in.read(key.data(), len) || !in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
      throw DataError(name + ": truncated row " + std::to_string(row));
    }
    for (std::uint32_t i = 0; i < dim; ++i) {
      const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) | (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                                 (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                                 (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
      values[i] = std::bit_cast<float>(bits);
    }
    store.add(std::move(key), values);
  }
  return store;
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  char head[4] = {};
  in.read(head, 4);
  const bool is_csv = in.gcount() == 4 && std::memcmp(head, "dim=", 4) == 0;
  in.clear();
  in.seekg(0);
  return is_csv ? read_csv(in, path.string()) : read_binary(in, path.string());
}

void EmbeddingStore::write_csv(std::ostream& out) const {
  out << "dim=" << dim_ << '\n';
  for (std::size_t r = 0; r < keys_.size(); ++r) {
    out << csv_escape(keys_[r]);
    for (std::size_t i = 0; i < dim_; ++i) out << ',' << format_real(data_[r * dim_ + i]);
    out << '\n';
  }
}

void EmbeddingStore::write_binary(std::ostream& out) const {
  write_u32_le(out, static_cast<std::uint32_t>(dim_));
  for (std::size_t r = 0; r < keys_.size(); ++r) {
    write_u32_le(out, static_cast<std::uint32_t>(keys_[r].size()));
    out.write(keys_[r].data(), static_cast<std::streamsize>(keys_[r].size()));
    for (std::size_t i = 0; i < dim_; ++i) {
      write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(data_[r * dim_ + i])));
    }
  }
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw NumericError("cosine: dimension mismatch");
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  if (!(nu > 0.0) || !(nv > 0.0)) throw NumericError("cosine: zero vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

TopicSimilarityRow topic_similarity(const CorpusGraph& graph, PaperIndex focal, const EmbeddingStore& store,
                                    PaperIndex dominant, CentroidMode mode) {
  TopicSimilarityRow row;
  row.focal = focal;
  row.dominant_ref = dominant;
  if (dominant == kNoPaper) {
    row.flags |= kFlagTopicMissing | kFlagTopicRestUndefined;
    return row;
  }
  const auto dom_vec = store.vector(graph.external_id(dominant));
  const auto focal_vec = store.vector(graph.external_id(focal));
  if (dom_vec.empty() || focal_vec.empty()) {
    row.flags |= kFlagTopicMissing;
  } else {
    row.sim_focal_dom = cosine(focal_vec, dom_vec);
  }

  std::vector<double> centroid(store.dimension(), 0.0);
  for (PaperIndex r : graph.references(focal)) {
    if (r == dominant) continue;
    const auto& key = graph.external_id(r);
    const auto v = store.vector(key);
    if (v.empty()) continue;
    const double scale = mode == CentroidMode::kNormalizedMean ? 1.0 / store.norm(key) : 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) centroid[i] += scale * v[i];
    ++row.n_rest;
  }
  bool centroid_zero = true;
  for (double& c : centroid) {
    if (row.n_rest) c /= row.n_rest;
    if (c != 0.0) centroid_zero = false;
  }
  if (dom_vec.empty() || row.n_rest == 0 || centroid_zero) {
    row.flags |= kFlagTopicRestUndefined;
  } else {
    row.sim_dom_rest = cosine(dom_vec, centroid);
  }
  return row;
}

}  // namespace citemetrics
