#include "propsearch/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "propsearch/errors.hpp"

namespace propsearch {

namespace {

// Rows are only pre-reserved up to this many floats without a header hint.
constexpr std::size_t kMaxSpeculativeReserve = std::size_t{1} << 28;

bool is_unsigned_integer(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::string_view trim_line_end(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
    line.remove_suffix(1);
  }
  return line;
}

// Splits on single ASCII spaces. Returns the number of fields written into
// `fields` (capped at fields.size(); the true count is still returned).
std::size_t split_fields(std::string_view line, std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(' ', start);
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields.size();
}

float parse_component(std::string_view text, std::size_t line_no) {
  float value = 0.0f;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    throw FormatError("component out of float range: '" + std::string(text) + "'", line_no);
  }
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw FormatError("non-numeric component '" + std::string(text) + "'", line_no);
  }
  if (!std::isfinite(value)) {
    throw FormatError("non-finite component '" + std::string(text) + "'", line_no);
  }
  return value;
}

}  // namespace

EmbeddingModel::EmbeddingModel(std::string model_id, std::size_t dim,
                               std::vector<std::string> words, std::vector<float> vectors)
    : model_id_(std::move(model_id)), dim_(dim) {
  if (dim == 0) throw DimensionError("model dimensionality must be positive");
  if (vectors.size() != words.size() * dim) {
    throw DimensionError("vector table holds " + std::to_string(vectors.size()) +
                         " values, expected " + std::to_string(words.size() * dim));
  }
  words_.reserve(words.size());
  vectors_.reserve(vectors.size());
  vocab_.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].empty()) throw FormatError("empty vocabulary word at row " + std::to_string(i));
    for (std::size_t j = 0; j < dim; ++j) {
      if (!std::isfinite(vectors[i * dim + j])) {
        throw FormatError("non-finite component in row " + std::to_string(i));
      }
    }
    auto [it, inserted] = vocab_.emplace(words[i], static_cast<std::uint32_t>(words_.size()));
    if (!inserted) {
      ++duplicates_skipped_;
      continue;
    }
    words_.push_back(std::move(words[i]));
    vectors_.insert(vectors_.end(), vectors.begin() + static_cast<std::ptrdiff_t>(i * dim),
                    vectors.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
  }
}

std::optional<std::size_t> EmbeddingModel::index_of(std::string_view word) const {
  auto it = vocab_.find(word);
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingModel::memory_bytes() const noexcept {
  std::size_t bytes = vectors_.capacity() * sizeof(float);
  for (const auto& w : words_) bytes += sizeof(std::string) + (w.size() > 15 ? w.capacity() : 0);
  // Node-based map: key copy, value, next pointer, cached hash, bucket slot.
  bytes += vocab_.size() * (sizeof(std::string) + 3 * sizeof(void*)) +
           vocab_.bucket_count() * sizeof(void*);
  return bytes;
}

EmbeddingModel load_model(std::istream& source, std::optional<std::size_t> max_words,
                          std::string model_id) {
  if (max_words && *max_words == 0) throw ArgumentError("max_words must be positive");

  EmbeddingModel model;
  model.model_id_ = std::move(model_id);
  model.vocab_cap_ = max_words;

  std::string line;
  std::vector<std::string_view> fields;
  std::vector<float> row;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool first_line = true;
  const std::size_t cap = max_words.value_or(std::numeric_limits<std::size_t>::max());

  while (model.words_.size() < cap && std::getline(source, line)) {
    ++line_no;
    std::string_view text = trim_line_end(line);
    if (text.empty()) continue;
    split_fields(text, fields);

    if (first_line) {
      first_line = false;
      if (fields.size() == 2 && is_unsigned_integer(fields[0]) && is_unsigned_integer(fields[1])) {
        std::size_t declared_rows = 0;
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), declared_rows);
        std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), dim);
        if (dim == 0) throw FormatError("header declares zero dimensions", line_no);
        const std::size_t rows = std::min(declared_rows, cap);
        if (rows * dim <= kMaxSpeculativeReserve) {
          model.vectors_.reserve(rows * dim);
          model.words_.reserve(rows);
          model.vocab_.reserve(rows);
        }
        continue;
      }
    }

    const std::string_view word = fields[0];
    if (word.empty()) throw FormatError("empty word", line_no);
    const std::size_t width = fields.size() - 1;
    if (dim == 0) {
      if (width == 0) throw FormatError("row has no vector components", line_no);
      dim = width;
      if (max_words && *max_words * dim <= kMaxSpeculativeReserve) {
        model.vectors_.reserve(*max_words * dim);
        model.words_.reserve(*max_words);
        model.vocab_.reserve(*max_words);
      }
    }
    if (width != dim) {
      throw FormatError("row has " + std::to_string(width) + " components, expected " +
                            std::to_string(dim),
                        line_no);
    }

    row.clear();
    for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_component(fields[i], line_no));

    auto [it, inserted] =
        model.vocab_.emplace(std::string(word), static_cast<std::uint32_t>(model.words_.size()));
    if (!inserted) {
      ++model.duplicates_skipped_;
      continue;
    }
    model.words_.emplace_back(word);
    model.vectors_.insert(model.vectors_.end(), row.begin(), row.end());
  }
  if (source.bad()) throw IoError("read failure while loading model");
  if (model.words_.empty()) throw EmptyModelError("model source contains no data rows");

  model.dim_ = dim;
  model.vectors_.shrink_to_fit();
  return model;
}

EmbeddingModel load_model_file(const std::string& path, std::optional<std::size_t> max_words) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  return load_model(in, max_words, std::filesystem::path(path).filename().string());
}

void write_model(const EmbeddingModel& model, std::ostream& sink) {
  sink << model.size() << ' ' << model.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < model.size(); ++i) {
    sink << model.words()[i];
    for (float v : model.row(i)) {
      // Shortest representation that parses back to the same float.
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      sink << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    sink << '\n';
  }
}

std::optional<VectorView> lookup(const EmbeddingModel& model, std::string_view token) {
  auto idx = model.index_of(token);
  if (!idx) return std::nullopt;
  return model.row(*idx);
}

std::optional<WordVector> phrase_vector(const EmbeddingModel& model,
                                        std::span<const std::string> tokens) {
  std::vector<double> sum(model.dim(), 0.0);
  bool found = false;
  for (const auto& token : tokens) {
    auto row = lookup(model, token);
    if (!row) continue;
    found = true;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*row)[i];
  }
  if (!found) return std::nullopt;
  return WordVector(sum.begin(), sum.end());
}

double dot(VectorView a, VectorView b) {
  if (a.size() != b.size()) {
    throw DimensionError("vector lengths differ: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

double norm(VectorView v) { return std::sqrt(dot(v, v)); }

double cosine(VectorView a, VectorView b) {
  const double d = dot(a, b);
  const double denom = norm(a) * norm(b);
  if (denom == 0.0) return 0.0;
  return d / denom;
}

}  // namespace propsearch
