#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace propsearch {

/// Dense word or phrase vector. Components are stored as 32-bit floats.
using WordVector = std::vector<float>;

/// Read-only view of a vector row owned by a model or index.
using VectorView = std::span<const float>;

/// Pre-trained word-vector table. Rows keep file order, which for the common
/// distributions is descending corpus frequency.
///
/// Immutable once loaded; safe to share between threads.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;

  /// Builds a model from parallel word/row data. `vectors` must hold
  /// words.size() * dim finite values. Duplicate words keep the first row.
  EmbeddingModel(std::string model_id, std::size_t dim, std::vector<std::string> words,
                 std::vector<float> vectors);

  const std::string& model_id() const noexcept { return model_id_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  /// The max_words cap requested at load time, if any.
  std::optional<std::size_t> vocab_cap() const noexcept { return vocab_cap_; }

  /// Number of duplicate words skipped while loading.
  std::size_t duplicates_skipped() const noexcept { return duplicates_skipped_; }

  const std::vector<std::string>& words() const noexcept { return words_; }
  VectorView row(std::size_t i) const { return {vectors_.data() + i * dim_, dim_}; }

  std::optional<std::size_t> index_of(std::string_view word) const;

  /// Approximate heap footprint of the vector table and vocabulary.
  std::size_t memory_bytes() const noexcept;

 private:
  friend EmbeddingModel load_model(std::istream&, std::optional<std::size_t>, std::string);

  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::string model_id_;
  std::size_t dim_ = 0;
  std::optional<std::size_t> vocab_cap_;
  std::size_t duplicates_skipped_ = 0;
  std::vector<std::string> words_;
  std::vector<float> vectors_;
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> vocab_;
};

/// Parses word2vec text (header "V D") or headerless GloVe text. A first line
/// of exactly two integer tokens is taken as a header. With `max_words`, only
/// the first max_words distinct words are kept.
///
/// Throws FormatError (with line number) on ragged rows or non-numeric
/// components and EmptyModelError when no data rows are present.
EmbeddingModel load_model(std::istream& source, std::optional<std::size_t> max_words = std::nullopt,
                          std::string model_id = {});

/// Opens `path` and loads it; the model id defaults to the file name.
EmbeddingModel load_model_file(const std::string& path,
                               std::optional<std::size_t> max_words = std::nullopt);

/// Writes the model in word2vec text format (header + one row per word).
void write_model(const EmbeddingModel& model, std::ostream& sink);

/// Case-sensitive exact lookup; no subword fallback.
std::optional<VectorView> lookup(const EmbeddingModel& model, std::string_view token);

/// Component-wise sum of the raw vectors of all in-vocabulary tokens.
/// Returns nullopt when none of the tokens is in the vocabulary.
std::optional<WordVector> phrase_vector(const EmbeddingModel& model,
                                        std::span<const std::string> tokens);

double dot(VectorView a, VectorView b);
double norm(VectorView v);

/// Cosine similarity. Defined as 0 when either vector has zero norm.
/// Throws DimensionError on length mismatch.
double cosine(VectorView a, VectorView b);

}  // namespace propsearch
