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

#include "propsearch/embeddings.hpp"
#include "propsearch/ingest.hpp"

namespace propsearch {

struct IndexEntry {
  std::string id;
  std::string label;
  std::vector<std::string> aliases;  // raw, lowercased only when matching
  std::optional<WordVector> vector;  // absent when every token was OOV
};

/// Property vectors plus the settings they were built with. Entries are
/// sorted by property id (numeric order) and unique.
///
/// Immutable after construction; concurrent readers need no locking.
class PropertyIndex {
 public:
  PropertyIndex() = default;

  /// Validates the entry invariants and throws BuildError when violated.
  PropertyIndex(std::string model_id, std::size_t dim, bool use_description, std::int64_t built_at,
                std::vector<IndexEntry> entries);

  const std::string& model_id() const noexcept { return model_id_; }
  std::size_t dim() const noexcept { return dim_; }
  bool use_description() const noexcept { return use_description_; }
  /// Unix seconds.
  std::int64_t built_at() const noexcept { return built_at_; }

  std::span<const IndexEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::optional<std::size_t> position_of(std::string_view property_id) const;
  const IndexEntry* find(std::string_view property_id) const;

  /// Euclidean norm of entry i's vector (0 when absent).
  double vector_norm(std::size_t i) const { return norms_[i]; }

  /// Bit-exact comparison of all persisted fields.
  friend bool operator==(const PropertyIndex& a, const PropertyIndex& b);

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::string model_id_;
  std::size_t dim_ = 0;
  bool use_description_ = false;
  std::int64_t built_at_ = 0;
  std::vector<IndexEntry> entries_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> positions_;
};

struct BuildReport {
  std::size_t properties = 0;
  std::size_t oov_properties = 0;  // entries stored without a vector
};

/// Tokens that make up a property's vector: its label, followed by its
/// description when `use_description` is set.
std::vector<std::string> property_tokens(const PropertyRecord& record, bool use_description,
                                         const StopwordSet& stopwords);

/// Sums word vectors per property. Input order does not matter. `built_at`
/// defaults to the current time.
PropertyIndex build_index(const EmbeddingModel& model, std::span<const PropertyRecord> properties,
                          bool use_description, const StopwordSet& stopwords,
                          std::optional<std::int64_t> built_at = std::nullopt,
                          BuildReport* report = nullptr);

/// Binary layout (all integers little-endian):
///   "PVIX" u8 version
///   str model_id, u32 dim, u8 use_description, i64 built_at, u32 count
///   count x { str id, str label, u32 n, n x str alias, u8 present,
///             [dim x f32 if present] }
///   u32 CRC-32 of every preceding byte
/// where str = u32 byte length + UTF-8 bytes.
inline constexpr char kIndexMagic[4] = {'P', 'V', 'I', 'X'};
inline constexpr std::uint8_t kIndexVersion = 1;

/// Returns the number of bytes written.
std::size_t save_index(const PropertyIndex& index, std::ostream& sink);

/// Throws FormatError on bad magic or version, CorruptionError (with byte
/// offset) on truncation, checksum mismatch or inconsistent content.
PropertyIndex load_index(std::istream& source);

void save_index_file(const PropertyIndex& index, const std::string& path);
PropertyIndex load_index_file(const std::string& path);

/// Human-readable dump: one line per entry, "id<TAB>label<TAB>v0 v1 v2 v3"
/// with "-" in place of an absent vector.
void export_index_text(const PropertyIndex& index, std::ostream& sink);

}  // namespace propsearch
